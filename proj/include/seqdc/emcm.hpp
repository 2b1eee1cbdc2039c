#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "seqdc/classical.hpp"
#include "seqdc/combinatorics.hpp"
#include "seqdc/sequence.hpp"

namespace seqdc {

// Probability that a d-state one-way cycle model with loop probability
// 1 - d/L emits (0,...,0,1) of length L:
//   C(L-1, d-1) * (1 - d/L)^(L-d) * (d/L)^d,  with 0^0 = 1 when d == L.
inline double f_ow(int L, int d) {
  if (d < 1 || d > L) throw std::invalid_argument("f_ow: need 1 <= d <= L");
  if (d == L) return 1.0;
  const double r = static_cast<double>(d) / static_cast<double>(L);
  if (L <= 64) {
    const double binom = static_cast<double>(binomial_exact(L - 1, d - 1));
    return binom * std::pow(1.0 - r, L - d) * std::pow(r, d);
  }
  const double logbinom = std::lgamma(static_cast<double>(L)) -
                          std::lgamma(static_cast<double>(d)) -
                          std::lgamma(static_cast<double>(L - d + 1));
  return std::exp(logbinom + (L - d) * std::log1p(-r) + d * std::log(r));
}

// Cycle model with n blocks of k probabilistic states, t trailing
// deterministic states and initial state z inside the first block.  The
// probabilistic core behaves like a reduced one-way model on
// L' = (L - t + z) / k steps and n emitting blocks.
struct EmcmParams {
  int L = 0;  // target sequence length
  int n = 0;  // probabilistic blocks
  int k = 1;  // states per block
  int t = 0;  // trailing deterministic states
  int z = 0;  // initial offset inside the first block
  double q = 0.0;  // block loop-back probability

  int dimension() const { return n * k + t; }
  int reduced_length() const { return (L - t + z) / k; }

  void validate() const {
    if (n < 1 || k < 1 || t < 0 || z < 0 || z >= k)
      throw std::invalid_argument("EmcmParams: need n,k >= 1, 0 <= z < k, t >= 0");
    if (q < 0.0 || q >= 1.0)
      throw std::invalid_argument("EmcmParams: need 0 <= q < 1");
    if (L < dimension())
      throw std::invalid_argument("EmcmParams: L must be >= n*k + t");
    if ((L - t + z) % k != 0)
      throw std::invalid_argument("EmcmParams: L - t + z must be divisible by k");
    if (reduced_length() < n)
      throw std::invalid_argument("EmcmParams: reduced length below block count");
  }
};

struct EmcmOptimum {
  double probability = 0.0;
  EmcmParams params;
};

// Best probability of emitting the one-tick sequence of length L with d
// states, over all block size / trailing tail splits.  For each k the tail
// length t = d mod k and the offset z are forced; ties prefer the smallest t,
// then the smallest k.
inline EmcmOptimum emcm_probability(int L, int d) {
  if (d < 1 || d >= L)
    throw std::invalid_argument("emcm_probability: need 1 <= d < L");
  bool have = false;
  EmcmOptimum best;
  for (int k = 1; k <= d; ++k) {
    const int n = d / k;
    const int t = d - n * k;
    const int z = (k - (L - t) % k) % k;
    const int Lr = (L - t + z) / k;
    if (n < 1 || Lr < n) continue;
    const double p = f_ow(Lr, n);
    EmcmParams params{L, n, k, t, z, 1.0 - static_cast<double>(n) / Lr};
    const bool better =
        !have || p > best.probability ||
        (p == best.probability &&
         (t < best.params.t || (t == best.params.t && k < best.params.k)));
    if (better) {
      best = {p, params};
      have = true;
    }
  }
  if (!have) throw std::logic_error("emcm_probability: no candidate");
  return best;
}

// Materialises the transition matrices for EmcmParams.  States are laid out
// as n blocks of k states followed by t deterministic states; each block
// either loops back to its first state (probability q, emitting 0) or hands
// over to the next state.  The final state emits 1 back to state 0.
inline ClassicalModel build_emcm(const EmcmParams& p) {
  p.validate();
  const int d = p.dimension();
  ClassicalModel m{d, Eigen::MatrixXd::Zero(d, d), Eigen::MatrixXd::Zero(d, d),
                   point_mass(d, p.z)};
  for (int b = 0; b < p.n; ++b) {
    const int first = b * p.k;
    const int last = first + p.k - 1;
    for (int s = first; s < last; ++s) m.T0(s, s + 1) = 1.0;
    m.T0(last, first) = p.q;
    if (last == d - 1)
      m.T1(last, 0) = 1.0 - p.q;
    else
      m.T0(last, last + 1) = 1.0 - p.q;
  }
  for (int s = p.n * p.k; s < d - 1; ++s) m.T0(s, s + 1) = 1.0;
  if (p.t > 0) m.T1(d - 1, 0) = 1.0;
  return m;
}

// Blocks of possibly different sizes with an independent loop probability per
// block and no deterministic tail.
struct GmcmSignature {
  std::vector<int> block_sizes;
  std::vector<double> cycle_probs;

  int dimension() const {
    int d = 0;
    for (int k : block_sizes) d += k;
    return d;
  }

  void validate() const {
    if (block_sizes.empty())
      throw std::invalid_argument("GmcmSignature: need at least one block");
    if (cycle_probs.size() != block_sizes.size())
      throw std::invalid_argument("GmcmSignature: one cycle probability per block");
    for (int k : block_sizes)
      if (k < 1) throw std::invalid_argument("GmcmSignature: block sizes must be >= 1");
    for (double q : cycle_probs)
      if (!(q >= 0.0 && q < 1.0))
        throw std::invalid_argument("GmcmSignature: need 0 <= q < 1");
  }
};

// start_state picks the initial state inside the first block.
inline ClassicalModel build_gmcm(const GmcmSignature& sig, int start_state = 0) {
  sig.validate();
  if (start_state < 0 || start_state >= sig.block_sizes.front())
    throw std::invalid_argument("build_gmcm: start state outside first block");
  const int d = sig.dimension();
  ClassicalModel m{d, Eigen::MatrixXd::Zero(d, d), Eigen::MatrixXd::Zero(d, d),
                   point_mass(d, start_state)};
  int first = 0;
  for (std::size_t b = 0; b < sig.block_sizes.size(); ++b) {
    const int last = first + sig.block_sizes[b] - 1;
    const double q = sig.cycle_probs[b];
    for (int s = first; s < last; ++s) m.T0(s, s + 1) = 1.0;
    m.T0(last, first) = q;
    if (last == d - 1)
      m.T1(last, 0) = 1.0 - q;
    else
      m.T0(last, last + 1) = 1.0 - q;
    first = last + 1;
  }
  return m;
}

// Conjectured ceiling on the probability of any length-L sequence from a
// d-state model: the one-tick optimum at the sequence's minimal state count.
inline double conjectured_bound_for_dc(int dc, int d) {
  return emcm_probability(dc, d).probability;
}

inline double conjectured_bound(const BinarySequence& seq, int d) {
  const int dc = dc_and_patterns(seq).dc;
  if (d < 1 || d >= dc)
    throw std::invalid_argument("conjectured_bound: need 1 <= d < dc");
  return conjectured_bound_for_dc(dc, d);
}

}  // namespace seqdc
