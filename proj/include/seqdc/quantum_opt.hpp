#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "seqdc/adam.hpp"
#include "seqdc/quantum.hpp"

namespace seqdc {

namespace detail {

// Flat layout: outcome-major, then operator index, then row-major entries
// with interleaved real and imaginary parts.
inline std::array<std::vector<CMatrix>, 2> unpack_kraus(
    const std::vector<double>& x, int d, int n_kraus) {
  const std::size_t per_matrix = 2 * static_cast<std::size_t>(d) * d;
  if (x.size() != 2 * static_cast<std::size_t>(n_kraus) * per_matrix)
    throw std::invalid_argument("unpack_kraus: wrong parameter count");
  std::array<std::vector<CMatrix>, 2> B;
  std::size_t pos = 0;
  for (int a = 0; a < 2; ++a) {
    B[a].reserve(static_cast<std::size_t>(n_kraus));
    for (int i = 0; i < n_kraus; ++i) {
      CMatrix M(d, d);
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) {
          M(r, c) = std::complex<double>(x[pos], x[pos + 1]);
          pos += 2;
        }
      B[a].push_back(std::move(M));
    }
  }
  return B;
}

}  // namespace detail

struct QuantumOptResult {
  QuantumModel model;
  double probability = 0.0;
  OptimizationOutcome outcome;
};

// Maximises the probability of seq over d-level models with n_kraus operators
// per outcome, the state fixed to the ground level and the free family scaled
// through normalize_kraus.  Gradients come from central finite differences.
inline QuantumOptResult optimize_quantum(
    const BinarySequence& seq, int d, int n_kraus,
    const AdamConfig& config = AdamConfig::quantum_defaults()) {
  if (d < 1) throw std::invalid_argument("optimize_quantum: d must be >= 1");
  if (n_kraus < 1)
    throw std::invalid_argument("optimize_quantum: n_kraus must be >= 1");
  config.validate();

  Objective objective = [&seq, d, n_kraus](const std::vector<double>& x) -> double {
    try {
      QuantumModel m{d, normalize_kraus(detail::unpack_kraus(x, d, n_kraus)),
                     ground_state_density(d)};
      return quantum_sequence_probability(m, seq);
    } catch (const std::domain_error&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };

  std::mt19937_64 rng(derive_seed(config.rng_seed, 0));
  const std::vector<double> init = uniform_symmetric(
      4 * static_cast<std::size_t>(n_kraus) * d * d, rng);
  OptimizationOutcome outcome = adam_maximize(objective, nullptr, init, config);

  QuantumModel model{d,
                     normalize_kraus(detail::unpack_kraus(outcome.best_params, d, n_kraus)),
                     ground_state_density(d)};
  const double p = quantum_sequence_probability(model, seq);
  return {std::move(model), p, std::move(outcome)};
}

struct ThetaScanResult {
  double theta_best = 0.0;
  double p_best = 0.0;
  double q = 0.0;
  std::vector<std::pair<double, double>> curve;  // (theta, probability)
};

// Sweeps the rotation angle over (0, 2 pi] with q = 1/(d+1), then refines the
// best grid cell by golden-section search down to 1e-10 in theta.
inline ThetaScanResult theta_scan(int d, int grid_points) {
  if (d < 2) throw std::invalid_argument("theta_scan: d must be >= 2");
  if (grid_points < 10 * d)
    throw std::invalid_argument("theta_scan: need grid_points >= 10 * d");
  const double q = 1.0 / (d + 1);
  auto eval = [d, q](double theta) {
    return quantum_one_way_probability({d, theta, q});
  };
  constexpr double two_pi = 2.0 * std::numbers::pi;
  ThetaScanResult out;
  out.q = q;
  out.curve.reserve(static_cast<std::size_t>(grid_points));
  int best_j = 1;
  for (int j = 1; j <= grid_points; ++j) {
    const double theta = two_pi * j / grid_points;
    const double p = eval(theta);
    out.curve.emplace_back(theta, p);
    if (p > out.p_best) {
      out.p_best = p;
      out.theta_best = theta;
      best_j = j;
    }
  }
  double lo = two_pi * (best_j - 1) / grid_points;
  double hi = two_pi * std::min(best_j + 1, grid_points) / grid_points;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - inv_phi * (hi - lo), b = lo + inv_phi * (hi - lo);
  double fa = eval(a), fb = eval(b);
  while (hi - lo > 1e-10) {
    if (fa < fb) {
      lo = a;
      a = b;
      fa = fb;
      b = lo + inv_phi * (hi - lo);
      fb = eval(b);
    } else {
      hi = b;
      b = a;
      fb = fa;
      a = hi - inv_phi * (hi - lo);
      fa = eval(a);
    }
  }
  const double refined = 0.5 * (lo + hi);
  const double p_refined = eval(refined);
  if (p_refined > out.p_best) {
    out.p_best = p_refined;
    out.theta_best = refined;
  }
  return out;
}

}  // namespace seqdc
