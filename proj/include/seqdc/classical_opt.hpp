#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "seqdc/adam.hpp"
#include "seqdc/classical.hpp"

namespace seqdc {

// Squares the free matrices entrywise and divides each row by the total mass
// of that row across both matrices, producing a row-stochastic pair.  A row
// that is identically zero in both matrices has no valid normalisation.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> normalize_classical(
    const Eigen::MatrixXd& B0, const Eigen::MatrixXd& B1) {
  if (B0.rows() != B0.cols() || B1.rows() != B0.rows() || B1.cols() != B0.cols())
    throw std::invalid_argument("normalize_classical: need two square matrices of equal size");
  const int d = static_cast<int>(B0.rows());
  Eigen::MatrixXd S0 = B0.cwiseProduct(B0);
  Eigen::MatrixXd S1 = B1.cwiseProduct(B1);
  for (int i = 0; i < d; ++i) {
    const double mass = S0.row(i).sum() + S1.row(i).sum();
    if (mass == 0.0)
      throw std::domain_error("normalize_classical: all-zero row " + std::to_string(i));
    S0.row(i) /= mass;
    S1.row(i) /= mass;
  }
  return {std::move(S0), std::move(S1)};
}

namespace detail {

// Flat layout of the free parameters: B0 row-major, then B1 row-major.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> unpack_classical(
    const std::vector<double>& x, int d) {
  const std::size_t n = static_cast<std::size_t>(d) * d;
  if (x.size() != 2 * n)
    throw std::invalid_argument("unpack_classical: wrong parameter count");
  Eigen::MatrixXd B0(d, d), B1(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      B0(i, j) = x[static_cast<std::size_t>(i) * d + j];
      B1(i, j) = x[n + static_cast<std::size_t>(i) * d + j];
    }
  return {std::move(B0), std::move(B1)};
}

inline std::vector<double> pack_classical(const Eigen::MatrixXd& B0,
                                          const Eigen::MatrixXd& B1) {
  const int d = static_cast<int>(B0.rows());
  const std::size_t n = static_cast<std::size_t>(d) * d;
  std::vector<double> x(2 * n);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      x[static_cast<std::size_t>(i) * d + j] = B0(i, j);
      x[n + static_cast<std::size_t>(i) * d + j] = B1(i, j);
    }
  return x;
}

}  // namespace detail

// Exact gradient of the sequence probability with respect to the free
// matrices, with the start fixed to state 0.  With row masses
// S_i = sum_l (B0^2 + B1^2)_il and T_a the normalised matrices,
//   dp/dB_a(i,j) = 2 B_a(i,j) / S_i * (G_a(i,j) - R_i),
// where G_a accumulates prefix/suffix products over the positions emitting a
// and R_i = sum_b sum_l G_b(i,l) T_b(i,l) collects the row-coupling from the
// shared normalisation.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> analytic_classical_gradient(
    const BinarySequence& seq, const Eigen::MatrixXd& B0,
    const Eigen::MatrixXd& B1) {
  const int d = static_cast<int>(B0.rows());
  if (B0.cols() != d || B1.rows() != d || B1.cols() != d)
    throw std::invalid_argument("analytic_classical_gradient: need square matrices of equal size");
  const int L = seq.length();

  Eigen::VectorXd S(d);
  for (int i = 0; i < d; ++i)
    S(i) = B0.row(i).squaredNorm() + B1.row(i).squaredNorm();
  for (int i = 0; i < d; ++i)
    if (S(i) == 0.0)
      throw std::domain_error("analytic_classical_gradient: all-zero row");
  Eigen::MatrixXd T0 = B0.cwiseProduct(B0), T1 = B1.cwiseProduct(B1);
  T0.array().colwise() /= S.array();
  T1.array().colwise() /= S.array();

  std::vector<Eigen::RowVectorXd> prefix(static_cast<std::size_t>(L) + 1);
  prefix[0] = Eigen::RowVectorXd::Zero(d);
  prefix[0](0) = 1.0;
  for (int m = 1; m <= L; ++m)
    prefix[static_cast<std::size_t>(m)] =
        prefix[static_cast<std::size_t>(m - 1)] * (seq[m - 1] == 0 ? T0 : T1);
  std::vector<Eigen::VectorXd> suffix(static_cast<std::size_t>(L) + 2);
  suffix[static_cast<std::size_t>(L) + 1] = Eigen::VectorXd::Ones(d);
  for (int m = L; m >= 1; --m)
    suffix[static_cast<std::size_t>(m)] =
        (seq[m - 1] == 0 ? T0 : T1) * suffix[static_cast<std::size_t>(m) + 1];

  Eigen::MatrixXd G0 = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd G1 = Eigen::MatrixXd::Zero(d, d);
  for (int m = 1; m <= L; ++m) {
    auto& G = (seq[m - 1] == 0) ? G0 : G1;
    G.noalias() += prefix[static_cast<std::size_t>(m - 1)].transpose() *
                   suffix[static_cast<std::size_t>(m) + 1].transpose();
  }

  Eigen::VectorXd R = (G0.cwiseProduct(T0) + G1.cwiseProduct(T1)).rowwise().sum();
  Eigen::MatrixXd D0(d, d), D1(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      D0(i, j) = 2.0 * B0(i, j) / S(i) * (G0(i, j) - R(i));
      D1(i, j) = 2.0 * B1(i, j) / S(i) * (G1(i, j) - R(i));
    }
  return {std::move(D0), std::move(D1)};
}

struct ClassicalOptResult {
  ClassicalModel model;
  double probability = 0.0;
  OptimizationOutcome outcome;
};

// Maximises the probability of seq over d-state models with the start fixed
// to state 0.  Restart 0 draws its free matrices uniformly from [-1, 1];
// later restarts use the exponent cycle from adam_maximize.  The analytic
// gradient drives the ascent.
inline ClassicalOptResult optimize_classical(
    const BinarySequence& seq, int d,
    const AdamConfig& config = AdamConfig::classical_defaults()) {
  if (d < 1) throw std::invalid_argument("optimize_classical: d must be >= 1");
  config.validate();

  Objective objective = [&seq, d](const std::vector<double>& x) -> double {
    try {
      auto [B0, B1] = detail::unpack_classical(x, d);
      auto [T0, T1] = normalize_classical(B0, B1);
      ClassicalModel m{d, std::move(T0), std::move(T1), point_mass(d, 0)};
      return sequence_probability(m, seq);
    } catch (const std::domain_error&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  GradientFn gradient = [&seq, d](const std::vector<double>& x) {
    try {
      auto [B0, B1] = detail::unpack_classical(x, d);
      auto [D0, D1] = analytic_classical_gradient(seq, B0, B1);
      return detail::pack_classical(D0, D1);
    } catch (const std::domain_error&) {
      return std::vector<double>(x.size(),
                                 std::numeric_limits<double>::quiet_NaN());
    }
  };

  std::mt19937_64 rng(derive_seed(config.rng_seed, 0));
  const std::vector<double> init =
      uniform_symmetric(2 * static_cast<std::size_t>(d) * d, rng);
  OptimizationOutcome outcome = adam_maximize(objective, gradient, init, config);

  auto [B0, B1] = detail::unpack_classical(outcome.best_params, d);
  auto [T0, T1] = normalize_classical(B0, B1);
  ClassicalModel model{d, std::move(T0), std::move(T1), point_mass(d, 0)};
  const double p = sequence_probability(model, seq);
  return {std::move(model), p, std::move(outcome)};
}

}  // namespace seqdc
