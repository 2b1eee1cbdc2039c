#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "seqdc/sequence.hpp"

namespace seqdc {

using CMatrix = Eigen::MatrixXcd;

// Measurement model with a Kraus family per outcome acting on a d-level
// system.  The combined family satisfies sum_a sum_i K†K = 1 for a valid
// instrument.
struct QuantumModel {
  int d = 0;
  std::array<std::vector<CMatrix>, 2> kraus;
  CMatrix rho;

  void validate(double kraus_tol = 1e-9, double rho_tol = 1e-9) const {
    if (d < 1) throw std::invalid_argument("QuantumModel: d must be >= 1");
    CMatrix sum = CMatrix::Zero(d, d);
    for (const auto& family : kraus) {
      if (family.empty())
        throw std::invalid_argument("QuantumModel: each outcome needs at least one operator");
      for (const auto& K : family) {
        if (K.rows() != d || K.cols() != d)
          throw std::invalid_argument("QuantumModel: operators must be d x d");
        sum += K.adjoint() * K;
      }
    }
    if ((sum - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff() > kraus_tol)
      throw std::invalid_argument("QuantumModel: Kraus completeness violated");
    if (rho.rows() != d || rho.cols() != d)
      throw std::invalid_argument("QuantumModel: state must be d x d");
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > rho_tol)
      throw std::invalid_argument("QuantumModel: state not Hermitian");
    if (std::abs(rho.trace().real() - 1.0) > rho_tol ||
        std::abs(rho.trace().imag()) > rho_tol)
      throw std::invalid_argument("QuantumModel: state trace must be 1");
  }
};

inline CMatrix ground_state_density(int d) {
  if (d < 1) throw std::invalid_argument("ground_state_density: d must be >= 1");
  CMatrix rho = CMatrix::Zero(d, d);
  rho(0, 0) = 1.0;
  return rho;
}

// Probability of the outcome string via backward accumulation of the effect:
// E_L+1 = 1, E_m = sum_i K†(a_m) E_m+1 K(a_m), p = tr(rho E_1).
inline double quantum_sequence_probability(const QuantumModel& m,
                                           const BinarySequence& seq) {
  if (m.d < 1 || m.rho.rows() != m.d || m.rho.cols() != m.d)
    throw std::invalid_argument("quantum_sequence_probability: inconsistent model");
  for (const auto& family : m.kraus)
    for (const auto& K : family)
      if (K.rows() != m.d || K.cols() != m.d)
        throw std::invalid_argument("quantum_sequence_probability: operator dimension mismatch");
  CMatrix E = CMatrix::Identity(m.d, m.d);
  for (int j = seq.length() - 1; j >= 0; --j) {
    const auto& family = m.kraus[seq[j]];
    CMatrix next = CMatrix::Zero(m.d, m.d);
    for (const auto& K : family) next.noalias() += K.adjoint() * E * K;
    E = std::move(next);
  }
  const std::complex<double> p = (m.rho * E).trace();
  if (std::abs(p.imag()) > 1e-9)
    throw std::domain_error("quantum_sequence_probability: non-real trace");
  double real = p.real();
  if (real < 0.0 && real > -1e-9) real = 0.0;
  return real;
}

// Scales a free Kraus family into a valid one: with E = sum B†B, divide every
// operator by sqrt of the largest eigenvalue of E.  The leftover weight
// 1 - E/lambda_max is the mass the optimiser leaves on a discarded outcome,
// so the resulting probabilities are achievable and sub-normalised.
inline std::array<std::vector<CMatrix>, 2> normalize_kraus(
    const std::array<std::vector<CMatrix>, 2>& B) {
  int d = -1;
  for (const auto& family : B)
    for (const auto& M : family) {
      if (d < 0) d = static_cast<int>(M.rows());
      if (M.rows() != d || M.cols() != d)
        throw std::invalid_argument("normalize_kraus: operators must share one square size");
    }
  if (d < 1) throw std::invalid_argument("normalize_kraus: empty family");
  CMatrix E = CMatrix::Zero(d, d);
  for (const auto& family : B)
    for (const auto& M : family) E.noalias() += M.adjoint() * M;
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(E, Eigen::EigenvaluesOnly);
  const double lambda_max = solver.eigenvalues().maxCoeff();
  if (!(lambda_max > 0.0))
    throw std::domain_error("normalize_kraus: all-zero family");
  const double scale = 1.0 / std::sqrt(lambda_max);
  std::array<std::vector<CMatrix>, 2> K = B;
  for (auto& family : K)
    for (auto& M : family) M *= scale;
  return K;
}

// [F]_jk = e^(2 pi i j k / d) / sqrt(d).  The exponent is reduced mod d
// before evaluating, which keeps large-d entries exact to rounding.
inline CMatrix fourier_matrix(int d) {
  if (d < 1) throw std::invalid_argument("fourier_matrix: d must be >= 1");
  CMatrix F(d, d);
  const double norm = 1.0 / std::sqrt(static_cast<double>(d));
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k) {
      const long long r = (static_cast<long long>(j) * k) % d;
      F(j, k) = std::polar(norm, 2.0 * std::numbers::pi * r / d);
    }
  return F;
}

// U = F diag(e^(-i k theta)) F†: simultaneous phase rotation of the Fourier
// modes.
inline CMatrix fourier_unitary(int d, double theta) {
  const CMatrix F = fourier_matrix(d);
  Eigen::VectorXcd phases(d);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (int k = 0; k < d; ++k)
    phases(k) = std::polar(1.0, -std::fmod(k * theta, two_pi));
  return F * phases.asDiagonal() * F.adjoint();
}

// Rotation angle that maximises the one-tick probability asymptotically.
inline double theta_star(int d) {
  if (d < 2) throw std::invalid_argument("theta_star: d must be >= 2");
  return (2.0 * std::numbers::pi / d) * (1.0 - 1.0 / d);
}

struct FourierOneWayParams {
  int d = 2;
  double theta0 = 0.0;
  double q = 0.0;  // weight kept on the last level after outcome 0

  void validate() const {
    if (d < 2) throw std::invalid_argument("FourierOneWayParams: d must be >= 2");
    if (!(q >= 0.0 && q < 1.0))
      throw std::invalid_argument("FourierOneWayParams: need 0 <= q < 1");
  }
};

// One-tick probability of the rotation model: outcome 0 applies
// K0 = U(theta0) diag(1,...,1,sqrt(q)), outcome 1 projects the damped level.
// p = (1 - q) |<d-1| K0^d |0>|^2.
inline double quantum_one_way_probability(const FourierOneWayParams& params) {
  params.validate();
  const int d = params.d;
  const CMatrix U = fourier_unitary(d, params.theta0);
  const double damp = std::sqrt(params.q);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(d);
  v(0) = 1.0;
  for (int step = 0; step < d; ++step) {
    v(d - 1) *= damp;
    v = (U * v).eval();
  }
  return (1.0 - params.q) * std::norm(v(d - 1));
}

}  // namespace seqdc
