#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

#include "seqdc/sequence.hpp"

namespace seqdc {

// Finite-state stochastic generator with one sub-stochastic transition matrix
// per output symbol.  T0 + T1 is row-stochastic; pi is the initial
// distribution over the d states.
struct ClassicalModel {
  int d = 0;
  Eigen::MatrixXd T0, T1;
  Eigen::VectorXd pi;

  static constexpr double kStochasticTol = 1e-12;

  void validate(double tol = kStochasticTol) const {
    if (d < 1) throw std::invalid_argument("ClassicalModel: d must be >= 1");
    if (T0.rows() != d || T0.cols() != d || T1.rows() != d || T1.cols() != d)
      throw std::invalid_argument("ClassicalModel: transition matrices must be d x d");
    if (pi.size() != d)
      throw std::invalid_argument("ClassicalModel: pi must have d entries");
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j)
        if (T0(i, j) < -tol || T1(i, j) < -tol)
          throw std::invalid_argument("ClassicalModel: negative transition entry");
      const double row = T0.row(i).sum() + T1.row(i).sum();
      if (std::abs(row - 1.0) > tol)
        throw std::invalid_argument(
            "ClassicalModel: row " + std::to_string(i) + " sums to " +
            std::to_string(row) + ", expected 1");
    }
    double mass = 0.0;
    for (int i = 0; i < d; ++i) {
      if (pi(i) < -tol)
        throw std::invalid_argument("ClassicalModel: negative initial weight");
      mass += pi(i);
    }
    if (std::abs(mass - 1.0) > tol)
      throw std::invalid_argument("ClassicalModel: pi must sum to 1");
  }

  // Swaps the roles of the two output symbols.
  ClassicalModel relabeled() const { return {d, T1, T0, pi}; }
};

inline Eigen::VectorXd point_mass(int d, int state) {
  if (state < 0 || state >= d)
    throw std::invalid_argument("point_mass: state out of range");
  Eigen::VectorXd pi = Eigen::VectorXd::Zero(d);
  pi(state) = 1.0;
  return pi;
}

// pi^T * T_{a_1} * ... * T_{a_L} * 1
inline double sequence_probability(const ClassicalModel& m,
                                   const BinarySequence& seq) {
  if (m.d < 1 || m.T0.rows() != m.d || m.T0.cols() != m.d ||
      m.T1.rows() != m.d || m.T1.cols() != m.d || m.pi.size() != m.d)
    throw std::invalid_argument("sequence_probability: inconsistent model dimensions");
  Eigen::RowVectorXd v = m.pi.transpose();
  for (int j = 0; j < seq.length(); ++j)
    v = (seq[j] == 0) ? (v * m.T0).eval() : (v * m.T1).eval();
  return v.sum();
}

// True when every transition entry and every initial weight is within tol of
// 0 or 1.
inline bool is_deterministic(const ClassicalModel& m, double tol = 1e-9) {
  auto near01 = [tol](double x) {
    return std::abs(x) <= tol || std::abs(x - 1.0) <= tol;
  };
  for (int i = 0; i < m.d; ++i) {
    if (!near01(m.pi(i))) return false;
    for (int j = 0; j < m.d; ++j)
      if (!near01(m.T0(i, j)) || !near01(m.T1(i, j))) return false;
  }
  return true;
}

}  // namespace seqdc
