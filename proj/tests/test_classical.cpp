#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "seqdc/classical.hpp"
#include "seqdc/sequence.hpp"

using seqdc::BinarySequence;
using seqdc::ClassicalModel;

TEST_CASE("single-state probabilities multiply") {
  ClassicalModel m{1, Eigen::MatrixXd::Constant(1, 1, 0.3),
                   Eigen::MatrixXd::Constant(1, 1, 0.7),
                   Eigen::VectorXd::Ones(1)};
  m.validate();
  CHECK(seqdc::sequence_probability(m, BinarySequence::from_string("010")) ==
        doctest::Approx(0.3 * 0.7 * 0.3).epsilon(1e-14));
  CHECK(seqdc::sequence_probability(m, BinarySequence::from_string("1")) ==
        doctest::Approx(0.7).epsilon(1e-14));
}

TEST_CASE("two-state probability by hand") {
  Eigen::MatrixXd T0(2, 2), T1(2, 2);
  T0 << 0.5, 0.5, 0.0, 0.0;
  T1 << 0.0, 0.0, 0.2, 0.8;
  ClassicalModel m{2, T0, T1, seqdc::point_mass(2, 0)};
  m.validate();
  // 01: emit 0 from state 0 (rows sum to 0.5 + 0.5), then emit 1, which only
  // state 1 can do, so the surviving path is move (0.5) times 0.2 + 0.8
  CHECK(seqdc::sequence_probability(m, BinarySequence::from_string("01")) ==
        doctest::Approx(0.5).epsilon(1e-14));
  // 00: two steps from state 0, each spreading 0.5 + 0.5; state 1 is absorbing
  // for emission 0, so only the mass still in state 0 contributes
  CHECK(seqdc::sequence_probability(m, BinarySequence::from_string("00")) ==
        doctest::Approx(0.5).epsilon(1e-14));
  CHECK(seqdc::sequence_probability(m, BinarySequence::from_string("11")) == 0.0);
}

TEST_CASE("validation rejects malformed models") {
  Eigen::MatrixXd T0(2, 2), T1(2, 2);
  T0 << 0.5, 0.5, 0.0, 0.0;
  T1 << 0.0, 0.0, 0.2, 0.8;
  ClassicalModel good{2, T0, T1, seqdc::point_mass(2, 0)};
  CHECK_NOTHROW(good.validate());

  ClassicalModel bad_rows = good;
  bad_rows.T0(0, 0) = 0.6;  // row sums to 1.1
  CHECK_THROWS_AS(bad_rows.validate(), std::invalid_argument);

  ClassicalModel negative = good;
  negative.T0(0, 0) = -0.1;
  negative.T0(0, 1) = 1.1;
  CHECK_THROWS_AS(negative.validate(), std::invalid_argument);

  ClassicalModel bad_pi = good;
  bad_pi.pi(0) = 0.5;
  CHECK_THROWS_AS(bad_pi.validate(), std::invalid_argument);

  ClassicalModel wrong_dim = good;
  wrong_dim.d = 3;
  CHECK_THROWS_AS(wrong_dim.validate(), std::invalid_argument);
  CHECK_THROWS_AS(seqdc::sequence_probability(wrong_dim,
                                              BinarySequence::from_string("0")),
                  std::invalid_argument);
}

TEST_CASE("relabeling symmetry") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 1 + static_cast<int>(rng() % 4);
    const int L = 1 + static_cast<int>(rng() % 6);
    ClassicalModel m = oracle::random_classical_model(d, rng);
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(L));
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng() % 2);
    BinarySequence seq(bits);
    CHECK(seqdc::sequence_probability(m, seq) ==
          doctest::Approx(seqdc::sequence_probability(m.relabeled(), seq.relabeled()))
              .epsilon(1e-13));
  }
}

TEST_CASE("probabilities over all sequences sum to one") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 1 + static_cast<int>(rng() % 4);
    const int L = 1 + static_cast<int>(rng() % 6);
    ClassicalModel m = oracle::random_classical_model(d, rng);
    double total = 0.0;
    for (std::uint64_t mask = 0; mask < (1ULL << L); ++mask) {
      std::vector<std::uint8_t> bits(static_cast<std::size_t>(L));
      for (int j = 0; j < L; ++j)
        bits[static_cast<std::size_t>(j)] =
            static_cast<std::uint8_t>((mask >> j) & 1);
      total += seqdc::sequence_probability(m, BinarySequence(bits));
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("deterministic detection") {
  const auto seq = BinarySequence::from_string("001011");
  const auto pat = seqdc::dc_and_patterns(seq).patterns.front();
  ClassicalModel dfa = oracle::dfa_from_pattern(seq, pat);
  dfa.validate();
  CHECK(seqdc::is_deterministic(dfa, 1e-12));

  std::mt19937_64 rng(3);
  ClassicalModel soft = oracle::random_classical_model(3, rng);
  CHECK_FALSE(seqdc::is_deterministic(soft, 1e-9));

  ClassicalModel near = dfa;
  near.T0(0, 1) -= 1e-7;
  near.T0(0, 0) += 1e-7;
  CHECK(seqdc::is_deterministic(near, 1e-6));
  CHECK_FALSE(seqdc::is_deterministic(near, 1e-9));
}

TEST_CASE("pattern automata emit their sequence with certainty") {
  for (int L = 2; L <= 8; ++L)
    seqdc::for_each_canonical_sequence(L, [&](const BinarySequence& s) {
      const auto res = seqdc::dc_and_patterns(s);
      for (const auto& pat : res.patterns) {
        ClassicalModel dfa = oracle::dfa_from_pattern(s, pat);
        dfa.validate();
        CHECK(seqdc::sequence_probability(dfa, s) == 1.0);
      }
    });
}

TEST_CASE("near-certain models round to an exact automaton") {
  const auto seq = BinarySequence::from_string("001011");
  const auto pat = seqdc::dc_and_patterns(seq).patterns.front();
  ClassicalModel noisy = oracle::dfa_from_pattern(seq, pat);
  // shave a little mass off every deterministic transition
  const double eps = 1e-10;
  for (int i = 0; i < noisy.d; ++i)
    for (int j = 0; j < noisy.d; ++j) {
      if (noisy.T0(i, j) == 1.0) {
        noisy.T0(i, j) -= eps;
        noisy.T1(i, j) += eps;
      } else if (noisy.T1(i, j) == 1.0) {
        noisy.T1(i, j) -= eps;
        noisy.T0(i, j) += eps;
      }
    }
  const double p = seqdc::sequence_probability(noisy, seq);
  CHECK(p > 1.0 - 1e-9);

  ClassicalModel rounded = noisy;
  for (int i = 0; i < rounded.d; ++i)
    for (int j = 0; j < rounded.d; ++j) {
      rounded.T0(i, j) = rounded.T0(i, j) > 0.5 ? 1.0 : 0.0;
      rounded.T1(i, j) = rounded.T1(i, j) > 0.5 ? 1.0 : 0.0;
    }
  rounded.validate();
  CHECK(seqdc::is_deterministic(rounded, 0.0));
  CHECK(seqdc::sequence_probability(rounded, seq) == 1.0);
}
