#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace seqdc {

// Fixed-length sequence over {0,1}.  Length >= 1 is enforced at construction.
class BinarySequence {
 public:
  explicit BinarySequence(std::vector<std::uint8_t> symbols)
      : bits_(std::move(symbols)) {
    if (bits_.empty())
      throw std::invalid_argument("BinarySequence: length must be >= 1");
    for (auto b : bits_)
      if (b > 1)
        throw std::invalid_argument("BinarySequence: symbols must be 0 or 1");
  }

  static BinarySequence from_string(std::string_view s) {
    std::vector<std::uint8_t> bits;
    bits.reserve(s.size());
    for (char c : s) {
      if (c != '0' && c != '1')
        throw std::invalid_argument("BinarySequence: expected only '0'/'1', got \"" +
                                    std::string(s) + "\"");
      bits.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    return BinarySequence(std::move(bits));
  }

  // (0, ..., 0, 1)
  static BinarySequence one_tick(int length) {
    if (length < 1)
      throw std::invalid_argument("one_tick: length must be >= 1");
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(length), 0);
    bits.back() = 1;
    return BinarySequence(std::move(bits));
  }

  int length() const { return static_cast<int>(bits_.size()); }
  std::uint8_t operator[](int i) const {
    return bits_[static_cast<std::size_t>(i)];
  }
  const std::vector<std::uint8_t>& symbols() const { return bits_; }

  std::string str() const {
    std::string s;
    s.reserve(bits_.size());
    for (auto b : bits_) s.push_back(static_cast<char>('0' + b));
    return s;
  }

  // Global 0 <-> 1 swap.
  BinarySequence relabeled() const {
    std::vector<std::uint8_t> bits(bits_);
    for (auto& b : bits) b ^= 1;
    return BinarySequence(std::move(bits));
  }

  bool starts_with_zero() const { return bits_.front() == 0; }

  friend bool operator==(const BinarySequence&, const BinarySequence&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

// Tail length + cycle length description of an eventually periodic extension.
// A pattern covers the first tail_len + cycle_len symbols of a sequence and
// pins every later symbol to the cycle.
struct Pattern {
  int tail_len = 0;
  int cycle_len = 1;
  int total() const { return tail_len + cycle_len; }
  friend auto operator<=>(const Pattern&, const Pattern&) = default;
};

struct DcResult {
  int dc = 0;
  std::vector<Pattern> patterns;  // all minimal patterns, tail_len ascending
};

// True when symbols l1.. repeat with period l2 through the end of seq.
// Works for any integral symbol type, the comparison is plain equality.
template <class Symbol>
bool pattern_matches(const std::vector<Symbol>& seq, int tail_len,
                     int cycle_len) {
  if (cycle_len < 1 || tail_len < 0) return false;
  const int L = static_cast<int>(seq.size());
  const int ell = tail_len + cycle_len;
  if (ell > L) return false;
  for (int j = ell; j < L; ++j)
    if (seq[static_cast<std::size_t>(j)] !=
        seq[static_cast<std::size_t>(tail_len + (j - tail_len) % cycle_len)])
      return false;
  return true;
}

template <class Symbol>
DcResult minimal_patterns_of(const std::vector<Symbol>& seq) {
  const int L = static_cast<int>(seq.size());
  if (L < 1) throw std::invalid_argument("minimal_patterns_of: empty sequence");
  for (int total = 1; total <= L; ++total) {
    std::vector<Pattern> found;
    for (int tail = 0; tail < total; ++tail) {
      const int cycle = total - tail;
      if (pattern_matches(seq, tail, cycle)) found.push_back({tail, cycle});
    }
    if (!found.empty()) return {total, std::move(found)};
  }
  throw std::logic_error("minimal_patterns_of: unreachable");  // total == L always matches
}

// Minimal number of states needed to emit seq deterministically, together
// with every pattern of that minimal total length.  O(L^3).
inline DcResult dc_and_patterns(const BinarySequence& seq) {
  return minimal_patterns_of(seq.symbols());
}

// Extends the first pattern.total() symbols of prefix out to `length` symbols
// by repeating the cycle.
inline BinarySequence expand_pattern(const BinarySequence& prefix,
                                     const Pattern& pat, int length) {
  if (pat.tail_len < 0 || pat.cycle_len < 1)
    throw std::invalid_argument("expand_pattern: invalid pattern");
  const int ell = pat.total();
  if (prefix.length() < ell)
    throw std::invalid_argument("expand_pattern: prefix shorter than pattern");
  if (length < ell)
    throw std::invalid_argument("expand_pattern: length shorter than pattern");
  std::vector<std::uint8_t> out(static_cast<std::size_t>(length));
  for (int j = 0; j < ell; ++j) out[static_cast<std::size_t>(j)] = prefix[j];
  for (int j = ell; j < length; ++j)
    out[static_cast<std::size_t>(j)] =
        out[static_cast<std::size_t>(pat.tail_len +
                                     (j - pat.tail_len) % pat.cycle_len)];
  return BinarySequence(std::move(out));
}

// "aab(ba)" style rendering of a pattern against its sequence.
inline std::string pattern_string(const BinarySequence& seq,
                                  const Pattern& pat) {
  if (pat.total() > seq.length())
    throw std::invalid_argument("pattern_string: pattern longer than sequence");
  std::string s;
  for (int j = 0; j < pat.tail_len; ++j)
    s.push_back(static_cast<char>('0' + seq[j]));
  s.push_back('(');
  for (int j = pat.tail_len; j < pat.total(); ++j)
    s.push_back(static_cast<char>('0' + seq[j]));
  s.push_back(')');
  return s;
}

// All length-L sequences starting with 0, in lexicographic order.  The missing
// half of the space is reachable through relabeled().
template <class F>
void for_each_canonical_sequence(int length, F&& f) {
  if (length < 1)
    throw std::invalid_argument("for_each_canonical_sequence: length >= 1");
  if (length > 62)
    throw std::invalid_argument("for_each_canonical_sequence: length too large");
  const std::uint64_t count = 1ULL << (length - 1);
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(length));
  for (std::uint64_t idx = 0; idx < count; ++idx) {
    bits[0] = 0;
    for (int p = 1; p < length; ++p)
      bits[static_cast<std::size_t>(p)] =
          static_cast<std::uint8_t>((idx >> (length - 1 - p)) & 1);
    f(BinarySequence(bits));
  }
}

inline std::vector<BinarySequence> enumerate_sequences(int length) {
  std::vector<BinarySequence> out;
  out.reserve(1ULL << (length - 1));
  for_each_canonical_sequence(length,
                              [&](const BinarySequence& s) { out.push_back(s); });
  return out;
}

}  // namespace seqdc
