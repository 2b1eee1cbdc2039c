#pragma once

#include <cstdint>
#include <stdexcept>

namespace seqdc {

inline std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r))
    throw std::overflow_error("integer overflow in addition");
  return r;
}

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r))
    throw std::overflow_error("integer overflow in multiplication");
  return r;
}

inline std::int64_t checked_pow(std::int64_t base, int exp) {
  if (exp < 0) throw std::invalid_argument("checked_pow: negative exponent");
  std::int64_t r = 1;
  for (int i = 0; i < exp; ++i) r = checked_mul(r, base);
  return r;
}

// C(n, r) computed exactly; throws std::overflow_error once the value leaves
// the int64 range.
inline std::int64_t binomial_exact(int n, int r) {
  if (n < 0 || r < 0 || r > n)
    throw std::invalid_argument("binomial_exact: need 0 <= r <= n");
  if (r > n - r) r = n - r;
  constexpr std::int64_t kMax = INT64_MAX;
  __int128 c = 1;
  for (int i = 1; i <= r; ++i) {
    c = c * (n - r + i) / i;  // exact: product of i consecutive c's divisible
    if (c > kMax) throw std::overflow_error("binomial_exact: overflow");
  }
  return static_cast<std::int64_t>(c);
}

// Moebius function via trial division.
inline int mobius(std::int64_t n) {
  if (n < 1) throw std::invalid_argument("mobius: need n >= 1");
  int factors = 0;
  for (std::int64_t p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      n /= p;
      if (n % p == 0) return 0;  // squared prime factor
      ++factors;
    }
  }
  if (n > 1) ++factors;
  return (factors % 2 == 0) ? 1 : -1;
}

// Number of length-n words over a k-letter alphabet that are not a power of a
// shorter word: sum over d | n of mobius(d) * k^(n/d).
inline std::int64_t primitive_word_count(int k, int n) {
  if (k < 1 || n < 1)
    throw std::invalid_argument("primitive_word_count: need k >= 1, n >= 1");
  std::int64_t total = 0;
  for (int d = 1; d <= n; ++d) {
    if (n % d != 0) continue;
    const std::int64_t term = checked_mul(mobius(d), checked_pow(k, n / d));
    total = checked_add(total, term);
  }
  return total;
}

// Number of distinct tail+cycle patterns of total length len over a k-letter
// alphabet: a bare primitive cycle of length len, plus a nonempty tail of
// length i whose last symbol differs from the symbol the cycle would emit
// there, followed by a primitive cycle of length len - i.
inline std::int64_t minimal_pattern_count(int k, int len) {
  if (k < 1 || len < 1)
    throw std::invalid_argument("minimal_pattern_count: need k >= 1, len >= 1");
  std::int64_t total = primitive_word_count(k, len);
  for (int i = 1; i <= len - 1; ++i) {
    std::int64_t term = checked_mul(k - 1, checked_pow(k, i - 1));
    term = checked_mul(term, primitive_word_count(k, len - i));
    total = checked_add(total, term);
  }
  return total;
}

}  // namespace seqdc
