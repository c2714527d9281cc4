#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace qmclab {

using u128 = unsigned __int128;

mpz_class mpz_from_u128(u128 v);
u128 u128_from_mpz(const mpz_class& v);
std::string u128_to_string(u128 v);

// Shift that tolerates s in [0, 128]; a shift past the word is only legal
// when the operand is zero (the result is then zero as well).
inline u128 shl128(u128 x, unsigned s) {
  if (s >= 128) {
    if (x != 0) throw std::overflow_error("shl128: shift overflows 128 bits");
    return 0;
  }
  return x << s;
}

// A dyadic rational num / 2^e with 0 <= num < 2^e <= 2^128.  The
// representation is not reduced; comparisons are by value.
struct DyadicRational {
  u128 num = 0;
  unsigned e = 1;

  DyadicRational() = default;
  DyadicRational(u128 n, unsigned exp) : num(n), e(exp) {
    if (e == 0 || e > 128) throw std::invalid_argument("DyadicRational: exponent out of range");
    if (e < 128 && num >> e) throw std::invalid_argument("DyadicRational: numerator not below 2^e");
  }
};

inline bool operator<(const DyadicRational& a, const DyadicRational& b) {
  if (a.e == b.e) return a.num < b.num;
  if (a.e < b.e) return shl128(a.num, b.e - a.e) < b.num;
  return a.num < shl128(b.num, a.e - b.e);
}

inline bool operator==(const DyadicRational& a, const DyadicRational& b) {
  if (a.e == b.e) return a.num == b.num;
  if (a.e < b.e) return shl128(a.num, b.e - a.e) == b.num;
  return a.num == shl128(b.num, a.e - b.e);
}

mpq_class to_mpq(const DyadicRational& x);
double to_double(const DyadicRational& x);

// A coordinate num / den in [0, 1) with machine-word parts (used by the
// base-b radical inverse, where denominators stay small).
struct RationalCoordinate {
  std::uint64_t num = 0;
  std::uint64_t den = 1;
};

mpq_class to_mpq(const RationalCoordinate& x);
double to_double(const RationalCoordinate& x);

std::vector<mpq_class> to_mpq(const std::vector<DyadicRational>& xs);
std::vector<mpq_class> to_mpq(const std::vector<RationalCoordinate>& xs);
std::vector<double> to_double(const std::vector<mpq_class>& xs);

}  // namespace qmclab
