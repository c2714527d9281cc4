#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qmclab/sequences.hpp"

namespace qmclab {

// Packed GF(2) matrix; at most 128 columns per row.
struct BitMatrix {
  unsigned rows = 0;
  unsigned cols = 0;
  std::vector<RowMask> row;
};

// C i = target over GF(2).
struct LinearSystemGF2 {
  BitMatrix C;
  std::vector<std::uint8_t> target;
};

// One base-2 interval [c/2^k, (c+1)/2^k).
struct Interval1D {
  unsigned k = 0;
  u128 c = 0;
};

// [0, a) as a disjoint union of dyadic intervals, one per set bit of the
// numerator, ordered left to right; empty for a = 0.
std::vector<Interval1D> dyadic_box_decomposition(const DyadicRational& a);

// a_m = floor(2^m * 2/3) / 2^m; numerator bits alternate 1010...
DyadicRational truncate_alpha(unsigned m);

// floor(2^m * alpha) / 2^m for any rational alpha in [0, 1).
DyadicRational truncate_rational(const mpq_class& alpha, unsigned m);

// Stacks the first k_j rows of each generating matrix; the target collects
// the k_j leading bits of each c_j.  Throws when some k_j exceeds the
// matrix precision.
LinearSystemGF2 assemble_system(const GeneratorSet& g, const ElementaryInterval& box);

// 0 when inconsistent, else 2^(m - rank); exact.
mpz_class solve_count(const LinearSystemGF2& sys, unsigned m);

// Exact number of the first 2^m points inside [0, a)^d, summing solution
// counts over all tuples of per-dimension decomposition intervals.  Tuple
// ranges are sharded across `workers` threads; per-rank tallies make the
// result schedule-independent.
mpz_class count_in_box(const GeneratorSet& g, unsigned d, unsigned m,
                       const DyadicRational& a, unsigned workers = 1);

// Signed value num / 2^e with e = m(d-1), kept unreduced.
struct BigRationalError {
  mpz_class num;
  unsigned e = 0;

  mpq_class to_mpq() const;
  double to_double() const;
  std::string to_string() const;  // "num/2^e"
};

// n (mean(a_m) - a_m^d) at n = 2^m: count_in_box minus A^d / 2^{m(d-1)}
// where A is the numerator of a_m.  Identically zero for d = 1.
BigRationalError signed_scaled_error_exact(const GeneratorSet& g, unsigned d,
                                           unsigned m, unsigned workers = 1);

// Scaled error against the untruncated box [0, 2/3)^d, exact: with m-bit
// coordinates, x < 2/3 iff x < (A+1)/2^m.
mpq_class true_error_scaled(const GeneratorSet& g, unsigned d, unsigned m,
                            unsigned workers = 1);

// Guaranteed enclosure [-(2/3)^{d-1} d, d] of (true - truncated) scaled error.
std::pair<mpq_class, mpq_class> truncation_bounds(unsigned d);

// One CSV row "d, m, A, count, exact, float, bound_lo, bound_hi" with the
// exact error serialized as "num/2^e".  Deterministic bytes for any worker
// count.
std::string fig5_row(const std::vector<DirectionNumberRecord>& table, unsigned d,
                     unsigned m, const mpq_class& alpha, unsigned workers);

extern const char* const kFig5Header;

}  // namespace qmclab
