#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "qmclab/dyadic.hpp"

namespace qmclab {

// x_i in base b, exact: digit-reverse i around the radix point.
RationalCoordinate radical_inverse(std::uint64_t i, unsigned base);

// One Halton point; bases must be >= 2 and pairwise coprime.
std::vector<RationalCoordinate> halton_point(std::uint64_t i,
                                             const std::vector<unsigned>& bases);

std::vector<unsigned> first_primes(unsigned d);

// One record of a direction-number table: dimension, recurrence degree s,
// encoded polynomial coefficients a, and s initial odd values m_1..m_s.
struct DirectionNumberRecord {
  unsigned dim = 0;
  unsigned s = 0;
  std::uint64_t a = 0;
  std::vector<std::uint64_t> m;
};

// Parses "dim s a m_1 ... m_s" lines after a single header line.  Throws
// std::runtime_error naming the 1-based line number on malformed input,
// even m_i, or m_i >= 2^i.
std::vector<DirectionNumberRecord> load_direction_numbers(std::istream& in);
std::vector<DirectionNumberRecord> load_direction_numbers_file(const std::string& path);

// Returns the direction-number fixture path: $QMCLAB_DIRECTION_FILE if set,
// else "data/joe_kuo_6_d50.txt" relative to the working directory.
std::string default_direction_file();

// Packed row of a binary matrix with at most 128 columns.
struct RowMask {
  std::uint64_t w0 = 0, w1 = 0;

  bool bit(unsigned c) const {
    return c < 64 ? (w0 >> c) & 1u : (w1 >> (c - 64)) & 1u;
  }
  void set(unsigned c) {
    if (c < 64) w0 |= std::uint64_t{1} << c;
    else w1 |= std::uint64_t{1} << (c - 64);
  }
  void operator^=(const RowMask& o) { w0 ^= o.w0; w1 ^= o.w1; }
  bool any() const { return (w0 | w1) != 0; }
};

// Generating matrices for the first d dimensions at precision m <= 128.
// cols[j][c] holds column c of dimension j as an m-bit integer whose bit
// (m-1-r) is matrix entry (r, c); rows[j][r] holds row r across columns.
struct GeneratorSet {
  unsigned d = 0;
  unsigned m = 0;
  std::vector<std::vector<u128>> cols;
  std::vector<std::vector<RowMask>> rows;
};

GeneratorSet sobol_generator_set(const std::vector<DirectionNumberRecord>& table,
                                 unsigned d, unsigned m);

// Point i of the Sobol' sequence, exact; requires i < 2^m.
std::vector<DyadicRational> sobol_point(u128 i, const GeneratorSet& g);

// Convenience: the first n Sobol' points as exact rationals.
std::vector<std::vector<mpq_class>> sobol_points_mpq(std::uint64_t n, const GeneratorSet& g);

// An axis-parallel base-b elementary interval: coordinate j covers
// [c_j / b^{k_j}, (c_j + 1) / b^{k_j}).
struct ElementaryInterval {
  std::vector<unsigned> k;
  std::vector<u128> c;
  unsigned base = 2;
};

// All compositions of total into d nonnegative parts, lexicographic.
std::vector<std::vector<unsigned>> compositions(unsigned total, unsigned d);

// Exact (t,m,d)-net test in base b: every elementary interval of volume
// b^{t-m} (and coarser) must hold exactly b^t points.  Requires
// points.size() == b^m; coordinates must lie in [0,1).
bool is_tmd_net(const std::vector<std::vector<mpq_class>>& points,
                unsigned t, unsigned m, unsigned d, unsigned b);

// Smallest t for which the point set is a (t,m,d)-net in base b.
unsigned smallest_net_t(const std::vector<std::vector<mpq_class>>& points,
                        unsigned m, unsigned d, unsigned b);

}  // namespace qmclab
