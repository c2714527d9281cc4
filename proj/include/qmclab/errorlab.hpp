#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "qmclab/integrands.hpp"
#include "qmclab/sequences.hpp"

namespace qmclab {

// Index -> exact point; the uniform currency between generators and consumers.
using PointSource = std::function<std::vector<mpq_class>(std::uint64_t)>;

PointSource make_vdc_source();
PointSource make_halton_source(unsigned d);
PointSource make_sobol_source(GeneratorSet g);

// n fixed uniform points with a deterministic seed (doubles converted
// exactly, so downstream exact arithmetic stays exact).
std::vector<std::vector<mpq_class>> random_points_mpq(std::uint64_t n, unsigned d,
                                                      std::uint64_t seed);

struct TraceEntry {
  std::uint64_t n = 0;
  double mean = 0;
  double signed_error = 0;     // mean - mu
  double scaled_error = 0;     // n * |mean - mu|
  double log_scaled_error = 0; // scaled / log n for n > 1, NaN at n = 1
  bool exact = false;
  mpq_class mean_exact;        // the three exact fields are valid iff `exact`
  mpq_class signed_exact;
  mpq_class scaled_exact;
};

struct ErrorTrace {
  std::vector<TraceEntry> entries;
  bool all_exact = false;
};

// Running means over x_0..x_{n-1} for n = 1..N.  Exact rational accumulation
// whenever the integrand is exactly evaluable and n <= 2^22; beyond that the
// sum continues in compensated (Neumaier) floating point.
ErrorTrace running_trace(const PointSource& points, const IntegrandSpec& f,
                         std::uint64_t N);

// (1/n) #{x_i < alpha} - alpha, exact.  Throws on an empty point set.
mpq_class local_discrepancy(const std::vector<mpq_class>& xs, const mpq_class& alpha);

// Number of adjacent flips among the first m+1 binary digits of alpha:
// #{1 <= k <= m : a_k != a_{k+1}} (this indexing gives h(m) = m for
// alpha = 2/3 = 0.101010...).
unsigned alternation_count(const mpq_class& alpha, unsigned m);

// (1/2^m) #{1 <= n <= 2^m : n * delta_n(alpha) > (1-eps) * h_alpha(m)} over
// the base-2 van der Corput prefix, exact; signed n*delta_n.
mpq_class corollary1_fraction(unsigned m, const mpq_class& eps, const mpq_class& alpha);

// max over 1 <= n <= 2^m of the signed n * delta_n(alpha), exact.
mpq_class max_n_delta(unsigned m, const mpq_class& alpha);

// Closed-form sum of the first n base-2 van der Corput points: each digit
// position k contributes 2^-(k+1) per index with bit k set, and those
// indices come in blocks of 2^k.
mpq_class vdc_prefix_sum(std::uint64_t n);

// n_L = sum_{l=0}^{L} 4^l = (4^{L+1} - 1) / 3; binary 1010...101.
std::uint64_t n_L(unsigned L);

struct FloorCheck {
  std::uint64_t n = 0;
  mpq_class lhs;  // n |mean - 1/2|, exact
  mpq_class rhs;  // bitlen(n) / 8
  bool pass = false;
};

// lhs >= rhs at n = n_L: the scaled error of f(x)=x is at least an eighth
// of the bit length of n_L.
FloorCheck floor_check(unsigned L);

enum class RecordScaling { N, NOverLogN };

// Indices of strict running maxima of the chosen scaled error; ties are not
// records.  The n/log n scaling starts at n = 2.
std::vector<std::size_t> records(const ErrorTrace& t, RecordScaling s);

}  // namespace qmclab
