#include "qmclab/netcount.hpp"

#include <array>
#include <bit>
#include <stdexcept>
#include <thread>

#include "qmclab/format.hpp"

namespace qmclab {

std::vector<Interval1D> dyadic_box_decomposition(const DyadicRational& a) {
  std::vector<Interval1D> out;
  for (unsigned t = 1; t <= a.e; ++t) {
    if ((a.num >> (a.e - t)) & 1) {
      // The prefix above bit t, with that bit cleared, names the interval's
      // left endpoint at resolution 2^-t.
      out.push_back({t, (a.num >> (a.e - t)) - 1});
    }
  }
  return out;
}

DyadicRational truncate_alpha(unsigned m) {
  if (m < 1 || m > 126) throw std::invalid_argument("truncate_alpha: m must be in 1..126");
  u128 num = (u128{1} << (m + 1)) / 3;  // floor(2^{m+1} / 3)
  return DyadicRational(num, m);
}

DyadicRational truncate_rational(const mpq_class& alpha, unsigned m) {
  if (alpha < 0 || alpha >= 1)
    throw std::invalid_argument("truncate_rational: alpha must be in [0,1)");
  if (m < 1 || m > 128) throw std::invalid_argument("truncate_rational: m must be in 1..128");
  mpz_class scaled = (alpha.get_num() << m) / alpha.get_den();
  return DyadicRational(u128_from_mpz(scaled), m);
}

LinearSystemGF2 assemble_system(const GeneratorSet& g, const ElementaryInterval& box) {
  if (box.base != 2) throw std::invalid_argument("assemble_system: base-2 intervals only");
  if (box.k.size() != g.d || box.c.size() != g.d)
    throw std::invalid_argument("assemble_system: interval/generator dimension mismatch");
  LinearSystemGF2 sys;
  unsigned total = 0;
  for (unsigned j = 0; j < g.d; ++j) {
    if (box.k[j] > g.m)
      throw std::invalid_argument("assemble_system: interval finer than matrix precision");
    total += box.k[j];
  }
  sys.C.rows = total;
  sys.C.cols = g.m;
  sys.C.row.reserve(total);
  sys.target.reserve(total);
  for (unsigned j = 0; j < g.d; ++j)
    for (unsigned r = 0; r < box.k[j]; ++r) {
      sys.C.row.push_back(g.rows[j][r]);
      sys.target.push_back(static_cast<std::uint8_t>((box.c[j] >> (box.k[j] - 1 - r)) & 1));
    }
  return sys;
}

namespace {

// Incremental GF(2) elimination over <= 128 columns; pivots keyed by their
// lowest set bit.
struct Eliminator {
  std::array<RowMask, 128> piv;
  std::array<std::uint8_t, 128> piv_t{};
  std::array<std::uint8_t, 128> used{};
  unsigned m = 0;
  unsigned rank = 0;
  bool consistent = true;

  void reset(unsigned cols) {
    for (unsigned c = 0; c < m || c < cols; ++c) used[c] = 0;
    m = cols;
    rank = 0;
    consistent = true;
  }

  static int lowest_bit(const RowMask& r) {
    if (r.w0) return std::countr_zero(r.w0);
    if (r.w1) return 64 + std::countr_zero(r.w1);
    return -1;
  }

  void add(RowMask r, bool t) {
    if (!consistent) return;
    int lb = lowest_bit(r);
    while (lb >= 0 && used[lb]) {
      r ^= piv[lb];
      t ^= piv_t[lb] != 0;
      lb = lowest_bit(r);
    }
    if (lb < 0) {
      if (t) consistent = false;
      return;
    }
    used[lb] = 1;
    piv[static_cast<unsigned>(lb)] = r;
    piv_t[static_cast<unsigned>(lb)] = t ? 1 : 0;
    ++rank;
  }
};

}  // namespace

mpz_class solve_count(const LinearSystemGF2& sys, unsigned m) {
  if (sys.C.cols != m) throw std::invalid_argument("solve_count: column count mismatch");
  if (sys.target.size() != sys.C.rows)
    throw std::invalid_argument("solve_count: target length mismatch");
  Eliminator el;
  el.reset(m);
  for (unsigned i = 0; i < sys.C.rows; ++i) el.add(sys.C.row[i], sys.target[i] != 0);
  if (!el.consistent) return 0;
  return mpz_class(1) << (m - el.rank);
}

namespace {

// Shared tuple walk: per-rank tallies keep the merge associative, so any
// shard split yields identical totals.
void count_tuples(const GeneratorSet& g, const std::vector<Interval1D>& decomp,
                  unsigned d, unsigned m, std::uint64_t begin, std::uint64_t end,
                  std::vector<std::uint64_t>& rank_tally) {
  const std::uint64_t radix = decomp.size();
  std::vector<unsigned> choice(d);
  Eliminator el;
  for (std::uint64_t idx = begin; idx < end; ++idx) {
    std::uint64_t v = idx;
    for (unsigned j = 0; j < d; ++j) {
      choice[j] = static_cast<unsigned>(v % radix);
      v /= radix;
    }
    el.reset(m);
    for (unsigned j = 0; j < d && el.consistent; ++j) {
      const Interval1D& iv = decomp[choice[j]];
      for (unsigned r = 0; r < iv.k && el.consistent; ++r)
        el.add(g.rows[j][r], ((iv.c >> (iv.k - 1 - r)) & 1) != 0);
    }
    if (el.consistent) ++rank_tally[el.rank];
  }
}

}  // namespace

mpz_class count_in_box(const GeneratorSet& g, unsigned d, unsigned m,
                       const DyadicRational& a, unsigned workers) {
  if (d != g.d || m != g.m)
    throw std::invalid_argument("count_in_box: generator set has different d or m");
  const auto decomp = dyadic_box_decomposition(a);
  for (const auto& iv : decomp)
    if (iv.k > m) throw std::invalid_argument("count_in_box: box finer than precision");
  if (decomp.empty()) return 0;

  std::uint64_t tuples = 1;
  for (unsigned j = 0; j < d; ++j) {
    if (tuples > ~std::uint64_t{0} / decomp.size())
      throw std::overflow_error("count_in_box: tuple count overflow");
    tuples *= decomp.size();
  }

  if (workers < 1) workers = 1;
  if (workers > tuples) workers = static_cast<unsigned>(tuples);
  std::vector<std::vector<std::uint64_t>> tallies(workers,
                                                  std::vector<std::uint64_t>(m + 1, 0));
  if (workers == 1) {
    count_tuples(g, decomp, d, m, 0, tuples, tallies[0]);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      std::uint64_t begin = tuples * w / workers;
      std::uint64_t end = tuples * (w + 1) / workers;
      threads.emplace_back(count_tuples, std::cref(g), std::cref(decomp), d, m, begin,
                           end, std::ref(tallies[w]));
    }
    for (auto& t : threads) t.join();
  }

  std::vector<std::uint64_t> total(m + 1, 0);
  for (const auto& tally : tallies)
    for (unsigned r = 0; r <= m; ++r) total[r] += tally[r];
  mpz_class count = 0;
  for (unsigned r = 0; r <= m; ++r)
    if (total[r]) count += mpz_class(static_cast<unsigned long>(total[r])) << (m - r);
  return count;
}

mpq_class BigRationalError::to_mpq() const {
  mpq_class q(num);
  q /= mpq_class(mpz_class(1) << e);
  return q;
}

double BigRationalError::to_double() const { return to_mpq().get_d(); }

std::string BigRationalError::to_string() const {
  return num.get_str() + "/2^" + std::to_string(e);
}

namespace {

// count(2^m points in [0,a)^d) minus the box volume scaled by n = 2^m,
// rendered over the fixed denominator 2^{m(d-1)}.
BigRationalError scaled_error_from_count(const mpz_class& count, unsigned d,
                                         unsigned m, const DyadicRational& a) {
  mpz_class A = mpz_from_u128(a.num);
  mpz_class Ad = 1;
  for (unsigned j = 0; j < d; ++j) Ad *= A;
  BigRationalError err;
  err.e = m * (d - 1);
  err.num = (count << err.e) - Ad;
  return err;
}

}  // namespace

BigRationalError signed_scaled_error_exact(const GeneratorSet& g, unsigned d,
                                           unsigned m, unsigned workers) {
  const DyadicRational a = truncate_alpha(m);
  return scaled_error_from_count(count_in_box(g, d, m, a, workers), d, m, a);
}

mpq_class true_error_scaled(const GeneratorSet& g, unsigned d, unsigned m,
                            unsigned workers) {
  const DyadicRational a = truncate_alpha(m);
  mpz_class count;
  if (a.num + 1 == (u128{1} << m)) {
    // [0, (A+1)/2^m) is the whole axis: every point counts.
    count = mpz_class(1) << m;
  } else {
    count = count_in_box(g, d, m, DyadicRational(a.num + 1, m), workers);
  }
  mpq_class twothirds(2, 3);
  mpq_class mu = 1;
  for (unsigned j = 0; j < d; ++j) mu *= twothirds;
  mpq_class n(mpz_class(1) << m);
  return count - n * mu;
}

std::pair<mpq_class, mpq_class> truncation_bounds(unsigned d) {
  if (d < 1) throw std::invalid_argument("truncation_bounds: d must be >= 1");
  mpq_class lo(-static_cast<long>(d));
  for (unsigned j = 1; j < d; ++j) lo *= mpq_class(2, 3);
  return {lo, mpq_class(static_cast<unsigned long>(d))};
}

const char* const kFig5Header =
    "d,m,A,count,signed_scaled_error_exact,signed_scaled_error_float,bound_lo,bound_hi";

std::string fig5_row(const std::vector<DirectionNumberRecord>& table, unsigned d,
                     unsigned m, const mpq_class& alpha, unsigned workers) {
  GeneratorSet g = sobol_generator_set(table, d, m);
  DyadicRational a = truncate_rational(alpha, m);
  mpz_class count = count_in_box(g, d, m, a, workers);
  mpz_class A = mpz_from_u128(a.num);
  BigRationalError err = scaled_error_from_count(count, d, m, a);
  auto [lo, hi] = truncation_bounds(d);
  std::string row;
  row += std::to_string(d);
  row += ',';
  row += std::to_string(m);
  row += ',';
  row += A.get_str();
  row += ',';
  row += count.get_str();
  row += ',';
  row += err.to_string();
  row += ',';
  row += format_double(err.to_double());
  row += ',';
  row += format_double(lo.get_d());
  row += ',';
  row += format_double(hi.get_d());
  return row;
}

}  // namespace qmclab
