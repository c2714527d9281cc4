#include "qmclab/errorlab.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace qmclab {

PointSource make_vdc_source() {
  return [](std::uint64_t i) {
    return std::vector<mpq_class>{to_mpq(radical_inverse(i, 2))};
  };
}

PointSource make_halton_source(unsigned d) {
  auto bases = first_primes(d);
  return [bases](std::uint64_t i) { return to_mpq(halton_point(i, bases)); };
}

PointSource make_sobol_source(GeneratorSet g) {
  return [g = std::move(g)](std::uint64_t i) { return to_mpq(sobol_point(i, g)); };
}

std::vector<std::vector<mpq_class>> random_points_mpq(std::uint64_t n, unsigned d,
                                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::vector<mpq_class>> pts(n);
  for (auto& x : pts) {
    x.reserve(d);
    for (unsigned j = 0; j < d; ++j) x.emplace_back(unif(rng));
  }
  return pts;
}

namespace {

constexpr std::uint64_t kExactCap = std::uint64_t{1} << 22;

double log_scaled(double scaled, std::uint64_t n) {
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  return scaled / std::log(static_cast<double>(n));
}

}  // namespace

ErrorTrace running_trace(const PointSource& points, const IntegrandSpec& f,
                         std::uint64_t N) {
  if (N < 1) throw std::invalid_argument("running_trace: N must be >= 1");
  validate(f);
  const mpq_class mu = true_mean(f);
  const double mu_d = mu.get_d();
  const bool exact = exact_capable(f);

  ErrorTrace trace;
  trace.entries.reserve(N);
  trace.all_exact = exact && N <= kExactCap;

  mpq_class sum_exact = 0;
  double sum = 0, comp = 0;  // Neumaier compensation
  bool exact_active = exact;
  for (std::uint64_t n = 1; n <= N; ++n) {
    std::vector<mpq_class> x = points(n - 1);
    if (x.size() != f.d)
      throw std::invalid_argument("running_trace: sequence/integrand dimension mismatch");
    TraceEntry e;
    e.n = n;
    if (exact_active && n > kExactCap) {
      sum = sum_exact.get_d();
      comp = 0;
      exact_active = false;
    }
    if (exact_active) {
      sum_exact += evaluate_exact(f, x);
      e.exact = true;
      e.mean_exact = sum_exact / static_cast<unsigned long>(n);
      e.signed_exact = e.mean_exact - mu;
      e.scaled_exact = abs(sum_exact - static_cast<unsigned long>(n) * mu);
      e.mean = e.mean_exact.get_d();
      e.signed_error = e.signed_exact.get_d();
      e.scaled_error = e.scaled_exact.get_d();
    } else {
      double v = evaluate(f, to_double(x));
      double t = sum + v;
      comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
      sum = t;
      double total = sum + comp;
      e.mean = total / static_cast<double>(n);
      e.signed_error = e.mean - mu_d;
      e.scaled_error = static_cast<double>(n) * std::abs(e.signed_error);
    }
    e.log_scaled_error = log_scaled(e.scaled_error, n);
    trace.entries.push_back(std::move(e));
  }
  return trace;
}

mpq_class local_discrepancy(const std::vector<mpq_class>& xs, const mpq_class& alpha) {
  if (xs.empty()) throw std::invalid_argument("local_discrepancy: empty point set");
  unsigned long below = 0;
  for (const auto& x : xs)
    if (x < alpha) ++below;
  mpq_class d(below, static_cast<unsigned long>(xs.size()));
  d.canonicalize();
  return d - alpha;
}

unsigned alternation_count(const mpq_class& alpha, unsigned m) {
  if (alpha <= 0 || alpha >= 1)
    throw std::invalid_argument("alternation_count: alpha must be in (0,1)");
  if (m < 1) throw std::invalid_argument("alternation_count: m must be >= 1");
  // Binary digits a_1..a_{m+1} by repeated doubling.
  std::vector<int> bits;
  bits.reserve(m + 1);
  mpq_class r = alpha;
  for (unsigned k = 0; k <= m; ++k) {
    r *= 2;
    int b = r >= 1 ? 1 : 0;
    if (b) r -= 1;
    bits.push_back(b);
  }
  unsigned h = 0;
  for (unsigned k = 0; k < m; ++k)
    if (bits[k] != bits[k + 1]) ++h;
  return h;
}

mpq_class corollary1_fraction(unsigned m, const mpq_class& eps, const mpq_class& alpha) {
  if (eps <= 0 || eps >= 1)
    throw std::invalid_argument("corollary1_fraction: eps must be in (0,1)");
  const mpq_class threshold =
      (1 - eps) * static_cast<unsigned long>(alternation_count(alpha, m));
  const std::uint64_t N = std::uint64_t{1} << m;
  std::uint64_t hits = 0, below = 0;
  for (std::uint64_t n = 1; n <= N; ++n) {
    if (to_mpq(radical_inverse(n - 1, 2)) < alpha) ++below;
    // n * delta_n = #below - n * alpha, signed.
    mpq_class ndelta = mpq_class(static_cast<unsigned long>(below)) -
                       static_cast<unsigned long>(n) * alpha;
    if (ndelta > threshold) ++hits;
  }
  mpq_class frac(static_cast<unsigned long>(hits));
  frac /= mpq_class(mpz_class(1) << m);
  return frac;
}

mpq_class max_n_delta(unsigned m, const mpq_class& alpha) {
  const std::uint64_t N = std::uint64_t{1} << m;
  std::uint64_t below = 0;
  mpq_class best;
  bool first = true;
  for (std::uint64_t n = 1; n <= N; ++n) {
    if (to_mpq(radical_inverse(n - 1, 2)) < alpha) ++below;
    mpq_class ndelta = mpq_class(static_cast<unsigned long>(below)) -
                       static_cast<unsigned long>(n) * alpha;
    if (first || ndelta > best) {
      best = ndelta;
      first = false;
    }
  }
  return best;
}

mpq_class vdc_prefix_sum(std::uint64_t n) {
  if (n < 1) throw std::invalid_argument("vdc_prefix_sum: n must be >= 1");
  // Bit k of the index contributes 2^-(k+1) to the point value; among
  // 0..n-1 that bit is set in 2^k * floor(n / 2^{k+1}) full blocks plus a
  // partial block of max(0, n mod 2^{k+1} - 2^k).
  mpq_class s = 0;
  for (unsigned k = 0; (std::uint64_t{1} << k) < n; ++k) {
    std::uint64_t block = std::uint64_t{1} << (k + 1);
    std::uint64_t full = (std::uint64_t{1} << k) * (n / block);
    std::uint64_t rem = n % block;
    std::uint64_t partial = rem > (std::uint64_t{1} << k) ? rem - (std::uint64_t{1} << k) : 0;
    mpq_class ones(static_cast<unsigned long>(full + partial));
    s += ones / mpq_class(mpz_class(1) << (k + 1));
  }
  return s;
}

std::uint64_t n_L(unsigned L) {
  if (L > 30) throw std::overflow_error("n_L: L too large for 64-bit result");
  return ((std::uint64_t{1} << (2 * (L + 1))) - 1) / 3;
}

FloorCheck floor_check(unsigned L) {
  if (L < 1) throw std::invalid_argument("floor_check: L must be >= 1");
  FloorCheck r;
  r.n = n_L(L);
  mpq_class s = vdc_prefix_sum(r.n);
  r.lhs = abs(s - mpq_class(static_cast<unsigned long>(r.n)) / 2);
  r.rhs = mpq_class(static_cast<unsigned long>(std::bit_width(r.n)), 8ul);
  r.rhs.canonicalize();
  r.pass = r.lhs >= r.rhs;
  return r;
}

std::vector<std::size_t> records(const ErrorTrace& t, RecordScaling s) {
  if (t.entries.empty()) throw std::invalid_argument("records: empty trace");
  std::vector<std::size_t> out;
  if (s == RecordScaling::N && t.all_exact) {
    mpq_class best;
    bool first = true;
    for (std::size_t i = 0; i < t.entries.size(); ++i) {
      if (first || t.entries[i].scaled_exact > best) {
        best = t.entries[i].scaled_exact;
        first = false;
        out.push_back(i);
      }
    }
    return out;
  }
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < t.entries.size(); ++i) {
    double v = s == RecordScaling::N ? t.entries[i].scaled_error
                                     : t.entries[i].log_scaled_error;
    if (std::isnan(v)) continue;
    if (v > best) {
      best = v;
      out.push_back(i);
    }
  }
  return out;
}

}  // namespace qmclab
