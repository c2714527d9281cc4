#include "qmclab/rkhs.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace qmclab {

namespace {

double kernel_factor(double x, double y) {
  return 4.0 / 3.0 + (x * x + y * y - x - y - std::abs(x - y)) / 2.0;
}

mpq_class kernel_factor_exact(const mpq_class& x, const mpq_class& y) {
  mpq_class diff = x - y;
  if (diff < 0) diff = -diff;
  return mpq_class(4, 3) + (x * x + y * y - x - y - diff) / 2;
}

}  // namespace

double kernel(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("kernel: dimension mismatch");
  double p = 1;
  for (std::size_t j = 0; j < x.size(); ++j) p *= kernel_factor(x[j], y[j]);
  return p;
}

mpq_class kernel_exact(const std::vector<mpq_class>& x, const std::vector<mpq_class>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("kernel: dimension mismatch");
  mpq_class p = 1;
  for (std::size_t j = 0; j < x.size(); ++j) p *= kernel_factor_exact(x[j], y[j]);
  return p;
}

double wce(const std::vector<std::vector<double>>& pts, const std::vector<double>& w) {
  if (pts.size() != w.size()) throw std::invalid_argument("wce: points/weights mismatch");
  double lin = 0, quad = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    lin += w[i];
    for (std::size_t j = 0; j < pts.size(); ++j)
      quad += w[i] * w[j] * kernel(pts[i], pts[j]);
  }
  double e2 = 1 - 2 * lin + quad;
  if (e2 < 0) {
    if (e2 < -1e-12) throw std::logic_error("wce: radicand below -1e-12 (kernel bug)");
    e2 = 0;
  }
  return std::sqrt(e2);
}

OptimalWeights optimal_weights(const std::vector<std::vector<double>>& pts) {
  const std::size_t n = pts.size();
  if (n == 0) throw std::invalid_argument("optimal_weights: empty point set");
  Eigen::MatrixXd G(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double v = kernel(pts[i], pts[j]);
      G(i, j) = v;
      G(j, i) = v;
    }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
  OptimalWeights out;
  // LDLT::rcond() misses semidefinite rank deficiency (its solve maps zero
  // pivots to zero, pseudo-inverse style), so condition the check on the
  // pivot spread of D, which for a PSD Gram matrix tracks the spectrum.
  double dmin = ldlt.vectorD().minCoeff();
  double dmax = ldlt.vectorD().maxCoeff();
  out.rcond = dmax > 0 ? dmin / dmax : 0.0;
  if (ldlt.info() != Eigen::Success || !(out.rcond > 1e-14))
    throw std::runtime_error("optimal_weights: Gram matrix numerically singular (rcond = " +
                             std::to_string(out.rcond) + ")");
  Eigen::VectorXd a = ldlt.solve(Eigen::VectorXd::Ones(n));
  out.a.assign(a.data(), a.data() + n);
  double s = a.sum();
  double r2 = 1 - s;
  if (r2 < 0) {
    if (r2 < -1e-10)
      throw std::runtime_error("optimal_weights: negative residual norm (solver failure)");
    r2 = 0;
  }
  out.r_n = std::sqrt(r2);
  return out;
}

int u_eval(const ElementaryInterval& cell, const std::vector<mpq_class>& y) {
  if (cell.base != 2) throw std::invalid_argument("u_eval: base-2 cells only");
  if (cell.k.size() != y.size() || cell.c.size() != y.size())
    throw std::invalid_argument("u_eval: dimension mismatch");
  int sign = 1;
  for (std::size_t j = 0; j < y.size(); ++j) {
    mpq_class w(1);
    w /= mpq_class(mpz_class(1) << cell.k[j]);
    mpq_class L = mpz_from_u128(cell.c[j]) * w;
    if (y[j] < L || y[j] >= L + w) return 0;
    if (y[j] < L + w / 2) sign = -sign;
  }
  return sign;
}

FoolingFunction build_fooling(const std::vector<std::vector<mpq_class>>& pts, unsigned d) {
  const std::size_t n = pts.size();
  if (n == 0) throw std::invalid_argument("build_fooling: empty point set");
  if (d == 0) throw std::invalid_argument("build_fooling: d must be >= 1");
  for (const auto& x : pts)
    if (x.size() != d) throw std::invalid_argument("build_fooling: wrong point dimension");
  FoolingFunction h;
  h.d = d;
  h.m = 1;
  while ((std::uint64_t{1} << h.m) < 2 * n) ++h.m;
  if (h.m > 62) throw std::overflow_error("build_fooling: m too large");
  h.shapes = compositions(h.m, d);
  h.cells.resize(h.shapes.size());
  const std::uint64_t total = std::uint64_t{1} << h.m;
  std::vector<char> occupied(total);
  for (std::size_t s = 0; s < h.shapes.size(); ++s) {
    const auto& k = h.shapes[s];
    std::fill(occupied.begin(), occupied.end(), 0);
    for (const auto& x : pts) {
      std::uint64_t id = 0;
      for (unsigned j = 0; j < d; ++j) {
        // floor(x_j * 2^{k_j}), exact.
        mpz_class scaled = (x[j].get_num() << k[j]) / x[j].get_den();
        id = (id << k[j]) | scaled.get_ui();
      }
      occupied[id] = 1;
    }
    for (std::uint64_t id = 0; id < total; ++id) {
      if (occupied[id]) continue;
      std::vector<std::uint64_t> c(d);
      std::uint64_t rest = id;
      for (unsigned j = d; j-- > 0;) {
        c[j] = rest & ((std::uint64_t{1} << k[j]) - 1);
        rest >>= k[j];
      }
      h.cells[s].push_back(std::move(c));
    }
  }
  return h;
}

mpq_class fooling_eval(const FoolingFunction& h, const std::vector<mpq_class>& y) {
  mpq_class v = 0;
  ElementaryInterval cell;
  cell.base = 2;
  for (std::size_t s = 0; s < h.shapes.size(); ++s) {
    cell.k.assign(h.shapes[s].begin(), h.shapes[s].end());
    for (const auto& c : h.cells[s]) {
      cell.c.assign(c.begin(), c.end());
      v += u_eval(cell, y);
    }
  }
  return v;
}

mpq_class h_l2_norm_sq(const FoolingFunction& h) {
  mpq_class s = 0;
  mpq_class cell_volume(1);
  cell_volume /= mpq_class(mpz_class(1) << h.m);
  for (const auto& cells : h.cells)
    s += mpq_class(static_cast<unsigned long>(cells.size())) * cell_volume;
  return s;
}

namespace {

// Exact integral over one cell slab [L, L+w) of s(y) (y - 1{y > x}) dy,
// where s is -1 on the left half and +1 on the right.  Equals w^2/4
// whenever x lies outside the slab; inside, the indicator part cuts the
// cancellation short.
struct SlabFactors {
  mpq_class plain;    // x outside the slab
  mpq_class special;  // x inside the slab (slab index = floor(x 2^k))
};

SlabFactors slab_factors(unsigned k, const mpq_class& x, std::uint64_t cstar) {
  SlabFactors f;
  mpq_class w(1);
  w /= mpq_class(mpz_class(1) << k);
  f.plain = w * w / 4;
  mpq_class L = mpq_class(static_cast<unsigned long>(cstar)) * w;
  mpq_class mid = L + w / 2;
  if (x < mid)
    f.special = f.plain - w / 2 + (mid - x);
  else
    f.special = f.plain - (L + w - x);
  return f;
}

}  // namespace

InnerProducts h_inner_products(const FoolingFunction& h,
                               const std::vector<std::vector<mpq_class>>& pts,
                               const std::vector<mpq_class>& weights) {
  if (pts.size() != weights.size())
    throw std::invalid_argument("h_inner_products: points/weights mismatch");
  const unsigned d = h.d;
  if (d > 16) throw std::invalid_argument("h_inner_products: d too large");
  InnerProducts out;
  out.per_point.resize(pts.size());
  out.weighted_total = 0;

  std::vector<std::uint64_t> cstar(d);
  std::vector<mpq_class> mask_product(std::size_t{1} << d);
  std::vector<std::uint64_t> mask_count(std::size_t{1} << d);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& x = pts[i];
    mpq_class total = 0;
    for (std::size_t s = 0; s < h.shapes.size(); ++s) {
      const auto& k = h.shapes[s];
      if (h.cells[s].empty()) continue;
      std::vector<SlabFactors> f(d);
      for (unsigned j = 0; j < d; ++j) {
        mpz_class scaled = (x[j].get_num() << k[j]) / x[j].get_den();
        cstar[j] = scaled.get_ui();
        f[j] = slab_factors(k[j], x[j], cstar[j]);
      }
      // Cells are classified by which dimensions share the point's slab; the
      // product of factors depends only on that mask.
      const std::size_t masks = std::size_t{1} << d;
      for (std::size_t mask = 0; mask < masks; ++mask) {
        mpq_class p = 1;
        for (unsigned j = 0; j < d; ++j) p *= (mask >> j) & 1 ? f[j].special : f[j].plain;
        mask_product[mask] = p;
        mask_count[mask] = 0;
      }
      for (const auto& c : h.cells[s]) {
        std::size_t mask = 0;
        for (unsigned j = 0; j < d; ++j)
          if (c[j] == cstar[j]) mask |= std::size_t{1} << j;
        ++mask_count[mask];
      }
      for (std::size_t mask = 0; mask < masks; ++mask)
        if (mask_count[mask])
          total += mpq_class(static_cast<unsigned long>(mask_count[mask])) *
                   mask_product[mask];
    }
    out.per_point[i] = total;
    out.weighted_total += weights[i] * total;
  }
  return out;
}

std::vector<mpq_class> equal_weights(std::size_t n) {
  if (n == 0) throw std::invalid_argument("equal_weights: n must be >= 1");
  mpq_class w(1, static_cast<unsigned long>(n));
  w.canonicalize();
  return std::vector<mpq_class>(n, w);
}

unsigned long binom_ul(unsigned n, unsigned k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  unsigned long r = 1;
  for (unsigned i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

BoundCertificate certificate(const std::vector<std::vector<mpq_class>>& pts,
                             const std::vector<mpq_class>& weights) {
  constexpr double kTol = 1e-12;
  if (pts.empty()) throw std::invalid_argument("certificate: empty point set");
  if (pts.size() != weights.size())
    throw std::invalid_argument("certificate: points/weights mismatch");
  BoundCertificate cert;
  cert.n = pts.size();
  cert.d = static_cast<unsigned>(pts[0].size());

  mpq_class wsum = 0;
  for (const auto& w : weights) wsum += w;
  cert.weight_sum = wsum.get_d();
  cert.one_minus_sum = std::abs(1 - cert.weight_sum);

  std::vector<std::vector<double>> pts_d;
  pts_d.reserve(pts.size());
  for (const auto& x : pts) pts_d.push_back(to_double(x));
  std::vector<double> w_d;
  w_d.reserve(weights.size());
  for (const auto& w : weights) w_d.push_back(w.get_d());
  cert.wce_value = wce(pts_d, w_d);

  FoolingFunction h = build_fooling(pts, cert.d);
  cert.m = h.m;
  cert.shape_count = binom_ul(h.m + cert.d - 1, cert.d - 1);
  cert.h2 = h_l2_norm_sq(h);
  InnerProducts ips = h_inner_products(h, pts, weights);
  cert.inner = std::move(ips.per_point);
  cert.weighted_inner = ips.weighted_total;
  cert.lower_bound = cert.one_minus_sum;

  // (i) the error of the constant 1 is |1 - sum a|.
  if (cert.wce_value + kTol < cert.one_minus_sum) {
    cert.failed_step = "constant-function floor";
    return cert;
  }
  // (ii) Cauchy-Schwarz against the fooling function's antiderivative,
  // whose norm equals ||h||_2 and whose error is the weighted inner product.
  const double h2_d = cert.h2.get_d();
  const double ipw_d = cert.weighted_inner.get_d();
  if (cert.wce_value * std::sqrt(h2_d) + kTol < std::abs(ipw_d)) {
    cert.failed_step = "cauchy-schwarz";
    return cert;
  }
  // (iii) combine both floors: wce >= max(|1-a|, lambda a) >= lambda/(1+lambda).
  if (!(cert.weight_sum > 0) || !(ipw_d > 0)) {
    cert.failed_step = "min-max floor (lambda <= 0)";
    return cert;
  }
  cert.lambda = ipw_d / (cert.weight_sum * std::sqrt(h2_d));
  cert.minmax_floor = cert.lambda / (1 + cert.lambda);
  // The minimax identity: at a* = 1/(1+lambda) both branches agree.
  double astar = 1 / (1 + cert.lambda);
  if (std::abs((1 - astar) - cert.lambda * astar) > kTol) {
    cert.failed_step = "min-max identity";
    return cert;
  }
  if (cert.wce_value + kTol < cert.minmax_floor) {
    cert.failed_step = "min-max floor";
    return cert;
  }
  cert.lower_bound = std::max(cert.one_minus_sum, cert.minmax_floor);
  cert.ok = true;
  return cert;
}

std::vector<RateEntry> rate_trace(const PointSource& points, unsigned d,
                                  const std::vector<std::uint64_t>& ns) {
  std::vector<RateEntry> out;
  out.reserve(ns.size());
  std::vector<std::vector<double>> pts;
  for (std::uint64_t n : ns) {
    if (n > 512) throw std::invalid_argument("rate_trace: n must be <= 512");
    while (pts.size() < n) {
      auto x = points(pts.size());
      if (x.size() != d) throw std::invalid_argument("rate_trace: dimension mismatch");
      pts.push_back(to_double(x));
    }
    OptimalWeights ow =
        optimal_weights({pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(n)});
    RateEntry e;
    e.n = n;
    e.r_n = ow.r_n;
    e.normalized = ow.r_n * static_cast<double>(n) /
                   std::pow(std::log(static_cast<double>(n)), (d - 1) / 2.0);
    out.push_back(e);
  }
  return out;
}

}  // namespace qmclab
