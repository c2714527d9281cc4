#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmclab/errorlab.hpp"
#include "qmclab/rkhs.hpp"
#include "qmclab/sequences.hpp"

using namespace qmclab;

namespace {

std::vector<DirectionNumberRecord> table() {
  static auto t = load_direction_numbers_file(default_direction_file());
  return t;
}

template <typename Fn>
std::string thrown_message(Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

mpq_class k1(const mpq_class& x, const mpq_class& y) { return kernel_exact({x}, {y}); }

// Simpson's rule, exact for the piecewise-quadratic kernel slices.
mpq_class simpson(const mpq_class& a, const mpq_class& b, const mpq_class& x) {
  mpq_class mid = (a + b) / 2;
  return (b - a) * (k1(x, a) + 4 * k1(x, mid) + k1(x, b)) / 6;
}

std::vector<std::vector<mpq_class>> vdc_prefix(std::uint64_t n) {
  std::vector<std::vector<mpq_class>> pts;
  for (std::uint64_t i = 0; i < n; ++i) pts.push_back({to_mpq(radical_inverse(i, 2))});
  return pts;
}

// Midpoint quadrature on the level-(m+1) grid.  h is constant on each grid
// cell and every per-dimension factor is linear there (the sample points are
// grid-aligned), so this reproduces the closed-form integrals exactly.
mpq_class grid_ip(const FoolingFunction& h, const std::vector<mpq_class>& x) {
  unsigned G_log = h.m + 1;
  std::uint64_t G = std::uint64_t{1} << G_log;
  mpq_class cellvol(1);
  for (unsigned j = 0; j < h.d; ++j) cellvol /= mpz_class(G);
  std::vector<std::uint64_t> idx(h.d, 0);
  mpq_class total = 0;
  while (true) {
    std::vector<mpq_class> mid(h.d);
    for (unsigned j = 0; j < h.d; ++j)
      mid[j] = mpq_class(2 * idx[j] + 1) / mpq_class(2 * mpz_class(G));
    mpq_class hv = fooling_eval(h, mid);
    if (hv != 0) {
      mpq_class factor = 1;
      for (unsigned j = 0; j < h.d; ++j) factor *= mid[j] - (mid[j] > x[j] ? 1 : 0);
      total += hv * factor * cellvol;
    }
    unsigned j = 0;
    for (; j < h.d; ++j) {
      if (++idx[j] < G) break;
      idx[j] = 0;
    }
    if (j == h.d) break;
  }
  return total;
}

}  // namespace

TEST_CASE("kernel values and symmetry") {
  CHECK(k1(0, 0) == mpq_class(4, 3));
  CHECK(k1(mpq_class(1, 2), mpq_class(1, 2)) == mpq_class(13, 12));
  CHECK(k1(0, mpq_class(1, 2)) == mpq_class(23, 24));
  CHECK(k1(mpq_class(1, 2), 0) == mpq_class(23, 24));
  CHECK(kernel_exact({mpq_class(1, 4), mpq_class(2, 3)}, {mpq_class(1, 8), mpq_class(1, 3)}) ==
        kernel_exact({mpq_class(1, 8), mpq_class(1, 3)}, {mpq_class(1, 4), mpq_class(2, 3)}));
  // float evaluation agrees with the exact rational kernel
  double dv = kernel({0.25, 0.5}, {0.75, 0.125});
  mpq_class qv = kernel_exact({mpq_class(1, 4), mpq_class(1, 2)},
                              {mpq_class(3, 4), mpq_class(1, 8)});
  CHECK(dv == doctest::Approx(qv.get_d()).epsilon(1e-14));
}

TEST_CASE("kernel integrates to one in each argument") {
  for (const mpq_class& x :
       {mpq_class(0), mpq_class(1, 4), mpq_class(1, 3), mpq_class(1, 2), mpq_class(9, 10)}) {
    mpq_class integral = (x == 0) ? simpson(0, 1, x) : simpson(0, x, x) + simpson(x, 1, x);
    CHECK(integral == 1);
  }
}

TEST_CASE("worst-case error closed form") {
  std::vector<std::vector<double>> half{{0.5}};
  CHECK(wce(half, {0.0}) == doctest::Approx(1.0));
  CHECK(wce(half, {1.0}) == doctest::Approx(std::sqrt(1.0 / 12)));
  std::vector<std::vector<double>> two{{0.0}, {0.5}};
  CHECK(wce(two, {0.5, 0.5}) == doctest::Approx(std::sqrt(1.0 / 12)));
}

TEST_CASE("optimal weights") {
  SUBCASE("single point at the center") {
    auto ow = optimal_weights({{0.5}});
    REQUIRE(ow.a.size() == 1);
    CHECK(ow.a[0] == doctest::Approx(12.0 / 13).epsilon(1e-12));
    CHECK(ow.r_n == doctest::Approx(std::sqrt(1.0 / 13)).epsilon(1e-12));
  }
  SUBCASE("single point at the origin") {
    auto ow = optimal_weights({{0.0}});
    CHECK(ow.a[0] == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(ow.r_n == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("two points") {
    auto ow = optimal_weights({{0.0}, {0.5}});
    CHECK(ow.a[0] == doctest::Approx(24.0 / 101).epsilon(1e-12));
    CHECK(ow.a[1] == doctest::Approx(72.0 / 101).epsilon(1e-12));
    CHECK(ow.r_n * ow.r_n == doctest::Approx(5.0 / 101).epsilon(1e-12));
    // optimal weights can only improve on equal ones
    CHECK(ow.r_n <= wce({{0.0}, {0.5}}, {0.5, 0.5}) + 1e-15);
  }
  SUBCASE("duplicate points are rejected, not regularized") {
    auto msg = thrown_message([] { optimal_weights({{0.25, 0.5}, {0.25, 0.5}}); });
    CHECK(msg.find("singular") != std::string::npos);
  }
}

TEST_CASE("Gram matrices are numerically positive semidefinite") {
  auto g = sobol_generator_set(table(), 2, 10);
  auto pts_q = sobol_points_mpq(32, g);
  std::vector<std::vector<double>> pts;
  for (const auto& x : pts_q) pts.push_back(to_double(x));
  Eigen::MatrixXd G(32, 32);
  for (int i = 0; i < 32; ++i)
    for (int j = 0; j < 32; ++j) G(i, j) = kernel(pts[i], pts[j]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
  CHECK(es.eigenvalues().minCoeff() >= -1e-10);
}

TEST_CASE("sign pattern of the cell bump") {
  ElementaryInterval cell{{1, 1}, {0, 0}, 2};
  CHECK(u_eval(cell, {mpq_class(1, 8), mpq_class(1, 8)}) == 1);   // both left halves
  CHECK(u_eval(cell, {mpq_class(1, 8), mpq_class(3, 8)}) == -1);  // one right half
  CHECK(u_eval(cell, {mpq_class(3, 8), mpq_class(3, 8)}) == 1);
  CHECK(u_eval(cell, {mpq_class(3, 4), mpq_class(1, 8)}) == 0);  // outside
  ElementaryInterval whole{{0}, {0}, 2};
  CHECK(u_eval(whole, {mpq_class(1, 4)}) == -1);
  CHECK(u_eval(whole, {mpq_class(3, 4)}) == 1);
}

TEST_CASE("fooling function construction") {
  SUBCASE("single point at the origin, d=1") {
    auto h = build_fooling({{mpq_class(0)}}, 1);
    CHECK(h.m == 1);
    REQUIRE(h.shapes.size() == 1);
    CHECK(h.shapes[0] == std::vector<unsigned>{1});
    REQUIRE(h.cells[0].size() == 1);
    CHECK(h.cells[0][0] == std::vector<std::uint64_t>{1});
    CHECK(h_l2_norm_sq(h) == mpq_class(1, 2));
  }
  SUBCASE("shape census and the empty-cell pigeonhole") {
    auto g = sobol_generator_set(table(), 2, 10);
    auto pts = sobol_points_mpq(6, g);
    auto h = build_fooling(pts, 2);
    CHECK(h.m == 4);  // smallest m with 2^m >= 12
    CHECK(h.shapes.size() == binom_ul(h.m + 1, 1));
    REQUIRE(h.cells.size() == h.shapes.size());
    for (const auto& empty : h.cells) {
      CHECK(empty.size() >= (1u << h.m) - 6);
      CHECK(empty.size() < (1u << h.m));
    }
  }
}

TEST_CASE("fooling function golden: two points in two dimensions") {
  std::vector<std::vector<mpq_class>> pts{{mpq_class(1, 8), mpq_class(3, 8)},
                                          {mpq_class(5, 8), mpq_class(7, 8)}};
  auto h = build_fooling(pts, 2);
  CHECK(h.m == 2);
  CHECK(h.shapes.size() == 3);
  CHECK(h_l2_norm_sq(h) == mpq_class(3, 2));

  SUBCASE("midpoint-grid quadrature reproduces the closed forms") {
    // h is constant on level-(m+1) grid cells: mean zero, matching L2 norm.
    std::uint64_t G = 8;
    mpq_class sum = 0, sum2 = 0;
    for (std::uint64_t i = 0; i < G; ++i)
      for (std::uint64_t j = 0; j < G; ++j) {
        mpq_class hv = fooling_eval(
            h, {mpq_class(2 * i + 1) / 16, mpq_class(2 * j + 1) / 16});
        sum += hv;
        sum2 += hv * hv;
      }
    CHECK(sum == 0);
    CHECK(sum2 / (G * G) == mpq_class(3, 2));
  }

  SUBCASE("exact inner products") {
    auto ips = h_inner_products(h, pts, equal_weights(2));
    REQUIRE(ips.per_point.size() == 2);
    CHECK(ips.per_point[0] == mpq_class(-1, 128));
    CHECK(ips.per_point[1] == mpq_class(-1, 128));
    CHECK(ips.weighted_total == mpq_class(-1, 128));
    CHECK(grid_ip(h, pts[0]) == mpq_class(-1, 128));
    CHECK(grid_ip(h, pts[1]) == mpq_class(-1, 128));
  }
}

TEST_CASE("inner product against a single cell bump") {
  // h = u on [1/2, 1): the integral of h(y) (y - 1{y > x}) has value w^2/4
  // for x outside the cell and -w^2/4 for x inside either half.
  FoolingFunction h;
  h.d = 1;
  h.m = 1;
  h.shapes = {{1}};
  h.cells = {{{1}}};
  auto at = [&](const mpq_class& x) {
    return h_inner_products(h, {{x}}, equal_weights(1)).per_point[0];
  };
  CHECK(at(mpq_class(1, 4)) == mpq_class(1, 16));
  CHECK(at(mpq_class(5, 8)) == mpq_class(-1, 16));
  CHECK(at(mpq_class(7, 8)) == mpq_class(-1, 16));
}

TEST_CASE("van der Corput prefixes: every per-point inner product matches the census formula") {
  for (std::uint64_t n = 1; n <= 8; ++n) {
    auto pts = vdc_prefix(n);
    auto h = build_fooling(pts, 1);
    mpz_class empty = (mpz_class(1) << h.m) - n;
    mpq_class expect = mpq_class(empty) / (mpz_class(1) << (2 * (h.m + 1)));
    auto ips = h_inner_products(h, pts, equal_weights(n));
    for (const auto& ip : ips.per_point) CHECK(ip == expect);
    CHECK(ips.weighted_total == expect);
  }
}

TEST_CASE("lower-bound certificate") {
  SUBCASE("van der Corput, n=8, d=1: full chain holds") {
    auto cert = certificate(vdc_prefix(8), equal_weights(8));
    CHECK(cert.ok);
    CHECK(cert.failed_step.empty());
    CHECK(cert.m == 4);
    CHECK(cert.shape_count == 1);
    CHECK(cert.h2 == mpq_class(1, 2));
    for (const auto& ip : cert.inner) CHECK(ip == mpq_class(1, 128));
    CHECK(cert.weighted_inner == mpq_class(1, 128));
    CHECK(cert.one_minus_sum == 0.0);
    CHECK(cert.lambda == doctest::Approx(0.011048543).epsilon(1e-6));
    CHECK(cert.minmax_floor == doctest::Approx(0.010927807).epsilon(1e-6));
    CHECK(cert.lower_bound == cert.minmax_floor);
    CHECK(cert.wce_value >= cert.lower_bound);
  }
  SUBCASE("Sobol', n=16, d=2: the weighted inner product is negative") {
    auto g = sobol_generator_set(table(), 2, 16);
    auto cert = certificate(sobol_points_mpq(16, g), equal_weights(16));
    CHECK_FALSE(cert.ok);
    CHECK(cert.failed_step.find("lambda") != std::string::npos);
    CHECK(cert.m == 5);
    CHECK(cert.shape_count == 6);
    CHECK(cert.h2 == 3);
    CHECK(cert.weighted_inner == mpq_class(-1, 512));
    const char* ips[] = {"3/512",   "1/512",   "0",       "0",       "-1/512",  "-1/512",
                         "-3/1024", "-1/1024", "-3/2048", "-9/2048", "-5/1024", "-5/1024",
                         "-5/1024", "-5/1024", "-9/2048", "-3/2048"};
    REQUIRE(cert.inner.size() == 16);
    for (std::size_t i = 0; i < 16; ++i) {
      mpq_class want(ips[i]);
      want.canonicalize();
      CHECK(cert.inner[i] == want);
    }
    // steps (i) and (ii) still hold: the failure is the sign premise alone
    CHECK(cert.wce_value >= cert.one_minus_sum);
    CHECK(cert.wce_value * std::sqrt(cert.h2.get_d()) >=
          std::abs(cert.weighted_inner.get_d()));
    CHECK(cert.lower_bound == cert.one_minus_sum);
  }
  SUBCASE("Sobol', n=8, d=3: full chain holds") {
    auto g = sobol_generator_set(table(), 3, 16);
    auto cert = certificate(sobol_points_mpq(8, g), equal_weights(8));
    CHECK(cert.ok);
    CHECK(cert.m == 4);
    CHECK(cert.shape_count == 15);
    CHECK(cert.h2 == mpq_class(15, 2));
    CHECK(cert.weighted_inner == mpq_class(35, 16384));
    CHECK(cert.lambda == doctest::Approx(0.00078004108).epsilon(1e-6));
    CHECK(cert.minmax_floor == doctest::Approx(0.00077943309).epsilon(1e-6));
    // some per-point inner products are negative even though the chain holds
    bool any_negative = false;
    for (const auto& ip : cert.inner) any_negative = any_negative || ip < 0;
    CHECK(any_negative);
  }
}

TEST_CASE("equal-weight worst-case error halves with each doubling of van der Corput") {
  auto pts_n = [](std::uint64_t n) {
    std::vector<std::vector<double>> pts;
    for (std::uint64_t i = 0; i < n; ++i)
      pts.push_back({to_mpq(radical_inverse(i, 2)).get_d()});
    return pts;
  };
  double prev = 0;
  for (unsigned m = 4; m <= 10; ++m) {
    std::uint64_t n = std::uint64_t{1} << m;
    double w = wce(pts_n(n), std::vector<double>(n, 1.0 / static_cast<double>(n)));
    if (m > 4) {
      double ratio = w / prev;
      CHECK(ratio >= 0.4);
      CHECK(ratio <= 0.6);
    }
    prev = w;
  }
}

TEST_CASE("optimal-error trace along a sequence") {
  auto g = sobol_generator_set(table(), 2, 16);
  auto trace = rate_trace(make_sobol_source(g), 2, {4, 8, 16, 32, 64});
  REQUIRE(trace.size() == 5);
  double last = 1.0;
  for (const auto& e : trace) {
    CHECK(e.r_n > 0);
    CHECK(e.r_n < last);
    CHECK(e.normalized > 0);
    last = e.r_n;
  }
  CHECK(trace[0].n == 4);
  CHECK(trace[4].n == 64);
  CHECK_THROWS_AS(rate_trace(make_sobol_source(g), 2, {1024}), std::invalid_argument);
}

TEST_CASE("binomial helper and random point determinism") {
  CHECK(binom_ul(6, 2) == 15);
  CHECK(binom_ul(10, 5) == 252);
  CHECK(binom_ul(4, 0) == 1);
  auto a = random_points_mpq(5, 3, 12345);
  auto b = random_points_mpq(5, 3, 12345);
  auto c = random_points_mpq(5, 3, 54321);
  CHECK(a == b);
  CHECK(a != c);
  for (const auto& x : a)
    for (const auto& v : x) {
      CHECK(v >= 0);
      CHECK(v < 1);
    }
}
