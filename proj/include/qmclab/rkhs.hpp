#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qmclab/errorlab.hpp"
#include "qmclab/sequences.hpp"

namespace qmclab {

// Unanchored-space kernel: prod_j [4/3 + (x_j^2 + y_j^2 - x_j - y_j
// - |x_j - y_j|) / 2].  Symmetric; integrates to 1 in each argument.
double kernel(const std::vector<double>& x, const std::vector<double>& y);
mpq_class kernel_exact(const std::vector<mpq_class>& x, const std::vector<mpq_class>& y);

// || 1 - sum_i a_i K(x_i, .) || = sqrt(1 - 2 sum a + a^T G a).  Radicands in
// (-1e-12, 0) clamp to zero; anything lower throws (kernel bug).
double wce(const std::vector<std::vector<double>>& pts, const std::vector<double>& w);

struct OptimalWeights {
  std::vector<double> a;
  double r_n = 0;
  double rcond = 0;
};

// Least-squares projection of 1 onto span{K(x_i, .)}: solves G a = 1.
// Throws (reporting the condition estimate) instead of regularizing when
// the Gram matrix is numerically singular.
OptimalWeights optimal_weights(const std::vector<std::vector<double>>& pts);

// 0 outside the cell; inside, (-1)^{number of dimensions in the left half}.
int u_eval(const ElementaryInterval& cell, const std::vector<mpq_class>& y);

// The Roth-style alternating-sign function built on the cells missed by a
// point set: for every shape |k| = m, cells[s] lists the c-vectors of the
// empty cells of the shape shapes[s].
struct FoolingFunction {
  unsigned d = 0;
  unsigned m = 0;  // smallest m with 2^m >= 2n
  std::vector<std::vector<unsigned>> shapes;
  std::vector<std::vector<std::vector<std::uint64_t>>> cells;
};

FoolingFunction build_fooling(const std::vector<std::vector<mpq_class>>& pts, unsigned d);

// h(y), exact: the signed count of empty cells covering y.
mpq_class fooling_eval(const FoolingFunction& h, const std::vector<mpq_class>& y);

// Integral of h^2: sum_k |P_k| 2^-m, by cellwise orthogonality.
mpq_class h_l2_norm_sq(const FoolingFunction& h);

struct InnerProducts {
  std::vector<mpq_class> per_point;  // integral of h(y) prod_j (y_j - 1{y_j > x_ij}) dy
  mpq_class weighted_total;          // sum_i a_i per_point[i]
};

// Exact closed-form integration of h against each point's product factor;
// each dimension of each cell contributes a piecewise-quadratic slice.
InnerProducts h_inner_products(const FoolingFunction& h,
                               const std::vector<std::vector<mpq_class>>& pts,
                               const std::vector<mpq_class>& weights);

struct BoundCertificate {
  std::uint64_t n = 0;
  unsigned d = 0;
  unsigned m = 0;
  double weight_sum = 0;       // sum a_i
  double one_minus_sum = 0;    // |1 - sum a_i|
  mpq_class h2;                // integral of h^2
  std::vector<mpq_class> inner;
  mpq_class weighted_inner;
  unsigned long shape_count = 0;  // binom(m+d-1, d-1)
  double wce_value = 0;
  double lambda = 0;        // weighted_inner / (weight_sum * sqrt(h2))
  double minmax_floor = 0;  // lambda / (1 + lambda) when lambda > 0
  double lower_bound = 0;   // best floor established by the completed steps
  bool ok = false;
  std::string failed_step;  // empty when ok
};

// Records and verifies the lower-bound chain: (i) wce >= |1 - sum a|;
// (ii) wce * sqrt(h2) >= |weighted inner product|; (iii) when lambda > 0,
// wce >= lambda/(1+lambda).  Stops at the first violated step.
BoundCertificate certificate(const std::vector<std::vector<mpq_class>>& pts,
                             const std::vector<mpq_class>& weights);

std::vector<mpq_class> equal_weights(std::size_t n);

struct RateEntry {
  std::uint64_t n = 0;
  double r_n = 0;
  double normalized = 0;  // r_n * n / (log n)^{(d-1)/2}
};

// Optimal-weight errors along prefixes of one sequence.
std::vector<RateEntry> rate_trace(const PointSource& points, unsigned d,
                                  const std::vector<std::uint64_t>& ns);

unsigned long binom_ul(unsigned n, unsigned k);

}  // namespace qmclab
