#pragma once

#include <string>
#include <vector>

#include <gmpxx.h>

namespace qmclab {

enum class Family {
  Linear1D,                  // f(x) = x on [0,1)
  BoxIndicator,              // 1{x_j < alpha_j for all j}
  CenteredProduct,           // prod_j (x_j - 1/2)
  CenteredIndicatorProduct,  // prod_j (1{x_j < alpha_j} - alpha_j)
  SimplexIndicator2D,        // 1{x_1 + x_2 < 1}, d = 2
  PowerProduct,              // prod_j (x_j^theta - 1/(1+theta)), theta in (0,1)
};

struct IntegrandSpec {
  Family family = Family::Linear1D;
  unsigned d = 1;
  std::vector<mpq_class> alpha;  // BoxIndicator / CenteredIndicatorProduct
  double theta = 0.5;            // PowerProduct

  std::string name() const;
};

// Parses a rational like "2/3", a decimal like "0.5", or "sqrt2-1" (the
// 127-bit dyadic truncation of sqrt(2)-1, so exact arithmetic stays exact).
mpq_class parse_alpha(const std::string& text);

// CLI integrand strings: "linear", "box:2/3,3/5" (or "box:2/3^3"),
// "centered-product", "centered-indicator:2/3,3/5", "simplex", "power:0.5".
IntegrandSpec parse_integrand(const std::string& text, unsigned d);

// Throws std::invalid_argument when the spec violates its family's
// constraints (dimension, alpha in (0,1), theta > 0).
void validate(const IntegrandSpec& f);

bool exact_capable(const IntegrandSpec& f);

// Exact value at an exact point; throws std::logic_error for PowerProduct.
mpq_class evaluate_exact(const IntegrandSpec& f, const std::vector<mpq_class>& x);

double evaluate(const IntegrandSpec& f, const std::vector<double>& x);

// The exact mean over [0,1)^d (each PowerProduct factor is centered, so its
// mean is exactly zero).
mpq_class true_mean(const IntegrandSpec& f);

}  // namespace qmclab
