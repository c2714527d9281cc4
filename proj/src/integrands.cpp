#include "qmclab/integrands.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qmclab {

std::string IntegrandSpec::name() const {
  switch (family) {
    case Family::Linear1D: return "linear";
    case Family::BoxIndicator: return "box";
    case Family::CenteredProduct: return "centered-product";
    case Family::CenteredIndicatorProduct: return "centered-indicator";
    case Family::SimplexIndicator2D: return "simplex";
    case Family::PowerProduct: return "power";
  }
  return "?";
}

mpq_class parse_alpha(const std::string& text) {
  if (text == "sqrt2-1") {
    // floor(2^127 * sqrt(2)) - 2^127, over 2^127: a 127-bit dyadic stand-in
    // for the badly approximable sqrt(2)-1 that keeps arithmetic exact.
    mpz_class root;
    mpz_class radicand = mpz_class(1) << 255;  // 2^255 = 2 * (2^127)^2
    mpz_sqrt(root.get_mpz_t(), radicand.get_mpz_t());
    mpq_class a(root - (mpz_class(1) << 127));
    a /= mpq_class(mpz_class(1) << 127);
    return a;
  }
  if (text.find('/') != std::string::npos) {
    mpq_class q;
    if (q.set_str(text, 10) != 0)
      throw std::invalid_argument("parse_alpha: bad rational '" + text + "'");
    q.canonicalize();
    return q;
  }
  // Decimal literal: exact as written (e.g. "0.55" -> 11/20).
  auto dot = text.find('.');
  std::string digits = text;
  std::size_t frac_len = 0;
  if (dot != std::string::npos) {
    digits = text.substr(0, dot) + text.substr(dot + 1);
    frac_len = text.size() - dot - 1;
  }
  if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
    throw std::invalid_argument("parse_alpha: bad number '" + text + "'");
  mpq_class q(mpz_class(digits, 10));
  for (std::size_t i = 0; i < frac_len; ++i) q /= 10;
  q.canonicalize();
  return q;
}

namespace {

std::vector<mpq_class> parse_alpha_list(const std::string& text, unsigned d) {
  // Either a comma list "2/3,3/5" or a repeated value "2/3^3".
  auto caret = text.find('^');
  if (caret != std::string::npos) {
    mpq_class a = parse_alpha(text.substr(0, caret));
    unsigned long reps = std::stoul(text.substr(caret + 1));
    return std::vector<mpq_class>(reps, a);
  }
  std::vector<mpq_class> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_alpha(item));
  if (out.size() == 1 && d > 1) out.assign(d, out[0]);
  return out;
}

}  // namespace

IntegrandSpec parse_integrand(const std::string& text, unsigned d) {
  IntegrandSpec f;
  f.d = d;
  std::string head = text, arg;
  if (auto colon = text.find(':'); colon != std::string::npos) {
    head = text.substr(0, colon);
    arg = text.substr(colon + 1);
  }
  if (head == "linear") {
    f.family = Family::Linear1D;
  } else if (head == "box") {
    f.family = Family::BoxIndicator;
    f.alpha = parse_alpha_list(arg, d);
  } else if (head == "centered-product") {
    f.family = Family::CenteredProduct;
  } else if (head == "centered-indicator") {
    f.family = Family::CenteredIndicatorProduct;
    f.alpha = parse_alpha_list(arg, d);
  } else if (head == "simplex") {
    f.family = Family::SimplexIndicator2D;
  } else if (head == "power") {
    f.family = Family::PowerProduct;
    if (!arg.empty()) f.theta = std::stod(arg);
  } else {
    throw std::invalid_argument("parse_integrand: unknown family '" + head + "'");
  }
  if (!f.alpha.empty()) f.d = static_cast<unsigned>(f.alpha.size());
  validate(f);
  return f;
}

void validate(const IntegrandSpec& f) {
  if (f.d == 0) throw std::invalid_argument("integrand: d must be >= 1");
  switch (f.family) {
    case Family::Linear1D:
      if (f.d != 1) throw std::invalid_argument("linear: requires d = 1");
      break;
    case Family::BoxIndicator:
    case Family::CenteredIndicatorProduct:
      if (f.alpha.size() != f.d)
        throw std::invalid_argument("indicator: needs one alpha per dimension");
      for (const auto& a : f.alpha)
        if (a <= 0 || a >= 1) throw std::invalid_argument("indicator: alpha must be in (0,1)");
      break;
    case Family::SimplexIndicator2D:
      if (f.d != 2) throw std::invalid_argument("simplex: requires d = 2");
      break;
    case Family::PowerProduct:
      if (!(f.theta > 0.0) || !(f.theta < 1.0))
        throw std::invalid_argument("power: theta must be in (0,1)");
      break;
    case Family::CenteredProduct:
      break;
  }
}

bool exact_capable(const IntegrandSpec& f) {
  return f.family != Family::PowerProduct;
}

mpq_class evaluate_exact(const IntegrandSpec& f, const std::vector<mpq_class>& x) {
  if (x.size() != f.d) throw std::invalid_argument("evaluate: wrong point dimension");
  switch (f.family) {
    case Family::Linear1D:
      return x[0];
    case Family::BoxIndicator: {
      for (unsigned j = 0; j < f.d; ++j)
        if (x[j] >= f.alpha[j]) return 0;
      return 1;
    }
    case Family::CenteredProduct: {
      mpq_class p = 1;
      for (unsigned j = 0; j < f.d; ++j) p *= x[j] - mpq_class(1, 2);
      return p;
    }
    case Family::CenteredIndicatorProduct: {
      mpq_class p = 1;
      for (unsigned j = 0; j < f.d; ++j)
        p *= (x[j] < f.alpha[j] ? mpq_class(1) : mpq_class(0)) - f.alpha[j];
      return p;
    }
    case Family::SimplexIndicator2D:
      return x[0] + x[1] < 1 ? 1 : 0;
    case Family::PowerProduct:
      throw std::logic_error("power product has no exact evaluation");
  }
  throw std::logic_error("unreachable");
}

double evaluate(const IntegrandSpec& f, const std::vector<double>& x) {
  if (x.size() != f.d) throw std::invalid_argument("evaluate: wrong point dimension");
  switch (f.family) {
    case Family::Linear1D:
      return x[0];
    case Family::BoxIndicator: {
      for (unsigned j = 0; j < f.d; ++j)
        if (!(x[j] < f.alpha[j].get_d())) return 0.0;
      return 1.0;
    }
    case Family::CenteredProduct: {
      double p = 1;
      for (double xj : x) p *= xj - 0.5;
      return p;
    }
    case Family::CenteredIndicatorProduct: {
      double p = 1;
      for (unsigned j = 0; j < f.d; ++j) {
        double a = f.alpha[j].get_d();
        p *= (x[j] < a ? 1.0 : 0.0) - a;
      }
      return p;
    }
    case Family::SimplexIndicator2D:
      return x[0] + x[1] < 1.0 ? 1.0 : 0.0;
    case Family::PowerProduct: {
      double shift = 1.0 / (1.0 + f.theta);
      double p = 1;
      for (double xj : x) p *= std::pow(xj, f.theta) - shift;
      return p;
    }
  }
  throw std::logic_error("unreachable");
}

mpq_class true_mean(const IntegrandSpec& f) {
  switch (f.family) {
    case Family::Linear1D:
      return mpq_class(1, 2);
    case Family::BoxIndicator: {
      mpq_class p = 1;
      for (const auto& a : f.alpha) p *= a;
      return p;
    }
    case Family::CenteredProduct:
    case Family::CenteredIndicatorProduct:
    case Family::PowerProduct:
      return 0;
    case Family::SimplexIndicator2D:
      return mpq_class(1, 2);
  }
  throw std::logic_error("unreachable");
}

}  // namespace qmclab
