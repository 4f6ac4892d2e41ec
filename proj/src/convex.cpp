#include "cbdep/convex.hpp"

#include <cmath>
#include <cstdlib>
#include <utility>

#include "cbdep/errors.hpp"
#include "cbdep/numeric.hpp"

namespace cbdep {

namespace {

constexpr double kZeroAtZeroTol = 1e-14;
constexpr double kMidpointConvexityTol = 1e-12;
constexpr double kStrictAtZeroFloor = 1e-15;
constexpr int kConvexityGridPoints = 401;
constexpr double kUnboundedGridHalfWidth = 8.0;
constexpr int kCustomQuadratureOrder = 16;

double abs_pow(double x, double p) {
  const double a = std::abs(x);
  if (p == 1.0) return a;
  if (p == 2.0) return a * a;
  if (p == 3.0) return a * a * a;
  return std::pow(a, p);
}

// Antiderivative of |x|^p: sgn(x) * |x|^(p+1) / (p+1).
double abs_pow_antideriv(double x, double p) {
  const double a = std::abs(x);
  double v;
  if (p == 1.0) {
    v = a * a / 2.0;
  } else if (p == 2.0) {
    v = a * a * a / 3.0;
  } else if (p == 3.0) {
    v = a * a * a * a / 4.0;
  } else {
    v = std::pow(a, p + 1.0) / (p + 1.0);
  }
  return x < 0.0 ? -v : v;
}

// expm1(z)/z, continuous through z = 0.
double expm1_over_z(double z) {
  if (std::abs(z) < 1e-5) {
    return 1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0));
  }
  return std::expm1(z) / z;
}

// integral_0^1 (exp(c*(d0 + t*(d1-d0))) - 1) dt, stable for small spans.
double exp_signed_segment(double c, double d0, double d1) {
  const double delta = d1 - d0;
  return std::exp(c * d0) * expm1_over_z(c * delta) - 1.0;
}

}  // namespace

std::string ConvexFunction::ValidationReport::message() const {
  switch (failure) {
    case Failure::None:
      return "valid";
    case Failure::NotZeroAtZero:
      return "phi(0) != 0 (|phi(0)| > 1e-14)";
    case Failure::NotConvex:
      return "midpoint convexity violated at (" + format_double(witness[0]) + ", " +
             format_double(witness[1]) + ", " + format_double(witness[2]) + ")";
    case Failure::NotStrictlyConvexAtZero:
      return "not strictly convex at 0: (phi(-eps)+phi(eps))/2 <= 1e-15 for eps = " +
             format_double(witness[0]);
  }
  return "unknown";
}

ConvexFunction::ConvexFunction(Kind kind, double param, Domain domain, std::string descriptor,
                               std::function<double(double)> f)
    : kind_(kind),
      param_(param),
      domain_(domain),
      descriptor_(std::move(descriptor)),
      fn_(std::move(f)) {}

ConvexFunction ConvexFunction::abs_pow(double p, Domain domain) {
  if (!(p >= 1.0) || !std::isfinite(p)) {
    throw InputError("abs^p requires p >= 1, got " + format_double(p));
  }
  return ConvexFunction(Kind::AbsPow, p, domain, "abs^p:" + format_double(p), nullptr);
}

ConvexFunction ConvexFunction::exp_signed(double c, Domain domain) {
  if (c == 0.0 || !std::isfinite(c)) {
    throw InputError("expsgn requires c != 0");
  }
  return ConvexFunction(Kind::ExpSigned, c, domain, "expsgn:" + format_double(c), nullptr);
}

ConvexFunction ConvexFunction::exp_abs(double c, Domain domain) {
  if (c == 0.0 || !std::isfinite(c)) {
    throw InputError("expabs requires c != 0");
  }
  return ConvexFunction(Kind::ExpAbs, c, domain, "expabs:" + format_double(c), nullptr);
}

ConvexFunction ConvexFunction::custom(std::string descriptor, std::function<double(double)> f,
                                      Domain domain) {
  if (!f) throw InputError("custom convex function requires an evaluator");
  return ConvexFunction(Kind::Custom, 0.0, domain, std::move(descriptor), std::move(f));
}

ConvexFunction ConvexFunction::parse(const std::string& descriptor, Domain domain) {
  const auto colon = descriptor.find(':');
  if (colon == std::string::npos) {
    throw InputError("bad convex-function descriptor '" + descriptor +
                     "' (expected abs^p:P, expsgn:C or expabs:C)");
  }
  const std::string head = descriptor.substr(0, colon);
  const std::string tail = descriptor.substr(colon + 1);
  char* end = nullptr;
  const double value = std::strtod(tail.c_str(), &end);
  if (end == tail.c_str() || *end != '\0' || !std::isfinite(value)) {
    throw InputError("bad parameter in descriptor '" + descriptor + "'");
  }
  if (head == "abs^p") return abs_pow(value, domain);
  if (head == "expsgn") return exp_signed(value, domain);
  if (head == "expabs") return exp_abs(value, domain);
  throw InputError("unknown convex-function kind '" + head + "'");
}

ConvexFunction ConvexFunction::as_unbounded() const {
  ConvexFunction copy = *this;
  copy.domain_ = Domain::Unbounded;
  return copy;
}

double ConvexFunction::eval_unchecked(double x) const {
  switch (kind_) {
    case Kind::AbsPow:
      return cbdep::abs_pow(x, param_);
    case Kind::ExpSigned:
      return std::expm1(param_ * x);
    case Kind::ExpAbs:
      return std::expm1(std::abs(param_ * x));
    case Kind::Custom:
      return fn_(x);
  }
  return 0.0;
}

double ConvexFunction::operator()(double x) const {
  if (domain_ == Domain::Unit && std::abs(x) > 1.0 + 1e-9) {
    throw std::domain_error("argument " + format_double(x) + " outside [-1,1] for " +
                            descriptor_);
  }
  return eval_unchecked(x);
}

double ConvexFunction::quadrature_segment(double d0, double d1) const {
  const auto& rule = gauss_legendre(kCustomQuadratureOrder);
  auto average_on = [&](double a, double b) {
    KahanSum acc;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      acc.add(rule.weights[q] * eval_unchecked(a + rule.nodes[q] * (b - a)));
    }
    return acc.value();
  };
  if (d0 * d1 < 0.0) {
    // Split where the path crosses zero; removes the kink of |.|-shaped
    // evaluators from both quadrature panels.
    const double tstar = d0 / (d0 - d1);
    return tstar * average_on(d0, 0.0) + (1.0 - tstar) * average_on(0.0, d1);
  }
  return average_on(d0, d1);
}

double ConvexFunction::segment_integral(double d0, double d1) const {
  const double delta = d1 - d0;
  if (std::abs(delta) < 1e-12) {
    return 0.5 * (eval_unchecked(d0) + eval_unchecked(d1));
  }
  switch (kind_) {
    case Kind::AbsPow: {
      const double p = param_;
      if (d0 * d1 > 0.0 && std::abs(delta) < 1e-4 * std::max(std::abs(d0), std::abs(d1))) {
        // Narrow same-sign span: the antiderivative difference would cancel
        // catastrophically; a midpoint expansion is exact to ~1e-16 here.
        const double m = 0.5 * (d0 + d1);
        const double am = std::abs(m);
        double v = cbdep::abs_pow(m, p);
        if (p != 1.0) {
          v += p * (p - 1.0) * std::pow(am, p - 2.0) * delta * delta / 24.0;
          if (p != 2.0 && p != 3.0) {
            v += p * (p - 1.0) * (p - 2.0) * (p - 3.0) * std::pow(am, p - 4.0) *
                 delta * delta * delta * delta / 1920.0;
          }
        }
        return v;
      }
      return (abs_pow_antideriv(d1, p) - abs_pow_antideriv(d0, p)) / delta;
    }
    case Kind::ExpSigned:
      return exp_signed_segment(param_, d0, d1);
    case Kind::ExpAbs: {
      const double a = std::abs(param_);
      if (d0 >= 0.0 && d1 >= 0.0) return exp_signed_segment(a, d0, d1);
      if (d0 <= 0.0 && d1 <= 0.0) return exp_signed_segment(a, -d0, -d1);
      // Path changes sign: antiderivative of exp(a|x|) is
      // sgn(x)*expm1(a|x|)/a, and the two endpoint terms add constructively.
      const double g1 = (d1 < 0.0 ? -1.0 : 1.0) * std::expm1(a * std::abs(d1)) / a;
      const double g0 = (d0 < 0.0 ? -1.0 : 1.0) * std::expm1(a * std::abs(d0)) / a;
      return (g1 - g0) / delta - 1.0;
    }
    case Kind::Custom:
      return quadrature_segment(d0, d1);
  }
  return 0.0;
}

ConvexFunction::ValidationReport ConvexFunction::validate() const {
  ValidationReport report;
  const double at_zero = eval_unchecked(0.0);
  if (std::abs(at_zero) > kZeroAtZeroTol) {
    report.failure = ValidationReport::Failure::NotZeroAtZero;
    return report;
  }

  const double half_width = domain_ == Domain::Unit ? 1.0 : kUnboundedGridHalfWidth;
  std::vector<double> grid(kConvexityGridPoints);
  std::vector<double> values(kConvexityGridPoints);
  for (int g = 0; g < kConvexityGridPoints; ++g) {
    grid[g] = -half_width + 2.0 * half_width * g / (kConvexityGridPoints - 1);
    values[g] = eval_unchecked(grid[g]);
  }
  for (int a = 0; a < kConvexityGridPoints; ++a) {
    for (int b = a + 1; b < kConvexityGridPoints; ++b) {
      const double mid = 0.5 * (grid[a] + grid[b]);
      const double lhs = eval_unchecked(mid);
      const double rhs = 0.5 * (values[a] + values[b]);
      if (lhs > rhs + kMidpointConvexityTol) {
        report.failure = ValidationReport::Failure::NotConvex;
        report.witness = {grid[a], mid, grid[b]};
        return report;
      }
    }
  }

  for (double eps : {1e-3, 1e-2, 1e-1}) {
    if (0.5 * (eval_unchecked(-eps) + eval_unchecked(eps)) <= kStrictAtZeroFloor) {
      report.failure = ValidationReport::Failure::NotStrictlyConvexAtZero;
      report.witness = {eps, 0.0, 0.0};
      return report;
    }
  }
  return report;
}

void ConvexFunction::require_valid() const {
  const ValidationReport report = validate();
  if (!report.ok()) {
    throw HypothesisError("convex function " + descriptor_ + " rejected: " + report.message());
  }
}

}  // namespace cbdep
