#ifndef CBDEP_CONVEX_HPP_
#define CBDEP_CONVEX_HPP_

#include <array>
#include <functional>
#include <string>

namespace cbdep {

// A convex weight function for the dependence measures. Built-in kinds are
//
//   AbsPow(p)    : x -> |x|^p,        p >= 1
//   ExpSigned(c) : x -> exp(c*x) - 1, c != 0
//   ExpAbs(c)    : x -> exp(|c*x|) - 1, c != 0
//
// plus Custom evaluators. Built-ins carry closed-form segment integrals;
// Custom falls back to split Gauss-Legendre quadrature. Instances are
// immutable and cheap to copy; evaluation is reentrant.
class ConvexFunction {
 public:
  enum class Kind { AbsPow, ExpSigned, ExpAbs, Custom };

  enum class Domain {
    Unit,      // [-1,1]: arguments are differences of distribution functions
    Unbounded  // all reals: arguments are differences of conditional means
  };

  struct ValidationReport {
    enum class Failure { None, NotZeroAtZero, NotConvex, NotStrictlyConvexAtZero };
    Failure failure = Failure::None;
    // For NotConvex: (a, midpoint, b) with phi(mid) > (phi(a)+phi(b))/2 + tol.
    std::array<double, 3> witness{0.0, 0.0, 0.0};
    bool ok() const { return failure == Failure::None; }
    std::string message() const;
  };

  static ConvexFunction abs_pow(double p, Domain domain = Domain::Unit);
  static ConvexFunction exp_signed(double c, Domain domain = Domain::Unit);
  static ConvexFunction exp_abs(double c, Domain domain = Domain::Unit);
  static ConvexFunction custom(std::string descriptor, std::function<double(double)> f,
                               Domain domain = Domain::Unit);

  // Parses the CLI descriptors "abs^p:P", "expsgn:C", "expabs:C".
  // Throws InputError on anything else.
  static ConvexFunction parse(const std::string& descriptor, Domain domain = Domain::Unit);

  // Function value. Throws std::domain_error outside the declared domain.
  double operator()(double x) const;

  // Average of the function along the straight path from d0 to d1:
  //   integral_0^1 phi(d0 + t*(d1 - d0)) dt.
  // Closed form for built-ins (antiderivative of |x|^p resp. exp, with the
  // sign-change of the path handled exactly); order-16 Gauss-Legendre with a
  // split at the path's zero crossing for Custom.
  double segment_integral(double d0, double d1) const;

  // Checks phi(0)=0, midpoint convexity on a 401-point grid over the domain,
  // and strict convexity at 0 ((phi(-eps)+phi(eps))/2 > 1e-15 for
  // eps in {1e-3, 1e-2, 1e-1}).
  ValidationReport validate() const;

  // validate() that throws HypothesisError on failure.
  void require_valid() const;

  Kind kind() const { return kind_; }
  double param() const { return param_; }
  Domain domain() const { return domain_; }
  const std::string& descriptor() const { return descriptor_; }

  // Same function on the unbounded domain (for use on conditional means).
  ConvexFunction as_unbounded() const;

 private:
  ConvexFunction(Kind kind, double param, Domain domain, std::string descriptor,
                 std::function<double(double)> f);

  double eval_unchecked(double x) const;
  double quadrature_segment(double d0, double d1) const;

  Kind kind_;
  double param_;
  Domain domain_;
  std::string descriptor_;
  std::function<double(double)> fn_;  // only for Custom
};

}  // namespace cbdep

#endif  // CBDEP_CONVEX_HPP_
