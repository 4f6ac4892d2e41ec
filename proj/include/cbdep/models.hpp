#ifndef CBDEP_MODELS_HPP_
#define CBDEP_MODELS_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cbdep/checkerboard.hpp"
#include "cbdep/convex.hpp"
#include "cbdep/measures.hpp"

namespace cbdep {

// Analytic bivariate copula families with exact CDFs and exact samplers.
// Descriptors: indep, como, counter, mo:A,B, fgm:T, frechet:A.
class CopulaModel {
 public:
  enum class Family { Independence, Comonotone, Countermonotone, MarshallOlkin, Fgm, Frechet };

  static CopulaModel independence();
  static CopulaModel comonotone();
  static CopulaModel countermonotone();
  static CopulaModel marshall_olkin(double alpha, double beta);  // alpha, beta in [0,1]
  static CopulaModel fgm(double theta);                          // theta in [-1,1]
  static CopulaModel frechet(double alpha);                      // alpha in [0,1]
  static CopulaModel parse(const std::string& descriptor);

  double cdf(double u, double v) const;

  // Deterministic sample of n pairs for the given seed. Marshall-Olkin uses
  // the three-uniform max construction with exact limit samplers at
  // degenerate exponents; FGM inverts its conditional kernel in closed form;
  // Frechet draws the mixture component first.
  std::vector<std::pair<double, double>> sample(int n, std::uint64_t seed) const;

  Family family() const { return family_; }
  double param_a() const { return a_; }
  double param_b() const { return b_; }
  const std::string& descriptor() const { return descriptor_; }

 private:
  CopulaModel(Family family, double a, double b);

  Family family_;
  double a_ = 0.0;
  double b_ = 0.0;
  std::string descriptor_;
};

// Checkerboard aggregation of the model's CDF at the given resolution.
CheckerboardCopula aggregate(const CopulaModel& model, int resolution);

struct TrueValue {
  double value = 0.0;           // lambda_phi at the fine resolution
  double error_estimate = 0.0;  // |lambda(N) - lambda(N/2)|
  bool converged = true;        // error_estimate <= 1e-2
};

// Ground truth by fine-grid aggregation with a two-resolution error
// estimate. n_fine must be a power of two >= 128.
TrueValue true_lambda(const CopulaModel& model, const ConvexFunction& f, int n_fine,
                      EvalPath path = EvalPath::Auto);

}  // namespace cbdep

#endif  // CBDEP_MODELS_HPP_
