#ifndef CBDEP_MEASURES_HPP_
#define CBDEP_MEASURES_HPP_

#include <cstdint>
#include <string>

#include "cbdep/checkerboard.hpp"
#include "cbdep/convex.hpp"
#include "cbdep/ingest.hpp"

namespace cbdep {

struct MeasureResult {
  double value = 0.0;       // numerator / normalizer
  double numerator = 0.0;   // unnormalized average of phi over the kernel differences
  double normalizer = 0.0;  // value at complete dependence
  int resolution = 0;       // checkerboard / stripe resolution used
  std::string phi_descriptor;

  // One CSV row: phi,N,numerator,normalizer,value.
  std::string csv_row() const;
  static const char* csv_header();  // "phi,N,numerator,normalizer,value"
};

enum class EvalPath {
  Auto,     // sorted prefix sums for abs^p:1, moment accumulation for abs^p:2
  Generic,  // O(N^3) closed-form segment integrals
  Fast      // force the specialized path (abs^p:1 and abs^p:2 only)
};

// Normalizing constant (phi(1) + phi(-1)) / 6: the average of phi over
// differences of two independent uniform-indicator kernels. Throws
// NormalizerNotPositive when the result is <= 0.
double alpha_phi(const ConvexFunction& f);

// The convex-function dependence measure of a checkerboard copula:
// the average of phi(F_i(v) - F_k(v)) over stripe pairs (i,k) and v,
// divided by alpha_phi. Exact up to quadrature error for Custom functions.
MeasureResult lambda_phi(const CheckerboardCopula& cb, const ConvexFunction& f,
                         EvalPath path = EvalPath::Auto);

// Independent brute-force check: midpoint rule on a grid^3 lattice of
// (u1, u2, v), reading the kernel off stripe_cdf directly. Shares no
// summation code with lambda_phi.
double lambda_phi_oracle(const CheckerboardCopula& cb, const ConvexFunction& f, int grid);

// Second oracle mode: exact stripe-pair weights with order-64 Gauss-Legendre
// v-integration per segment (split at the path's sign change). Agrees with
// lambda_phi to ~1e-10 for the built-in kinds.
double lambda_phi_oracle_segment(const CheckerboardCopula& cb, const ConvexFunction& f);

// Chatterjee's rank correlation of a checkerboard:
//   6 * sum_i (1/N) integral F_i(v)^2 dv - 2,
// with per-segment exact quadratic integration. Equals
// lambda_phi(cb, abs^p:2) by the pairwise/variance expansion; the two
// implementations share no code.
double chatterjee_xi(const CheckerboardCopula& cb);

// L1 distance between conditional and unconditional distribution:
//   3 * sum_i (1/N) integral |F_i(v) - v| dv.
double zeta1(const CheckerboardCopula& cb);

// Explainability measure on raw data: observations are split into
// `stripes` groups by x-rank; the numerator averages psi over differences
// of within-stripe means of y (stripe-count weighted), the normalizer
// averages psi over all pairwise differences of y. The stripe-mean plug-in
// mirrors the checkerboard construction; no consistency theory is attached
// to it here.
MeasureResult lambda_psi(const BivariateSample& sample, const ConvexFunction& g, int stripes);

// Full estimator pipeline: rank transform, resolution rule N = max(2,
// floor(n^s)), empirical checkerboard, lambda_phi.
MeasureResult estimate(const BivariateSample& sample, const ConvexFunction& f, double s,
                       std::uint64_t seed, TiePolicy tie_policy = TiePolicy::SeededJitter,
                       EvalPath path = EvalPath::Auto);

}  // namespace cbdep

#endif  // CBDEP_MEASURES_HPP_
