#ifndef CBDEP_CHECKERBOARD_HPP_
#define CBDEP_CHECKERBOARD_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "cbdep/ingest.hpp"

namespace cbdep {

// Conditional distribution function of the second coordinate given that the
// first falls in stripe i: piecewise linear in v with breakpoints at j/N.
class StripeCdf {
 public:
  StripeCdf(int resolution, int stripe, std::vector<double> cumulative);

  // F_i(v) by linear interpolation between breakpoints.
  double operator()(double v) const;

  // F_i(j/N) for j in 0..N.
  double at_breakpoint(int j) const { return cum_[j]; }

  int resolution() const { return resolution_; }
  int stripe() const { return stripe_; }

 private:
  int resolution_;
  int stripe_;
  std::vector<double> cum_;  // size N+1, cum_[0] = 0, cum_[N] = 1
};

// An N x N cell-mass matrix with uniform margins: cell (i,j) holds the
// probability of ((i)/N,(i+1)/N] x ((j)/N,(j+1)/N] (0-based indices).
class CheckerboardCopula {
 public:
  enum class MarginPolicy {
    Strict,  // row/column sums must equal 1/N within 1e-9
    Relaxed  // margins only sanity-checked (mid-rank pseudo-samples)
  };

  CheckerboardCopula(int resolution, std::vector<double> mass,
                     MarginPolicy policy = MarginPolicy::Strict);

  int resolution() const { return resolution_; }
  double mass(int i, int j) const { return mass_[static_cast<std::size_t>(i) * resolution_ + j]; }
  const std::vector<double>& masses() const { return mass_; }
  bool exact_margins() const { return exact_margins_; }

  // Probability of the x-stripe; exactly 1/N on a genuine checkerboard.
  double stripe_weight(int stripe) const;

  // Conditional distribution of v given the stripe. On relaxed boards the
  // row is normalized by its own weight (an empty stripe falls back to the
  // uniform CDF; its weight is 0 so measures never see it).
  StripeCdf stripe_cdf(int stripe) const;

  // All N+1 breakpoint values of every stripe CDF in one flat array:
  // entry [i*(N+1) + j] = F_i(j/N). The workhorse layout for the measures.
  std::vector<double> breakpoint_matrix() const;

 private:
  int resolution_;
  std::vector<double> mass_;  // row-major N*N
  bool exact_margins_;
};

// Resolution rule N(n) = max(2, floor(n^s)).
int checkerboard_resolution(int n, double s);

// Empirical checkerboard copula: the mass of each cell under the bilinearly
// interpolated empirical copula of the pseudo-sample. Each observation
// contributes 1/n spread uniformly over its rank square
// ((r-1)/n, r/n] x ((s-1)/n, s/n], split exactly across cell borders.
CheckerboardCopula ecbc(const PseudoSample& pseudo, int resolution);

// Checkerboard aggregation of an analytic copula CDF: cell masses are the
// second-order differences of the CDF at the grid corners. Throws
// HypothesisError if the callable violates copula bounds by more than 1e-12.
CheckerboardCopula aggregate_cdf(const std::function<double(double, double)>& cdf,
                                 int resolution);

// Seeded random checkerboard via Sinkhorn scaling of a positive matrix;
// margins land within ~1e-13 of 1/N.
CheckerboardCopula random_doubly_stochastic(int resolution, std::uint64_t seed);

// Plain-text matrix format: first line "N", then N lines of N space-separated
// masses at 17 significant digits (bit-exact round trip).
void write_checkerboard(const CheckerboardCopula& cb, std::ostream& out);
void write_checkerboard(const CheckerboardCopula& cb, const std::string& path);
CheckerboardCopula read_checkerboard(std::istream& in);
CheckerboardCopula read_checkerboard_file(const std::string& path);

}  // namespace cbdep

#endif  // CBDEP_CHECKERBOARD_HPP_
