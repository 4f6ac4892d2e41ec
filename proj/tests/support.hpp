#ifndef CBDEP_TESTS_SUPPORT_HPP_
#define CBDEP_TESTS_SUPPORT_HPP_

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "cbdep/checkerboard.hpp"
#include "cbdep/convex.hpp"
#include "cbdep/ingest.hpp"
#include "cbdep/numeric.hpp"
#include "cbdep/rng.hpp"

namespace cbdep_test {

// Absolute-tolerance comparison; doctest's Approx is relative.
inline bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// The nine convex-function configurations of the simulation study.
inline std::vector<cbdep::ConvexFunction> builtin_grid() {
  using cbdep::ConvexFunction;
  std::vector<ConvexFunction> fs;
  for (double p : {1.0, 2.0, 3.0}) fs.push_back(ConvexFunction::abs_pow(p));
  for (double c : {0.2, 1.0, 5.0}) fs.push_back(ConvexFunction::exp_signed(c));
  for (double c : {0.2, 1.0, 5.0}) fs.push_back(ConvexFunction::exp_abs(c));
  return fs;
}

// Reference path average by order-64 Gauss-Legendre, split at the sign
// change. Independent of ConvexFunction::segment_integral's closed forms.
inline double gl64_segment(const cbdep::ConvexFunction& f, double d0, double d1) {
  const auto& rule = cbdep::gauss_legendre(64);
  auto avg = [&](double a, double b) {
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      acc += rule.weights[q] * f(a + rule.nodes[q] * (b - a));
    }
    return acc;
  };
  if (d0 * d1 < 0.0) {
    const double t = d0 / (d0 - d1);
    return t * avg(d0, 0.0) + (1.0 - t) * avg(0.0, d1);
  }
  return avg(d0, d1);
}

// Bilinear empirical copula of an exact-grid pseudo-sample, evaluated from
// the rank subcopula; the independent oracle for the ecbc construction.
class BilinearEmpiricalCopula {
 public:
  explicit BilinearEmpiricalCopula(const cbdep::PseudoSample& pseudo)
      : n_(pseudo.n()), grid_((n_ + 1) * (n_ + 1), 0.0) {
    // Subcopula values on the n-grid from integer ranks.
    std::vector<std::pair<int, int>> ranks;
    ranks.reserve(n_);
    for (const auto& [u, v] : pseudo.pairs) {
      ranks.emplace_back(static_cast<int>(std::lround(u * n_)),
                         static_cast<int>(std::lround(v * n_)));
    }
    for (int i = 0; i <= n_; ++i) {
      for (int j = 0; j <= n_; ++j) {
        int count = 0;
        for (const auto& [r, s] : ranks) {
          if (r <= i && s <= j) ++count;
        }
        grid_[i * (n_ + 1) + j] = static_cast<double>(count) / n_;
      }
    }
  }

  double operator()(double u, double v) const {
    const double su = std::min(std::max(u, 0.0), 1.0) * n_;
    const double sv = std::min(std::max(v, 0.0), 1.0) * n_;
    int i = std::min(static_cast<int>(su), n_ - 1);
    int j = std::min(static_cast<int>(sv), n_ - 1);
    const double t = su - i, s = sv - j;
    auto g = [&](int a, int b) { return grid_[a * (n_ + 1) + b]; };
    return (1 - t) * (1 - s) * g(i, j) + t * (1 - s) * g(i + 1, j) +
           (1 - t) * s * g(i, j + 1) + t * s * g(i + 1, j + 1);
  }

 private:
  int n_;
  std::vector<double> grid_;
};

// iid-uniform pseudo sample of size n (ranked, so exactly on the grid).
inline cbdep::PseudoSample random_pseudo(int n, std::uint64_t seed) {
  cbdep::Rng rng(seed);
  std::vector<double> xs(n), ys(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = rng.uniform01();
    ys[i] = rng.uniform01();
  }
  const auto sample = cbdep::BivariateSample::create(xs, ys);
  return cbdep::to_pseudo(sample, cbdep::TiePolicy::SeededJitter, seed);
}

}  // namespace cbdep_test

#endif  // CBDEP_TESTS_SUPPORT_HPP_
