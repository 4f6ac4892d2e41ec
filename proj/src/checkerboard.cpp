#include "cbdep/checkerboard.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cbdep/errors.hpp"
#include "cbdep/numeric.hpp"
#include "cbdep/rng.hpp"

namespace cbdep {

namespace {

constexpr double kTotalMassTol = 1e-12;
constexpr double kMarginTol = 1e-9;
constexpr double kCdfBoundTol = 1e-12;

}  // namespace

StripeCdf::StripeCdf(int resolution, int stripe, std::vector<double> cumulative)
    : resolution_(resolution), stripe_(stripe), cum_(std::move(cumulative)) {}

double StripeCdf::operator()(double v) const {
  if (v <= 0.0) return 0.0;
  if (v >= 1.0) return 1.0;
  const double scaled = v * resolution_;
  int j = static_cast<int>(scaled);
  if (j >= resolution_) j = resolution_ - 1;
  const double t = scaled - j;
  return cum_[j] + t * (cum_[j + 1] - cum_[j]);
}

CheckerboardCopula::CheckerboardCopula(int resolution, std::vector<double> mass,
                                       MarginPolicy policy)
    : resolution_(resolution), mass_(std::move(mass)),
      exact_margins_(policy == MarginPolicy::Strict) {
  if (resolution_ < 2) throw InputError("checkerboard resolution must be >= 2");
  const std::size_t expected = static_cast<std::size_t>(resolution_) * resolution_;
  if (mass_.size() != expected) {
    throw InputError("mass matrix size mismatch: expected " + std::to_string(expected) +
                     " entries, got " + std::to_string(mass_.size()));
  }
  KahanSum total;
  for (double m : mass_) {
    if (!(m >= 0.0)) {
      throw InputError("negative or non-finite cell mass " + format_double(m));
    }
    total.add(m);
  }
  if (std::abs(total.value() - 1.0) > kTotalMassTol) {
    throw InputError("total mass " + format_double(total.value()) + " deviates from 1");
  }
  // Relaxed boards (mid-rank pseudo-samples) keep the mass checks but skip
  // the uniform-margin requirement, which mid-ranking genuinely voids.
  if (policy == MarginPolicy::Strict) {
    const double target = 1.0 / resolution_;
    for (int i = 0; i < resolution_; ++i) {
      KahanSum row, col;
      for (int j = 0; j < resolution_; ++j) {
        row.add(mass_[static_cast<std::size_t>(i) * resolution_ + j]);
        col.add(mass_[static_cast<std::size_t>(j) * resolution_ + i]);
      }
      if (std::abs(row.value() - target) > kMarginTol ||
          std::abs(col.value() - target) > kMarginTol) {
        throw InputError("margin of stripe " + std::to_string(i) + " deviates from 1/N by " +
                         format_double(std::max(std::abs(row.value() - target),
                                                std::abs(col.value() - target))));
      }
    }
  }
}

double CheckerboardCopula::stripe_weight(int stripe) const {
  if (stripe < 0 || stripe >= resolution_) {
    throw InputError("stripe index " + std::to_string(stripe) + " out of range [0," +
                     std::to_string(resolution_ - 1) + "]");
  }
  if (exact_margins_) return 1.0 / resolution_;
  KahanSum row;
  for (int j = 0; j < resolution_; ++j) row.add(mass(stripe, j));
  return row.value();
}

StripeCdf CheckerboardCopula::stripe_cdf(int stripe) const {
  if (stripe < 0 || stripe >= resolution_) {
    throw InputError("stripe index " + std::to_string(stripe) + " out of range [0," +
                     std::to_string(resolution_ - 1) + "]");
  }
  std::vector<double> cum(resolution_ + 1, 0.0);
  if (exact_margins_) {
    KahanSum acc;
    for (int j = 0; j < resolution_; ++j) {
      acc.add(mass(stripe, j));
      cum[j + 1] = resolution_ * acc.value();
    }
    cum[resolution_] = 1.0;  // the row sums to 1/N up to rounding
  } else {
    const double w = stripe_weight(stripe);
    KahanSum acc;
    for (int j = 0; j < resolution_; ++j) {
      acc.add(mass(stripe, j));
      cum[j + 1] = w > 0.0 ? acc.value() / w : (j + 1.0) / resolution_;
    }
    if (w > 0.0) cum[resolution_] = 1.0;
  }
  return StripeCdf(resolution_, stripe, std::move(cum));
}

std::vector<double> CheckerboardCopula::breakpoint_matrix() const {
  const int N = resolution_;
  std::vector<double> bp(static_cast<std::size_t>(N) * (N + 1));
  for (int i = 0; i < N; ++i) {
    const StripeCdf f = stripe_cdf(i);
    double* row = bp.data() + static_cast<std::size_t>(i) * (N + 1);
    for (int j = 0; j <= N; ++j) row[j] = f.at_breakpoint(j);
  }
  return bp;
}

int checkerboard_resolution(int n, double s) {
  if (n < 2) throw InputError("sample size must be >= 2");
  if (!(s > 0.0) || s > 1.0) throw InputError("resolution exponent s must lie in (0,1]");
  const int raw = static_cast<int>(std::floor(std::pow(static_cast<double>(n), s) + 1e-9));
  return std::max(2, raw);
}

CheckerboardCopula ecbc(const PseudoSample& pseudo, int resolution) {
  const int n = pseudo.n();
  if (n == 0) throw InputError("empty pseudo-sample");
  if (resolution < 2) throw InputError("checkerboard resolution must be >= 2");
  const int N = resolution;
  std::vector<double> mass(static_cast<std::size_t>(N) * N, 0.0);
  const double inv_n = 1.0 / n;

  // Per-axis overlap of an observation's rank interval (u - 1/n, u] with the
  // stripes it touches, as fractions of 1/n. Boundary values telescope, so
  // the fractions of one observation sum to 1 exactly up to rounding.
  auto overlaps = [&](double hi_edge) {
    std::vector<std::pair<int, double>> parts;
    const double lo_edge = hi_edge - inv_n;
    int first = std::max(0, static_cast<int>(std::floor(lo_edge * N)));
    if (first > N - 1) first = N - 1;
    for (int s = first; s < N; ++s) {
      const double lo = std::max(lo_edge, static_cast<double>(s) / N);
      const double hi = std::min(hi_edge, static_cast<double>(s + 1) / N);
      const double len = hi - lo;
      if (len > 0.0) parts.emplace_back(s, len * n);
      if (hi >= hi_edge) break;
    }
    return parts;
  };

  for (const auto& [u, v] : pseudo.pairs) {
    const auto px = overlaps(u);
    const auto py = overlaps(v);
    for (const auto& [i, wx] : px) {
      for (const auto& [j, wy] : py) {
        mass[static_cast<std::size_t>(i) * N + j] += wx * wy * inv_n;
      }
    }
  }
  const auto policy = pseudo.exact_grid ? CheckerboardCopula::MarginPolicy::Strict
                                        : CheckerboardCopula::MarginPolicy::Relaxed;
  return CheckerboardCopula(N, std::move(mass), policy);
}

CheckerboardCopula aggregate_cdf(const std::function<double(double, double)>& cdf,
                                 int resolution) {
  const int N = resolution;
  if (N < 2) throw InputError("checkerboard resolution must be >= 2");
  std::vector<double> corner(static_cast<std::size_t>(N + 1) * (N + 1));
  for (int i = 0; i <= N; ++i) {
    const double u = static_cast<double>(i) / N;
    for (int j = 0; j <= N; ++j) {
      const double v = static_cast<double>(j) / N;
      const double c = cdf(u, v);
      const double lower = std::max(0.0, u + v - 1.0);
      const double upper = std::min(u, v);
      if (!(c >= lower - kCdfBoundTol) || !(c <= upper + kCdfBoundTol)) {
        throw HypothesisError("CDF value " + format_double(c) + " at (" + format_double(u) +
                              "," + format_double(v) + ") violates copula bounds");
      }
      corner[static_cast<std::size_t>(i) * (N + 1) + j] = c;
    }
  }
  std::vector<double> mass(static_cast<std::size_t>(N) * N);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      const auto at = [&](int a, int b) {
        return corner[static_cast<std::size_t>(a) * (N + 1) + b];
      };
      double m = at(i + 1, j + 1) - at(i, j + 1) - at(i + 1, j) + at(i, j);
      if (m < 0.0) {
        if (m < -kCdfBoundTol) {
          throw HypothesisError("cell (" + std::to_string(i) + "," + std::to_string(j) +
                                ") has negative mass " + format_double(m));
        }
        m = 0.0;
      }
      mass[static_cast<std::size_t>(i) * N + j] = m;
    }
  }
  return CheckerboardCopula(N, std::move(mass));
}

CheckerboardCopula random_doubly_stochastic(int resolution, std::uint64_t seed) {
  const int N = resolution;
  if (N < 2) throw InputError("checkerboard resolution must be >= 2");
  Rng rng(seed);
  std::vector<double> m(static_cast<std::size_t>(N) * N);
  for (double& x : m) x = 0.25 + rng.uniform01();  // bounded away from 0
  // Sinkhorn scaling toward row/column sums 1/N.
  const double target = 1.0 / N;
  for (int iter = 0; iter < 500; ++iter) {
    double worst = 0.0;
    for (int i = 0; i < N; ++i) {
      KahanSum row;
      for (int j = 0; j < N; ++j) row.add(m[static_cast<std::size_t>(i) * N + j]);
      const double f = target / row.value();
      for (int j = 0; j < N; ++j) m[static_cast<std::size_t>(i) * N + j] *= f;
    }
    for (int j = 0; j < N; ++j) {
      KahanSum col;
      for (int i = 0; i < N; ++i) col.add(m[static_cast<std::size_t>(i) * N + j]);
      const double f = target / col.value();
      for (int i = 0; i < N; ++i) m[static_cast<std::size_t>(i) * N + j] *= f;
      worst = std::max(worst, std::abs(col.value() - target));
    }
    if (worst < 1e-15) break;
  }
  return CheckerboardCopula(N, std::move(m));
}

void write_checkerboard(const CheckerboardCopula& cb, std::ostream& out) {
  const int N = cb.resolution();
  out << N << '\n';
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      if (j) out << ' ';
      out << format_double_full(cb.mass(i, j));
    }
    out << '\n';
  }
}

void write_checkerboard(const CheckerboardCopula& cb, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  write_checkerboard(cb, out);
}

CheckerboardCopula read_checkerboard(std::istream& in) {
  int N = 0;
  if (!(in >> N) || N < 2) throw InputError("bad checkerboard header (expected resolution)");
  std::vector<double> mass(static_cast<std::size_t>(N) * N);
  for (auto& m : mass) {
    if (!(in >> m)) throw InputError("truncated checkerboard matrix");
  }
  return CheckerboardCopula(N, std::move(mass));
}

CheckerboardCopula read_checkerboard_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return read_checkerboard(in);
}

}  // namespace cbdep
