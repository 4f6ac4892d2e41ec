#include "cbdep/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <utility>

#include "cbdep/errors.hpp"
#include "cbdep/numeric.hpp"

namespace cbdep {

namespace {

// integral_0^1 |a + t*(b - a)| dt: trapezoid when the segment keeps its sign
// (|.| is linear there), antiderivative x|x|/2 across a sign change.
double average_abs_linear(double a, double b) {
  if (a * b >= 0.0) return 0.5 * (std::abs(a) + std::abs(b));
  return 0.5 * (b * std::abs(b) - a * std::abs(a)) / (b - a);
}

std::size_t bp_index(int i, int j, int N) {
  return static_cast<std::size_t>(i) * (N + 1) + j;
}

// Generic route: closed-form segment integrals over all ordered stripe pairs.
double numerator_generic(const std::vector<double>& bp, int N, const ConvexFunction& f) {
  KahanSum total;
  for (int i = 0; i < N; ++i) {
    const double* fi = bp.data() + bp_index(i, 0, N);
    for (int k = 0; k < N; ++k) {
      if (k == i) continue;  // phi(0) = 0
      const double* fk = bp.data() + bp_index(k, 0, N);
      for (int j = 0; j < N; ++j) {
        total.add(f.segment_integral(fi[j] - fk[j], fi[j + 1] - fk[j + 1]));
      }
    }
  }
  const double n3 = static_cast<double>(N) * N * N;
  return total.value() / n3;
}

// abs^p:2 route: per segment, the pairwise sum of (d0^2 + d0*d1 + d1^2)/3
// collapses to first and second moments of the breakpoint columns.
double numerator_fast_p2(const std::vector<double>& bp, int N) {
  // P(a,b) = sum_{i,k} (F_i(a)-F_k(a))(F_i(b)-F_k(b)) = 2*(N*S_ab - S_a*S_b).
  std::vector<double> s1(N + 1), s2(N + 1), cross(N + 1);  // cross[j] = sum_i F_i(j-1)F_i(j)
  for (int j = 0; j <= N; ++j) {
    KahanSum a, b;
    for (int i = 0; i < N; ++i) {
      const double x = bp[bp_index(i, j, N)];
      a.add(x);
      b.add(x * x);
    }
    s1[j] = a.value();
    s2[j] = b.value();
  }
  for (int j = 1; j <= N; ++j) {
    KahanSum c;
    for (int i = 0; i < N; ++i) {
      c.add(bp[bp_index(i, j - 1, N)] * bp[bp_index(i, j, N)]);
    }
    cross[j] = c.value();
  }
  KahanSum total;
  for (int j = 1; j <= N; ++j) {
    const double p00 = 2.0 * (N * s2[j - 1] - s1[j - 1] * s1[j - 1]);
    const double p01 = 2.0 * (N * cross[j] - s1[j - 1] * s1[j]);
    const double p11 = 2.0 * (N * s2[j] - s1[j] * s1[j]);
    total.add((p00 + p01 + p11) / 3.0);
  }
  const double n3 = static_cast<double>(N) * N * N;
  return total.value() / n3;
}

// abs^p:1 route: per segment, trapezoid of the sorted-prefix-sum pairwise
// absolute deviations at both breakpoints, corrected exactly for the stripe
// pairs whose difference changes sign inside the segment. For such a pair
// the exact integral undershoots the trapezoid by |d0||d1|/(|d0|+|d1|).
double numerator_fast_p1(const std::vector<double>& bp, int N) {
  // g[j] = sum_{i,k} |F_i(j/N) - F_k(j/N)| via sorting: 2 * sum_m (2m+1-N) x_(m).
  std::vector<double> g(N + 1);
  std::vector<double> column(N);
  for (int j = 0; j <= N; ++j) {
    for (int i = 0; i < N; ++i) column[i] = bp[bp_index(i, j, N)];
    std::sort(column.begin(), column.end());
    KahanSum acc;
    for (int m = 0; m < N; ++m) acc.add((2.0 * m + 1.0 - N) * column[m]);
    g[j] = 2.0 * acc.value();
  }

  std::vector<int> order(N);
  KahanSum total;
  for (int j = 1; j <= N; ++j) {
    KahanSum correction;
    // Stripe pairs that swap order between the two breakpoints are exactly
    // the pairs with a strict sign change of d(v) inside the segment.
    std::iota(order.begin(), order.end(), 0);
    auto prev_of = [&](int i) { return bp[bp_index(i, j - 1, N)]; };
    auto cur_of = [&](int i) { return bp[bp_index(i, j, N)]; };
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (prev_of(a) != prev_of(b)) return prev_of(a) < prev_of(b);
      return a < b;
    });
    std::multiset<std::pair<double, double>> seen;  // (cur, prev) of processed stripes
    std::size_t pos = 0;
    while (pos < order.size()) {
      // Batch stripes with equal left-breakpoint value: equal d0 means no
      // strict crossing, so the batch is queried before being inserted.
      std::size_t batch_end = pos;
      while (batch_end + 1 < order.size() &&
             prev_of(order[batch_end + 1]) == prev_of(order[pos])) {
        ++batch_end;
      }
      for (std::size_t q = pos; q <= batch_end; ++q) {
        const int x = order[q];
        const double cx = cur_of(x), px = prev_of(x);
        for (auto it = seen.upper_bound({cx, std::numeric_limits<double>::infinity()});
             it != seen.end(); ++it) {
          const double d1 = cx - it->first;   // strictly negative
          const double d0 = px - it->second;  // strictly positive
          correction.add(d0 * (-d1) / (d0 - d1));
        }
      }
      for (std::size_t q = pos; q <= batch_end; ++q) {
        seen.emplace(cur_of(order[q]), prev_of(order[q]));
      }
      pos = batch_end + 1;
    }
    total.add(0.5 * (g[j - 1] + g[j]) - 2.0 * correction.value());
  }
  const double n3 = static_cast<double>(N) * N * N;
  return total.value() / n3;
}

bool fast_path_available(const ConvexFunction& f) {
  return f.kind() == ConvexFunction::Kind::AbsPow && (f.param() == 1.0 || f.param() == 2.0);
}

}  // namespace

std::string MeasureResult::csv_row() const {
  return phi_descriptor + "," + std::to_string(resolution) + "," + format_double(numerator) +
         "," + format_double(normalizer) + "," + format_double(value);
}

const char* MeasureResult::csv_header() { return "phi,N,numerator,normalizer,value"; }

double alpha_phi(const ConvexFunction& f) {
  // The kernel difference of two independent point masses is 1 on
  // {u1 <= v < u2}, -1 on {u2 <= v < u1} and 0 elsewhere; both regions have
  // volume integral v*(1-v) dv = 1/6.
  const double a = (f(1.0) + f(-1.0)) / 6.0;
  if (!(a > 0.0)) {
    throw NormalizerNotPositive("alpha = " + format_double(a) + " for " + f.descriptor() +
                                " (needs (phi(1)+phi(-1))/6 > 0)");
  }
  return a;
}

MeasureResult lambda_phi(const CheckerboardCopula& cb, const ConvexFunction& f, EvalPath path) {
  f.require_valid();
  const double alpha = alpha_phi(f);
  const int N = cb.resolution();
  const std::vector<double> bp = cb.breakpoint_matrix();

  bool use_fast;
  switch (path) {
    case EvalPath::Auto:
      use_fast = fast_path_available(f);
      break;
    case EvalPath::Fast:
      if (!fast_path_available(f)) {
        throw InputError("fast path exists only for abs^p:1 and abs^p:2, not " +
                         f.descriptor());
      }
      use_fast = true;
      break;
    case EvalPath::Generic:
    default:
      use_fast = false;
      break;
  }

  double numerator;
  if (use_fast) {
    numerator = f.param() == 1.0 ? numerator_fast_p1(bp, N) : numerator_fast_p2(bp, N);
  } else {
    numerator = numerator_generic(bp, N, f);
  }

  MeasureResult result;
  result.numerator = numerator;
  result.normalizer = alpha;
  result.value = numerator / alpha;
  result.resolution = N;
  result.phi_descriptor = f.descriptor();
  return result;
}

double lambda_phi_oracle(const CheckerboardCopula& cb, const ConvexFunction& f, int grid) {
  if (grid < 100) throw InputError("oracle grid must be >= 100");
  f.require_valid();
  const double alpha = alpha_phi(f);
  const int N = cb.resolution();
  const int G = grid;

  // Midpoints in u land in stripes; equal-stripe midpoints contribute
  // identical kernel values, so the u1/u2 lattice sum groups into counts.
  std::vector<double> count(N, 0.0);
  for (int m = 0; m < G; ++m) {
    const double u = (m + 0.5) / G;
    int idx = static_cast<int>(std::ceil(u * N)) - 1;
    idx = std::min(N - 1, std::max(0, idx));
    count[idx] += 1.0;
  }

  std::vector<StripeCdf> stripes;
  stripes.reserve(N);
  for (int i = 0; i < N; ++i) stripes.push_back(cb.stripe_cdf(i));

  std::vector<double> kernel(N);
  KahanSum total;
  for (int m = 0; m < G; ++m) {
    const double v = (m + 0.5) / G;
    for (int i = 0; i < N; ++i) kernel[i] = stripes[i](v);
    KahanSum slice;
    for (int i = 0; i < N; ++i) {
      for (int k = 0; k < N; ++k) {
        if (k == i) continue;
        slice.add(count[i] * count[k] * f(kernel[i] - kernel[k]));
      }
    }
    total.add(slice.value());
  }
  const double g3 = static_cast<double>(G) * G * G;
  return total.value() / (g3 * alpha);
}

double lambda_phi_oracle_segment(const CheckerboardCopula& cb, const ConvexFunction& f) {
  f.require_valid();
  const double alpha = alpha_phi(f);
  const int N = cb.resolution();
  const std::vector<double> bp = cb.breakpoint_matrix();
  const auto& rule = gauss_legendre(64);

  auto quad = [&](double a, double b) {
    KahanSum acc;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      acc.add(rule.weights[q] * f(a + rule.nodes[q] * (b - a)));
    }
    return acc.value();
  };
  auto segment = [&](double d0, double d1) {
    if (d0 * d1 < 0.0) {
      const double t = d0 / (d0 - d1);
      return t * quad(d0, 0.0) + (1.0 - t) * quad(0.0, d1);
    }
    return quad(d0, d1);
  };

  KahanSum total;
  for (int i = 0; i < N; ++i) {
    for (int k = 0; k < N; ++k) {
      if (k == i) continue;
      for (int j = 0; j < N; ++j) {
        total.add(segment(bp[bp_index(i, j, N)] - bp[bp_index(k, j, N)],
                          bp[bp_index(i, j + 1, N)] - bp[bp_index(k, j + 1, N)]));
      }
    }
  }
  const double n3 = static_cast<double>(N) * N * N;
  return total.value() / (n3 * alpha);
}

double chatterjee_xi(const CheckerboardCopula& cb) {
  const int N = cb.resolution();
  KahanSum sum;
  for (int i = 0; i < N; ++i) {
    KahanSum running;
    double prev = 0.0;
    for (int j = 0; j < N; ++j) {
      running.add(cb.mass(i, j));
      const double cur = N * running.value();
      sum.add(prev * prev + prev * cur + cur * cur);
      prev = cur;
    }
  }
  // integral F^2 per segment is (a^2+ab+b^2)/(3N); stripe weight is 1/N.
  return 6.0 * sum.value() / (3.0 * N * N) - 2.0;
}

double zeta1(const CheckerboardCopula& cb) {
  const int N = cb.resolution();
  KahanSum sum;
  for (int i = 0; i < N; ++i) {
    KahanSum running;
    double prev_gap = 0.0;  // F_i(j/N) - j/N at the left breakpoint
    for (int j = 1; j <= N; ++j) {
      running.add(cb.mass(i, j - 1));
      const double gap = N * running.value() - static_cast<double>(j) / N;
      sum.add(average_abs_linear(prev_gap, gap));
      prev_gap = gap;
    }
  }
  return 3.0 * sum.value() / (static_cast<double>(N) * N);
}

MeasureResult lambda_psi(const BivariateSample& sample, const ConvexFunction& g, int stripes) {
  if (stripes < 2) throw InputError("lambda_psi needs at least 2 stripes");
  const ConvexFunction psi =
      g.domain() == ConvexFunction::Domain::Unbounded ? g : g.as_unbounded();
  psi.require_valid();
  const int n = sample.n();
  const int K = std::min(stripes, n);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (sample.xs[a] != sample.xs[b]) return sample.xs[a] < sample.xs[b];
    return a < b;
  });

  // Stripe of x-rank r (1-based): ceil(r*K/n), so stripe sizes differ by at
  // most one when K does not divide n.
  std::vector<double> mean(K, 0.0);
  std::vector<double> weight(K, 0.0);
  {
    std::vector<KahanSum> acc(K);
    std::vector<int> size(K, 0);
    for (int pos = 0; pos < n; ++pos) {
      const long long r = pos + 1;
      int stripe = static_cast<int>((r * K + n - 1) / n) - 1;
      stripe = std::min(K - 1, std::max(0, stripe));
      acc[stripe].add(sample.ys[order[pos]]);
      ++size[stripe];
    }
    for (int i = 0; i < K; ++i) {
      if (size[i] == 0) continue;
      mean[i] = acc[i].value() / size[i];
      weight[i] = static_cast<double>(size[i]) / n;
    }
  }

  KahanSum num;
  for (int i = 0; i < K; ++i) {
    if (weight[i] == 0.0) continue;
    for (int k = 0; k < K; ++k) {
      if (k == i || weight[k] == 0.0) continue;
      num.add(weight[i] * weight[k] * psi(mean[i] - mean[k]));
    }
  }

  double denom = 0.0;
  if (psi.kind() == ConvexFunction::Kind::AbsPow && psi.param() == 2.0) {
    // (1/n^2) sum (y_j - y_l)^2 = 2 * population variance.
    KahanSum s1, s2;
    for (double y : sample.ys) {
      s1.add(y);
      s2.add(y * y);
    }
    const double m = s1.value() / n;
    denom = 2.0 * (s2.value() / n - m * m);
  } else {
    KahanSum den_acc;
    for (int j = 0; j < n; ++j) {
      for (int l = 0; l < n; ++l) {
        if (l == j) continue;
        den_acc.add(psi(sample.ys[j] - sample.ys[l]));
      }
    }
    denom = den_acc.value() / (static_cast<double>(n) * n);
  }
  if (!(denom > 0.0)) {
    throw NormalizerNotPositive("normalizer " + format_double(denom) +
                                " is not positive (endogenous variable degenerate?)");
  }

  MeasureResult result;
  result.numerator = num.value();
  result.normalizer = denom;
  result.value = result.numerator / denom;
  result.resolution = K;
  result.phi_descriptor = psi.descriptor();
  return result;
}

MeasureResult estimate(const BivariateSample& sample, const ConvexFunction& f, double s,
                       std::uint64_t seed, TiePolicy tie_policy, EvalPath path) {
  // A one-point endogenous distribution makes the estimand vacuous; a tie
  // break would only hide that behind noise ranks.
  const bool degenerate =
      std::all_of(sample.ys.begin(), sample.ys.end(),
                  [&](double y) { return y == sample.ys.front(); });
  if (degenerate) {
    throw NormalizerNotPositive("endogenous variable is degenerate (one-point distribution)");
  }
  const PseudoSample pseudo = to_pseudo(sample, tie_policy, seed);
  const int N = checkerboard_resolution(sample.n(), s);
  const CheckerboardCopula cb = ecbc(pseudo, N);
  return lambda_phi(cb, f, path);
}

}  // namespace cbdep
