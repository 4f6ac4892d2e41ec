#ifndef CBDEP_NUMERIC_HPP_
#define CBDEP_NUMERIC_HPP_

#include <charconv>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace cbdep {

// Neumaier-compensated accumulator. Long sums (up to N^3 terms) must not
// drift past the 1e-13 agreement tolerances used throughout.
class KahanSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct QuadratureRule {
  std::vector<double> nodes;    // on [0,1]
  std::vector<double> weights;  // sum to 1
};

// Gauss-Legendre nodes/weights mapped to [0,1]. Nodes are found by Newton
// iteration on P_n; accurate to ~1e-15 for the orders used here (16, 64).
const QuadratureRule& gauss_legendre(int order);

// Shortest round-trip decimal representation (std::to_chars).
std::string format_double(double x);

// Fixed 17-significant-digit representation for bit-exact file round-trips.
std::string format_double_full(double x);

}  // namespace cbdep

#endif  // CBDEP_NUMERIC_HPP_
