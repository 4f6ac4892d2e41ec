#ifndef CBDEP_ERRORS_HPP_
#define CBDEP_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace cbdep {

// Input/usage problems: unreadable files, malformed CSV, bad descriptors,
// out-of-range parameters. The CLI maps these to exit code 2.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// A mathematical hypothesis of the measures is violated (degenerate Y,
// non-admissible convex function, non-copula CDF). CLI exit code 3.
class HypothesisError : public std::runtime_error {
 public:
  explicit HypothesisError(const std::string& what) : std::runtime_error(what) {}
};

// Normalizing constant came out <= 0, so the measure is undefined.
class NormalizerNotPositive : public HypothesisError {
 public:
  explicit NormalizerNotPositive(const std::string& what) : HypothesisError(what) {}
};

}  // namespace cbdep

#endif  // CBDEP_ERRORS_HPP_
