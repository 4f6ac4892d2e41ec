#ifndef CBDEP_INGEST_HPP_
#define CBDEP_INGEST_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace cbdep {

// How tied observations are ranked. SeededJitter breaks ties with a stable
// seeded key so the pseudo-observations always sit exactly on the grid
// {1/n, ..., n/n}; MidRank assigns average ranks instead, which voids the
// exact uniform-margin invariants downstream and is meant for diagnostics.
enum class TiePolicy { MidRank, SeededJitter };

struct BivariateSample {
  std::vector<double> xs;
  std::vector<double> ys;

  int n() const { return static_cast<int>(xs.size()); }

  // Validates: equal lengths, n >= 2, all values finite. Throws InputError.
  static BivariateSample create(std::vector<double> xs, std::vector<double> ys);
};

// Rank-transformed sample; the support points of the empirical copula.
struct PseudoSample {
  std::vector<std::pair<double, double>> pairs;  // (u, v) in (0,1]
  TiePolicy tie_policy_used = TiePolicy::SeededJitter;
  // True when {u_i} and {v_i} are exactly {1/n, ..., n/n} (always under
  // SeededJitter; under MidRank only for tie-free input).
  bool exact_grid = true;

  int n() const { return static_cast<int>(pairs.size()); }
};

struct ColumnTable {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
  std::size_t endogenous = 0;  // index into columns/names

  std::size_t rows() const { return columns.empty() ? 0 : columns[0].size(); }
};

struct CsvOptions {
  // Drop rows with missing (empty) fields in the selected columns instead of
  // rejecting the file. Non-numeric junk ("NaN", "abc") is always an error.
  bool drop_incomplete = false;
};

// Reads two numeric columns of a comma-separated file. Columns are addressed
// by header name or by 0-based index (a bare integer always works; names
// require a header row). The header row is auto-detected: a first row where
// not every field parses as a finite number is treated as a header.
BivariateSample read_csv(const std::string& path, const std::string& x_col,
                         const std::string& y_col, const CsvOptions& options = {});

// Reads every column of a numeric CSV and designates one endogenous column.
ColumnTable read_table(const std::string& path, const std::string& endogenous_col,
                       const CsvOptions& options = {});

// Rank transform u_i = rank(x_i)/n, v_i = rank(y_i)/n. Deterministic for a
// given (sample, policy, seed); strictly increasing transforms of either
// coordinate leave the result bit-identical (tie-free input).
PseudoSample to_pseudo(const BivariateSample& sample, TiePolicy policy = TiePolicy::SeededJitter,
                       std::uint64_t seed = 0);

}  // namespace cbdep

#endif  // CBDEP_INGEST_HPP_
