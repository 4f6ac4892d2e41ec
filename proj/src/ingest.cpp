#include "cbdep/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>

#include "cbdep/errors.hpp"
#include "cbdep/rng.hpp"

namespace cbdep {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    fields.push_back(trim(field));
  }
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

// Empty field -> missing (nullopt). A token that does not parse as a finite
// number is a hard error regardless of options; "NaN"/"inf" count as such.
std::optional<double> parse_field(const std::string& field, std::size_t line_no,
                                  const std::string& column) {
  if (field.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end == field.c_str() || *end != '\0') {
    throw InputError("line " + std::to_string(line_no) + ", column '" + column +
                     "': cannot parse '" + field + "' as a number");
  }
  if (!std::isfinite(v)) {
    throw InputError("line " + std::to_string(line_no) + ", column '" + column +
                     "': non-finite value '" + field + "'");
  }
  return v;
}

// Consumed by strtod entirely; non-finite tokens like "NaN" count as
// numeric here (they are data, rejected later with a line number).
bool parses_as_number(const std::string& field) {
  if (field.empty()) return false;
  char* end = nullptr;
  (void)std::strtod(field.c_str(), &end);
  return end != field.c_str() && *end == '\0';
}

struct RawCsv {
  std::vector<std::string> header;  // empty when the file has no header row
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based file line per data row
  std::size_t column_count = 0;
};

RawCsv read_raw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  RawCsv raw;
  std::string line;
  std::size_t line_no = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (first_content) {
      first_content = false;
      raw.column_count = fields.size();
      // A header row has at least one non-empty field that is not a number;
      // empty fields alone mean a data row with missing values.
      const bool looks_like_header =
          std::any_of(fields.begin(), fields.end(), [](const std::string& f) {
            return !f.empty() && !parses_as_number(f);
          });
      if (looks_like_header) {
        raw.header = fields;
        continue;
      }
    }
    if (fields.size() != raw.column_count) {
      throw InputError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(raw.column_count) + " fields, found " +
                       std::to_string(fields.size()));
    }
    raw.rows.push_back(std::move(fields));
    raw.line_numbers.push_back(line_no);
  }
  if (raw.column_count == 0) throw InputError("'" + path + "' is empty");
  return raw;
}

std::size_t resolve_column(const RawCsv& raw, const std::string& selector) {
  if (!raw.header.empty()) {
    for (std::size_t i = 0; i < raw.header.size(); ++i) {
      if (raw.header[i] == selector) return i;
    }
  }
  char* end = nullptr;
  const long idx = std::strtol(selector.c_str(), &end, 10);
  if (end != selector.c_str() && *end == '\0' && idx >= 0 &&
      static_cast<std::size_t>(idx) < raw.column_count) {
    return static_cast<std::size_t>(idx);
  }
  throw InputError("column '" + selector + "' not found (file has " +
                   std::to_string(raw.column_count) + " columns" +
                   (raw.header.empty() ? ", no header row)" : ")"));
}

std::string column_label(const RawCsv& raw, std::size_t idx) {
  if (!raw.header.empty()) return raw.header[idx];
  return std::to_string(idx);
}

// Ranks 1..n. SeededJitter orders ties by a per-index key derived from
// (seed, axis); MidRank averages over each tie run.
std::vector<double> rank_values(const std::vector<double>& values, TiePolicy policy,
                                std::uint64_t seed, std::uint64_t axis, bool* had_ties) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  if (policy == TiePolicy::SeededJitter) {
    std::vector<std::uint64_t> keys(n);
    const std::uint64_t base = splitmix64(seed ^ (0xA5A5A5A5A5A5A5A5ULL * (axis + 1)));
    for (std::size_t i = 0; i < n; ++i) keys[i] = splitmix64(base + i);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (values[a] != values[b]) return values[a] < values[b];
      if (keys[a] != keys[b]) return keys[a] < keys[b];
      return a < b;
    });
    std::vector<double> ranks(n);
    for (std::size_t pos = 0; pos < n; ++pos) {
      if (pos > 0 && values[order[pos]] == values[order[pos - 1]]) *had_ties = true;
      ranks[order[pos]] = static_cast<double>(pos + 1);
    }
    return ranks;
  }

  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (values[a] != values[b]) return values[a] < values[b];
    return a < b;
  });
  std::vector<double> ranks(n);
  std::size_t pos = 0;
  while (pos < n) {
    std::size_t run_end = pos;
    while (run_end + 1 < n && values[order[run_end + 1]] == values[order[pos]]) ++run_end;
    if (run_end > pos) *had_ties = true;
    const double mid_rank = 0.5 * static_cast<double>(pos + 1 + run_end + 1);
    for (std::size_t k = pos; k <= run_end; ++k) ranks[order[k]] = mid_rank;
    pos = run_end + 1;
  }
  return ranks;
}

}  // namespace

BivariateSample BivariateSample::create(std::vector<double> xs, std::vector<double> ys) {
  if (xs.size() != ys.size()) {
    throw InputError("x and y sequences differ in length (" + std::to_string(xs.size()) +
                     " vs " + std::to_string(ys.size()) + ")");
  }
  if (xs.size() < 2) throw InputError("need at least 2 observations");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) {
      throw InputError("non-finite value at observation " + std::to_string(i));
    }
  }
  BivariateSample s;
  s.xs = std::move(xs);
  s.ys = std::move(ys);
  return s;
}

BivariateSample read_csv(const std::string& path, const std::string& x_col,
                         const std::string& y_col, const CsvOptions& options) {
  const RawCsv raw = read_raw(path);
  const std::size_t xi = resolve_column(raw, x_col);
  const std::size_t yi = resolve_column(raw, y_col);
  std::vector<double> xs, ys;
  xs.reserve(raw.rows.size());
  ys.reserve(raw.rows.size());
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    const auto x = parse_field(raw.rows[r][xi], raw.line_numbers[r], column_label(raw, xi));
    const auto y = parse_field(raw.rows[r][yi], raw.line_numbers[r], column_label(raw, yi));
    if (!x || !y) {
      if (options.drop_incomplete) continue;
      throw InputError("line " + std::to_string(raw.line_numbers[r]) +
                       ": missing value in a selected column (use --drop-incomplete to skip)");
    }
    xs.push_back(*x);
    ys.push_back(*y);
  }
  if (xs.size() < 2) {
    throw InputError("'" + path + "' has fewer than 2 complete rows for the selected columns");
  }
  return BivariateSample::create(std::move(xs), std::move(ys));
}

ColumnTable read_table(const std::string& path, const std::string& endogenous_col,
                       const CsvOptions& options) {
  const RawCsv raw = read_raw(path);
  const std::size_t endo = resolve_column(raw, endogenous_col);
  ColumnTable table;
  table.endogenous = endo;
  table.columns.assign(raw.column_count, {});
  for (std::size_t c = 0; c < raw.column_count; ++c) {
    table.names.push_back(column_label(raw, c));
  }
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    std::vector<double> row(raw.column_count);
    bool complete = true;
    for (std::size_t c = 0; c < raw.column_count; ++c) {
      const auto v = parse_field(raw.rows[r][c], raw.line_numbers[r], column_label(raw, c));
      if (!v) {
        complete = false;
        if (!options.drop_incomplete) {
          throw InputError("line " + std::to_string(raw.line_numbers[r]) +
                           ": missing value (use --drop-incomplete to skip)");
        }
        break;
      }
      row[c] = *v;
    }
    if (!complete) continue;
    for (std::size_t c = 0; c < raw.column_count; ++c) table.columns[c].push_back(row[c]);
  }
  if (table.rows() < 2) throw InputError("'" + path + "' has fewer than 2 complete rows");
  return table;
}

PseudoSample to_pseudo(const BivariateSample& sample, TiePolicy policy, std::uint64_t seed) {
  const int n = sample.n();
  bool had_ties = false;
  const auto rx = rank_values(sample.xs, policy, seed, 0, &had_ties);
  const auto ry = rank_values(sample.ys, policy, seed, 1, &had_ties);
  PseudoSample pseudo;
  pseudo.tie_policy_used = policy;
  pseudo.exact_grid = (policy == TiePolicy::SeededJitter) || !had_ties;
  pseudo.pairs.reserve(n);
  for (int i = 0; i < n; ++i) {
    pseudo.pairs.emplace_back(rx[i] / n, ry[i] / n);
  }
  return pseudo;
}

}  // namespace cbdep
