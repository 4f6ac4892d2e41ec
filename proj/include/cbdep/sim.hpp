#ifndef CBDEP_SIM_HPP_
#define CBDEP_SIM_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cbdep/models.hpp"

namespace cbdep {

// Declarative Monte Carlo scenario grid. Parsed from flat key=value text:
//
//   models       = mo:1,0,mo:1,1,fgm:0.6      (descriptors; numeric tokens
//                                              attach to the model before them)
//   phis         = abs^p:1,abs^p:2,expsgn:1
//   sample_sizes = 100,1000,10000
//   replications = 100
//   s            = 0.5
//   master_seed  = 1
//   workers      = 4
//   truth_resolution = 512                    (0 disables the truth pass)
struct ExperimentConfig {
  std::vector<CopulaModel> models;
  std::vector<std::string> phis;
  std::vector<int> sample_sizes;
  int replications = 100;
  double s = 0.5;
  std::uint64_t master_seed = 1;
  int workers = 1;
  int truth_resolution = 512;

  void validate() const;  // throws InputError
  static ExperimentConfig parse_text(const std::string& text);
  static ExperimentConfig parse_file(const std::string& path);
};

struct ResultRecord {
  std::string model;
  std::string phi;
  int n = 0;
  int rep = 0;
  int resolution = 0;
  double estimate = 0.0;
  double wall_time_ms = 0.0;
};

struct SummaryRow {
  std::string model;
  std::string phi;
  int n = 0;
  double mean = 0.0, sd = 0.0;
  double q25 = 0.0, median = 0.0, q75 = 0.0;
  double min = 0.0, max = 0.0;
  std::optional<double> true_value;
  std::optional<double> median_abs_error;
};

// Runs the full grid. One checkerboard is built per (model, n, replication)
// task from the per-task seed and evaluated under every configured phi, so
// records are a pure function of the configuration regardless of the worker
// count. Task failures are collected and reported together with their
// scenario keys.
std::vector<ResultRecord> run(const ExperimentConfig& config);

// Ground truths per (model, phi) at config.truth_resolution; empty when the
// truth pass is disabled. Keys are "model|phi".
std::map<std::string, double> compute_truths(const ExperimentConfig& config);

std::vector<SummaryRow> summarize(const std::vector<ResultRecord>& records,
                                  const std::map<std::string, double>& truths);

// Canonical serialization of the records (sorted by scenario key). Timing is
// observability metadata, not part of the deterministic contract, so it can
// be excluded for comparisons.
std::string records_to_csv(const std::vector<ResultRecord>& records, bool include_timing);

// Writes records.csv, summary.csv and one boxplot SVG per (model, phi) with
// the sample sizes on the x-axis and a dashed line at the true value.
void emit(const std::vector<ResultRecord>& records, const std::vector<SummaryRow>& summaries,
          const std::string& out_dir);

}  // namespace cbdep

#endif  // CBDEP_SIM_HPP_
