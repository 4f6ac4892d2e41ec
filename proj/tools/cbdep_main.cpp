// cbdep — convex-function dependence measures on checkerboard copulas.
//
// Subcommands:
//   estimate       rank-based dependence estimate from a CSV sample
//   true-value     ground truth for an analytic copula model
//   simulate       Monte Carlo scenario grid with CSV + SVG outputs
//   rank           order the columns of a table by estimated dependence on y
//   oracle-check   cross-check the evaluator against brute-force integration
//
// Exit codes: 0 success, 2 usage/input error, 3 mathematical-hypothesis
// violation (degenerate data, non-admissible convex function).

#include <cmath>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cbdep/checkerboard.hpp"
#include "cbdep/convex.hpp"
#include "cbdep/errors.hpp"
#include "cbdep/ingest.hpp"
#include "cbdep/measures.hpp"
#include "cbdep/models.hpp"
#include "cbdep/numeric.hpp"
#include "cbdep/rng.hpp"
#include "cbdep/sim.hpp"

namespace {

using namespace cbdep;

TiePolicy parse_tie_policy(const std::string& name) {
  if (name == "jitter") return TiePolicy::SeededJitter;
  if (name == "midrank") return TiePolicy::MidRank;
  throw InputError("unknown tie policy '" + name + "' (jitter or midrank)");
}

EvalPath parse_path(const std::string& name) {
  if (name == "auto") return EvalPath::Auto;
  if (name == "generic") return EvalPath::Generic;
  if (name == "fast") return EvalPath::Fast;
  throw InputError("unknown evaluation path '" + name + "' (auto, generic or fast)");
}

void warn_if_midrank(TiePolicy policy) {
  if (policy == TiePolicy::MidRank) {
    std::cerr << "warning: midrank ties void the exact uniform-margin invariants of the "
                 "checkerboard construction; use jitter for estimation\n";
  }
}

struct CommonEstimateFlags {
  std::string csv;
  double s = 0.5;
  std::uint64_t seed = 1;
  std::string tie_policy = "jitter";
  bool drop_incomplete = false;
  std::string path = "auto";
};

int cmd_estimate(const CommonEstimateFlags& flags, const std::string& x_col,
                 const std::string& y_col, const std::string& phi) {
  const TiePolicy tie = parse_tie_policy(flags.tie_policy);
  warn_if_midrank(tie);
  CsvOptions options;
  options.drop_incomplete = flags.drop_incomplete;
  const BivariateSample sample = read_csv(flags.csv, x_col, y_col, options);
  const ConvexFunction f = ConvexFunction::parse(phi);
  const MeasureResult r =
      estimate(sample, f, flags.s, flags.seed, tie, parse_path(flags.path));
  std::cout << MeasureResult::csv_header() << "\n" << r.csv_row() << "\n";
  return 0;
}

int cmd_true_value(const std::string& model_desc, const std::string& phi_desc, int n_fine,
                   const std::string& path) {
  const CopulaModel model = CopulaModel::parse(model_desc);
  const ConvexFunction f = ConvexFunction::parse(phi_desc);
  const TrueValue tv = true_lambda(model, f, n_fine, parse_path(path));
  std::cout << "model,phi,N,value,error_est\n"
            << model.descriptor() << "," << f.descriptor() << "," << n_fine << ","
            << format_double(tv.value) << "," << format_double(tv.error_estimate) << "\n";
  if (!tv.converged) {
    std::cerr << "error: two-resolution estimate has not converged (|delta| = "
              << format_double(tv.error_estimate) << " > 1e-2)\n";
    return 3;
  }
  return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir) {
  const ExperimentConfig config = ExperimentConfig::parse_file(config_path);
  const auto records = run(config);
  const auto truths = compute_truths(config);
  const auto summaries = summarize(records, truths);
  emit(records, summaries, out_dir);
  std::cout << "wrote " << records.size() << " records to " << out_dir << "/records.csv, "
            << summaries.size() << " summary rows, and per-scenario SVG boxplots\n";
  return 0;
}

int cmd_rank(const CommonEstimateFlags& flags, const std::string& y_col,
             const std::string& phi_list) {
  const TiePolicy tie = parse_tie_policy(flags.tie_policy);
  warn_if_midrank(tie);
  CsvOptions options;
  options.drop_incomplete = flags.drop_incomplete;
  const ColumnTable table = read_table(flags.csv, y_col, options);

  std::vector<ConvexFunction> phis;
  {
    std::stringstream ss(phi_list);
    std::string desc;
    while (std::getline(ss, desc, ',')) {
      if (!desc.empty()) phis.push_back(ConvexFunction::parse(desc));
    }
  }
  if (phis.empty()) throw InputError("rank needs at least one phi descriptor");
  if (table.columns.size() < 2) throw InputError("rank needs at least one exogenous column");

  std::cout << "column," << MeasureResult::csv_header() << "\n";
  std::map<std::string, std::vector<std::pair<double, std::string>>> by_phi;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c == table.endogenous) continue;
    const BivariateSample sample =
        BivariateSample::create(table.columns[c], table.columns[table.endogenous]);
    for (const auto& f : phis) {
      const MeasureResult r = estimate(sample, f, flags.s, flags.seed, tie);
      std::cout << table.names[c] << "," << r.csv_row() << "\n";
      by_phi[f.descriptor()].emplace_back(r.value, table.names[c]);
    }
  }

  std::set<std::vector<std::string>> distinct_orderings;
  for (const auto& f : phis) {
    auto& scored = by_phi[f.descriptor()];
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    std::vector<std::string> ordering;
    std::cout << "# ordering " << f.descriptor() << ":";
    for (const auto& [value, name] : scored) {
      std::cout << " " << name;
      ordering.push_back(name);
    }
    std::cout << "\n";
    distinct_orderings.insert(std::move(ordering));
  }
  std::cout << "# orderings_coincide: " << (distinct_orderings.size() == 1 ? "yes" : "no")
            << "\n";
  return 0;
}

int cmd_oracle_check(int cases, std::uint64_t seed, int grid, int max_resolution) {
  if (cases < 1) throw InputError("--cases must be >= 1");
  if (max_resolution < 2) throw InputError("--max-resolution must be >= 2");
  std::vector<ConvexFunction> phis;
  for (double p : {1.0, 2.0, 3.0}) phis.push_back(ConvexFunction::abs_pow(p));
  for (double c : {0.2, 1.0, 5.0}) phis.push_back(ConvexFunction::exp_signed(c));
  for (double c : {0.2, 1.0, 5.0}) phis.push_back(ConvexFunction::exp_abs(c));

  Rng rng(seed);
  double max_mid = 0.0, max_seg = 0.0;
  bool roundtrip_ok = true;
  for (int case_idx = 0; case_idx < cases; ++case_idx) {
    const int N = 2 + static_cast<int>(rng.uniform01() * (max_resolution - 1));
    const CheckerboardCopula cb = random_doubly_stochastic(N, rng.next_u64());

    std::stringstream io;
    write_checkerboard(cb, io);
    const CheckerboardCopula back = read_checkerboard(io);
    if (back.masses() != cb.masses()) roundtrip_ok = false;

    for (const auto& f : phis) {
      const double exact = lambda_phi(cb, f).value;
      max_mid = std::max(max_mid, std::abs(exact - lambda_phi_oracle(cb, f, grid)));
      max_seg = std::max(max_seg, std::abs(exact - lambda_phi_oracle_segment(cb, f)));
    }
  }
  std::cout << "cases=" << cases << " grid=" << grid
            << " max_midpoint_discrepancy=" << format_double(max_mid)
            << " max_segment_discrepancy=" << format_double(max_seg)
            << " roundtrip=" << (roundtrip_ok ? "ok" : "FAILED") << "\n";
  const bool ok = max_mid < 2e-3 && max_seg < 1e-10 && roundtrip_ok;
  if (!ok) std::cerr << "error: oracle discrepancy above tolerance\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"convex-function dependence measures on checkerboard copulas"};
  app.require_subcommand(1);

  // estimate
  CommonEstimateFlags est;
  std::string x_col = "0", y_col = "1", phi;
  auto* estimate_cmd = app.add_subcommand("estimate", "estimate the dependence of y on x");
  estimate_cmd->add_option("csv", est.csv, "input CSV file")->required();
  estimate_cmd->add_option("--x-col", x_col, "exogenous column (name or 0-based index)")
      ->capture_default_str();
  estimate_cmd->add_option("--y-col", y_col, "endogenous column (name or 0-based index)")
      ->capture_default_str();
  estimate_cmd->add_option("--phi", phi, "convex function (abs^p:P, expsgn:C, expabs:C)")
      ->required();
  estimate_cmd->add_option("--s", est.s, "resolution exponent: N = max(2, floor(n^s))")
      ->capture_default_str();
  estimate_cmd->add_option("--seed", est.seed, "seed for tie breaking")->capture_default_str();
  estimate_cmd->add_option("--tie-policy", est.tie_policy, "jitter or midrank")
      ->capture_default_str();
  estimate_cmd->add_flag("--drop-incomplete", est.drop_incomplete,
                         "drop rows with missing values instead of failing");
  estimate_cmd->add_option("--path", est.path, "evaluation path: auto, generic or fast")
      ->capture_default_str();

  // true-value
  std::string tv_model, tv_phi, tv_path = "auto";
  int tv_n_fine = 512;
  auto* true_cmd = app.add_subcommand("true-value", "ground truth for an analytic model");
  true_cmd->add_option("model", tv_model, "model descriptor (indep, como, counter, mo:A,B, fgm:T, frechet:A)")
      ->required();
  true_cmd->add_option("phi", tv_phi, "convex-function descriptor")->required();
  true_cmd->add_option("N_fine", tv_n_fine, "aggregation resolution (power of two >= 128)")
      ->capture_default_str();
  true_cmd->add_option("--path", tv_path, "evaluation path: auto, generic or fast")
      ->capture_default_str();

  // simulate
  std::string sim_config, sim_out;
  auto* sim_cmd = app.add_subcommand("simulate", "run a Monte Carlo scenario grid");
  sim_cmd->add_option("config", sim_config, "key=value config file")->required();
  sim_cmd->add_option("out_dir", sim_out, "output directory")->required();

  // rank
  CommonEstimateFlags rank_flags;
  std::string rank_y, rank_phis = "abs^p:1,expabs:1,expsgn:1";
  auto* rank_cmd = app.add_subcommand("rank", "rank table columns by dependence on y");
  rank_cmd->add_option("csv", rank_flags.csv, "input CSV file")->required();
  rank_cmd->add_option("--y-col", rank_y, "endogenous column (name or 0-based index)")
      ->required();
  rank_cmd->add_option("--phis", rank_phis, "comma-separated convex-function descriptors")
      ->capture_default_str();
  rank_cmd->add_option("--s", rank_flags.s, "resolution exponent")->capture_default_str();
  rank_cmd->add_option("--seed", rank_flags.seed, "seed for tie breaking")
      ->capture_default_str();
  rank_cmd->add_option("--tie-policy", rank_flags.tie_policy, "jitter or midrank")
      ->capture_default_str();
  rank_cmd->add_flag("--drop-incomplete", rank_flags.drop_incomplete,
                     "drop rows with missing values instead of failing");

  // oracle-check
  int oc_cases = 50, oc_grid = 800, oc_max_n = 24;
  std::uint64_t oc_seed = 7;
  auto* oracle_cmd =
      app.add_subcommand("oracle-check", "compare the evaluator against brute force");
  oracle_cmd->add_option("--cases", oc_cases, "number of random checkerboards")
      ->capture_default_str();
  oracle_cmd->add_option("--seed", oc_seed, "seed for the random checkerboards")
      ->capture_default_str();
  oracle_cmd->add_option("--grid", oc_grid, "midpoint-rule grid per axis")
      ->capture_default_str();
  oracle_cmd->add_option("--max-resolution", oc_max_n, "largest checkerboard resolution")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (estimate_cmd->parsed()) return cmd_estimate(est, x_col, y_col, phi);
    if (true_cmd->parsed()) return cmd_true_value(tv_model, tv_phi, tv_n_fine, tv_path);
    if (sim_cmd->parsed()) return cmd_simulate(sim_config, sim_out);
    if (rank_cmd->parsed()) return cmd_rank(rank_flags, rank_y, rank_phis);
    if (oracle_cmd->parsed()) return cmd_oracle_check(oc_cases, oc_seed, oc_grid, oc_max_n);
  } catch (const NormalizerNotPositive& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const HypothesisError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
