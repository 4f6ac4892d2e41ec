#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cbdep/errors.hpp"
#include "cbdep/sim.hpp"
#include "doctest.h"
#include "support.hpp"

using cbdep::ExperimentConfig;
using cbdep_test::near;

namespace {

ExperimentConfig tiny_config() {
  return ExperimentConfig::parse_text(
      "models = como\n"
      "phis = abs^p:1\n"
      "sample_sizes = 100\n"
      "replications = 3\n"
      "s = 0.5\n"
      "master_seed = 5\n"
      "workers = 1\n"
      "truth_resolution = 0\n");
}

}  // namespace

TEST_CASE("config parsing handles the comma-in-mo quirk") {
  const auto cfg = ExperimentConfig::parse_text(
      "# scenario grid\n"
      "models = mo:1,0,mo:1,1,mo:0.2,0.7,fgm:0.6\n"
      "phis = abs^p:1,abs^p:2,expsgn:1\n"
      "sample_sizes = 10,50\n"
      "replications = 2\n"
      "master_seed = 7\n");
  REQUIRE(cfg.models.size() == 4);
  CHECK(cfg.models[0].descriptor() == "mo:1,0");
  CHECK(cfg.models[1].descriptor() == "mo:1,1");
  CHECK(cfg.models[2].descriptor() == "mo:0.2,0.7");
  CHECK(cfg.models[3].descriptor() == "fgm:0.6");
  CHECK(cfg.phis.size() == 3);
  CHECK(cfg.sample_sizes == std::vector<int>{10, 50});
  CHECK(cfg.replications == 2);
  CHECK(cfg.master_seed == 7);

  CHECK_THROWS_AS(ExperimentConfig::parse_text("models = como\n"), cbdep::InputError);
  CHECK_THROWS_AS(ExperimentConfig::parse_text("bogus_key = 1\n"), cbdep::InputError);
  CHECK_THROWS_AS(ExperimentConfig::parse_text("models = como\nphis = abs^p:1\n"
                                               "sample_sizes = 1\nreplications = 1\n"),
                  cbdep::InputError);
  CHECK_THROWS_AS(ExperimentConfig::parse_text("models = como\nphis = abs^p:1\n"
                                               "sample_sizes = 10\ntruth_resolution = 100\n"),
                  cbdep::InputError);
}

TEST_CASE("comonotone scenario produces the exact diagonal estimate") {
  const auto records = cbdep::run(tiny_config());
  REQUIRE(records.size() == 3);
  for (const auto& r : records) {
    CHECK(r.model == "como");
    CHECK(r.phi == "abs^p:1");
    CHECK(r.n == 100);
    CHECK(r.resolution == 10);
    CHECK(near(r.estimate, 0.99, 1e-12));
  }
  // All replications see an exactly diagonal board, hence identical values.
  CHECK(records[0].estimate == records[1].estimate);
  CHECK(records[1].estimate == records[2].estimate);
}

TEST_CASE("records are a pure function of the config (worker count)") {
  auto cfg = ExperimentConfig::parse_text(
      "models = mo:0.2,0.7,fgm:0.5\n"
      "phis = abs^p:1,abs^p:2\n"
      "sample_sizes = 50,100\n"
      "replications = 5\n"
      "master_seed = 99\n"
      "truth_resolution = 0\n");
  cfg.workers = 1;
  const auto serial = cbdep::run(cfg);
  cfg.workers = 8;
  const auto parallel = cbdep::run(cfg);
  CHECK(cbdep::records_to_csv(serial, false) == cbdep::records_to_csv(parallel, false));
}

TEST_CASE("extending the replication count keeps earlier records") {
  auto cfg = tiny_config();
  cfg.replications = 3;
  const auto three = cbdep::run(cfg);
  cfg.replications = 4;
  const auto four = cbdep::run(cfg);
  REQUIRE(four.size() == 4);
  for (int rep = 0; rep < 3; ++rep) {
    CHECK(three[rep].estimate == four[rep].estimate);
    CHECK(three[rep].resolution == four[rep].resolution);
  }
}

TEST_CASE("summaries: degenerate, single and truth-less groups") {
  const auto records = cbdep::run(tiny_config());
  std::map<std::string, double> truths;
  truths["como|abs^p:1"] = 1.0;
  const auto rows = cbdep::summarize(records, truths);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].sd == 0.0);
  CHECK(rows[0].q25 == rows[0].median);
  CHECK(rows[0].median == rows[0].q75);
  CHECK(near(*rows[0].median_abs_error, 0.01, 1e-12));
  CHECK(rows[0].q25 <= rows[0].median);
  CHECK(rows[0].median <= rows[0].q75);

  // Without a truth the optional fields stay empty.
  const auto no_truth = cbdep::summarize(records, {});
  CHECK_FALSE(no_truth[0].true_value.has_value());
  CHECK_FALSE(no_truth[0].median_abs_error.has_value());

  // Single record: all quartiles collapse onto the value.
  std::vector<cbdep::ResultRecord> one(1);
  one[0].model = "como";
  one[0].phi = "abs^p:1";
  one[0].n = 10;
  one[0].estimate = 0.75;
  const auto single = cbdep::summarize(one, {});
  CHECK(single[0].q25 == 0.75);
  CHECK(single[0].median == 0.75);
  CHECK(single[0].q75 == 0.75);
  CHECK(single[0].sd == 0.0);

  CHECK_THROWS_AS(cbdep::summarize({}, {}), cbdep::InputError);
}

TEST_CASE("null scenario medians shrink with the sample size") {
  const auto cfg = ExperimentConfig::parse_text(
      "models = indep\n"
      "phis = abs^p:2\n"
      "sample_sizes = 100,1000\n"
      "replications = 20\n"
      "master_seed = 17\n"
      "truth_resolution = 0\n");
  const auto rows = cbdep::summarize(cbdep::run(cfg), {});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].n == 100);
  CHECK(rows[1].n == 1000);
  CHECK(rows[1].median < rows[0].median);
}

TEST_CASE("emit writes the contract files") {
  const auto cfg = ExperimentConfig::parse_text(
      "models = como\n"
      "phis = abs^p:1\n"
      "sample_sizes = 10,100\n"
      "replications = 3\n"
      "master_seed = 5\n"
      "truth_resolution = 128\n");
  const auto records = cbdep::run(cfg);
  const auto truths = cbdep::compute_truths(cfg);
  const auto rows = cbdep::summarize(records, truths);

  const auto dir = std::filesystem::temp_directory_path() /
                   ("cbdep_emit_" + std::to_string(::getpid()));
  cbdep::emit(records, rows, dir.string());

  std::ifstream rec(dir / "records.csv");
  REQUIRE(rec.good());
  std::string header;
  std::getline(rec, header);
  CHECK(header == "model,phi,n,rep,N,estimate,wall_time_ms");
  int data_lines = 0;
  std::string line;
  while (std::getline(rec, line)) {
    if (!line.empty()) ++data_lines;
  }
  CHECK(data_lines == 6);  // 2 sample sizes x 3 reps

  std::ifstream sum(dir / "summary.csv");
  REQUIRE(sum.good());
  std::getline(sum, header);
  CHECK(header == "model,phi,n,mean,sd,q25,median,q75,min,max,true_value,median_abs_error");

  std::ifstream svg(dir / "boxplot_como_abs_p_1.svg");
  REQUIRE(svg.good());
  std::stringstream buf;
  buf << svg.rdbuf();
  const std::string content = buf.str();
  std::size_t boxes = 0, pos = 0;
  while ((pos = content.find("class=\"box\"", pos)) != std::string::npos) {
    ++boxes;
    pos += 1;
  }
  CHECK(boxes == 2);  // one box group per sample size
  CHECK(content.find("stroke-dasharray") != std::string::npos);  // the truth line

  std::filesystem::remove_all(dir);
}
