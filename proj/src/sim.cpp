#include "cbdep/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "cbdep/errors.hpp"
#include "cbdep/measures.hpp"
#include "cbdep/numeric.hpp"
#include "cbdep/rng.hpp"

namespace cbdep {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(s);
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

bool is_numeric_token(const std::string& t) {
  if (t.empty()) return false;
  char* end = nullptr;
  std::strtod(t.c_str(), &end);
  return end != t.c_str() && *end == '\0';
}

// Model lists are comma separated, but mo:A,B carries an internal comma:
// bare numeric tokens are re-attached to the descriptor before them.
std::vector<std::string> split_model_list(const std::string& s) {
  std::vector<std::string> out;
  for (const auto& tok : split(s, ',')) {
    if (tok.empty()) continue;
    if (is_numeric_token(tok) && !out.empty()) {
      out.back() += "," + tok;
    } else {
      out.push_back(tok);
    }
  }
  return out;
}

double quantile_type7(const std::vector<double>& sorted, double p) {
  const std::size_t m = sorted.size();
  if (m == 1) return sorted[0];
  const double pos = p * (m - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const double frac = pos - lo;
  if (lo + 1 >= m) return sorted[m - 1];
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) {
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-') ? c : '_';
  }
  return out;
}

std::string svg_boxplot(const std::vector<SummaryRow>& rows, const std::string& model,
                        const std::string& phi);

}  // namespace

void ExperimentConfig::validate() const {
  if (models.empty()) throw InputError("config: no models");
  if (phis.empty()) throw InputError("config: no phis");
  if (sample_sizes.empty()) throw InputError("config: no sample_sizes");
  for (int n : sample_sizes) {
    if (n < 2) throw InputError("config: sample sizes must be >= 2");
  }
  if (replications < 1) throw InputError("config: replications must be >= 1");
  if (!(s > 0.0) || s > 1.0) throw InputError("config: s must lie in (0,1]");
  if (workers < 1) throw InputError("config: workers must be >= 1");
  if (truth_resolution != 0 &&
      (truth_resolution < 128 || (truth_resolution & (truth_resolution - 1)) != 0)) {
    throw InputError("config: truth_resolution must be 0 or a power of two >= 128");
  }
  for (const auto& phi : phis) ConvexFunction::parse(phi);  // validate descriptors
}

ExperimentConfig ExperimentConfig::parse_text(const std::string& text) {
  ExperimentConfig cfg;
  std::stringstream ss(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw InputError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    try {
    if (key == "models") {
      for (const auto& desc : split_model_list(value)) {
        cfg.models.push_back(CopulaModel::parse(desc));
      }
    } else if (key == "phis") {
      for (const auto& desc : split(value, ',')) {
        if (!desc.empty()) cfg.phis.push_back(desc);
      }
    } else if (key == "sample_sizes") {
      for (const auto& tok : split(value, ',')) {
        if (!tok.empty()) cfg.sample_sizes.push_back(std::stoi(tok));
      }
    } else if (key == "replications") {
      cfg.replications = std::stoi(value);
    } else if (key == "s") {
      cfg.s = std::stod(value);
    } else if (key == "master_seed") {
      cfg.master_seed = std::stoull(value);
    } else if (key == "workers") {
      cfg.workers = std::stoi(value);
    } else if (key == "truth_resolution") {
      cfg.truth_resolution = std::stoi(value);
    } else {
      throw InputError("config line " + std::to_string(line_no) + ": unknown key '" + key +
                       "'");
    }
    } catch (const InputError&) {
      throw;
    } catch (const std::exception&) {
      throw InputError("config line " + std::to_string(line_no) + ": bad value '" + value +
                       "' for key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_text(buffer.str());
}

std::vector<ResultRecord> run(const ExperimentConfig& config) {
  config.validate();
  std::vector<ConvexFunction> phis;
  for (const auto& desc : config.phis) {
    phis.push_back(ConvexFunction::parse(desc));
    phis.back().require_valid();
  }

  struct Task {
    const CopulaModel* model;
    int n;
    int rep;
  };
  std::vector<Task> tasks;
  for (const auto& model : config.models) {
    for (int n : config.sample_sizes) {
      for (int rep = 0; rep < config.replications; ++rep) {
        tasks.push_back({&model, n, rep});
      }
    }
  }

  std::vector<ResultRecord> records(tasks.size() * phis.size());
  std::vector<std::string> failures;
  std::mutex failures_mu;
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= tasks.size()) return;
      const Task& task = tasks[t];
      const std::string scenario =
          task.model->descriptor() + " n=" + std::to_string(task.n) +
          " rep=" + std::to_string(task.rep);
      try {
        const std::uint64_t seed = stable_task_seed(config.master_seed,
                                                    task.model->descriptor(), task.n, task.rep);
        const auto pairs = task.model->sample(task.n, seed);
        std::vector<double> xs(task.n), ys(task.n);
        for (int i = 0; i < task.n; ++i) {
          xs[i] = pairs[i].first;
          ys[i] = pairs[i].second;
        }
        const auto sample = BivariateSample::create(std::move(xs), std::move(ys));
        const auto pseudo = to_pseudo(sample, TiePolicy::SeededJitter, seed);
        const int N = checkerboard_resolution(task.n, config.s);
        const CheckerboardCopula cb = ecbc(pseudo, N);
        for (std::size_t p = 0; p < phis.size(); ++p) {
          const auto t0 = std::chrono::steady_clock::now();
          const MeasureResult r = lambda_phi(cb, phis[p]);
          const auto t1 = std::chrono::steady_clock::now();
          if (r.value < -1e-9 || r.value > 1.0 + 1e-9) {
            throw std::runtime_error("estimate " + format_double(r.value) +
                                     " outside [0,1] for " + phis[p].descriptor());
          }
          ResultRecord& rec = records[t * phis.size() + p];
          rec.model = task.model->descriptor();
          rec.phi = phis[p].descriptor();
          rec.n = task.n;
          rec.rep = task.rep;
          rec.resolution = N;
          rec.estimate = r.value;
          rec.wall_time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        }
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failures_mu);
        failures.push_back(scenario + ": " + e.what());
      }
    }
  };

  const int W = std::min<int>(config.workers, static_cast<int>(tasks.size()));
  if (W <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(W);
    for (int w = 0; w < W; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  if (!failures.empty()) {
    std::string msg = std::to_string(failures.size()) + " task(s) failed:";
    for (const auto& f : failures) msg += "\n  " + f;
    throw std::runtime_error(msg);
  }

  std::sort(records.begin(), records.end(), [](const ResultRecord& a, const ResultRecord& b) {
    if (a.model != b.model) return a.model < b.model;
    if (a.phi != b.phi) return a.phi < b.phi;
    if (a.n != b.n) return a.n < b.n;
    return a.rep < b.rep;
  });
  return records;
}

std::map<std::string, double> compute_truths(const ExperimentConfig& config) {
  std::map<std::string, double> truths;
  if (config.truth_resolution == 0) return truths;
  for (const auto& model : config.models) {
    const CheckerboardCopula fine = aggregate(model, config.truth_resolution);
    for (const auto& desc : config.phis) {
      const ConvexFunction f = ConvexFunction::parse(desc);
      truths[model.descriptor() + "|" + desc] = lambda_phi(fine, f).value;
    }
  }
  return truths;
}

std::vector<SummaryRow> summarize(const std::vector<ResultRecord>& records,
                                  const std::map<std::string, double>& truths) {
  if (records.empty()) throw InputError("no records to summarize");
  std::map<std::tuple<std::string, std::string, int>, std::vector<double>> groups;
  for (const auto& r : records) {
    groups[{r.model, r.phi, r.n}].push_back(r.estimate);
  }
  std::vector<SummaryRow> rows;
  for (auto& [key, values] : groups) {
    std::sort(values.begin(), values.end());
    SummaryRow row;
    row.model = std::get<0>(key);
    row.phi = std::get<1>(key);
    row.n = std::get<2>(key);
    KahanSum sum;
    for (double v : values) sum.add(v);
    const double m = sum.value() / values.size();
    row.mean = m;
    if (values.size() > 1) {
      KahanSum sq;
      for (double v : values) sq.add((v - m) * (v - m));
      row.sd = std::sqrt(sq.value() / (values.size() - 1));
    }
    row.q25 = quantile_type7(values, 0.25);
    row.median = quantile_type7(values, 0.5);
    row.q75 = quantile_type7(values, 0.75);
    row.min = values.front();
    row.max = values.back();
    const auto it = truths.find(row.model + "|" + row.phi);
    if (it != truths.end()) {
      row.true_value = it->second;
      std::vector<double> abs_err(values.size());
      for (std::size_t i = 0; i < values.size(); ++i) {
        abs_err[i] = std::abs(values[i] - it->second);
      }
      std::sort(abs_err.begin(), abs_err.end());
      row.median_abs_error = quantile_type7(abs_err, 0.5);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string records_to_csv(const std::vector<ResultRecord>& records, bool include_timing) {
  std::string out = include_timing ? "model,phi,n,rep,N,estimate,wall_time_ms\n"
                                   : "model,phi,n,rep,N,estimate\n";
  for (const auto& r : records) {
    out += r.model + "," + r.phi + "," + std::to_string(r.n) + "," + std::to_string(r.rep) +
           "," + std::to_string(r.resolution) + "," + format_double(r.estimate);
    if (include_timing) out += "," + format_double(r.wall_time_ms);
    out += "\n";
  }
  return out;
}

void emit(const std::vector<ResultRecord>& records, const std::vector<SummaryRow>& summaries,
          const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw InputError("cannot create output directory '" + out_dir + "'");

  {
    std::ofstream out(fs::path(out_dir) / "records.csv");
    if (!out) throw InputError("cannot write records.csv");
    out << records_to_csv(records, true);
  }
  {
    std::ofstream out(fs::path(out_dir) / "summary.csv");
    if (!out) throw InputError("cannot write summary.csv");
    out << "model,phi,n,mean,sd,q25,median,q75,min,max,true_value,median_abs_error\n";
    for (const auto& row : summaries) {
      out << row.model << ',' << row.phi << ',' << row.n << ',' << format_double(row.mean)
          << ',' << format_double(row.sd) << ',' << format_double(row.q25) << ','
          << format_double(row.median) << ',' << format_double(row.q75) << ','
          << format_double(row.min) << ',' << format_double(row.max) << ','
          << (row.true_value ? format_double(*row.true_value) : "") << ','
          << (row.median_abs_error ? format_double(*row.median_abs_error) : "") << '\n';
    }
  }

  std::map<std::pair<std::string, std::string>, std::vector<SummaryRow>> panels;
  for (const auto& row : summaries) {
    panels[{row.model, row.phi}].push_back(row);
  }
  for (auto& [key, rows] : panels) {
    std::sort(rows.begin(), rows.end(),
              [](const SummaryRow& a, const SummaryRow& b) { return a.n < b.n; });
    const std::string name =
        "boxplot_" + sanitize(key.first) + "_" + sanitize(key.second) + ".svg";
    std::ofstream out(fs::path(out_dir) / name);
    if (!out) throw InputError("cannot write " + name);
    out << svg_boxplot(rows, key.first, key.second);
  }
}

namespace {

std::string svg_boxplot(const std::vector<SummaryRow>& rows, const std::string& model,
                        const std::string& phi) {
  const double width = 640, height = 400;
  const double left = 60, right = 20, top = 40, bottom = 50;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  const double y_lo = -0.02, y_hi = 1.02;
  auto ypix = [&](double v) { return top + plot_h * (y_hi - v) / (y_hi - y_lo); };
  const std::size_t k = rows.size();

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"14\">" << model << "  phi=" << phi
      << "</text>\n";
  // Axes and y ticks.
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
      << top + plot_h << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w
      << "\" y2=\"" << top + plot_h << "\" stroke=\"black\"/>\n";
  for (double tick : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const double y = ypix(tick);
    svg << "<line x1=\"" << left - 4 << "\" y1=\"" << y << "\" x2=\"" << left << "\" y2=\""
        << y << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << left - 8 << "\" y=\"" << y + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << tick
        << "</text>\n";
  }
  if (!rows.empty() && rows.front().true_value) {
    const double y = ypix(*rows.front().true_value);
    svg << "<line class=\"truth\" x1=\"" << left << "\" y1=\"" << y << "\" x2=\""
        << left + plot_w << "\" y2=\"" << y
        << "\" stroke=\"#cc0000\" stroke-dasharray=\"6,4\"/>\n";
  }
  for (std::size_t i = 0; i < k; ++i) {
    const SummaryRow& r = rows[i];
    const double cx = left + plot_w * (i + 0.5) / k;
    const double half = std::min(24.0, plot_w / (3.0 * k));
    svg << "<g class=\"box\">\n";
    // Whiskers to min/max.
    svg << "<line x1=\"" << cx << "\" y1=\"" << ypix(r.min) << "\" x2=\"" << cx << "\" y2=\""
        << ypix(r.q25) << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << cx << "\" y1=\"" << ypix(r.q75) << "\" x2=\"" << cx << "\" y2=\""
        << ypix(r.max) << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << cx - half / 2 << "\" y1=\"" << ypix(r.min) << "\" x2=\""
        << cx + half / 2 << "\" y2=\"" << ypix(r.min) << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << cx - half / 2 << "\" y1=\"" << ypix(r.max) << "\" x2=\""
        << cx + half / 2 << "\" y2=\"" << ypix(r.max) << "\" stroke=\"black\"/>\n";
    svg << "<rect x=\"" << cx - half << "\" y=\"" << ypix(r.q75) << "\" width=\"" << 2 * half
        << "\" height=\"" << std::max(0.5, ypix(r.q25) - ypix(r.q75))
        << "\" fill=\"#9ecae1\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << cx - half << "\" y1=\"" << ypix(r.median) << "\" x2=\""
        << cx + half << "\" y2=\"" << ypix(r.median)
        << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << cx << "\" y=\"" << top + plot_h + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">n=" << r.n
        << "</text>\n";
    svg << "</g>\n";
  }
  svg << "<text x=\"" << width / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">sample size"
      << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace

}  // namespace cbdep
