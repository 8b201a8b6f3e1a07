#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "fwsvm/bench/cv.hpp"
#include "fwsvm/bench/synthetic.hpp"
#include "fwsvm/dataset.hpp"
#include "fwsvm/errors.hpp"
#include "fwsvm/numfmt.hpp"

namespace fwsvm::bench {

struct ExperimentConfig {
  std::string dataset_path;        // empty: use the synthetic generator
  std::string dataset_name = "synthetic";
  BlobSpec synthetic;
  KernelKind kernel = KernelKind::linear;
  std::vector<double> C_grid = default_C_grid();
  std::vector<double> sigma_grid{1.0};
  std::size_t folds = 10;
  double epsilon = 1e-5;
  std::size_t max_iter = 1'000'000;
  std::vector<Algorithm> algorithms{Algorithm::fw, Algorithm::mfw, Algorithm::mfw_fixed_c};
  std::uint64_t seed = 1;
  std::size_t repetitions = 10;
  double test_fraction = 0.1;
  std::string output = "results.csv";

  void validate() const {
    if (C_grid.empty() || sigma_grid.empty()) throw ParameterError("config: grids must be nonempty");
    if (repetitions < 1) throw ParameterError("config: repetitions must be >= 1");
    if (algorithms.empty()) throw ParameterError("config: no algorithms selected");
    if (folds < 2) throw ParameterError("config: folds must be >= 2");
    StopRule{epsilon, max_iter}.validate();
  }

  StopRule stop() const { return StopRule{epsilon, max_iter}; }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    auto comma = s.find(',', pos);
    if (comma == std::string_view::npos) comma = s.size();
    auto item = trim(s.substr(pos, comma - pos));
    if (!item.empty()) out.push_back(std::move(item));
    pos = comma + 1;
  }
  return out;
}

}  // namespace detail

// "log:lo:hi:n" for a log-spaced grid, otherwise a comma-separated list.
inline std::vector<double> parse_grid(std::string_view text) {
  if (text.rfind("log:", 0) == 0) {
    std::vector<std::string> parts;
    std::string_view rest = text.substr(4);
    std::size_t pos = 0;
    while (pos <= rest.size()) {
      auto colon = rest.find(':', pos);
      if (colon == std::string_view::npos) colon = rest.size();
      parts.emplace_back(rest.substr(pos, colon - pos));
      pos = colon + 1;
    }
    if (parts.size() != 3) throw ParameterError("grid: expected log:lo:hi:n");
    const auto lo = parse_double(parts[0]);
    const auto hi = parse_double(parts[1]);
    const auto n = parse_uint(parts[2]);
    if (!lo || !hi || !n) throw ParameterError("grid: bad log spec '" + std::string(text) + "'");
    return log_grid(*lo, *hi, static_cast<std::size_t>(*n));
  }
  std::vector<double> out;
  for (const auto& item : detail::split_list(text)) {
    const auto v = parse_double(item);
    if (!v || !(*v > 0.0)) throw ParameterError("grid: bad value '" + item + "'");
    out.push_back(*v);
  }
  if (out.empty()) throw ParameterError("grid: empty");
  return out;
}

// key = value lines; '#' starts a comment. Unknown keys are rejected.
inline ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  auto need_uint = [&](const std::string& key, const std::string& v) {
    const auto n = parse_uint(v);
    if (!n) throw ParameterError("config line " + std::to_string(line_no) + ": bad integer for " + key);
    return *n;
  };
  auto need_double = [&](const std::string& key, const std::string& v) {
    const auto d = parse_double(v);
    if (!d) throw ParameterError("config line " + std::to_string(line_no) + ": bad number for " + key);
    return *d;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (detail::trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParameterError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = detail::trim(std::string_view(line).substr(0, eq));
    const std::string value = detail::trim(std::string_view(line).substr(eq + 1));
    if (key == "dataset") {
      cfg.dataset_path = value == "synthetic" ? std::string() : value;
      if (!cfg.dataset_path.empty()) cfg.dataset_name = std::filesystem::path(value).stem().string();
    } else if (key == "name") {
      cfg.dataset_name = value;
    } else if (key == "synthetic_n") {
      cfg.synthetic.n = need_uint(key, value);
    } else if (key == "synthetic_dim") {
      cfg.synthetic.dim = need_uint(key, value);
    } else if (key == "synthetic_separation") {
      cfg.synthetic.separation = need_double(key, value);
    } else if (key == "synthetic_seed") {
      cfg.synthetic.seed = need_uint(key, value);
    } else if (key == "kernel") {
      cfg.kernel = parse_kernel_kind(value);
    } else if (key == "C_grid") {
      cfg.C_grid = parse_grid(value);
    } else if (key == "sigma_grid") {
      cfg.sigma_grid = parse_grid(value);
    } else if (key == "folds") {
      cfg.folds = need_uint(key, value);
    } else if (key == "epsilon") {
      cfg.epsilon = need_double(key, value);
    } else if (key == "max_iter") {
      cfg.max_iter = need_uint(key, value);
    } else if (key == "algorithms") {
      cfg.algorithms.clear();
      for (const auto& a : detail::split_list(value)) cfg.algorithms.push_back(parse_algorithm(a));
    } else if (key == "seed") {
      cfg.seed = need_uint(key, value);
    } else if (key == "repetitions") {
      cfg.repetitions = need_uint(key, value);
    } else if (key == "test_fraction") {
      cfg.test_fraction = need_double(key, value);
    } else if (key == "output") {
      cfg.output = value;
    } else {
      throw ParameterError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

inline Dataset load_libsvm_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return parse_libsvm(in);
}

inline Dataset load_dataset(const ExperimentConfig& cfg) {
  if (cfg.dataset_path.empty()) return make_gaussian_blobs(cfg.synthetic);
  return load_libsvm_file(cfg.dataset_path);
}

struct ReportRow {
  std::string dataset;
  std::string kernel;
  std::string algo;
  std::size_t rep = 0;
  double C = 0.0;
  double sigma = 0.0;
  double acc = 0.0;
  std::size_t svs = 0;
  std::size_t iters = 0;
  double gap = 0.0;
  std::string reason;
};

struct Aggregate {
  std::string dataset;
  std::string kernel;
  std::string algo;
  std::size_t count = 0;
  // mean and sample standard deviation of each numeric column
  double C[2]{}, sigma[2]{}, acc[2]{}, svs[2]{}, iters[2]{}, gap[2]{};
};

// Geometric mean over (dataset, kernel) groups of mean(algo) / mean(fw), in percent.
struct RatioSummary {
  std::string algo;
  double accuracy = 100.0;
  double svs = 100.0;
  double iters = 100.0;
};

struct ExperimentReport {
  std::vector<ReportRow> rows;

  std::vector<Aggregate> aggregates() const;
  std::vector<RatioSummary> ratios_vs_fw() const;
};

namespace detail {

inline auto row_key(const ReportRow& r) { return std::tie(r.dataset, r.kernel, r.algo, r.rep); }

inline void mean_std(const std::vector<double>& xs, double out[2]) {
  double s = 0.0;
  for (double x : xs) s += x;
  const double mean = s / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  out[0] = mean;
  out[1] = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
}

}  // namespace detail

inline std::vector<ReportRow> sorted_rows(std::vector<ReportRow> rows) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ReportRow& a, const ReportRow& b) { return detail::row_key(a) < detail::row_key(b); });
  return rows;
}

// Groups sorted rows by (dataset, kernel, algo); statistics are accumulated
// in row order so re-reading the CSV reproduces them bit for bit.
inline std::vector<Aggregate> ExperimentReport::aggregates() const {
  const auto sorted = sorted_rows(rows);
  std::vector<Aggregate> out;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    std::vector<double> C, sigma, acc, svs, iters, gap;
    while (j < sorted.size() && sorted[j].dataset == sorted[i].dataset && sorted[j].kernel == sorted[i].kernel &&
           sorted[j].algo == sorted[i].algo) {
      C.push_back(sorted[j].C);
      sigma.push_back(sorted[j].sigma);
      acc.push_back(sorted[j].acc);
      svs.push_back(static_cast<double>(sorted[j].svs));
      iters.push_back(static_cast<double>(sorted[j].iters));
      gap.push_back(sorted[j].gap);
      ++j;
    }
    Aggregate a;
    a.dataset = sorted[i].dataset;
    a.kernel = sorted[i].kernel;
    a.algo = sorted[i].algo;
    a.count = j - i;
    detail::mean_std(C, a.C);
    detail::mean_std(sigma, a.sigma);
    detail::mean_std(acc, a.acc);
    detail::mean_std(svs, a.svs);
    detail::mean_std(iters, a.iters);
    detail::mean_std(gap, a.gap);
    out.push_back(std::move(a));
    i = j;
  }
  return out;
}

inline std::vector<RatioSummary> ExperimentReport::ratios_vs_fw() const {
  const auto aggs = aggregates();
  std::map<std::string, std::vector<std::tuple<double, double, double>>> logs;
  for (const auto& a : aggs) {
    if (a.algo == "fw") continue;
    const auto base = std::find_if(aggs.begin(), aggs.end(), [&](const Aggregate& b) {
      return b.algo == "fw" && b.dataset == a.dataset && b.kernel == a.kernel;
    });
    if (base == aggs.end()) continue;
    logs[a.algo].emplace_back(std::log(a.acc[0] / base->acc[0]), std::log(a.svs[0] / base->svs[0]),
                              std::log(a.iters[0] / base->iters[0]));
  }
  std::vector<RatioSummary> out;
  for (const auto& [algo, entries] : logs) {
    double la = 0, ls = 0, li = 0;
    for (const auto& [a, s, it] : entries) {
      la += a;
      ls += s;
      li += it;
    }
    const double n = static_cast<double>(entries.size());
    out.push_back({algo, 100.0 * std::exp(la / n), 100.0 * std::exp(ls / n), 100.0 * std::exp(li / n)});
  }
  return out;
}

inline constexpr std::string_view kReportHeader = "dataset,kernel,algo,rep,C,sigma,acc,svs,iters,gap,reason";

// Per-repetition rows sorted by (dataset, kernel, algo, rep), each group
// followed by its "mean" and "std" rows. LF line endings.
inline std::string format_report(const ExperimentReport& report) {
  std::string out(kReportHeader);
  out += '\n';
  const auto sorted = sorted_rows(report.rows);
  const auto aggs = report.aggregates();
  std::size_t g = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto& r = sorted[i];
    out += r.dataset + ',' + r.kernel + ',' + r.algo + ',' + std::to_string(r.rep) + ',' + format_double(r.C) + ',' +
           format_double(r.sigma) + ',' + format_double(r.acc) + ',' + std::to_string(r.svs) + ',' +
           std::to_string(r.iters) + ',' + format_double(r.gap) + ',' + r.reason + '\n';
    const bool last_of_group = i + 1 == sorted.size() || sorted[i + 1].dataset != r.dataset ||
                               sorted[i + 1].kernel != r.kernel || sorted[i + 1].algo != r.algo;
    if (last_of_group) {
      const auto& a = aggs[g++];
      for (int k = 0; k < 2; ++k) {
        out += a.dataset + ',' + a.kernel + ',' + a.algo + ',' + (k == 0 ? "mean" : "std") + ',' +
               format_double(a.C[k]) + ',' + format_double(a.sigma[k]) + ',' + format_double(a.acc[k]) + ',' +
               format_double(a.svs[k]) + ',' + format_double(a.iters[k]) + ',' + format_double(a.gap[k]) + ",\n";
      }
    }
  }
  return out;
}

inline void emit_report(const ExperimentReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << format_report(report);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

struct ParsedReport {
  ExperimentReport report;                 // per-repetition rows
  std::vector<std::vector<std::string>> aggregate_rows;  // "mean"/"std" rows, raw fields
};

inline ParsedReport read_report(std::istream& in) {
  ParsedReport parsed;
  std::string line;
  if (!std::getline(in, line) || line != kReportHeader) throw DataError("report: missing or wrong header");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t pos = 0;
    while (true) {
      const auto comma = line.find(',', pos);
      f.push_back(line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (f.size() != 11) throw DataError("report line " + std::to_string(line_no) + ": expected 11 fields");
    if (f[3] == "mean" || f[3] == "std") {
      parsed.aggregate_rows.push_back(std::move(f));
      continue;
    }
    ReportRow r;
    r.dataset = f[0];
    r.kernel = f[1];
    r.algo = f[2];
    const auto rep = parse_uint(f[3]);
    const auto C = parse_double(f[4]);
    const auto sigma = parse_double(f[5]);
    const auto acc = parse_double(f[6]);
    const auto svs = parse_uint(f[7]);
    const auto iters = parse_uint(f[8]);
    const auto gap = parse_double(f[9]);
    if (!rep || !C || !sigma || !acc || !svs || !iters || !gap)
      throw DataError("report line " + std::to_string(line_no) + ": bad numeric field");
    r.rep = *rep;
    r.C = *C;
    r.sigma = *sigma;
    r.acc = *acc;
    r.svs = *svs;
    r.iters = *iters;
    r.gap = *gap;
    r.reason = f[10];
    parsed.report.rows.push_back(std::move(r));
  }
  return parsed;
}

struct RepetitionDetail {
  std::size_t rep;
  Algorithm algo;
  TrainedModel model;
  std::vector<std::size_t> train_indices;  // into the full dataset
};

// Repeats: seeded 90/10 split, [-1, 1] scaling fitted on the training part,
// CV grid search on the training part, refit with the chosen parameters,
// accuracy on the test part. Solver iteration caps are recorded per row.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg, const Dataset& data,
                                       std::vector<RepetitionDetail>* details = nullptr) {
  cfg.validate();
  ExperimentReport report;
  for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
    const std::uint64_t rep_seed = cfg.seed * 1'000'003ULL + rep;
    const HoldoutSplit split = holdout_split(data.size(), cfg.test_fraction, rep_seed);
    const ScaledPair scaled = scale_features(data.subset(split.train), data.subset(split.test));
    if (cfg.folds > scaled.fit.size()) throw DataError("experiment: training split too small for the fold count");

    for (Algorithm algo : cfg.algorithms) {
      SearchSettings search{cfg.C_grid, cfg.sigma_grid, cfg.kernel, cfg.folds, cfg.stop(), rep_seed};
      const GridSearchResult best = grid_search_cv(scaled.fit, search, algo);
      const KernelSpec spec{cfg.kernel, best.best_sigma, best.best_C};
      FitResult fitted = fit(scaled.fit, spec, algo, cfg.stop(), 0, scaled.params);

      ReportRow row;
      row.dataset = cfg.dataset_name;
      row.kernel = std::string(to_string(cfg.kernel));
      row.algo = std::string(to_string(algo));
      row.rep = rep;
      row.C = fitted.model.kernel.C;
      row.sigma = cfg.kernel == KernelKind::rbf ? fitted.model.kernel.sigma : 0.0;
      row.acc = accuracy(fitted.model, scaled.apply);
      row.svs = fitted.model.num_sv();
      row.iters = fitted.iterations;
      row.gap = fitted.gap;
      row.reason = std::string(to_string(fitted.reason));
      report.rows.push_back(std::move(row));
      if (details) details->push_back({rep, algo, std::move(fitted.model), split.train});
    }
  }
  report.rows = sorted_rows(std::move(report.rows));
  return report;
}

inline std::string format_sweep(const std::vector<SweepRow>& rows) {
  std::string out = "algo,C,fold,acc,svs,iters,reason\n";
  for (const auto& r : rows)
    out += std::string(to_string(r.algo)) + ',' + format_double(r.C) + ',' + std::to_string(r.fold) + ',' +
           format_double(r.accuracy) + ',' + std::to_string(r.svs) + ',' + std::to_string(r.iterations) + ',' +
           std::string(to_string(r.reason)) + '\n';
  return out;
}

inline std::string format_ratios(const ExperimentReport& report) {
  std::string out = "algo,acc_pct,svs_pct,iters_pct\n";
  for (const auto& r : report.ratios_vs_fw())
    out += r.algo + ',' + format_double(r.accuracy) + ',' + format_double(r.svs) + ',' + format_double(r.iters) + '\n';
  return out;
}

}  // namespace fwsvm::bench
