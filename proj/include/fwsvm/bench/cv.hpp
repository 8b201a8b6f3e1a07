#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fwsvm/dataset.hpp"
#include "fwsvm/errors.hpp"
#include "fwsvm/fw_solver.hpp"
#include "fwsvm/kernel.hpp"
#include "fwsvm/mfw_solver.hpp"
#include "fwsvm/model.hpp"

namespace fwsvm::bench {

// fw: standard SVM; mfw: modified FW; mfw_fixed_c: modified FW with C = 1.
enum class Algorithm { fw, mfw, mfw_fixed_c };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::fw: return "fw";
    case Algorithm::mfw: return "mfw";
    case Algorithm::mfw_fixed_c: return "mfw_fixed_c";
  }
  return "fw";
}

inline Algorithm parse_algorithm(std::string_view s) {
  if (s == "fw") return Algorithm::fw;
  if (s == "mfw") return Algorithm::mfw;
  if (s == "mfw_fixed_c") return Algorithm::mfw_fixed_c;
  throw ParameterError("unknown algorithm '" + std::string(s) + "' (expected fw|mfw|mfw_fixed_c)");
}

inline constexpr double kFixedC = 1.0;

struct FitResult {
  TrainedModel model;
  TerminationReason reason = TerminationReason::converged;
  std::size_t iterations = 0;
  double gap = 0.0;
  CacheStats cache;
};

// Trains one model on `train` (already scaled). mfw_fixed_c overrides C.
inline FitResult fit(const Dataset& train, KernelSpec spec, Algorithm algo, const StopRule& stop,
                     std::size_t i0 = 0, std::optional<ScalingParams> scaling = std::nullopt) {
  if (algo == Algorithm::mfw_fixed_c) spec.C = kFixedC;
  LabeledKernelView view(train, spec);
  FitResult out;
  if (algo == Algorithm::fw) {
    const FwResult r = train_fw(view, stop, i0);
    out.model = make_model(train, spec, r.alpha(), AlgoTag::fw, r.iterations(), r.gap(), std::move(scaling));
    out.reason = r.reason;
    out.iterations = r.iterations();
    out.gap = r.gap();
  } else {
    const MfwResult r = train_mfw(view, stop, i0);
    out.model = make_model(train, spec, r.alpha(), AlgoTag::mfw, r.iterations(), r.gap(), std::move(scaling));
    out.reason = r.reason;
    out.iterations = r.iterations();
    out.gap = r.gap();
  }
  out.cache = view.stats();
  return out;
}

struct FoldOutcome {
  std::size_t fold = 0;
  double accuracy = 0.0;
  std::size_t svs = 0;
  std::size_t iterations = 0;
  TerminationReason reason = TerminationReason::converged;
};

inline std::vector<FoldOutcome> cross_validate(const Dataset& ds, const KernelSpec& spec, Algorithm algo,
                                               const StopRule& stop, const FoldPlan& plan) {
  std::vector<FoldOutcome> out;
  out.reserve(plan.k);
  for (std::size_t f = 0; f < plan.k; ++f) {
    const Dataset train = ds.subset(plan.complement(f));
    const Dataset valid = ds.subset(plan.fold_members(f));
    const FitResult r = fit(train, spec, algo, stop);
    out.push_back({f, accuracy(r.model, valid), r.model.num_sv(), r.iterations, r.reason});
  }
  return out;
}

inline double mean_accuracy(const std::vector<FoldOutcome>& folds) {
  double s = 0.0;
  for (const auto& f : folds) s += f.accuracy;
  return folds.empty() ? 0.0 : s / static_cast<double>(folds.size());
}

struct SearchSettings {
  std::vector<double> C_grid{1.0};
  std::vector<double> sigma_grid{1.0};
  KernelKind kernel = KernelKind::linear;
  std::size_t folds = 10;
  StopRule stop;
  std::uint64_t seed = 1;
};

struct GridCell {
  double C;
  double sigma;
  double mean_accuracy;
  std::vector<FoldOutcome> folds;
};

struct GridSearchResult {
  double best_C = 1.0;
  double best_sigma = 1.0;
  std::vector<GridCell> table;
};

inline std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Maximizes mean CV accuracy; ties go to the smallest C, then smallest sigma.
// mfw_fixed_c pins C = 1 and only searches sigma (nothing at all for linear).
inline GridSearchResult grid_search_cv(const Dataset& ds, const SearchSettings& cfg, Algorithm algo) {
  if (cfg.C_grid.empty() || cfg.sigma_grid.empty()) throw ParameterError("grid_search_cv: empty grid");
  if (cfg.folds < 2 || cfg.folds > ds.size())
    throw DataError("grid_search_cv: dataset of " + std::to_string(ds.size()) + " patterns is too small for " +
                    std::to_string(cfg.folds) + " folds");

  std::vector<double> Cs = sorted_unique(cfg.C_grid);
  std::vector<double> sigmas = sorted_unique(cfg.sigma_grid);
  if (algo == Algorithm::mfw_fixed_c) Cs = {kFixedC};
  if (cfg.kernel == KernelKind::linear) sigmas = {sigmas.front()};

  GridSearchResult res{Cs.front(), sigmas.front(), {}};
  if (algo == Algorithm::mfw_fixed_c && cfg.kernel == KernelKind::linear) return res;

  const FoldPlan plan = kfold_split(ds, cfg.folds, cfg.seed);
  double best = -1.0;
  for (double C : Cs) {
    for (double sigma : sigmas) {
      const KernelSpec spec{cfg.kernel, sigma, C};
      GridCell cell{C, sigma, 0.0, cross_validate(ds, spec, algo, cfg.stop, plan)};
      cell.mean_accuracy = mean_accuracy(cell.folds);
      if (cell.mean_accuracy > best) {
        best = cell.mean_accuracy;
        res.best_C = C;
        res.best_sigma = sigma;
      }
      res.table.push_back(std::move(cell));
    }
  }
  return res;
}

inline std::vector<double> log_grid(double lo, double hi, std::size_t points) {
  if (points < 2 || !(lo > 0.0) || !(hi > lo)) throw ParameterError("log_grid: bad range");
  std::vector<double> out(points);
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (std::size_t i = 0; i < points; ++i)
    out[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
  return out;
}

// Default C grid: 11 log-spaced points over [1e-5, 1e5].
inline std::vector<double> default_C_grid() { return log_grid(1e-5, 1e5, 11); }

struct SweepRow {
  Algorithm algo;
  double C;
  std::size_t fold;
  double accuracy;
  std::size_t svs;
  std::size_t iterations;
  TerminationReason reason;
};

struct SweepSummary {
  double C;
  double min_accuracy;
  double mean_accuracy;
  double max_accuracy;
  double mean_svs;
  double mean_iterations;
};

// One row per (C, fold) of the grid, sigma held at sigma_grid.front().
inline std::vector<SweepRow> sweep_C(const Dataset& ds, const SearchSettings& cfg, Algorithm algo) {
  if (cfg.C_grid.empty()) throw ParameterError("sweep_C: empty C grid");
  if (cfg.folds < 2 || cfg.folds > ds.size()) throw DataError("sweep_C: dataset too small for the fold count");
  const FoldPlan plan = kfold_split(ds, cfg.folds, cfg.seed);
  std::vector<SweepRow> rows;
  for (double C : cfg.C_grid) {
    const KernelSpec spec{cfg.kernel, cfg.sigma_grid.front(), C};
    for (const auto& f : cross_validate(ds, spec, algo, cfg.stop, plan))
      rows.push_back({algo, C, f.fold, f.accuracy, f.svs, f.iterations, f.reason});
  }
  return rows;
}

inline std::vector<SweepSummary> summarize_sweep(const std::vector<SweepRow>& rows) {
  std::vector<SweepSummary> out;
  for (const auto& r : rows) {
    if (out.empty() || out.back().C != r.C)
      out.push_back({r.C, INFINITY, 0.0, -INFINITY, 0.0, 0.0});
    auto& s = out.back();
    s.min_accuracy = std::min(s.min_accuracy, r.accuracy);
    s.max_accuracy = std::max(s.max_accuracy, r.accuracy);
    s.mean_accuracy += r.accuracy;
    s.mean_svs += static_cast<double>(r.svs);
    s.mean_iterations += static_cast<double>(r.iterations);
  }
  for (auto& s : out) {
    const auto count = static_cast<double>(
        std::count_if(rows.begin(), rows.end(), [&](const SweepRow& r) { return r.C == s.C; }));
    s.mean_accuracy /= count;
    s.mean_svs /= count;
    s.mean_iterations /= count;
  }
  return out;
}

// 100 |A n B| / |A u B| over support-vector index sets.
inline double sv_overlap(const TrainedModel& a, const TrainedModel& b) {
  const std::set<std::size_t> sa(a.sv_indices.begin(), a.sv_indices.end());
  const std::set<std::size_t> sb(b.sv_indices.begin(), b.sv_indices.end());
  std::size_t shared = 0;
  for (std::size_t i : sa) shared += sb.count(i);
  const std::size_t uni = sa.size() + sb.size() - shared;
  if (uni == 0) throw ParameterError("sv_overlap: both models have no support vectors");
  return 100.0 * static_cast<double>(shared) / static_cast<double>(uni);
}

}  // namespace fwsvm::bench
