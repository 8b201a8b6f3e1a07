#pragma once

// Pairwise Frank-Wolfe for   min 1/2 a^T Khat a   s.t.  a >= 0, sum_i a_i = 1.
//
// Each iteration moves mass from the away vertex v (largest gradient entry on
// the support) to the forward vertex s (smallest gradient entry over the
// candidate set) with an exact line search. Only columns s and v of Khat are
// touched, so the gradient g = Khat a is maintained incrementally.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fwsvm/errors.hpp"
#include "fwsvm/kernel.hpp"

namespace fwsvm {

struct StopRule {
  double epsilon = 1e-5;
  std::size_t max_iter = 1'000'000;
  std::size_t refresh_every = 50'000;  // 0 disables periodic refresh

  void validate() const {
    if (!(epsilon > 0.0)) throw ParameterError("stop rule: epsilon must be positive");
    if (max_iter < 1) throw ParameterError("stop rule: max_iter must be at least 1");
  }
};

enum class TerminationReason { converged, iteration_cap };

inline std::string_view to_string(TerminationReason r) {
  return r == TerminationReason::converged ? "converged" : "iteration_cap";
}

struct TraceRecord {
  std::size_t iter;
  double objective;
  double gap;
  double step;
  std::size_t forward;
  std::size_t away;
  std::size_t support;
};

// Records every `stride`-th iteration (and the first and last); stride 0
// records nothing.
struct IterationTrace {
  std::size_t stride = 0;
  std::vector<TraceRecord> records;
};

struct SolverState {
  std::vector<double> alpha;
  std::vector<double> grad;                // Khat * alpha
  std::vector<std::size_t> candidates;     // sorted ascending
  std::vector<char> is_candidate;
  std::size_t iter = 0;
  double last_gap = 0.0;
  double objective = 0.0;                  // 1/2 alpha^T Khat alpha
  std::size_t support = 0;                 // #{i : alpha_i > 0}

  std::size_t size() const { return alpha.size(); }

  void add_candidate(std::size_t i) {
    if (is_candidate[i]) return;
    is_candidate[i] = 1;
    candidates.insert(std::lower_bound(candidates.begin(), candidates.end(), i), i);
  }

  std::vector<std::size_t> support_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < alpha.size(); ++i)
      if (alpha[i] > 0.0) out.push_back(i);
    return out;
  }
};

struct PairChoice {
  std::size_t forward;  // s
  std::size_t away;     // v
};

struct StepInfo {
  std::size_t forward;
  std::size_t away;
  double gap;
  double step;
  std::optional<std::size_t> activated;
  bool refreshed = false;
};

// Called after every applied step, with the updated state.
using IterationObserver = std::function<void(const SolverState&, const StepInfo&)>;

struct FwResult {
  SolverState state;
  IterationTrace trace;
  TerminationReason reason = TerminationReason::iteration_cap;

  const std::vector<double>& alpha() const { return state.alpha; }
  std::size_t iterations() const { return state.iter; }
  double gap() const { return state.last_gap; }
};

inline std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = i;
  return out;
}

inline SolverState init_state(const LabeledKernelView& view, std::size_t i0,
                              std::span<const std::size_t> candidates) {
  const std::size_t n = view.size();
  SolverState st;
  st.alpha.assign(n, 0.0);
  st.is_candidate.assign(n, 0);
  for (std::size_t c : candidates) {
    if (c >= n) throw ParameterError("init_state: candidate index out of range");
    st.add_candidate(c);
  }
  if (i0 >= n || !st.is_candidate[i0])
    throw ParameterError("init_state: initial vertex " + std::to_string(i0) + " is not a candidate");
  st.alpha[i0] = 1.0;
  st.support = 1;
  const Column col = view.column(i0);
  st.grad = *col;
  st.objective = 0.5 * (*col)[i0];
  return st;
}

// Forward vertex over the candidates, away vertex over the support; ties go
// to the lowest index.
inline PairChoice select_pair(const SolverState& st) {
  if (st.candidates.empty()) throw ParameterError("select_pair: empty candidate set");
  std::size_t s = st.candidates.front();
  std::size_t v = st.size();
  for (std::size_t i : st.candidates) {
    if (st.grad[i] < st.grad[s]) s = i;
    if (st.alpha[i] > 0.0 && (v == st.size() || st.grad[i] > st.grad[v])) v = i;
  }
  if (v == st.size()) throw ParameterError("select_pair: empty support");
  return {s, v};
}

inline double fw_gap(const SolverState& st, std::size_t s, std::size_t v) {
  if (s == v) return 0.0;
  return st.grad[v] - st.grad[s];
}

namespace detail {

inline double direction_curvature(const std::vector<double>& col_s, const std::vector<double>& col_v,
                                  std::size_t s, std::size_t v) {
  return col_s[s] - 2.0 * col_s[v] + col_v[v];
}

}  // namespace detail

// Exact minimizer of f(alpha + gamma (e_s - e_v)) clamped to [0, alpha_v].
inline double optimal_step(const LabeledKernelView& view, const SolverState& st, std::size_t s,
                           std::size_t v, double gap) {
  if (s == v || gap <= 0.0) return 0.0;
  const Column cs = view.column(s);
  const Column cv = view.column(v);
  const double curvature = detail::direction_curvature(*cs, *cv, s, v);
  return std::min(std::max(gap / curvature, 0.0), st.alpha[v]);
}

// alpha += gamma (e_s - e_v) and the matching gradient update. A step that
// reaches alpha_v zeroes it exactly.
inline void apply_step(const LabeledKernelView& view, SolverState& st, std::size_t s, std::size_t v,
                       double gamma) {
  ++st.iter;
  if (gamma <= 0.0 || s == v) return;
  const Column cs = view.column(s);
  const Column cv = view.column(v);
  const double curvature = detail::direction_curvature(*cs, *cv, s, v);
  st.objective += gamma * (st.grad[s] - st.grad[v]) + 0.5 * gamma * gamma * curvature;

  const std::vector<double>& a = *cs;
  const std::vector<double>& b = *cv;
  for (std::size_t j = 0; j < st.grad.size(); ++j) st.grad[j] += gamma * (a[j] - b[j]);

  if (st.alpha[s] == 0.0) ++st.support;
  st.alpha[s] += gamma;
  if (gamma >= st.alpha[v]) {
    st.alpha[v] = 0.0;
    --st.support;
  } else {
    st.alpha[v] -= gamma;
  }
}

// Recomputes g = Khat alpha (and the objective) from the support columns.
inline void refresh_gradient(const LabeledKernelView& view, SolverState& st) {
  std::vector<double> g(st.size(), 0.0);
  for (std::size_t i = 0; i < st.size(); ++i) {
    if (st.alpha[i] <= 0.0) continue;
    const Column c = view.column(i);
    const std::vector<double>& col = *c;
    const double a = st.alpha[i];
    for (std::size_t j = 0; j < g.size(); ++j) g[j] += a * col[j];
  }
  st.grad = std::move(g);
  double f = 0.0;
  for (std::size_t i = 0; i < st.size(); ++i)
    if (st.alpha[i] > 0.0) f += st.alpha[i] * st.grad[i];
  st.objective = 0.5 * f;
}

namespace detail {

inline void record(IterationTrace& trace, const SolverState& st, double gap, double step,
                   std::size_t s, std::size_t v, bool force) {
  if (trace.stride == 0) return;
  if (!force && st.iter % trace.stride != 0) return;
  if (!trace.records.empty() && trace.records.back().iter == st.iter) return;
  trace.records.push_back({st.iter, st.objective, gap, step, s, v, st.support});
}

}  // namespace detail

struct FwOptions {
  std::size_t trace_stride = 0;
  IterationObserver observer;
};

// Runs pairwise FW from vertex i0 with forward vertices restricted to
// `candidates`. Convergence is declared only after the gap has been
// re-verified against a freshly recomputed gradient.
inline FwResult train_fw(const LabeledKernelView& view, const StopRule& stop, std::size_t i0,
                         std::span<const std::size_t> candidates, const FwOptions& opts = {}) {
  stop.validate();
  FwResult res;
  res.trace.stride = opts.trace_stride;
  res.state = init_state(view, i0, candidates);
  SolverState& st = res.state;
  detail::record(res.trace, st, 0.0, 0.0, i0, i0, true);

  while (true) {
    auto [s, v] = select_pair(st);
    double gap = fw_gap(st, s, v);
    st.last_gap = gap;
    if (gap <= stop.epsilon) {
      refresh_gradient(view, st);
      const PairChoice fresh = select_pair(st);
      s = fresh.forward;
      v = fresh.away;
      gap = fw_gap(st, s, v);
      st.last_gap = gap;
      if (gap <= stop.epsilon) {
        res.reason = TerminationReason::converged;
        break;
      }
    }
    if (st.iter >= stop.max_iter) {
      res.reason = TerminationReason::iteration_cap;
      break;
    }
    const double gamma = optimal_step(view, st, s, v, gap);
    apply_step(view, st, s, v, gamma);
    bool refreshed = false;
    if (stop.refresh_every > 0 && st.iter % stop.refresh_every == 0) {
      refresh_gradient(view, st);
      refreshed = true;
    }
    if (opts.observer) opts.observer(st, StepInfo{s, v, gap, gamma, std::nullopt, refreshed});
    detail::record(res.trace, st, gap, gamma, s, v, false);
  }
  detail::record(res.trace, st, st.last_gap, 0.0, 0, 0, true);
  return res;
}

inline FwResult train_fw(const LabeledKernelView& view, const StopRule& stop, std::size_t i0 = 0,
                         const FwOptions& opts = {}) {
  const auto all = all_indices(view.size());
  return train_fw(view, stop, i0, all, opts);
}

}  // namespace fwsvm
