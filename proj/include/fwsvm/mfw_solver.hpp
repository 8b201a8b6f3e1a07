#pragma once

// Modified Frank-Wolfe: pairwise FW whose simplex is restricted to a working
// set W that grows online. Patterns outside W carry weight 0 (their alpha is
// pinned to 0); each iteration the idle pattern with the most negative
// gradient entry, if any, joins W. At convergence the result is the ordinary
// dual solution of the problem posed on W* alone.
//
// Also hosts the general weighted dual  min 1/2 a^T Khat a,  a >= 0,
// sum_i t_i a_i = 1  with strictly positive weights.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fwsvm/errors.hpp"
#include "fwsvm/fw_solver.hpp"
#include "fwsvm/kernel.hpp"

namespace fwsvm {

struct Activation {
  std::size_t iter;      // iteration count at activation time
  std::size_t index;
  double gradient;       // g_index when it was activated
};

struct WorkingSet {
  std::vector<std::size_t> members;  // in activation order, members[0] = i0
  std::vector<Activation> activation_log;

  std::size_t size() const { return members.size(); }
};

// Activates argmin_{i not in W} g_i when that entry is below `threshold`.
inline std::optional<std::size_t> try_activate(SolverState& st, WorkingSet& ws,
                                               double threshold = 0.0) {
  const std::size_t n = st.size();
  if (st.candidates.size() >= n) return std::nullopt;
  std::size_t u = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (st.is_candidate[i]) continue;
    if (u == n || st.grad[i] < st.grad[u]) u = i;
  }
  if (u == n || !(st.grad[u] < threshold)) return std::nullopt;
  st.add_candidate(u);
  ws.members.push_back(u);
  ws.activation_log.push_back({st.iter, u, st.grad[u]});
  return u;
}

struct MfwOptions {
  std::size_t trace_stride = 0;
  IterationObserver observer;
  double activation_threshold = 0.0;
};

struct MfwResult {
  SolverState state;
  WorkingSet working_set;
  IterationTrace trace;
  TerminationReason reason = TerminationReason::iteration_cap;

  const std::vector<double>& alpha() const { return state.alpha; }
  std::size_t iterations() const { return state.iter; }
  double gap() const { return state.last_gap; }
};

// Stops only when the gap is below epsilon and no pattern was activated in
// the same iteration; both conditions are re-checked on a recomputed gradient.
inline MfwResult train_mfw(const LabeledKernelView& view, const StopRule& stop, std::size_t i0 = 0,
                           const MfwOptions& opts = {}) {
  stop.validate();
  const std::size_t n = view.size();
  if (i0 >= n) throw ParameterError("train_mfw: initial vertex out of range");

  MfwResult res;
  res.trace.stride = opts.trace_stride;
  const std::size_t first[] = {i0};
  res.state = init_state(view, i0, first);
  res.working_set.members.push_back(i0);
  SolverState& st = res.state;
  WorkingSet& ws = res.working_set;
  detail::record(res.trace, st, 0.0, 0.0, i0, i0, true);

  while (true) {
    std::optional<std::size_t> activated = try_activate(st, ws, opts.activation_threshold);
    auto [s, v] = select_pair(st);
    double gap = fw_gap(st, s, v);
    st.last_gap = gap;
    if (gap <= stop.epsilon && !activated) {
      refresh_gradient(view, st);
      activated = try_activate(st, ws, opts.activation_threshold);
      const PairChoice fresh = select_pair(st);
      s = fresh.forward;
      v = fresh.away;
      gap = fw_gap(st, s, v);
      st.last_gap = gap;
      if (gap <= stop.epsilon && !activated) {
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
    if (opts.observer) opts.observer(st, StepInfo{s, v, gap, gamma, activated, refreshed});
    detail::record(res.trace, st, gap, gamma, s, v, false);
  }
  detail::record(res.trace, st, st.last_gap, 0.0, 0, 0, true);
  return res;
}

// Pairwise FW over the weighted simplex whose vertices are e_i / t_i.
// With t == 1 every operation coincides with train_fw.
inline FwResult train_wsvm(const LabeledKernelView& view, std::span<const double> weights,
                           const StopRule& stop, std::size_t i0 = 0, const FwOptions& opts = {}) {
  stop.validate();
  const std::size_t n = view.size();
  if (weights.size() != n) throw ParameterError("train_wsvm: weight vector has wrong length");
  for (double t : weights)
    if (!(t > 0.0) || !std::isfinite(t)) throw ParameterError("train_wsvm: weights must be positive");
  if (i0 >= n) throw ParameterError("train_wsvm: initial vertex out of range");

  FwResult res;
  res.trace.stride = opts.trace_stride;
  const auto all = all_indices(n);
  SolverState& st = res.state;
  st = init_state(view, i0, all);
  // Start at the vertex e_i0 / t_i0.
  const double t0 = weights[i0];
  st.alpha[i0] = 1.0 / t0;
  for (double& g : st.grad) g /= t0;
  st.objective = st.objective / (t0 * t0);
  detail::record(res.trace, st, 0.0, 0.0, i0, i0, true);

  auto select = [&](std::size_t& s, std::size_t& v) {
    s = 0;
    v = n;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = st.grad[i] / weights[i];
      if (r < st.grad[s] / weights[s]) s = i;
      if (st.alpha[i] > 0.0 && (v == n || r > st.grad[v] / weights[v])) v = i;
    }
  };
  auto weighted_gap = [&](std::size_t s, std::size_t v) {
    return s == v ? 0.0 : st.grad[v] / weights[v] - st.grad[s] / weights[s];
  };

  while (true) {
    std::size_t s = 0, v = 0;
    select(s, v);
    double gap = weighted_gap(s, v);
    st.last_gap = gap;
    if (gap <= stop.epsilon) {
      refresh_gradient(view, st);
      select(s, v);
      gap = weighted_gap(s, v);
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

    ++st.iter;
    double gamma = 0.0;
    if (s != v && gap > 0.0) {
      const Column cs = view.column(s);
      const Column cv = view.column(v);
      const std::vector<double>& a = *cs;
      const std::vector<double>& b = *cv;
      const double ts = weights[s];
      const double tv = weights[v];
      const double curvature = a[s] / (ts * ts) - 2.0 * a[v] / (ts * tv) + b[v] / (tv * tv);
      const double max_step = st.alpha[v] * tv;
      gamma = std::min(std::max(gap / curvature, 0.0), max_step);
      if (gamma > 0.0) {
        st.objective += gamma * (st.grad[s] / ts - st.grad[v] / tv) + 0.5 * gamma * gamma * curvature;
        for (std::size_t j = 0; j < n; ++j) st.grad[j] += gamma * (a[j] / ts - b[j] / tv);
        if (st.alpha[s] == 0.0) ++st.support;
        st.alpha[s] += gamma / ts;
        if (gamma >= max_step) {
          st.alpha[v] = 0.0;
          --st.support;
        } else {
          st.alpha[v] -= gamma / tv;
        }
      }
    }
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

}  // namespace fwsvm
