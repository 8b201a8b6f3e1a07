#pragma once

// Brute-force reference solver for small problems: projected gradient on the
// materialized matrix. Shares nothing with the Frank-Wolfe code path beyond
// the kernel entries themselves.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fwsvm/errors.hpp"
#include "fwsvm/kernel.hpp"

namespace fwsvm {

// Euclidean projection onto {a >= 0, sum a = 1} by sorting and thresholding.
inline std::vector<double> project_simplex(std::span<const double> v) {
  if (v.empty()) throw ParameterError("project_simplex: empty vector");
  std::vector<double> u(v.begin(), v.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumulative += u[j];
    const double t = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::max(v[i] - theta, 0.0);
  return out;
}

// Dense symmetric matrix helpers (row-major, n x n).
inline std::vector<double> mat_vec(std::span<const double> m, std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<double> y(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += m[i * n + j] * x[j];
    y[i] = s;
  }
  return y;
}

inline double largest_eigenvalue(std::span<const double> m, std::size_t n, double tol = 1e-13,
                                 std::size_t max_iter = 100'000) {
  std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n)));
  double lambda = 0.0;
  for (std::size_t it = 0; it < max_iter; ++it) {
    std::vector<double> y = mat_vec(m, x);
    double norm = 0.0;
    for (double v : y) norm += v * v;
    norm = std::sqrt(norm);
    if (norm == 0.0) return 0.0;
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / norm;
    if (std::abs(norm - lambda) <= tol * norm) return norm;
    lambda = norm;
  }
  return lambda;
}

inline double quadratic_form(std::span<const double> m, std::span<const double> x) {
  const auto y = mat_vec(m, x);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

struct OracleResult {
  std::vector<double> alpha;
  std::size_t iterations = 0;
  bool converged = false;
};

// Projected gradient with step 1/lambda_max, stopped once the KKT residual
// (spread of g over the support against the global minimum) is at most tol.
inline OracleResult oracle_solve_dense(std::span<const double> m, std::size_t n, double tol,
                                       std::size_t max_iter = 2'000'000) {
  const double lmax = largest_eigenvalue(m, n);
  // A slightly underestimated lambda_max would still be a valid step, but pad
  // it so the step never exceeds 1/L.
  const double eta = 1.0 / (lmax * (1.0 + 1e-9));
  OracleResult res;
  res.alpha.assign(n, 1.0 / static_cast<double>(n));
  std::vector<double> trial(n);
  for (std::size_t it = 0; it < max_iter; ++it) {
    const auto g = mat_vec(m, res.alpha);
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t i = 0; i < n; ++i) {
      lo = std::min(lo, g[i]);
      if (res.alpha[i] > 0.0) hi = std::max(hi, g[i]);
    }
    if (hi - lo <= tol) {
      res.converged = true;
      break;
    }
    for (std::size_t i = 0; i < n; ++i) trial[i] = res.alpha[i] - eta * g[i];
    res.alpha = project_simplex(trial);
    res.iterations = it + 1;
  }
  return res;
}

inline constexpr std::size_t kOracleMaxN = 64;

inline OracleResult oracle_solve(const LabeledKernelView& view, double tol) {
  const std::size_t n = view.size();
  if (n > kOracleMaxN)
    throw ParameterError("oracle_solve: N=" + std::to_string(n) + " exceeds " + std::to_string(kOracleMaxN));
  const auto m = view.materialize();
  return oracle_solve_dense(m, n, tol);
}

// Weighted simplex {a >= 0, sum t_i a_i = 1}: substitute b_i = t_i a_i, solve
// over the unit simplex with matrix T^-1 Khat T^-1, then map back.
inline OracleResult oracle_solve_weighted(const LabeledKernelView& view, std::span<const double> t,
                                          double tol) {
  const std::size_t n = view.size();
  if (n > kOracleMaxN) throw ParameterError("oracle_solve_weighted: N too large");
  if (t.size() != n) throw ParameterError("oracle_solve_weighted: weight vector has wrong length");
  for (double w : t)
    if (!(w > 0.0)) throw ParameterError("oracle_solve_weighted: weights must be positive");
  auto m = view.materialize();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m[i * n + j] /= (t[i] * t[j]);
  OracleResult res = oracle_solve_dense(m, n, tol);
  for (std::size_t i = 0; i < n; ++i) res.alpha[i] /= t[i];
  return res;
}

// max over the support of g_i minus min over all of g_i, g = Khat a.
// Zero exactly at the simplex-constrained optimum.
inline double kkt_residual(std::span<const double> m, std::span<const double> alpha) {
  const auto g = mat_vec(m, alpha);
  double lo = INFINITY;
  double hi = -INFINITY;
  for (std::size_t i = 0; i < g.size(); ++i) {
    lo = std::min(lo, g[i]);
    if (alpha[i] > 0.0) hi = std::max(hi, g[i]);
  }
  return hi - lo;
}

}  // namespace fwsvm
