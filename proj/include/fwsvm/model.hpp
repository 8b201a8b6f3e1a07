#pragma once

#include <cmath>
#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fwsvm/dataset.hpp"
#include "fwsvm/errors.hpp"
#include "fwsvm/kernel.hpp"
#include "fwsvm/numfmt.hpp"

namespace fwsvm {

enum class AlgoTag { fw, mfw, wsvm };

inline std::string_view to_string(AlgoTag a) {
  switch (a) {
    case AlgoTag::fw: return "fw";
    case AlgoTag::mfw: return "mfw";
    case AlgoTag::wsvm: return "wsvm";
  }
  return "fw";
}

inline AlgoTag parse_algo_tag(std::string_view s) {
  if (s == "fw") return AlgoTag::fw;
  if (s == "mfw") return AlgoTag::mfw;
  if (s == "wsvm") return AlgoTag::wsvm;
  throw ParameterError("unknown algorithm tag '" + std::string(s) + "'");
}

// Support vectors with signed coefficients beta_i = alpha_i * y_i. The
// decision function is F(x) = sum_i beta_i k(x_i, x); there is no bias term
// because the training problem has none (rho is a margin, not an offset).
struct TrainedModel {
  std::vector<std::size_t> sv_indices;
  std::vector<double> sv_coeffs;
  std::vector<SparseVector> sv_patterns;
  KernelSpec kernel;
  std::size_t dim = 0;
  std::optional<ScalingParams> scaling;
  AlgoTag algo = AlgoTag::fw;
  std::size_t iterations = 0;
  double final_gap = 0.0;

  std::size_t num_sv() const { return sv_indices.size(); }
};

inline TrainedModel make_model(const Dataset& train, const KernelSpec& kernel,
                               std::span<const double> alpha, AlgoTag algo, std::size_t iterations,
                               double final_gap, std::optional<ScalingParams> scaling = std::nullopt) {
  if (alpha.size() != train.size()) throw ParameterError("make_model: alpha has wrong length");
  TrainedModel m;
  m.kernel = kernel;
  m.dim = train.dim();
  m.scaling = std::move(scaling);
  m.algo = algo;
  m.iterations = iterations;
  m.final_gap = final_gap;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (alpha[i] <= 0.0) continue;
    m.sv_indices.push_back(i);
    m.sv_coeffs.push_back(alpha[i] * train.label(i));
    m.sv_patterns.push_back(train.pattern(i));
  }
  if (m.sv_indices.empty()) throw ParameterError("make_model: no support vectors");
  return m;
}

inline void check_dimension(const TrainedModel& m, const SparseVector& x) {
  if (!x.empty() && x.back().index >= m.dim)
    throw DataError("decision_value: input has feature " + std::to_string(x.back().index + 1) +
                    " beyond model dimension " + std::to_string(m.dim));
}

// Expects `x` already in the model's (scaled) feature space.
inline double decision_value(const TrainedModel& m, const SparseVector& x) {
  check_dimension(m, x);
  double f = 0.0;
  for (std::size_t k = 0; k < m.sv_coeffs.size(); ++k)
    f += m.sv_coeffs[k] * kernel_eval(m.kernel, m.sv_patterns[k], x);
  return f;
}

// sign(F(x)) with F(x) = 0 mapped to +1.
inline int predict(const TrainedModel& m, const SparseVector& x) {
  return decision_value(m, x) >= 0.0 ? 1 : -1;
}

// Applies the model's stored scaling (if any) before predicting.
inline int predict_raw(const TrainedModel& m, const SparseVector& raw) {
  if (!m.scaling) return predict(m, raw);
  return predict(m, m.scaling->apply(raw));
}

inline double accuracy(const TrainedModel& m, const Dataset& ds, bool raw_inputs = false) {
  if (ds.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const int p = raw_inputs ? predict_raw(m, ds.pattern(i)) : predict(m, ds.pattern(i));
    if (p == ds.label(i)) ++hits;
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(ds.size());
}

struct PrimalVars {
  std::optional<std::vector<double>> w;  // linear kernel only
  double rho = 0.0;
  std::vector<double> xi;
};

// 1/2 alpha^T Khat alpha from the support columns.
inline double dual_objective(const LabeledKernelView& view, std::span<const double> alpha) {
  double f = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (alpha[i] == 0.0) continue;
    const Column c = view.column(i);
    double row = 0.0;
    for (std::size_t j = 0; j < alpha.size(); ++j)
      if (alpha[j] != 0.0) row += (*c)[j] * alpha[j];
    f += alpha[i] * row;
  }
  return 0.5 * f;
}

// w = sum_i alpha_i y_i x_i, xi = alpha / C, and rho as the mean of
// g = Khat alpha over the support (at the optimum all those entries equal rho).
inline PrimalVars recover_primal(const LabeledKernelView& view, std::span<const double> alpha) {
  const Dataset& ds = view.dataset();
  if (alpha.size() != ds.size()) throw ParameterError("recover_primal: alpha has wrong length");
  PrimalVars pv;
  const double C = view.spec().C;
  pv.xi.resize(alpha.size());
  for (std::size_t i = 0; i < alpha.size(); ++i) pv.xi[i] = alpha[i] / C;

  std::vector<double> g(alpha.size(), 0.0);
  std::size_t support = 0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (alpha[i] <= 0.0) continue;
    ++support;
    const Column c = view.column(i);
    for (std::size_t j = 0; j < g.size(); ++j) g[j] += alpha[i] * (*c)[j];
  }
  if (support == 0) throw ParameterError("recover_primal: empty support");
  double sum = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i)
    if (alpha[i] > 0.0) sum += g[i];
  pv.rho = sum / static_cast<double>(support);

  if (view.spec().kind == KernelKind::linear) {
    std::vector<double> w(ds.dim(), 0.0);
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      if (alpha[i] <= 0.0) continue;
      const double c = alpha[i] * ds.label(i);
      for (const auto& e : ds.pattern(i)) w[e.index] += c * e.value;
    }
    pv.w = std::move(w);
  }
  return pv;
}

// 1/2 ||w||^2 - rho + C/2 sum xi_i^2 (linear kernel).
inline double primal_objective(const PrimalVars& pv, double C) {
  if (!pv.w) throw ParameterError("primal_objective: w is only available for the linear kernel");
  double ww = 0.0;
  for (double v : *pv.w) ww += v * v;
  double xx = 0.0;
  for (double v : pv.xi) xx += v * v;
  return 0.5 * ww - pv.rho + 0.5 * C * xx;
}

// min_i (w^T z_i - rho + xi_i); nonnegative when the primal point is feasible.
inline double primal_feasibility(const PrimalVars& pv, const Dataset& ds) {
  if (!pv.w) throw ParameterError("primal_feasibility: needs the linear kernel");
  double worst = INFINITY;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    double wz = 0.0;
    for (const auto& e : ds.pattern(i)) wz += (*pv.w)[e.index] * e.value;
    wz *= ds.label(i);
    worst = std::min(worst, wz - pv.rho + pv.xi[i]);
  }
  return worst;
}

// Text format, line 1 is the magic; SV rows are `index beta idx:val ...`
// with 1-based feature indices.
inline constexpr std::string_view kModelMagic = "FWSVM-MODEL 1";

inline void save_model(const TrainedModel& m, std::ostream& out) {
  out << kModelMagic << '\n';
  out << "algo " << to_string(m.algo) << '\n';
  out << "kernel " << to_string(m.kernel.kind) << '\n';
  out << "sigma " << format_double(m.kernel.sigma) << '\n';
  out << "C " << format_double(m.kernel.C) << '\n';
  out << "dim " << m.dim << '\n';
  out << "iterations " << m.iterations << '\n';
  out << "gap " << format_double(m.final_gap) << '\n';
  if (m.scaling) {
    out << "scaling " << m.scaling->dim() << '\n';
    for (std::size_t f = 0; f < m.scaling->dim(); ++f)
      out << format_double(m.scaling->min[f]) << ' ' << format_double(m.scaling->max[f]) << '\n';
  } else {
    out << "scaling none\n";
  }
  out << "svs " << m.num_sv() << '\n';
  for (std::size_t k = 0; k < m.num_sv(); ++k) {
    out << m.sv_indices[k] << ' ' << format_double(m.sv_coeffs[k]);
    for (const auto& e : m.sv_patterns[k]) out << ' ' << (e.index + 1) << ':' << format_double(e.value);
    out << '\n';
  }
  if (!out) throw IoError("save_model: write failed");
}

namespace detail {

inline std::string expect_line(std::istream& in, std::string_view key) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("model: missing '" + std::string(key) + "' line");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::string prefix = std::string(key) + " ";
  if (line.rfind(prefix, 0) != 0)
    throw DataError("model: expected '" + std::string(key) + "', got '" + line + "'");
  return line.substr(prefix.size());
}

inline double expect_double(std::istream& in, std::string_view key) {
  const auto v = parse_double(expect_line(in, key));
  if (!v) throw DataError("model: bad value for '" + std::string(key) + "'");
  return *v;
}

inline std::size_t expect_uint(std::istream& in, std::string_view key) {
  const auto v = parse_uint(expect_line(in, key));
  if (!v) throw DataError("model: bad value for '" + std::string(key) + "'");
  return static_cast<std::size_t>(*v);
}

}  // namespace detail

inline TrainedModel load_model(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("model: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kModelMagic) throw DataError("model: bad magic line '" + line + "'");

  TrainedModel m;
  try {
    m.algo = parse_algo_tag(detail::expect_line(in, "algo"));
    m.kernel.kind = parse_kernel_kind(detail::expect_line(in, "kernel"));
  } catch (const ParameterError& e) {
    throw DataError(std::string("model: ") + e.what());
  }
  m.kernel.sigma = detail::expect_double(in, "sigma");
  m.kernel.C = detail::expect_double(in, "C");
  m.dim = detail::expect_uint(in, "dim");
  m.iterations = detail::expect_uint(in, "iterations");
  m.final_gap = detail::expect_double(in, "gap");

  const std::string sc = detail::expect_line(in, "scaling");
  if (sc != "none") {
    const auto d = parse_uint(sc);
    if (!d) throw DataError("model: bad scaling dimension");
    ScalingParams p;
    for (std::size_t f = 0; f < *d; ++f) {
      if (!std::getline(in, line)) throw DataError("model: truncated scaling block");
      const auto parts = detail::split_ws(line);
      const auto lo = parts.size() == 2 ? parse_double(parts[0]) : std::nullopt;
      const auto hi = parts.size() == 2 ? parse_double(parts[1]) : std::nullopt;
      if (!lo || !hi) throw DataError("model: bad scaling line '" + line + "'");
      p.min.push_back(*lo);
      p.max.push_back(*hi);
    }
    m.scaling = std::move(p);
  }

  const std::size_t n_sv = detail::expect_uint(in, "svs");
  for (std::size_t k = 0; k < n_sv; ++k) {
    if (!std::getline(in, line)) throw DataError("model: truncated support vector block");
    const auto parts = detail::split_ws(line);
    if (parts.size() < 2) throw DataError("model: bad support vector line");
    const auto idx = parse_uint(parts[0]);
    const auto beta = parse_double(parts[1]);
    if (!idx || !beta) throw DataError("model: bad support vector header");
    SparseVector row;
    for (std::size_t t = 2; t < parts.size(); ++t) {
      const auto colon = parts[t].find(':');
      const auto fi = colon == std::string_view::npos ? std::nullopt : parse_uint(parts[t].substr(0, colon));
      const auto fv = colon == std::string_view::npos ? std::nullopt : parse_double(parts[t].substr(colon + 1));
      if (!fi || *fi == 0 || !fv) throw DataError("model: bad feature '" + std::string(parts[t]) + "'");
      row.push_back({static_cast<std::size_t>(*fi - 1), *fv});
    }
    m.sv_indices.push_back(static_cast<std::size_t>(*idx));
    m.sv_coeffs.push_back(*beta);
    m.sv_patterns.push_back(std::move(row));
  }
  if (m.sv_indices.empty()) throw DataError("model: no support vectors");
  try {
    m.kernel.validate();
  } catch (const ParameterError& e) {
    throw DataError(std::string("model: ") + e.what());
  }
  return m;
}

}  // namespace fwsvm
