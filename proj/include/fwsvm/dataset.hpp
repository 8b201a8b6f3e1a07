#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <iterator>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fwsvm/errors.hpp"
#include "fwsvm/numfmt.hpp"
#include "fwsvm/random.hpp"

namespace fwsvm {

struct SparseEntry {
  std::size_t index;  // 0-based feature index
  double value;

  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

// Sparse row with strictly increasing indices.
using SparseVector = std::vector<SparseEntry>;

// Binary-labelled training corpus. Labels are exactly -1 or +1 and every row
// has strictly increasing indices below dim().
class Dataset {
 public:
  Dataset() = default;

  Dataset(std::vector<SparseVector> patterns, std::vector<int> labels, std::size_t dim)
      : patterns_(std::move(patterns)), labels_(std::move(labels)), dim_(dim) {
    if (patterns_.size() != labels_.size())
      throw DataError("dataset: pattern and label counts differ");
    for (std::size_t i = 0; i < patterns_.size(); ++i) {
      if (labels_[i] != 1 && labels_[i] != -1)
        throw DataError("dataset: label of row " + std::to_string(i) + " is not +1/-1");
      const auto& row = patterns_[i];
      for (std::size_t k = 0; k < row.size(); ++k) {
        if (row[k].index >= dim_)
          throw DataError("dataset: feature index out of range in row " + std::to_string(i));
        if (k > 0 && row[k].index <= row[k - 1].index)
          throw DataError("dataset: indices not strictly increasing in row " + std::to_string(i));
      }
    }
  }

  std::size_t size() const { return patterns_.size(); }
  std::size_t dim() const { return dim_; }
  bool empty() const { return patterns_.empty(); }

  const SparseVector& pattern(std::size_t i) const { return patterns_.at(i); }
  int label(std::size_t i) const { return labels_.at(i); }

  const std::vector<SparseVector>& patterns() const { return patterns_; }
  const std::vector<int>& labels() const { return labels_; }

  // Rows picked by `indices`, in that order; the dimension is kept.
  Dataset subset(const std::vector<std::size_t>& indices) const {
    std::vector<SparseVector> rows;
    std::vector<int> labels;
    rows.reserve(indices.size());
    labels.reserve(indices.size());
    for (std::size_t i : indices) {
      rows.push_back(patterns_.at(i));
      labels.push_back(labels_.at(i));
    }
    return Dataset(std::move(rows), std::move(labels), dim_);
  }

  // Same rows viewed in a wider feature space.
  Dataset with_dim(std::size_t dim) const {
    if (dim < dim_) throw DataError("dataset: cannot shrink dimension");
    return Dataset(patterns_, labels_, dim);
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<SparseVector> patterns_;
  std::vector<int> labels_;
  std::size_t dim_ = 0;
};

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

}  // namespace detail

// Parses LibSVM text: one `<label> <idx>:<val> ...` row per non-empty line,
// 1-based indices. Blank lines are skipped. Errors carry the 1-based line number.
inline Dataset parse_libsvm(std::string_view text) {
  std::vector<SparseVector> rows;
  std::vector<int> labels;
  std::size_t max_index_plus_one = 0;
  std::size_t line_no = 0;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    const auto tokens = detail::split_ws(line);
    if (tokens.empty()) {
      if (end == text.size()) break;
      continue;
    }
    const std::string where = "line " + std::to_string(line_no) + ": ";

    const auto label = parse_double(tokens[0]);
    if (!label) throw DataError(where + "unparseable label '" + std::string(tokens[0]) + "'");
    if (*label != 1.0 && *label != -1.0)
      throw DataError(where + "label '" + std::string(tokens[0]) + "' is not +1/-1");

    SparseVector row;
    row.reserve(tokens.size() - 1);
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      const auto tok = tokens[t];
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos)
        throw DataError(where + "expected idx:val, got '" + std::string(tok) + "'");
      const auto idx = parse_uint(tok.substr(0, colon));
      const auto val = parse_double(tok.substr(colon + 1));
      if (!idx || *idx == 0)
        throw DataError(where + "bad feature index in '" + std::string(tok) + "'");
      if (!val) throw DataError(where + "bad feature value in '" + std::string(tok) + "'");
      const std::size_t zero_based = static_cast<std::size_t>(*idx - 1);
      if (!row.empty() && zero_based <= row.back().index)
        throw DataError(where + "feature indices must be strictly increasing");
      row.push_back({zero_based, *val});
      max_index_plus_one = std::max(max_index_plus_one, zero_based + 1);
    }
    rows.push_back(std::move(row));
    labels.push_back(*label > 0 ? 1 : -1);
    if (end == text.size()) break;
  }

  if (rows.empty()) throw DataError("empty input");
  return Dataset(std::move(rows), std::move(labels), max_index_plus_one);
}

inline Dataset parse_libsvm(std::istream& in) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_libsvm(std::string_view(text));
}

inline std::string serialize_libsvm(const SparseVector& row, int label) {
  std::string out = label > 0 ? "+1" : "-1";
  for (const auto& e : row) {
    out += ' ';
    out += std::to_string(e.index + 1);
    out += ':';
    out += format_double(e.value);
  }
  return out;
}

inline std::string serialize_libsvm(const Dataset& ds) {
  std::string out;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out += serialize_libsvm(ds.pattern(i), ds.label(i));
    out += '\n';
  }
  return out;
}

// Per-feature affine map of the fitting set onto [-1, 1].
struct ScalingParams {
  std::vector<double> min;
  std::vector<double> max;

  std::size_t dim() const { return min.size(); }

  double scale_value(std::size_t feature, double v) const {
    const double lo = min[feature];
    const double hi = max[feature];
    if (hi == lo) return 0.0;
    return -1.0 + 2.0 * (v - lo) / (hi - lo);
  }

  // Implicit zeros are mapped too, so the output row is as dense as the map
  // requires; exact zeros are dropped.
  SparseVector apply(const SparseVector& row) const {
    SparseVector out;
    std::size_t k = 0;
    for (std::size_t f = 0; f < dim(); ++f) {
      double raw = 0.0;
      if (k < row.size() && row[k].index == f) raw = row[k++].value;
      const double s = scale_value(f, raw);
      if (s != 0.0) out.push_back({f, s});
    }
    if (k != row.size()) throw DataError("scaling: row has features beyond the fitted dimension");
    return out;
  }

  Dataset apply(const Dataset& ds) const {
    if (ds.dim() > dim()) throw DataError("scaling: dimension mismatch");
    std::vector<SparseVector> rows;
    rows.reserve(ds.size());
    for (const auto& row : ds.patterns()) rows.push_back(apply(row));
    return Dataset(std::move(rows), ds.labels(), dim());
  }

  friend bool operator==(const ScalingParams&, const ScalingParams&) = default;
};

inline ScalingParams fit_scaling(const Dataset& fit) {
  const std::size_t d = fit.dim();
  ScalingParams p{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  std::vector<std::size_t> seen(d, 0);
  std::vector<bool> init(d, false);
  for (const auto& row : fit.patterns()) {
    for (const auto& e : row) {
      if (!init[e.index]) {
        p.min[e.index] = p.max[e.index] = e.value;
        init[e.index] = true;
      } else {
        p.min[e.index] = std::min(p.min[e.index], e.value);
        p.max[e.index] = std::max(p.max[e.index], e.value);
      }
      ++seen[e.index];
    }
  }
  for (std::size_t f = 0; f < d; ++f) {
    if (seen[f] < fit.size()) {
      p.min[f] = std::min(p.min[f], 0.0);
      p.max[f] = std::max(p.max[f], 0.0);
    }
  }
  return p;
}

struct ScaledPair {
  Dataset fit;
  Dataset apply;
  ScalingParams params;
};

// Fits the [-1, 1] map on `fit` and applies it to both sets. Values of
// `apply` outside the fitted range extrapolate (no clamping).
inline ScaledPair scale_features(const Dataset& fit, const Dataset& apply) {
  if (fit.dim() != apply.dim())
    throw DataError("scale_features: dimension mismatch (" + std::to_string(fit.dim()) + " vs " +
                    std::to_string(apply.dim()) + ")");
  ScalingParams params = fit_scaling(fit);
  Dataset a = params.apply(fit);
  Dataset b = params.apply(apply);
  return {std::move(a), std::move(b), std::move(params)};
}

struct FoldPlan {
  std::size_t k = 0;
  std::vector<std::size_t> assignments;  // pattern index -> fold id
  std::uint64_t seed = 0;

  std::vector<std::size_t> fold_members(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
      if (assignments[i] == fold) out.push_back(i);
    return out;
  }

  std::vector<std::size_t> complement(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
      if (assignments[i] != fold) out.push_back(i);
    return out;
  }

  std::vector<std::size_t> fold_sizes() const {
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t f : assignments) ++sizes[f];
    return sizes;
  }

  friend bool operator==(const FoldPlan&, const FoldPlan&) = default;
};

// Seeded shuffle, then round-robin: the first N mod k folds get one extra.
inline FoldPlan kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2 || k > n)
    throw ParameterError("kfold_split: need 2 <= k <= N (k=" + std::to_string(k) +
                         ", N=" + std::to_string(n) + ")");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  FoldPlan plan{k, std::vector<std::size_t>(n, 0), seed};
  for (std::size_t pos = 0; pos < n; ++pos) plan.assignments[order[pos]] = pos % k;
  return plan;
}

inline FoldPlan kfold_split(const Dataset& ds, std::size_t k, std::uint64_t seed) {
  return kfold_split(ds.size(), k, seed);
}

struct HoldoutSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Seeded train/test partition; test gets round(test_fraction * N) rows
// (at least one). Both index lists come out sorted.
inline HoldoutSplit holdout_split(std::size_t n, double test_fraction, std::uint64_t seed) {
  if (n < 2) throw ParameterError("holdout_split: need at least two patterns");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw ParameterError("holdout_split: test fraction must lie in (0, 1)");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  n_test = std::clamp<std::size_t>(n_test, 1, n - 1);
  HoldoutSplit split;
  split.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  std::sort(split.test.begin(), split.test.end());
  std::sort(split.train.begin(), split.train.end());
  return split;
}

}  // namespace fwsvm
