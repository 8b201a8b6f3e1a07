#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fwsvm/dataset.hpp"
#include "fwsvm/errors.hpp"

namespace fwsvm {

enum class KernelKind { linear, rbf };

inline std::string_view to_string(KernelKind k) { return k == KernelKind::linear ? "linear" : "rbf"; }

inline KernelKind parse_kernel_kind(std::string_view s) {
  if (s == "linear") return KernelKind::linear;
  if (s == "rbf") return KernelKind::rbf;
  throw ParameterError("unknown kernel '" + std::string(s) + "' (expected linear|rbf)");
}

// Kernel choice plus the regularization constant C that shifts the diagonal
// of the training matrix by 1/C.
struct KernelSpec {
  KernelKind kind = KernelKind::linear;
  double sigma = 1.0;  // RBF bandwidth, ignored for linear
  double C = 1.0;

  void validate() const {
    if (!(C > 0.0) || !std::isfinite(C)) throw ParameterError("kernel: C must be positive and finite");
    if (kind == KernelKind::rbf && (!(sigma > 0.0) || !std::isfinite(sigma)))
      throw ParameterError("kernel: sigma must be positive and finite");
  }

  static KernelSpec linear(double C) { return {KernelKind::linear, 1.0, C}; }
  static KernelSpec rbf(double sigma, double C) { return {KernelKind::rbf, sigma, C}; }
};

inline double sparse_dot(const SparseVector& a, const SparseVector& b) {
  double sum = 0.0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (ia->index < ib->index) {
      ++ia;
    } else if (ib->index < ia->index) {
      ++ib;
    } else {
      sum += ia->value * ib->value;
      ++ia;
      ++ib;
    }
  }
  return sum;
}

// ||a - b||^2 accumulated over the union of indices in index order, so the
// result is bitwise symmetric in its arguments.
inline double sparse_squared_distance(const SparseVector& a, const SparseVector& b) {
  double sum = 0.0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    double diff;
    if (ib == b.end() || (ia != a.end() && ia->index < ib->index)) {
      diff = ia->value;
      ++ia;
    } else if (ia == a.end() || ib->index < ia->index) {
      diff = ib->value;
      ++ib;
    } else {
      diff = ia->value - ib->value;
      if (diff < 0) diff = -diff;
      ++ia;
      ++ib;
    }
    sum += diff * diff;
  }
  return sum;
}

// linear: <x, x'>;  rbf: exp(-||x - x'||^2 / (2 sigma^2)).
inline double kernel_eval(const KernelSpec& spec, const SparseVector& x, const SparseVector& xp) {
  if (spec.kind == KernelKind::linear) return sparse_dot(x, xp);
  return std::exp(-sparse_squared_distance(x, xp) / (2.0 * spec.sigma * spec.sigma));
}

using Column = std::shared_ptr<const std::vector<double>>;

struct CacheStats {
  std::size_t columns_computed = 0;
  std::size_t hits = 0;
};

// Entries of Khat = (y y^T) o K + (1/C) I, evaluated on demand. Columns are
// held in an LRU cache of at most `budget` columns; returned columns stay
// valid after eviction. All member functions are safe to call concurrently.
//
// The view refers to `data` by pointer: the dataset must outlive it.
class LabeledKernelView {
 public:
  static constexpr std::size_t kDefaultBudget = 4096;
  static constexpr std::size_t kMaxMaterialize = 2000;

  LabeledKernelView(const Dataset& data, KernelSpec spec)
      : LabeledKernelView(data, spec, std::min(data.size(), kDefaultBudget)) {}

  LabeledKernelView(const Dataset& data, KernelSpec spec, std::size_t budget)
      : data_(&data), spec_(spec), budget_(budget) {
    spec_.validate();
  }

  LabeledKernelView(const LabeledKernelView&) = delete;
  LabeledKernelView& operator=(const LabeledKernelView&) = delete;

  std::size_t size() const { return data_->size(); }
  const KernelSpec& spec() const { return spec_; }
  const Dataset& dataset() const { return *data_; }
  std::size_t budget() const { return budget_; }

  double entry(std::size_t i, std::size_t j) const {
    check_index(i);
    check_index(j);
    return raw_entry(i, j);
  }

  double diagonal(std::size_t i) const { return entry(i, i); }

  Column column(std::size_t i) const {
    check_index(i);
    std::lock_guard lock(mutex_);
    if (auto it = index_.find(i); it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      ++stats_.hits;
      return it->second->second;
    }
    auto col = std::make_shared<std::vector<double>>(size());
    for (std::size_t j = 0; j < size(); ++j) (*col)[j] = raw_entry(i, j);
    ++stats_.columns_computed;
    Column result = std::move(col);
    if (budget_ > 0) {
      if (lru_.size() >= budget_) {
        index_.erase(lru_.back().first);
        lru_.pop_back();
      }
      lru_.emplace_front(i, result);
      index_[i] = lru_.begin();
    }
    return result;
  }

  // Dense row-major copy of Khat; only for small problems.
  std::vector<double> materialize() const {
    const std::size_t n = size();
    if (n > kMaxMaterialize)
      throw ParameterError("materialize: N=" + std::to_string(n) + " exceeds " +
                           std::to_string(kMaxMaterialize));
    std::vector<double> m(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m[i * n + j] = raw_entry(i, j);
    return m;
  }

  CacheStats stats() const {
    std::lock_guard lock(mutex_);
    return stats_;
  }

  std::size_t cached_columns() const {
    std::lock_guard lock(mutex_);
    return lru_.size();
  }

 private:
  void check_index(std::size_t i) const {
    if (i >= size())
      throw ParameterError("kernel view: index " + std::to_string(i) + " out of range (N=" +
                           std::to_string(size()) + ")");
  }

  double raw_entry(std::size_t i, std::size_t j) const {
    const double yy = static_cast<double>(data_->label(i) * data_->label(j));
    double v = yy * kernel_eval(spec_, data_->pattern(i), data_->pattern(j));
    if (i == j) v += 1.0 / spec_.C;
    return v;
  }

  const Dataset* data_;
  KernelSpec spec_;
  std::size_t budget_;

  mutable std::mutex mutex_;
  mutable std::list<std::pair<std::size_t, Column>> lru_;
  mutable std::unordered_map<std::size_t, std::list<std::pair<std::size_t, Column>>::iterator> index_;
  mutable CacheStats stats_;
};

}  // namespace fwsvm
