#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "fwsvm/dataset.hpp"
#include "fwsvm/errors.hpp"
#include "fwsvm/random.hpp"

namespace fwsvm::bench {

struct BlobSpec {
  std::size_t n = 600;
  std::size_t dim = 8;
  // Distance between the two class means; unit-variance isotropic noise.
  // 2.0 gives a Bayes error of about 16%.
  double separation = 2.0;
  std::uint64_t seed = 1;
};

// Two Gaussian classes with means +/- (separation / 2) u, u = (1,...,1)/sqrt(D),
// symmetric about the origin so a bias-free classifier is adequate. Labels
// alternate +1, -1, ... so the classes are balanced.
inline Dataset make_gaussian_blobs(const BlobSpec& spec) {
  if (spec.n < 2 || spec.dim < 1) throw ParameterError("make_gaussian_blobs: need n >= 2, dim >= 1");
  Rng rng(spec.seed);
  const double offset = 0.5 * spec.separation / std::sqrt(static_cast<double>(spec.dim));
  std::vector<SparseVector> rows;
  std::vector<int> labels;
  rows.reserve(spec.n);
  labels.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const int y = (i % 2 == 0) ? 1 : -1;
    SparseVector row;
    row.reserve(spec.dim);
    for (std::size_t f = 0; f < spec.dim; ++f) {
      const double v = y * offset + rng.normal();
      if (v != 0.0) row.push_back({f, v});
    }
    rows.push_back(std::move(row));
    labels.push_back(y);
  }
  return Dataset(std::move(rows), std::move(labels), spec.dim);
}

// Random small instance for property tests: n patterns, uniform features in
// [-1, 1], random labels with both classes present when n >= 2.
inline Dataset make_random_instance(std::size_t n, std::size_t dim, Rng& rng) {
  std::vector<SparseVector> rows(n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < dim; ++f) rows[i].push_back({f, 2.0 * rng.uniform() - 1.0});
    labels[i] = rng.uniform() < 0.5 ? 1 : -1;
  }
  if (n >= 2) {
    labels[0] = 1;
    labels[1] = -1;
  }
  return Dataset(std::move(rows), std::move(labels), dim);
}

}  // namespace fwsvm::bench
