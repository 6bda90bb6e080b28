/*
 * Copyright 2026 The dcurr Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "dcurr/dataset.hpp"

namespace dcurr {

/// Dense symmetric matrix of squared Euclidean distances.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t n) : n_(n), d2_(n * n, 0.0) {}

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return d2_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return d2_[i * n_ + j]; }
  const std::vector<double>& values() const noexcept { return d2_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> d2_;
};

/// Squared Euclidean distances between all rows. Each pair is computed once
/// with a fixed-order sum over dimensions and mirrored, so the result is
/// exactly symmetric and independent of `threads`. `threads == 0` picks the
/// hardware concurrency.
DistanceMatrix distance_matrix(const FeatureMatrix& features, unsigned threads = 1);

/// The n*n entries (diagonal zeros included) sorted ascending; returns the
/// one at zero-based index floor(k_percent / 100 * n*n), clamped to n*n - 1.
double cutoff_distance(const DistanceMatrix& dm, double k_percent);

/// rho[i] = number of j != i with d2(i, j) < d_c.
std::vector<std::uint32_t> local_density(const DistanceMatrix& dm, double d_c);

struct DeltaResult {
  std::vector<double> delta;
  std::vector<std::optional<std::size_t>> nearest_higher;
  std::size_t center = 0;
};

/// Samples ordered by rho descending, index ascending. The first sample takes
/// delta = max over its row; every other sample takes the distance to its
/// nearest earlier-ordered sample. The center maximizes delta (smaller index
/// wins ties).
DeltaResult delta_and_center(const DistanceMatrix& dm,
                             const std::vector<std::uint32_t>& rho);

struct DensityProfile {
  std::vector<std::uint32_t> rho;
  std::vector<double> delta;
  std::vector<std::optional<std::size_t>> nearest_higher;
  double d_c = 0.0;
  double k_percent = 60.0;
  std::size_t center = 0;
};

DensityProfile density_profile(const DistanceMatrix& dm, double k_percent = 60.0);

}  // namespace dcurr
