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

#include "dcurr/density.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "dcurr/errors.hpp"

namespace dcurr {

namespace {

void fill_rows(const FeatureMatrix& f, DistanceMatrix& dm, std::size_t i) {
  const std::size_t n = f.rows();
  const auto a = f.row(i);
  for (std::size_t j = i + 1; j < n; ++j) {
    const auto b = f.row(j);
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double diff = static_cast<double>(a[k]) - static_cast<double>(b[k]);
      s += diff * diff;
    }
    dm(i, j) = s;
    dm(j, i) = s;
  }
}

}  // namespace

DistanceMatrix distance_matrix(const FeatureMatrix& features, unsigned threads) {
  const std::size_t n = features.rows();
  if (n == 0) throw InvalidArgument("distance matrix needs at least one sample");
  for (float v : features.data()) {
    if (!std::isfinite(v)) throw InvalidArgument("non-finite feature value");
  }
  DistanceMatrix dm(n);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n / 64 + 1));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fill_rows(features, dm, i);
    return dm;
  }
  // Row i writes only (i, j>i) and (j>i, i); no two rows touch the same cell.
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) fill_rows(features, dm, i);
      });
    }
  }
  return dm;
}

double cutoff_distance(const DistanceMatrix& dm, double k_percent) {
  if (dm.size() == 0) throw InvalidArgument("cutoff distance of an empty matrix");
  if (!(k_percent > 0.0 && k_percent < 100.0)) {
    throw InvalidArgument("k_percent must lie in (0, 100)");
  }
  std::vector<double> all = dm.values();
  const std::size_t total = all.size();
  auto rank = static_cast<std::size_t>(std::floor(k_percent / 100.0 * static_cast<double>(total)));
  rank = std::min(rank, total - 1);
  std::nth_element(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(rank), all.end());
  return all[rank];
}

std::vector<std::uint32_t> local_density(const DistanceMatrix& dm, double d_c) {
  if (!(d_c >= 0.0)) throw InvalidArgument("cutoff distance must be >= 0");
  const std::size_t n = dm.size();
  std::vector<std::uint32_t> rho(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t count = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && dm(i, j) < d_c) ++count;
    }
    rho[i] = count;
  }
  return rho;
}

DeltaResult delta_and_center(const DistanceMatrix& dm,
                             const std::vector<std::uint32_t>& rho) {
  const std::size_t n = dm.size();
  if (rho.size() != n) throw InvalidArgument("density vector length differs from matrix");
  if (n == 0) throw InvalidArgument("delta of an empty matrix");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rho[a] > rho[b]; });

  DeltaResult out;
  out.delta.assign(n, 0.0);
  out.nearest_higher.assign(n, std::nullopt);

  const std::size_t top = order[0];
  double far = 0.0;
  for (std::size_t j = 0; j < n; ++j) far = std::max(far, dm(top, j));
  out.delta[top] = far;

  for (std::size_t pos = 1; pos < n; ++pos) {
    const std::size_t i = order[pos];
    std::size_t best = order[0];
    double best_d = dm(i, best);
    for (std::size_t q = 1; q < pos; ++q) {
      const std::size_t j = order[q];
      if (dm(i, j) < best_d) {
        best_d = dm(i, j);
        best = j;
      }
    }
    out.delta[i] = best_d;
    out.nearest_higher[i] = best;
  }

  out.center = static_cast<std::size_t>(
      std::max_element(out.delta.begin(), out.delta.end()) - out.delta.begin());
  return out;
}

DensityProfile density_profile(const DistanceMatrix& dm, double k_percent) {
  DensityProfile p;
  p.k_percent = k_percent;
  p.d_c = cutoff_distance(dm, k_percent);
  p.rho = local_density(dm, p.d_c);
  auto dc = delta_and_center(dm, p.rho);
  p.delta = std::move(dc.delta);
  p.nearest_higher = std::move(dc.nearest_higher);
  p.center = dc.center;
  return p;
}

}  // namespace dcurr
