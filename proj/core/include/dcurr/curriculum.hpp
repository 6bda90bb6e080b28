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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dcurr/dataset.hpp"

namespace dcurr {

/// Ordinal complexity class. Designs with more than three subsets use the
/// values past HighlyNoisy directly.
enum class SubsetLevel : std::uint8_t { Clean = 0, Noisy = 1, HighlyNoisy = 2 };
inline constexpr std::uint32_t kMaxSubsets = 3;

constexpr std::size_t level_index(SubsetLevel level) noexcept {
  return static_cast<std::size_t>(level);
}

enum class DesignMethod { Density, KMeans };

std::string_view to_string(DesignMethod method);
DesignMethod parse_design_method(std::string_view text);

struct CurriculumParams {
  double k_percent = 60.0;
  std::uint32_t n_subsets = 3;
  std::uint32_t kmeans_max_iters = 100;
  std::uint64_t seed = 0;
  DesignMethod method = DesignMethod::Density;
  unsigned threads = 1;  // not serialized

  bool operator==(const CurriculumParams& o) const {
    return k_percent == o.k_percent && n_subsets == o.n_subsets &&
           kmeans_max_iters == o.kmeans_max_iters && seed == o.seed &&
           method == o.method;
  }
};

struct CurriculumSample {
  std::string id;
  SubsetLevel level = SubsetLevel::Clean;
  float dist = 0.0f;  // squared distance to the category center

  friend bool operator==(const CurriculumSample&, const CurriculumSample&) = default;
};

struct CategoryCurriculum {
  CategoryId category_id = 0;
  std::string center_id;
  float d_c = 0.0f;
  std::vector<CurriculumSample> samples;

  friend bool operator==(const CategoryCurriculum&, const CategoryCurriculum&) = default;
};

struct CategoryStats {
  std::size_t n = 0;
  double d_c = 0.0;
  std::vector<std::size_t> subset_sizes;
  std::vector<std::optional<double>> mean_dist;  // empty subsets have none
};

/// Subset assignment for every sample of a FeatureSet, grouped by category.
struct CurriculumDesign {
  static constexpr std::uint32_t kVersion = 1;

  CurriculumParams params;
  std::vector<CategoryCurriculum> categories;

  std::size_t num_samples() const;
  CategoryStats stats(std::size_t category) const;

  bool operator==(const CurriculumDesign&) const = default;
};

/// 1-D Lloyd k-means on distances to the center. Centroids start at evenly
/// spaced quantiles of the sorted values (min, median, max for three) and
/// clusters are relabeled by ascending centroid. With fewer distinct values
/// than subsets each distinct value is its own cluster.
std::vector<SubsetLevel> partition_category(std::span<const double> dist,
                                            std::uint32_t n_subsets,
                                            std::uint32_t max_iters = 100);

/// Density-ranked design: per category distance matrix, cutoff, local
/// density, delta/center, then partition_category on the center's row.
CurriculumDesign design_curriculum(const FeatureSet& fs, const CurriculumParams& params);

/// Baseline: k-means directly on each category's feature vectors with
/// farthest-point seeding; clusters ordered by descending size.
CurriculumDesign design_curriculum_kmeans(const FeatureSet& fs,
                                          const CurriculumParams& params);

/// Dispatches on params.method.
CurriculumDesign design(const FeatureSet& fs, const CurriculumParams& params);

std::string serialize_curriculum(const CurriculumDesign& cd);
CurriculumDesign parse_curriculum(std::string_view json);
void save_curriculum(const CurriculumDesign& cd, const std::filesystem::path& path);
CurriculumDesign load_curriculum(const std::filesystem::path& path);

/// Per-sample level in FeatureSet order. Throws on ids the set does not
/// contain, on samples the design misses, and on category mismatches.
std::vector<SubsetLevel> bind_levels(const CurriculumDesign& cd, const FeatureSet& fs);

}  // namespace dcurr
