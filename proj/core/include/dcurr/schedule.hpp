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
#include <span>
#include <string>
#include <vector>

#include "dcurr/curriculum.hpp"
#include "dcurr/dataset.hpp"
#include "dcurr/random.hpp"

namespace dcurr {

struct LrBreakpoint {
  std::int64_t iteration = 0;  // global iteration the rate takes effect at
  double lr = 0.0;

  friend bool operator==(const LrBreakpoint&, const LrBreakpoint&) = default;
};

/// Learning rate in effect at `iteration`: the last breakpoint at or before it.
double lr_at(std::span<const LrBreakpoint> plan, std::int64_t iteration);

struct StageSpec {
  std::size_t stage_index = 0;
  std::vector<std::uint32_t> batch_composition;  // per level
  std::vector<double> loss_weights;              // per level
  std::int64_t iterations = 0;
  std::vector<LrBreakpoint> lr_plan;  // first entry is the stage's start
  bool category_balance = true;       // applies to the Clean portion only

  std::uint32_t batch_size() const;
  friend bool operator==(const StageSpec&, const StageSpec&) = default;
};

struct ScheduleParams {
  double initial_lr = 0.1;
  double decay_factor = 10.0;
  // Reference decay points; multiplied by the scale.
  std::vector<std::int64_t> decay_iterations = {300000, 500000, 600000, 650000, 700000};
  // Stage 1 ends at the first decay point, stage 2 at the second and
  // stage 3 at the last one.
  std::vector<double> loss_weights = {1.0, 0.5, 0.5};
};

/// Scaled decay points: round(reference * scale).
std::vector<std::int64_t> scaled_breakpoints(const ScheduleParams& params, double scale);

/// Three stages with compositions (B,0,0), (B/2,B/2,0), (B/2,B/4,B/4).
std::vector<StageSpec> default_schedule(std::uint32_t batch_size, double scale,
                                        const ScheduleParams& params = {});

std::int64_t total_iterations(std::span<const StageSpec> stages);

struct Batch {
  std::vector<std::size_t> indices;
  std::vector<double> weights;
  std::vector<SubsetLevel> levels;

  std::size_t size() const noexcept { return indices.size(); }
  friend bool operator==(const Batch&, const Batch&) = default;
};

/// Sample pools derived from a per-sample level assignment. Samples with no
/// level (std::nullopt) are excluded from training entirely.
class SubsetIndex {
 public:
  SubsetIndex(std::span<const std::optional<SubsetLevel>> levels,
              std::span<const CategoryId> labels, std::size_t num_categories);
  SubsetIndex(const CurriculumDesign& cd, const FeatureSet& fs);

  std::size_t num_levels() const noexcept { return pools_.size(); }
  const std::vector<std::size_t>& pool(std::size_t level) const { return pools_[level]; }
  /// Clean samples of each category, and the categories that have any.
  const std::vector<std::vector<std::size_t>>& clean_by_category() const {
    return clean_by_category_;
  }
  const std::vector<std::size_t>& clean_categories() const { return clean_categories_; }

 private:
  std::vector<std::vector<std::size_t>> pools_;
  std::vector<std::vector<std::size_t>> clean_by_category_;
  std::vector<std::size_t> clean_categories_;
};

/// Composition after moving counts of empty levels to the nearest non-empty
/// lower level. Levels above every non-empty level move upward only when no
/// lower level exists. Throws when every pool is empty.
std::vector<std::uint32_t> effective_composition(const StageSpec& stage,
                                                 const SubsetIndex& index);

/// One mini-batch. Clean portion: distinct categories drawn uniformly
/// (with replacement only when fewer categories than picks), then one clean
/// sample from each. Other levels: uniform draws with replacement over the
/// level pool.
Batch next_batch(const StageSpec& stage, const SubsetIndex& index, Rng& rng);

/// Convenience overload building the index on every call.
Batch next_batch(const StageSpec& stage, const CurriculumDesign& cd,
                 const FeatureSet& fs, Rng& rng);

}  // namespace dcurr
