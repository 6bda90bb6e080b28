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

#include "dcurr/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

#include "dcurr/errors.hpp"

namespace dcurr {

double lr_at(std::span<const LrBreakpoint> plan, std::int64_t iteration) {
  if (plan.empty()) throw InvalidArgument("empty learning-rate plan");
  double lr = plan.front().lr;
  for (const auto& bp : plan) {
    if (bp.iteration <= iteration) lr = bp.lr;
  }
  return lr;
}

std::uint32_t StageSpec::batch_size() const {
  return std::accumulate(batch_composition.begin(), batch_composition.end(), 0u);
}

std::vector<std::int64_t> scaled_breakpoints(const ScheduleParams& params, double scale) {
  std::vector<std::int64_t> out;
  for (auto it : params.decay_iterations) {
    out.push_back(std::llround(static_cast<double>(it) * scale));
  }
  return out;
}

std::vector<StageSpec> default_schedule(std::uint32_t batch_size, double scale,
                                        const ScheduleParams& params) {
  if (batch_size == 0 || batch_size % 4 != 0) {
    throw InvalidArgument("batch size must be a positive multiple of 4");
  }
  if (!(scale > 0.0 && scale <= 1.0)) throw InvalidArgument("scale must lie in (0, 1]");
  if (params.decay_iterations.size() < 2) {
    throw InvalidArgument("schedule needs at least two decay points");
  }
  if (params.loss_weights.size() != 3) throw InvalidArgument("need three loss weights");

  const auto points = scaled_breakpoints(params, scale);
  if (!std::is_sorted(points.begin(), points.end())) {
    throw InvalidArgument("decay points must be non-decreasing");
  }
  std::vector<LrBreakpoint> plan{{0, params.initial_lr}};
  double lr = params.initial_lr;
  for (auto p : points) {
    lr /= params.decay_factor;
    plan.push_back({p, lr});
  }

  const std::uint32_t half = batch_size / 2;
  const std::uint32_t quarter = batch_size / 4;
  const std::vector<std::vector<std::uint32_t>> compositions = {
      {batch_size, 0, 0}, {half, half, 0}, {half, quarter, quarter}};
  const std::int64_t bounds[4] = {0, points[0], points[1], points.back()};

  std::vector<StageSpec> stages;
  for (std::size_t s = 0; s < 3; ++s) {
    StageSpec st;
    st.stage_index = s;
    st.batch_composition = compositions[s];
    st.loss_weights = params.loss_weights;
    st.iterations = std::max<std::int64_t>(0, bounds[s + 1] - bounds[s]);
    st.lr_plan.push_back({bounds[s], lr_at(plan, bounds[s])});
    for (const auto& bp : plan) {
      if (bp.iteration > bounds[s] && bp.iteration < bounds[s + 1]) st.lr_plan.push_back(bp);
    }
    stages.push_back(std::move(st));
  }
  return stages;
}

std::int64_t total_iterations(std::span<const StageSpec> stages) {
  std::int64_t total = 0;
  for (const auto& s : stages) total += s.iterations;
  return total;
}

SubsetIndex::SubsetIndex(std::span<const std::optional<SubsetLevel>> levels,
                         std::span<const CategoryId> labels, std::size_t num_categories) {
  if (levels.size() != labels.size()) {
    throw InvalidArgument("level and label vectors differ in length");
  }
  std::size_t max_level = 0;
  for (const auto& l : levels) {
    if (l) max_level = std::max(max_level, level_index(*l));
  }
  pools_.resize(std::max<std::size_t>(3, max_level + 1));
  clean_by_category_.resize(num_categories);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!levels[i]) continue;
    pools_[level_index(*levels[i])].push_back(i);
    if (*levels[i] == SubsetLevel::Clean) clean_by_category_.at(labels[i]).push_back(i);
  }
  for (std::size_t c = 0; c < num_categories; ++c) {
    if (!clean_by_category_[c].empty()) clean_categories_.push_back(c);
  }
}

namespace {

std::vector<std::optional<SubsetLevel>> all_levels(const CurriculumDesign& cd,
                                                   const FeatureSet& fs) {
  const auto bound = bind_levels(cd, fs);
  return {bound.begin(), bound.end()};
}

}  // namespace

SubsetIndex::SubsetIndex(const CurriculumDesign& cd, const FeatureSet& fs)
    : SubsetIndex(all_levels(cd, fs), fs.labels(), fs.num_categories()) {}

std::vector<std::uint32_t> effective_composition(const StageSpec& stage,
                                                 const SubsetIndex& index) {
  std::vector<std::uint32_t> comp = stage.batch_composition;
  comp.resize(std::max(comp.size(), index.num_levels()), 0);
  auto has = [&](std::size_t l) { return l < index.num_levels() && !index.pool(l).empty(); };
  for (std::size_t l = comp.size(); l-- > 0;) {
    if (comp[l] == 0 || has(l)) continue;
    std::size_t target = l;
    while (target > 0 && !has(target)) --target;
    if (!has(target)) {
      target = l;
      while (target < comp.size() && !has(target)) ++target;
      if (target == comp.size()) throw InvalidArgument("every subset is empty");
    }
    comp[target] += comp[l];
    comp[l] = 0;
  }
  return comp;
}

Batch next_batch(const StageSpec& stage, const SubsetIndex& index, Rng& rng) {
  const auto comp = effective_composition(stage, index);
  Batch batch;
  const std::size_t total = std::accumulate(comp.begin(), comp.end(), std::size_t{0});
  batch.indices.reserve(total);
  batch.weights.reserve(total);
  batch.levels.reserve(total);

  auto weight_of = [&](std::size_t level) {
    return level < stage.loss_weights.size() ? stage.loss_weights[level] : 0.0;
  };
  auto push = [&](std::size_t sample, std::size_t level) {
    batch.indices.push_back(sample);
    batch.weights.push_back(weight_of(level));
    batch.levels.push_back(static_cast<SubsetLevel>(level));
  };

  for (std::size_t level = 0; level < comp.size(); ++level) {
    const std::uint32_t count = comp[level];
    if (count == 0) continue;
    if (level == 0 && stage.category_balance) {
      const auto& cats = index.clean_categories();
      if (cats.size() >= count) {
        // Partial Fisher-Yates: `count` distinct categories.
        std::vector<std::size_t> pick(cats.begin(), cats.end());
        for (std::uint32_t k = 0; k < count; ++k) {
          const auto j = k + rng.below(pick.size() - k);
          std::swap(pick[k], pick[j]);
          const auto& members = index.clean_by_category()[pick[k]];
          push(members[rng.below(members.size())], 0);
        }
      } else {
        for (std::uint32_t k = 0; k < count; ++k) {
          const auto& members = index.clean_by_category()[cats[rng.below(cats.size())]];
          push(members[rng.below(members.size())], 0);
        }
      }
      continue;
    }
    const auto& pool = index.pool(level);
    for (std::uint32_t k = 0; k < count; ++k) push(pool[rng.below(pool.size())], level);
  }
  return batch;
}

Batch next_batch(const StageSpec& stage, const CurriculumDesign& cd, const FeatureSet& fs,
                 Rng& rng) {
  return next_batch(stage, SubsetIndex(cd, fs), rng);
}

}  // namespace dcurr
