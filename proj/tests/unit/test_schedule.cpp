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

#include <cmath>
#include <optional>
#include <set>
#include <vector>

#include "doctest.h"

#include "dcurr/errors.hpp"
#include "dcurr/schedule.hpp"

using namespace dcurr;
using L = SubsetLevel;

namespace {

struct Pools {
  std::vector<std::optional<SubsetLevel>> levels;
  std::vector<CategoryId> labels;
  std::size_t categories = 0;

  SubsetIndex index() const { return SubsetIndex(levels, labels, categories); }
};

// `per_level[l]` samples of level l in every category.
Pools balanced(std::size_t categories, std::vector<std::size_t> per_level) {
  Pools p;
  p.categories = categories;
  for (std::size_t c = 0; c < categories; ++c) {
    for (std::size_t l = 0; l < per_level.size(); ++l) {
      for (std::size_t k = 0; k < per_level[l]; ++k) {
        p.levels.emplace_back(static_cast<SubsetLevel>(l));
        p.labels.push_back(static_cast<CategoryId>(c));
      }
    }
  }
  return p;
}

}  // namespace

TEST_CASE("full-scale schedule compositions and learning rates") {
  const auto st = default_schedule(256, 1.0);
  REQUIRE(st.size() == 3);
  CHECK(st[0].batch_composition == std::vector<std::uint32_t>{256, 0, 0});
  CHECK(st[1].batch_composition == std::vector<std::uint32_t>{128, 128, 0});
  CHECK(st[2].batch_composition == std::vector<std::uint32_t>{128, 64, 64});
  for (const auto& s : st) {
    CHECK(s.loss_weights == std::vector<double>{1.0, 0.5, 0.5});
    CHECK(s.batch_size() == 256);
  }
  CHECK(st[0].lr_plan.front().lr == 0.1);
  CHECK(st[0].iterations == 300000);
  CHECK(st[1].iterations == 200000);
  CHECK(st[2].iterations == 200000);
  CHECK(total_iterations(st) == 700000);
  CHECK(st[1].lr_plan.front().lr == doctest::Approx(0.01));
  CHECK(st[2].lr_plan.front() == LrBreakpoint{500000, 0.1 / 10 / 10});
}

TEST_CASE("batch 64 compositions") {
  const auto st = default_schedule(64, 0.001);
  CHECK(st[0].batch_composition == std::vector<std::uint32_t>{64, 0, 0});
  CHECK(st[1].batch_composition == std::vector<std::uint32_t>{32, 32, 0});
  CHECK(st[2].batch_composition == std::vector<std::uint32_t>{32, 16, 16});
}

TEST_CASE("scaled breakpoints") {
  CHECK(scaled_breakpoints({}, 0.001) == std::vector<std::int64_t>{300, 500, 600, 650, 700});
  CHECK(scaled_breakpoints({}, 1.0) ==
        std::vector<std::int64_t>{300000, 500000, 600000, 650000, 700000});
  const auto st = default_schedule(64, 0.001);
  CHECK(st[0].iterations == 300);
  CHECK(st[1].iterations == 200);
  CHECK(st[2].iterations == 200);
  // Stage 3 carries the decays at 600 and 650.
  REQUIRE(st[2].lr_plan.size() == 3);
  CHECK(st[2].lr_plan[1].iteration == 600);
  CHECK(st[2].lr_plan[2].iteration == 650);
}

TEST_CASE("learning rate lookup") {
  const std::vector<LrBreakpoint> plan{{0, 0.1}, {300, 0.01}, {500, 0.001}};
  CHECK(lr_at(plan, 0) == 0.1);
  CHECK(lr_at(plan, 299) == 0.1);
  CHECK(lr_at(plan, 300) == 0.01);
  CHECK(lr_at(plan, 10000) == 0.001);
}

TEST_CASE("schedule invariants across batch sizes and scales") {
  for (std::uint32_t b : {4u, 8u, 64u, 128u, 256u, 1000u}) {
    for (double scale : {0.0001, 0.001, 0.01, 1.0}) {
      const auto st = default_schedule(b, scale);
      for (std::size_t s = 0; s < st.size(); ++s) {
        CHECK(st[s].batch_size() == b);
        for (std::size_t l = s + 1; l < st[s].batch_composition.size(); ++l) {
          CHECK(st[s].batch_composition[l] == 0);
        }
        for (std::size_t l = 0; l <= s; ++l) CHECK(st[s].batch_composition[l] > 0);
      }
    }
  }
}

TEST_CASE("schedule rejects bad parameters") {
  CHECK_THROWS_AS(default_schedule(0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(default_schedule(66, 1.0), InvalidArgument);
  CHECK_THROWS_AS(default_schedule(64, 0.0), InvalidArgument);
  CHECK_THROWS_AS(default_schedule(64, 1.5), InvalidArgument);
}

TEST_CASE("stage 3 batch with enough categories") {
  const auto pools = balanced(200, {3, 2, 2});
  const auto index = pools.index();
  const auto stage = default_schedule(256, 1.0)[2];
  Rng rng(1, Stream::Sampler);
  const auto batch = next_batch(stage, index, rng);
  REQUIRE(batch.size() == 256);
  std::array<int, 3> counts{};
  std::set<CategoryId> clean_categories;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto l = level_index(batch.levels[i]);
    ++counts[l];
    CHECK(pools.levels[batch.indices[i]] == batch.levels[i]);
    CHECK(batch.weights[i] == (l == 0 ? 1.0 : 0.5));
    if (l == 0) clean_categories.insert(pools.labels[batch.indices[i]]);
  }
  CHECK(counts == std::array<int, 3>{128, 64, 64});
  CHECK(clean_categories.size() == 128);
}

TEST_CASE("single category: every stage-1 pick comes from its Clean subset") {
  const auto pools = balanced(1, {5, 4, 3});
  const auto index = pools.index();
  const auto stage = default_schedule(16, 1.0)[0];
  Rng rng(2);
  const auto batch = next_batch(stage, index, rng);
  REQUIRE(batch.size() == 16);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    CHECK(batch.levels[i] == L::Clean);
    CHECK(pools.levels[batch.indices[i]] == L::Clean);
  }
}

TEST_CASE("equal generator states give equal batches") {
  const auto pools = balanced(20, {4, 3, 2});
  const auto index = pools.index();
  const auto stage = default_schedule(32, 1.0)[2];
  Rng a(99, Stream::Sampler, 3), b(99, Stream::Sampler, 3);
  CHECK(next_batch(stage, index, a) == next_batch(stage, index, b));
  CHECK(next_batch(stage, index, a) == next_batch(stage, index, b));
}

TEST_CASE("stage 1 selects categories uniformly") {
  // Fewer categories than picks: i.i.d. draws, so counts are multinomial.
  const auto pools = balanced(10, {3, 1, 1});
  const auto index = pools.index();
  const auto stage = default_schedule(64, 1.0)[0];
  Rng rng(5, Stream::Sampler);
  std::vector<double> freq(10, 0.0);
  const int batches = 10000;
  for (int b = 0; b < batches; ++b) {
    for (auto i : next_batch(stage, index, rng).indices) freq[pools.labels[i]] += 1;
  }
  const double n = batches * 64.0, p = 0.1;
  const double sd = std::sqrt(n * p * (1 - p));
  for (double f : freq) CHECK(std::abs(f - n * p) <= 3 * sd);
}

TEST_CASE("distinct-category batches are uniform across categories") {
  const std::size_t categories = 100;
  const auto pools = balanced(categories, {2, 1, 1});
  const auto index = pools.index();
  const auto stage = default_schedule(64, 1.0)[0];
  Rng rng(6, Stream::Sampler);
  std::vector<double> freq(categories, 0.0);
  const int batches = 10000;
  for (int b = 0; b < batches; ++b) {
    for (auto i : next_batch(stage, index, rng).indices) freq[pools.labels[i]] += 1;
  }
  // Each batch holds a category at most once: per-category counts are
  // Binomial(batches, 64 / C).
  const double p = 64.0 / categories;
  const double mean = batches * p, sd = std::sqrt(batches * p * (1 - p));
  double worst = 0;
  for (double f : freq) worst = std::max(worst, std::abs(f - mean) / sd);
  CHECK(worst < 4.0);  // max of 100 near-normal deviates
}

TEST_CASE("no level above the stage index is ever drawn and weights follow levels") {
  const auto pools = balanced(30, {3, 3, 3});
  const auto index = pools.index();
  const auto stages = default_schedule(64, 1.0);
  Rng rng(6);
  for (const auto& stage : stages) {
    for (int b = 0; b < 200; ++b) {
      const auto batch = next_batch(stage, index, rng);
      CHECK(batch.size() == 64);
      for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto l = level_index(batch.levels[i]);
        CHECK(l <= stage.stage_index);
        CHECK(batch.weights[i] == stage.loss_weights[l]);
      }
    }
  }
}

TEST_CASE("empty levels shift their counts to the nearest lower non-empty level") {
  const auto stage = default_schedule(64, 1.0)[2];  // (32,16,16)
  CHECK(effective_composition(stage, balanced(5, {2, 0, 2}).index()) ==
        std::vector<std::uint32_t>{48, 0, 16});
  CHECK(effective_composition(stage, balanced(5, {2, 2, 0}).index()) ==
        std::vector<std::uint32_t>{32, 32, 0});
  CHECK(effective_composition(stage, balanced(5, {2, 0, 0}).index()) ==
        std::vector<std::uint32_t>{64, 0, 0});
  // Nothing lower exists: counts move up.
  CHECK(effective_composition(stage, balanced(5, {0, 0, 3}).index()) ==
        std::vector<std::uint32_t>{0, 0, 64});
  CHECK_THROWS_AS(effective_composition(stage, balanced(5, {0, 0, 0}).index()), InvalidArgument);
  // Batch size is preserved when falling back.
  Rng rng(8);
  const auto batch = next_batch(stage, balanced(5, {2, 0, 2}).index(), rng);
  CHECK(batch.size() == 64);
}

TEST_CASE("excluded samples are never drawn") {
  auto pools = balanced(10, {3, 3, 3});
  for (std::size_t i = 0; i < pools.levels.size(); i += 2) pools.levels[i].reset();
  const auto index = pools.index();
  Rng rng(9);
  for (const auto& stage : default_schedule(32, 1.0)) {
    for (int b = 0; b < 100; ++b) {
      for (auto i : next_batch(stage, index, rng).indices) CHECK(pools.levels[i].has_value());
    }
  }
}
