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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dcurr/curriculum.hpp"
#include "dcurr/errors.hpp"
#include "dcurr/schedule.hpp"
#include "dcurr/trainer.hpp"

namespace dcurr::cli {

/// Bad command-line or config input; maps to exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct RunConfig {
  std::filesystem::path features;
  std::filesystem::path test;
  std::filesystem::path truth;
  std::filesystem::path curriculum;
  std::filesystem::path kmeans_curriculum;
  std::filesystem::path output_dir = ".";

  CurriculumParams curriculum_params;
  std::uint32_t batch_size = 64;
  double scale = 0.001;
  std::optional<double> initial_lr;

  std::vector<StrategyTag> strategies = {StrategyTag::ModelA, StrategyTag::ModelB,
                                         StrategyTag::ModelC, StrategyTag::ModelD};
  std::vector<std::uint64_t> seeds = {1};
  std::vector<double> noisy_fractions;  // empty: no sweep
  TrainOptions train_options;
  unsigned jobs = 1;

  /// Throws UsageError naming the first violated invariant.
  void validate() const;
  std::vector<StageSpec> schedule() const;
};

/// "1..10", "1,3,5" or a mix such as "1..3,7".
std::vector<std::uint64_t> parse_seed_list(std::string_view text);
/// "A,B,C,D"; unknown names raise UsageError.
std::vector<StrategyTag> parse_strategy_list(std::string_view text);
/// Percentages "0,25,50" -> {0.0, 0.25, 0.5}.
std::vector<double> parse_percent_list(std::string_view text);

}  // namespace dcurr::cli
