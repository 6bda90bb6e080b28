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

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dcurr/curriculum.hpp"
#include "dcurr/dataset.hpp"
#include "dcurr/trainer.hpp"

namespace dcurr {

/// Reference label per sample id: ground truth or an external auditor's
/// predictions.
using ReferenceLabels = std::unordered_map<std::string, CategoryId>;

ReferenceLabels reference_from_truth(const SyntheticTruth& truth);
/// Reads either `id,true_label,noise_kind` or `id,predicted_label` CSV.
ReferenceLabels parse_reference_csv(std::string_view text);
ReferenceLabels load_reference(const std::filesystem::path& path);

struct LevelNoise {
  std::size_t count = 0;
  std::size_t mislabeled = 0;
  std::optional<double> rate;  // none for an empty level
};

/// Per level: share of samples whose given label (their category) differs
/// from the reference label.
std::vector<LevelNoise> subset_noise_rates(const CurriculumDesign& cd,
                                           const ReferenceLabels& reference);

/// Per category: share of its samples whose reference label matches.
std::vector<double> per_category_correct_rate(const CurriculumDesign& cd,
                                              const ReferenceLabels& reference,
                                              std::size_t num_categories);

constexpr std::size_t kRateBins = 10;

/// Bin of a rate in [0, 1]: [0.0,0.1), ..., [0.9,1.0] with 1.0 in the top bin.
std::size_t rate_bin(double rate);

struct NoiseAudit {
  std::vector<LevelNoise> subset_noise;
  std::vector<double> correct_rate;
  std::array<std::size_t, kRateBins> histogram{};
  std::array<std::optional<double>, kRateBins> mean_gain{};
};

/// Categories per correct-rate bin and, per bin, the mean top-k accuracy gain
/// of `curriculum` over `baseline`.
NoiseAudit rate_interval_report(const std::vector<double>& correct_rate,
                                const RunMetrics& baseline, const RunMetrics& curriculum);

/// Averages per-category accuracies and final errors over runs.
RunMetrics average_runs(const std::vector<RunMetrics>& runs);

std::string audit_json(const NoiseAudit& audit);
/// `bin_lo,bin_hi,categories,mean_gain`.
std::string audit_bins_csv(const NoiseAudit& audit);

}  // namespace dcurr
