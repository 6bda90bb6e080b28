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

#include "dcurr/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

#include "json.hpp"

#include "dcurr/errors.hpp"

namespace dcurr {

ReferenceLabels reference_from_truth(const SyntheticTruth& truth) {
  ReferenceLabels ref;
  ref.reserve(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) ref[truth.sample_ids[i]] = truth.true_labels[i];
  return ref;
}

ReferenceLabels parse_reference_csv(std::string_view text) {
  if (text.starts_with("id,true_label,noise_kind")) return reference_from_truth(parse_truth(text));
  const auto eol = text.find('\n');
  std::string_view header = text.substr(0, eol);
  if (header.ends_with('\r')) header.remove_suffix(1);
  if (header != "id,predicted_label") {
    throw FormatError("reference CSV needs header id,true_label,noise_kind or id,predicted_label");
  }
  ReferenceLabels ref;
  std::size_t row = 0;
  std::size_t pos = eol == std::string_view::npos ? text.size() : eol + 1;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (line.ends_with('\r')) line.remove_suffix(1);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string_view::npos) throw FormatError("expected 2 columns", row);
    const auto cell = line.substr(comma + 1);
    CategoryId label;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), label);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
      throw FormatError("malformed predicted_label", row);
    }
    if (!ref.emplace(std::string(line.substr(0, comma)), label).second) {
      throw FormatError("duplicate id in reference", row);
    }
    ++row;
  }
  return ref;
}

ReferenceLabels load_reference(const std::filesystem::path& path) {
  return parse_reference_csv(read_file(path));
}

namespace {

CategoryId reference_of(const ReferenceLabels& reference, const std::string& id) {
  const auto it = reference.find(id);
  if (it == reference.end()) {
    throw InvalidArgument("reference labels do not cover sample '" + id + "'");
  }
  return it->second;
}

}  // namespace

std::vector<LevelNoise> subset_noise_rates(const CurriculumDesign& cd,
                                           const ReferenceLabels& reference) {
  std::vector<LevelNoise> out(std::max<std::size_t>(cd.params.n_subsets, 1));
  for (const auto& cat : cd.categories) {
    for (const auto& s : cat.samples) {
      const std::size_t l = level_index(s.level);
      if (l >= out.size()) out.resize(l + 1);
      ++out[l].count;
      if (reference_of(reference, s.id) != cat.category_id) ++out[l].mislabeled;
    }
  }
  for (auto& l : out) {
    if (l.count) l.rate = static_cast<double>(l.mislabeled) / static_cast<double>(l.count);
  }
  return out;
}

std::vector<double> per_category_correct_rate(const CurriculumDesign& cd,
                                              const ReferenceLabels& reference,
                                              std::size_t num_categories) {
  std::vector<std::size_t> total(num_categories, 0), correct(num_categories, 0);
  for (const auto& cat : cd.categories) {
    if (cat.category_id >= num_categories) {
      throw InvalidArgument("curriculum category outside [0, C)");
    }
    for (const auto& s : cat.samples) {
      ++total[cat.category_id];
      if (reference_of(reference, s.id) == cat.category_id) ++correct[cat.category_id];
    }
  }
  std::vector<double> rate(num_categories, 0.0);
  for (std::size_t c = 0; c < num_categories; ++c) {
    if (total[c]) rate[c] = static_cast<double>(correct[c]) / static_cast<double>(total[c]);
  }
  return rate;
}

std::size_t rate_bin(double rate) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw InvalidArgument("rate outside [0, 1]");
  return std::min<std::size_t>(static_cast<std::size_t>(std::floor(rate * 10.0)), kRateBins - 1);
}

NoiseAudit rate_interval_report(const std::vector<double>& correct_rate,
                                const RunMetrics& baseline, const RunMetrics& curriculum) {
  const std::size_t c = correct_rate.size();
  if (baseline.per_category_topk_accuracy.size() != c ||
      curriculum.per_category_topk_accuracy.size() != c) {
    throw InvalidArgument("per-category accuracies do not match the number of categories");
  }
  NoiseAudit audit;
  audit.correct_rate = correct_rate;
  std::array<double, kRateBins> gain_sum{};
  std::array<std::size_t, kRateBins> gain_count{};
  for (std::size_t k = 0; k < c; ++k) {
    const std::size_t bin = rate_bin(correct_rate[k]);
    ++audit.histogram[bin];
    const double gain = curriculum.per_category_topk_accuracy[k] -
                        baseline.per_category_topk_accuracy[k];
    if (std::isnan(gain)) continue;
    gain_sum[bin] += gain;
    ++gain_count[bin];
  }
  for (std::size_t b = 0; b < kRateBins; ++b) {
    if (gain_count[b]) audit.mean_gain[b] = gain_sum[b] / static_cast<double>(gain_count[b]);
  }
  return audit;
}

RunMetrics average_runs(const std::vector<RunMetrics>& runs) {
  if (runs.empty()) throw InvalidArgument("no runs to average");
  RunMetrics avg;
  avg.strategy = runs.front().strategy;
  avg.seed = runs.front().seed;
  avg.highly_noisy_fraction = runs.front().highly_noisy_fraction;
  const std::size_t c = runs.front().per_category_topk_accuracy.size();
  avg.per_category_top1_accuracy.assign(c, 0.0);
  avg.per_category_topk_accuracy.assign(c, 0.0);
  const auto n = static_cast<double>(runs.size());
  for (const auto& r : runs) {
    if (r.per_category_topk_accuracy.size() != c || r.per_category_top1_accuracy.size() != c) {
      throw InvalidArgument("runs disagree on the number of categories");
    }
    avg.final_top1 += r.final_top1 / n;
    avg.final_topk += r.final_topk / n;
    for (std::size_t k = 0; k < c; ++k) {
      avg.per_category_top1_accuracy[k] += r.per_category_top1_accuracy[k] / n;
      avg.per_category_topk_accuracy[k] += r.per_category_topk_accuracy[k] / n;
    }
  }
  return avg;
}

std::string audit_json(const NoiseAudit& audit) {
  nlohmann::ordered_json j;
  auto& levels = j["subset_noise"] = nlohmann::ordered_json::array();
  for (std::size_t l = 0; l < audit.subset_noise.size(); ++l) {
    const auto& s = audit.subset_noise[l];
    nlohmann::ordered_json e;
    e["level"] = l;
    e["count"] = s.count;
    e["mislabeled"] = s.mislabeled;
    e["rate"] = s.rate ? nlohmann::ordered_json(*s.rate) : nlohmann::ordered_json(nullptr);
    levels.push_back(std::move(e));
  }
  j["correct_rate"] = audit.correct_rate;
  auto& bins = j["bins"] = nlohmann::ordered_json::array();
  for (std::size_t b = 0; b < kRateBins; ++b) {
    nlohmann::ordered_json e;
    e["lo"] = static_cast<double>(b) / 10.0;
    e["hi"] = static_cast<double>(b + 1) / 10.0;
    e["categories"] = audit.histogram[b];
    e["mean_gain"] = audit.mean_gain[b] ? nlohmann::ordered_json(*audit.mean_gain[b])
                                        : nlohmann::ordered_json(nullptr);
    bins.push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

std::string audit_bins_csv(const NoiseAudit& audit) {
  std::string out = "bin_lo,bin_hi,categories,mean_gain\n";
  char buf[96];
  for (std::size_t b = 0; b < kRateBins; ++b) {
    std::snprintf(buf, sizeof buf, "%.1f,%.1f,%zu,", static_cast<double>(b) / 10.0,
                  static_cast<double>(b + 1) / 10.0, audit.histogram[b]);
    out += buf;
    if (audit.mean_gain[b]) {
      std::snprintf(buf, sizeof buf, "%.9g", *audit.mean_gain[b]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace dcurr
