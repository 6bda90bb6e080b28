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

#include "run_config.hpp"

#include <charconv>

namespace dcurr::cli {

namespace {

std::vector<std::string_view> split_commas(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find(',', start);
    const auto end = pos == std::string_view::npos ? text.size() : pos;
    auto part = text.substr(start, end - start);
    while (!part.empty() && part.front() == ' ') part.remove_prefix(1);
    while (!part.empty() && part.back() == ' ') part.remove_suffix(1);
    if (!part.empty()) parts.push_back(part);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::uint64_t parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw UsageError("not a non-negative integer: '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  std::vector<std::uint64_t> seeds;
  for (auto part : split_commas(text)) {
    const auto dots = part.find("..");
    if (dots == std::string_view::npos) {
      seeds.push_back(parse_u64(part));
      continue;
    }
    const auto lo = parse_u64(part.substr(0, dots));
    const auto hi = parse_u64(part.substr(dots + 2));
    if (hi < lo) throw UsageError("empty seed range '" + std::string(part) + "'");
    for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
  }
  if (seeds.empty()) throw UsageError("seed list is empty");
  return seeds;
}

std::vector<StrategyTag> parse_strategy_list(std::string_view text) {
  std::vector<StrategyTag> out;
  for (auto part : split_commas(text)) {
    try {
      out.push_back(parse_strategy(part));
    } catch (const InvalidArgument& e) {
      throw UsageError(e.what());
    }
  }
  if (out.empty()) throw UsageError("strategy list is empty");
  return out;
}

std::vector<double> parse_percent_list(std::string_view text) {
  std::vector<double> out;
  for (auto part : split_commas(text)) {
    double v = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc() || ptr != part.data() + part.size() || v < 0 || v > 100) {
      throw UsageError("percentage must lie in [0, 100]: '" + std::string(part) + "'");
    }
    out.push_back(v / 100.0);
  }
  return out;
}

void RunConfig::validate() const {
  auto must_exist = [](const std::filesystem::path& p, const char* what) {
    if (!p.empty() && !std::filesystem::exists(p)) {
      throw UsageError(std::string(what) + " '" + p.string() + "' does not exist");
    }
  };
  must_exist(features, "features file");
  must_exist(test, "test file");
  must_exist(truth, "truth file");
  must_exist(curriculum, "curriculum file");
  must_exist(kmeans_curriculum, "k-means curriculum file");
  if (seeds.empty()) throw UsageError("at least one seed is required");
  if (!(curriculum_params.k_percent > 0.0 && curriculum_params.k_percent < 100.0)) {
    throw UsageError("k-percent must lie in (0, 100)");
  }
  if (curriculum_params.n_subsets < 1) throw UsageError("subsets must be >= 1");
  if (batch_size == 0 || batch_size % 4 != 0) {
    throw UsageError("batch size must be a positive multiple of 4");
  }
  if (!(scale > 0.0 && scale <= 1.0)) throw UsageError("scale must lie in (0, 1]");
}

std::vector<StageSpec> RunConfig::schedule() const {
  ScheduleParams params;
  if (initial_lr) params.initial_lr = *initial_lr;
  return default_schedule(batch_size, scale, params);
}

}  // namespace dcurr::cli
