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
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dcurr {

using CategoryId = std::uint32_t;

/// Row-major N x d block of 32-bit features.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0f) {}
  FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<float> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  std::span<const float> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<float> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

  const std::vector<float>& data() const noexcept { return data_; }

  /// Copy of the listed rows, in the given order.
  FeatureMatrix gather(std::span<const std::size_t> indices) const;

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> data_;
};

/// Feature vectors with (possibly noisy) category labels.
///
/// Construction validates every invariant: matching lengths, N >= 1, labels
/// below C, finite features, unique ids. A category without samples is
/// allowed only when it is listed in `empty_categories`.
class FeatureSet {
 public:
  FeatureSet(FeatureMatrix features, std::vector<CategoryId> labels,
             std::vector<std::string> sample_ids,
             std::vector<std::string> category_names,
             std::vector<CategoryId> empty_categories = {});

  /// Same as the constructor but flags every unused category as empty
  /// instead of rejecting it. Used by the loaders.
  static FeatureSet with_derived_empty_flags(FeatureMatrix features,
                                             std::vector<CategoryId> labels,
                                             std::vector<std::string> sample_ids,
                                             std::vector<std::string> category_names);

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t dim() const noexcept { return features_.cols(); }
  std::size_t num_categories() const noexcept { return category_names_.size(); }

  const FeatureMatrix& features() const noexcept { return features_; }
  const std::vector<CategoryId>& labels() const noexcept { return labels_; }
  const std::vector<std::string>& sample_ids() const noexcept { return sample_ids_; }
  const std::vector<std::string>& category_names() const noexcept {
    return category_names_;
  }
  const std::vector<CategoryId>& empty_categories() const noexcept {
    return empty_categories_;
  }

  /// Sample indices grouped by label, in ascending index order.
  std::vector<std::vector<std::size_t>> indices_by_category() const;

  friend bool operator==(const FeatureSet&, const FeatureSet&) = default;

 private:
  FeatureMatrix features_;
  std::vector<CategoryId> labels_;
  std::vector<std::string> sample_ids_;
  std::vector<std::string> category_names_;
  std::vector<CategoryId> empty_categories_;
};

enum class NoiseKind : std::uint8_t { Clean = 0, CrossLabel = 1, UniformNoise = 2 };

std::string_view to_string(NoiseKind kind);
NoiseKind parse_noise_kind(std::string_view text);

/// Ground truth for generated data.
struct SyntheticTruth {
  std::vector<std::string> sample_ids;
  std::vector<CategoryId> true_labels;
  std::vector<NoiseKind> noise_kind;

  std::size_t size() const noexcept { return true_labels.size(); }
  friend bool operator==(const SyntheticTruth&, const SyntheticTruth&) = default;
};

enum class FileFormat { Binary, Csv };

FileFormat parse_file_format(std::string_view text);
/// Binary for ".crfs", CSV for ".csv".
FileFormat format_from_extension(const std::filesystem::path& path);

FeatureSet load_features(const std::filesystem::path& path, FileFormat format);
void save_features(const FeatureSet& fs, const std::filesystem::path& path,
                   FileFormat format);

std::string serialize_features(const FeatureSet& fs, FileFormat format);
FeatureSet parse_features(std::string_view bytes, FileFormat format);

/// Truth CSV: `id,true_label,noise_kind`.
std::string serialize_truth(const SyntheticTruth& truth);
SyntheticTruth parse_truth(std::string_view text);
void save_truth(const SyntheticTruth& truth, const std::filesystem::path& path);
SyntheticTruth load_truth(const std::filesystem::path& path);

struct SynthConfig {
  std::uint32_t categories = 10;
  std::uint32_t per_category = 200;
  std::uint32_t dim = 3;
  double clean_frac = 0.60;
  double cross_frac = 0.25;
  double uniform_frac = 0.15;
  double blob_sigma = 0.5;
  std::uint64_t seed = 1;
};

struct SyntheticData {
  FeatureSet features;
  SyntheticTruth truth;
};

/// Planted noisy-label data. Each category owns a Gaussian blob with a unit
/// normal center; clean samples come from the own blob, cross-label samples
/// from a uniformly chosen other blob, uniform-noise samples from the
/// bounding box of all centers padded by 3 * blob_sigma.
SyntheticData generate_synthetic(const SynthConfig& cfg);

/// Clean held-out samples from the same blobs as `generate_synthetic(cfg)`.
FeatureSet generate_holdout(const SynthConfig& cfg, std::uint32_t per_category);

/// Writes via a temporary file then renames over the destination.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace dcurr
