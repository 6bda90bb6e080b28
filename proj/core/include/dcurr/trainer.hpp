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
#include <iostream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dcurr/curriculum.hpp"
#include "dcurr/dataset.hpp"
#include "dcurr/random.hpp"
#include "dcurr/schedule.hpp"

namespace dcurr {

constexpr double kLogEpsilon = 1e-12;

struct LossAndGrad {
  double loss = 0.0;
  std::vector<double> grad_logits;
};

/// loss = -weight * log(max(probs[label], 1e-12)),
/// grad = weight * (probs - onehot(label)).
LossAndGrad weighted_ce_loss(std::span<const double> probs, std::size_t label,
                             double weight);

/// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> logits);

enum class ArchitectureKind { Linear, Mlp };

struct Architecture {
  ArchitectureKind kind = ArchitectureKind::Linear;
  std::size_t hidden_dim = 0;  // Mlp only

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

/// Linear softmax classifier or a one-hidden-layer ReLU MLP. All parameters
/// live in one flat vector: [W1, b1] for linear, [W1, b1, W2, b2] for MLP,
/// weight matrices row-major with one row per output unit.
class ClassifierModel {
 public:
  ClassifierModel(Architecture arch, std::size_t input_dim, std::size_t classes);

  /// He-normal weights (variance 2 / fan_in), zero biases.
  static ClassifierModel initialized(Architecture arch, std::size_t input_dim,
                                     std::size_t classes, Rng& rng);

  const Architecture& architecture() const noexcept { return arch_; }
  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t classes() const noexcept { return classes_; }

  std::span<const double> params() const noexcept { return params_; }
  std::span<double> params() noexcept { return params_; }

  std::vector<double> logits(std::span<const float> x) const;
  std::vector<double> probabilities(std::span<const float> x) const;

  /// Adds d(loss)/d(params) to `grad` for one sample, given the gradient of
  /// the loss with respect to the logits.
  void accumulate_gradient(std::span<const float> x, std::span<const double> grad_logits,
                           std::span<double> grad) const;

  friend bool operator==(const ClassifierModel&, const ClassifierModel&) = default;

 private:
  std::size_t hidden_units() const noexcept;

  Architecture arch_;
  std::size_t input_dim_;
  std::size_t classes_;
  std::vector<double> params_;
};

enum class StrategyTag { ModelA, ModelB, ModelC, ModelD, ModelDKMeans };

std::string_view to_string(StrategyTag tag);
/// Accepts "A", "ModelA", "Model-A" (case-insensitive) and "D*"/"kmeans".
StrategyTag parse_strategy(std::string_view text);

struct OptimizerConfig {
  double momentum = 0.9;
  double weight_decay = 1e-4;
};

struct TrainOptions {
  Architecture architecture;
  OptimizerConfig optimizer;
  std::uint32_t topk = 5;
  std::int64_t eval_every = 50;
  /// Share of the HighlyNoisy subset kept for training (ModelD variants).
  double highly_noisy_fraction = 1.0;
  /// Destination for warnings (subset redistribution); null silences them.
  std::ostream* log = &std::clog;
};

struct EvalPoint {
  std::int64_t iteration = 0;
  std::size_t stage = 0;
  double train_loss = 0.0;  // mean batch loss since the previous point; NaN at 0
  double test_top1 = 0.0;   // error rates
  double test_topk = 0.0;

  friend bool operator==(const EvalPoint& a, const EvalPoint& b);
};

struct RunMetrics {
  StrategyTag strategy = StrategyTag::ModelA;
  std::uint64_t seed = 0;
  double highly_noisy_fraction = 1.0;
  std::vector<EvalPoint> points;
  double final_top1 = 0.0;
  double final_topk = 0.0;
  std::vector<double> per_category_top1_accuracy;
  std::vector<double> per_category_topk_accuracy;

  friend bool operator==(const RunMetrics&, const RunMetrics&) = default;
};

/// Resolved training plan: which samples enter which level, and the stages.
struct TrainingPlan {
  StrategyTag strategy = StrategyTag::ModelA;
  std::vector<std::optional<SubsetLevel>> levels;  // nullopt = excluded
  std::vector<StageSpec> stages;
};

/// ModelA: every sample at one level, one stage spanning the whole budget,
/// weight 1, no category balance. ModelB: Clean only. ModelC: Clean and
/// Noisy. ModelD / ModelDKMeans: all levels, with the HighlyNoisy subset
/// subsampled to `highly_noisy_fraction` using `seed`.
TrainingPlan make_plan(StrategyTag strategy, std::span<const SubsetLevel> levels,
                       const std::vector<StageSpec>& schedule, std::uint64_t seed,
                       double highly_noisy_fraction = 1.0);

struct TrainResult {
  ClassifierModel model;
  RunMetrics metrics;
};

struct EvalResult {
  double top1_error = 0.0;
  double topk_error = 0.0;
  std::vector<double> per_category_top1_accuracy;
  std::vector<double> per_category_topk_accuracy;
};

/// Top-k error with probability ties broken by lower class index.
EvalResult evaluate(const ClassifierModel& model, const FeatureSet& test,
                    std::uint32_t topk);

/// True when `label` is among the k highest scores (ties by lower index).
bool in_top_k(std::span<const double> scores, std::size_t label, std::size_t k);

/// Runs the stages in order with SGD + momentum, carrying parameters and
/// optimizer state across stage boundaries. Batch loss is the sum of
/// weighted per-sample losses divided by the batch size.
TrainResult run_plan(const TrainingPlan& plan, const FeatureSet& train,
                     const FeatureSet& test, std::uint64_t seed,
                     const TrainOptions& options);

TrainResult train(StrategyTag strategy, const FeatureSet& train_set,
                  const CurriculumDesign& cd, const std::vector<StageSpec>& schedule,
                  const FeatureSet& test, std::uint64_t seed,
                  const TrainOptions& options = {});

struct SweepRow {
  double fraction = 0.0;
  RunMetrics metrics;
};

/// ModelD reruns keeping each listed share of the HighlyNoisy subset.
std::vector<SweepRow> noisy_fraction_sweep(std::span<const double> fractions,
                                           const FeatureSet& train_set,
                                           const CurriculumDesign& cd,
                                           const std::vector<StageSpec>& schedule,
                                           const FeatureSet& test,
                                           std::span<const std::uint64_t> seeds,
                                           TrainOptions options = {});

/// Metrics CSV: `strategy,seed,iteration,stage,train_loss,top1,topk`.
std::string metrics_csv_header();
std::string metrics_csv_rows(const RunMetrics& m);

}  // namespace dcurr
