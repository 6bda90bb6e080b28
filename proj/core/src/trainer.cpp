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

#include "dcurr/trainer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <numeric>

#include "dcurr/errors.hpp"

namespace dcurr {

LossAndGrad weighted_ce_loss(std::span<const double> probs, std::size_t label,
                             double weight) {
  if (label >= probs.size()) throw InvalidArgument("label outside the probability vector");
  if (!(weight > 0.0)) throw InvalidArgument("loss weight must be positive");
  LossAndGrad out;
  out.loss = -weight * std::log(std::max(probs[label], kLogEpsilon));
  out.grad_logits.resize(probs.size());
  for (std::size_t c = 0; c < probs.size(); ++c) {
    out.grad_logits[c] = weight * (probs[c] - (c == label ? 1.0 : 0.0));
  }
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double z = 0.0;
  for (std::size_t c = 0; c < logits.size(); ++c) {
    p[c] = std::exp(logits[c] - m);
    z += p[c];
  }
  for (auto& v : p) v /= z;
  return p;
}

// ---------------------------------------------------------------------------
// Model

ClassifierModel::ClassifierModel(Architecture arch, std::size_t input_dim,
                                 std::size_t classes)
    : arch_(arch), input_dim_(input_dim), classes_(classes) {
  if (input_dim == 0 || classes < 2) throw InvalidArgument("model needs d >= 1 and C >= 2");
  if (arch.kind == ArchitectureKind::Mlp && arch.hidden_dim == 0) {
    throw InvalidArgument("MLP needs hidden_dim >= 1");
  }
  const std::size_t h = hidden_units();
  params_.assign(arch.kind == ArchitectureKind::Linear
                     ? classes * (input_dim + 1)
                     : h * (input_dim + 1) + classes * (h + 1),
                 0.0);
}

std::size_t ClassifierModel::hidden_units() const noexcept {
  return arch_.kind == ArchitectureKind::Mlp ? arch_.hidden_dim : 0;
}

ClassifierModel ClassifierModel::initialized(Architecture arch, std::size_t input_dim,
                                             std::size_t classes, Rng& rng) {
  ClassifierModel m(arch, input_dim, classes);
  auto fill = [&](std::size_t offset, std::size_t rows, std::size_t fan_in) {
    const double sd = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (std::size_t k = 0; k < rows * fan_in; ++k) m.params_[offset + k] = sd * rng.normal();
  };
  if (arch.kind == ArchitectureKind::Linear) {
    fill(0, classes, input_dim);
  } else {
    const std::size_t h = arch.hidden_dim;
    fill(0, h, input_dim);
    fill(h * (input_dim + 1), classes, h);
  }
  return m;
}

std::vector<double> ClassifierModel::logits(std::span<const float> x) const {
  if (x.size() != input_dim_) throw InvalidArgument("input dimension mismatch");
  auto affine = [](const double* w, const double* b, std::size_t out, std::size_t in,
                   auto&& input) {
    std::vector<double> y(out);
    for (std::size_t o = 0; o < out; ++o) {
      double s = b[o];
      for (std::size_t k = 0; k < in; ++k) s += w[o * in + k] * input[k];
      y[o] = s;
    }
    return y;
  };
  const double* p = params_.data();
  if (arch_.kind == ArchitectureKind::Linear) {
    return affine(p, p + classes_ * input_dim_, classes_, input_dim_, x);
  }
  const std::size_t h = arch_.hidden_dim;
  auto hidden = affine(p, p + h * input_dim_, h, input_dim_, x);
  for (auto& v : hidden) v = std::max(v, 0.0);
  const double* p2 = p + h * (input_dim_ + 1);
  return affine(p2, p2 + classes_ * h, classes_, h, hidden);
}

std::vector<double> ClassifierModel::probabilities(std::span<const float> x) const {
  return softmax(logits(x));
}

void ClassifierModel::accumulate_gradient(std::span<const float> x,
                                          std::span<const double> grad_logits,
                                          std::span<double> grad) const {
  if (grad.size() != params_.size() || grad_logits.size() != classes_) {
    throw InvalidArgument("gradient buffer size mismatch");
  }
  const std::size_t d = input_dim_;
  if (arch_.kind == ArchitectureKind::Linear) {
    for (std::size_t c = 0; c < classes_; ++c) {
      const double g = grad_logits[c];
      for (std::size_t k = 0; k < d; ++k) grad[c * d + k] += g * x[k];
      grad[classes_ * d + c] += g;
    }
    return;
  }
  const std::size_t h = arch_.hidden_dim;
  const double* w1 = params_.data();
  const double* b1 = w1 + h * d;
  const double* w2 = b1 + h;
  std::vector<double> pre(h);
  for (std::size_t u = 0; u < h; ++u) {
    double s = b1[u];
    for (std::size_t k = 0; k < d; ++k) s += w1[u * d + k] * x[k];
    pre[u] = s;
  }
  const std::size_t o2 = h * (d + 1);
  std::vector<double> grad_hidden(h, 0.0);
  for (std::size_t c = 0; c < classes_; ++c) {
    const double g = grad_logits[c];
    for (std::size_t u = 0; u < h; ++u) {
      grad[o2 + c * h + u] += g * std::max(pre[u], 0.0);
      grad_hidden[u] += g * w2[c * h + u];
    }
    grad[o2 + classes_ * h + c] += g;
  }
  for (std::size_t u = 0; u < h; ++u) {
    if (pre[u] <= 0.0) continue;
    const double g = grad_hidden[u];
    for (std::size_t k = 0; k < d; ++k) grad[u * d + k] += g * x[k];
    grad[h * d + u] += g;
  }
}

// ---------------------------------------------------------------------------
// Strategies

std::string_view to_string(StrategyTag tag) {
  switch (tag) {
    case StrategyTag::ModelA: return "ModelA";
    case StrategyTag::ModelB: return "ModelB";
    case StrategyTag::ModelC: return "ModelC";
    case StrategyTag::ModelD: return "ModelD";
    case StrategyTag::ModelDKMeans: return "ModelD_kmeans";
  }
  return "unknown";
}

StrategyTag parse_strategy(std::string_view text) {
  std::string s;
  for (char ch : text) {
    if (ch != '-' && ch != '_') s += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  }
  if (s.starts_with("model")) s.erase(0, 5);
  if (s == "a") return StrategyTag::ModelA;
  if (s == "b") return StrategyTag::ModelB;
  if (s == "c") return StrategyTag::ModelC;
  if (s == "d") return StrategyTag::ModelD;
  if (s == "d*" || s == "dkmeans" || s == "kmeans") return StrategyTag::ModelDKMeans;
  throw InvalidArgument("unknown strategy '" + std::string(text) + "'");
}

bool operator==(const EvalPoint& a, const EvalPoint& b) {
  auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
  return a.iteration == b.iteration && a.stage == b.stage && same(a.train_loss, b.train_loss) &&
         a.test_top1 == b.test_top1 && a.test_topk == b.test_topk;
}

TrainingPlan make_plan(StrategyTag strategy, std::span<const SubsetLevel> levels,
                       const std::vector<StageSpec>& schedule, std::uint64_t seed,
                       double highly_noisy_fraction) {
  if (schedule.empty()) throw InvalidArgument("empty schedule");
  if (!(highly_noisy_fraction >= 0.0 && highly_noisy_fraction <= 1.0)) {
    throw InvalidArgument("highly-noisy fraction must lie in [0, 1]");
  }
  TrainingPlan plan;
  plan.strategy = strategy;
  plan.levels.assign(levels.begin(), levels.end());

  if (strategy == StrategyTag::ModelA) {
    for (auto& l : plan.levels) l = SubsetLevel::Clean;
    StageSpec all;
    all.stage_index = 0;
    all.batch_composition = {schedule.back().batch_size()};
    all.loss_weights = {1.0};
    all.iterations = total_iterations(schedule);
    all.category_balance = false;
    for (const auto& st : schedule) {
      for (const auto& bp : st.lr_plan) {
        if (all.lr_plan.empty() || all.lr_plan.back().lr != bp.lr) all.lr_plan.push_back(bp);
      }
    }
    plan.stages = {all};
    return plan;
  }

  plan.stages = schedule;
  std::size_t keep_below = std::numeric_limits<std::size_t>::max();
  if (strategy == StrategyTag::ModelB) keep_below = 1;
  if (strategy == StrategyTag::ModelC) keep_below = 2;
  for (auto& l : plan.levels) {
    if (l && level_index(*l) >= keep_below) l.reset();
  }

  const bool subsample = (strategy == StrategyTag::ModelD ||
                          strategy == StrategyTag::ModelDKMeans) &&
                         highly_noisy_fraction < 1.0;
  if (subsample) {
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < plan.levels.size(); ++i) {
      if (plan.levels[i] == SubsetLevel::HighlyNoisy) pool.push_back(i);
    }
    const auto keep = static_cast<std::size_t>(
        std::llround(highly_noisy_fraction * static_cast<double>(pool.size())));
    Rng rng(seed, Stream::SubsetFraction);
    for (std::size_t k = 0; k < keep; ++k) {
      std::swap(pool[k], pool[k + rng.below(pool.size() - k)]);
    }
    for (std::size_t k = keep; k < pool.size(); ++k) plan.levels[pool[k]].reset();
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Evaluation

bool in_top_k(std::span<const double> scores, std::size_t label, std::size_t k) {
  std::size_t ahead = 0;
  for (std::size_t j = 0; j < scores.size(); ++j) {
    if (scores[j] > scores[label] || (scores[j] == scores[label] && j < label)) ++ahead;
  }
  return ahead < k;
}

EvalResult evaluate(const ClassifierModel& model, const FeatureSet& test,
                    std::uint32_t topk) {
  if (test.size() == 0) throw InvalidArgument("empty test set");
  if (topk < 1 || topk > model.classes()) throw InvalidArgument("topk must lie in [1, C]");
  if (test.dim() != model.input_dim()) throw InvalidArgument("test feature dimension mismatch");
  const std::size_t c = model.classes();
  std::vector<std::size_t> total(c, 0), hit1(c, 0), hitk(c, 0);
  std::size_t miss1 = 0, missk = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto probs = model.probabilities(test.features().row(i));
    const std::size_t label = test.labels()[i];
    if (label >= c) throw InvalidArgument("test label outside the model's classes");
    ++total[label];
    if (in_top_k(probs, label, 1)) ++hit1[label]; else ++miss1;
    if (in_top_k(probs, label, topk)) ++hitk[label]; else ++missk;
  }
  EvalResult r;
  const auto n = static_cast<double>(test.size());
  r.top1_error = static_cast<double>(miss1) / n;
  r.topk_error = static_cast<double>(missk) / n;
  r.per_category_top1_accuracy.resize(c);
  r.per_category_topk_accuracy.resize(c);
  for (std::size_t k = 0; k < c; ++k) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const auto t = static_cast<double>(total[k]);
    r.per_category_top1_accuracy[k] = total[k] ? static_cast<double>(hit1[k]) / t : nan;
    r.per_category_topk_accuracy[k] = total[k] ? static_cast<double>(hitk[k]) / t : nan;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Training loop

namespace {

std::string composition_text(const std::vector<std::uint32_t>& comp) {
  std::string s = "(";
  for (std::size_t i = 0; i < comp.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(comp[i]);
  }
  return s + ")";
}

}  // namespace

TrainResult run_plan(const TrainingPlan& plan, const FeatureSet& train,
                     const FeatureSet& test, std::uint64_t seed,
                     const TrainOptions& options) {
  if (plan.levels.size() != train.size()) {
    throw InvalidArgument("plan levels do not cover the training set");
  }
  if (options.eval_every < 1) throw InvalidArgument("eval_every must be >= 1");
  if (test.dim() != train.dim()) throw InvalidArgument("train/test dimension mismatch");

  Rng init_rng(seed, Stream::ModelInit);
  ClassifierModel model = ClassifierModel::initialized(
      options.architecture, train.dim(), train.num_categories(), init_rng);
  Rng rng(seed, Stream::Sampler);
  const SubsetIndex index(plan.levels, train.labels(), train.num_categories());

  RunMetrics metrics;
  metrics.strategy = plan.strategy;
  metrics.seed = seed;
  metrics.highly_noisy_fraction = options.highly_noisy_fraction;

  auto record = [&](std::int64_t iteration, std::size_t stage, double loss) {
    const auto e = evaluate(model, test, options.topk);
    metrics.points.push_back({iteration, stage, loss, e.top1_error, e.topk_error});
  };
  record(0, plan.stages.empty() ? 0 : plan.stages.front().stage_index,
         std::numeric_limits<double>::quiet_NaN());

  const std::size_t n_params = model.params().size();
  std::vector<double> velocity(n_params, 0.0);
  std::vector<double> grad(n_params);
  const std::int64_t total = total_iterations(plan.stages);
  std::int64_t t = 0;
  double loss_sum = 0.0;
  std::int64_t loss_count = 0;

  for (const auto& stage : plan.stages) {
    if (stage.iterations == 0) continue;
    auto effective = effective_composition(stage, index);
    auto requested = stage.batch_composition;
    requested.resize(std::max(requested.size(), effective.size()), 0);
    effective.resize(requested.size(), 0);
    if (options.log && effective != requested) {
      *options.log << "warning: " << to_string(plan.strategy) << " stage "
                   << stage.stage_index << ": composition "
                   << composition_text(stage.batch_composition) << " redistributed to "
                   << composition_text(effective_composition(stage, index))
                   << " because a subset is empty\n";
    }
    for (std::int64_t it = 0; it < stage.iterations; ++it, ++t) {
      const double lr = lr_at(stage.lr_plan, t);
      const Batch batch = next_batch(stage, index, rng);
      const auto b = static_cast<double>(batch.size());
      std::fill(grad.begin(), grad.end(), 0.0);
      double batch_loss = 0.0;
      for (std::size_t k = 0; k < batch.size(); ++k) {
        const auto x = train.features().row(batch.indices[k]);
        const auto probs = model.probabilities(x);
        auto lg = weighted_ce_loss(probs, train.labels()[batch.indices[k]], batch.weights[k]);
        batch_loss += lg.loss;
        for (auto& g : lg.grad_logits) g /= b;
        model.accumulate_gradient(x, lg.grad_logits, grad);
      }
      batch_loss /= b;
      if (!std::isfinite(batch_loss)) {
        throw DivergenceError("training diverged at iteration " + std::to_string(t) +
                              " (stage " + std::to_string(stage.stage_index) +
                              ", lr " + std::to_string(lr) + "): loss is not finite");
      }
      auto params = model.params();
      for (std::size_t p = 0; p < n_params; ++p) {
        velocity[p] = options.optimizer.momentum * velocity[p] + grad[p] +
                      options.optimizer.weight_decay * params[p];
        params[p] -= lr * velocity[p];
      }
      loss_sum += batch_loss;
      ++loss_count;
      if ((t + 1) % options.eval_every == 0 || t + 1 == total) {
        record(t + 1, stage.stage_index, loss_sum / static_cast<double>(loss_count));
        loss_sum = 0.0;
        loss_count = 0;
      }
    }
  }

  const auto final_eval = evaluate(model, test, options.topk);
  metrics.final_top1 = final_eval.top1_error;
  metrics.final_topk = final_eval.topk_error;
  metrics.per_category_top1_accuracy = final_eval.per_category_top1_accuracy;
  metrics.per_category_topk_accuracy = final_eval.per_category_topk_accuracy;
  return {std::move(model), std::move(metrics)};
}

TrainResult train(StrategyTag strategy, const FeatureSet& train_set,
                  const CurriculumDesign& cd, const std::vector<StageSpec>& schedule,
                  const FeatureSet& test, std::uint64_t seed, const TrainOptions& options) {
  const auto levels = bind_levels(cd, train_set);
  const auto plan = make_plan(strategy, levels, schedule, seed, options.highly_noisy_fraction);
  return run_plan(plan, train_set, test, seed, options);
}

std::vector<SweepRow> noisy_fraction_sweep(std::span<const double> fractions,
                                           const FeatureSet& train_set,
                                           const CurriculumDesign& cd,
                                           const std::vector<StageSpec>& schedule,
                                           const FeatureSet& test,
                                           std::span<const std::uint64_t> seeds,
                                           TrainOptions options) {
  for (double f : fractions) {
    if (!(f >= 0.0 && f <= 1.0)) throw InvalidArgument("sweep fractions must lie in [0, 1]");
  }
  std::vector<SweepRow> rows;
  for (double f : fractions) {
    options.highly_noisy_fraction = f;
    for (auto seed : seeds) {
      rows.push_back({f, train(StrategyTag::ModelD, train_set, cd, schedule, test, seed,
                               options).metrics});
    }
  }
  return rows;
}

std::string metrics_csv_header() {
  return "strategy,seed,iteration,stage,train_loss,top1,topk\n";
}

std::string metrics_csv_rows(const RunMetrics& m) {
  std::string out;
  char buf[160];
  for (const auto& p : m.points) {
    std::snprintf(buf, sizeof buf, ",%llu,%lld,%zu,%.9g,%.9g,%.9g\n",
                  static_cast<unsigned long long>(m.seed),
                  static_cast<long long>(p.iteration), p.stage, p.train_loss, p.test_top1,
                  p.test_topk);
    out += to_string(m.strategy);
    out += buf;
  }
  return out;
}

}  // namespace dcurr
