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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Tolerances and sizes are fixed here, not tuned per run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "dcurr/analysis.hpp"
#include "dcurr/curriculum.hpp"
#include "dcurr/dataset.hpp"
#include "dcurr/density.hpp"
#include "dcurr/schedule.hpp"
#include "dcurr/trainer.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

namespace fs = std::filesystem;
using namespace dcurr;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

constexpr int kSeeds = 10;

SynthConfig planted(std::uint64_t seed) {
  SynthConfig cfg;  // C=10, 200 per category, 0.60/0.25/0.15
  cfg.seed = seed;
  return cfg;
}

TrainOptions quiet() {
  TrainOptions o;
  o.log = nullptr;
  return o;
}

const std::vector<StageSpec>& desk_schedule() {
  static const auto s = default_schedule(64, 0.001);
  return s;
}

// ---------------------------------------------------------------------------

Verdict density_oracles() {
  const auto t0 = Clock::now();
  Rng rng(2024);
  int mismatches = 0, delta_checked = 0, natural_distinct = 0;
  for (int inst = 0; inst < 200; ++inst) {
    const std::size_t n = 1 + rng.below(50), d = 1 + rng.below(8);
    FeatureMatrix x(n, d);
    // Every other instance uses a small integer grid to force ties.
    const bool grid = inst % 2 == 1;
    for (std::size_t i = 0; i < n; ++i) {
      for (auto& v : x.row(i)) {
        v = grid ? static_cast<float>(rng.below(4)) : static_cast<float>(rng.normal(0.0, 3.0));
      }
    }
    const double k = rng.uniform(0.0, 100.0);

    const auto dm = distance_matrix(x, 1 + static_cast<unsigned>(inst % 4));
    const auto ref = oracle::distances(oracle::rows_of(x));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) mismatches += dm(i, j) != ref[i][j];
    }
    const double dc = cutoff_distance(dm, k);
    mismatches += dc != oracle::cutoff(ref, k);
    const auto rho = local_density(dm, dc);
    mismatches += rho != oracle::density(ref, dc);

    // Computed densities are neighbour counts in a graph and so always repeat
    // for n >= 2; distinct densities come from shuffled 0..n-1.
    natural_distinct += std::set<std::uint32_t>(rho.begin(), rho.end()).size() == n;
    std::vector<std::uint32_t> distinct(n);
    std::iota(distinct.begin(), distinct.end(), 0u);
    std::shuffle(distinct.begin(), distinct.end(), rng.engine());
    for (const auto& r : {distinct, rho}) {
      if (std::set<std::uint32_t>(r.begin(), r.end()).size() != n) continue;
      ++delta_checked;
      const auto got = delta_and_center(dm, r);
      const auto want = oracle::literal_delta(ref, r);
      mismatches += got.delta != want.delta;
      mismatches += got.center != want.center;
    }
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && delta_checked >= 200 && secs < 10.0,
          fmt("200 instances, %d mismatches, %d delta checks (%d with naturally distinct rho), %.2fs < 10s",
              mismatches, delta_checked, natural_distinct, secs)};
}

Verdict noise_rate_ordering() {
  const auto t0 = Clock::now();
  int ordered = 0, pure = 0;
  std::string rates;
  for (int s = 1; s <= kSeeds; ++s) {
    const auto data = generate_synthetic(planted(static_cast<std::uint64_t>(s)));
    const auto cd = design_curriculum(data.features, {});
    const auto r = subset_noise_rates(cd, reference_from_truth(data.truth));
    const double c = r[0].rate.value_or(1.0), n = r[1].rate.value_or(0.0), h = r[2].rate.value_or(0.0);
    ordered += r[1].rate && r[2].rate && c < n && n < h;
    pure += 1.0 - c > 0.60;
    if (s <= 3) rates += fmt(" s%d=%.2f/%.2f/%.2f", s, c, n, h);
  }
  const double secs = seconds_since(t0);
  return {ordered >= 9 && pure == kSeeds && secs < 60.0,
          fmt("ordered %d/10 (need 9), clean purity > 0.60 in %d/10,%s, %.1fs < 60s", ordered, pure,
              rates.c_str(), secs)};
}

struct SeedData {
  SyntheticData data;
  FeatureSet holdout;
  CurriculumDesign cd;
};

SeedData seed_data(std::uint64_t seed) {
  auto data = generate_synthetic(planted(seed));
  auto holdout = generate_holdout(planted(seed), 100);
  auto cd = design_curriculum(data.features, {});
  return {std::move(data), std::move(holdout), std::move(cd)};
}

Verdict ablation_ordering() {
  const auto t0 = Clock::now();
  int d_le_a = 0, c_le_a = 0;
  double sum_a = 0, sum_c = 0, sum_d = 0;
  for (int s = 1; s <= kSeeds; ++s) {
    const auto seed = static_cast<std::uint64_t>(s);
    const auto sd = seed_data(seed);
    auto err = [&](StrategyTag tag) {
      return train(tag, sd.data.features, sd.cd, desk_schedule(), sd.holdout, seed, quiet()).metrics.final_top1;
    };
    const double a = err(StrategyTag::ModelA), c = err(StrategyTag::ModelC), d = err(StrategyTag::ModelD);
    d_le_a += d <= a;
    c_le_a += c <= a;
    sum_a += a;
    sum_c += c;
    sum_d += d;
  }
  const double secs = seconds_since(t0);
  const double ma = sum_a / kSeeds, mc = sum_c / kSeeds, md = sum_d / kSeeds;
  return {d_le_a >= 8 && c_le_a >= 8 && md < ma && secs < 600.0,
          fmt("D<=A %d/10, C<=A %d/10 (need 8), mean top-1 error A=%.4f C=%.4f D=%.4f, %.1fs < 600s", d_le_a,
              c_le_a, ma, mc, md, secs)};
}

Verdict noisy_fraction_sweep_check() {
  const auto t0 = Clock::now();
  const std::vector<double> fractions{0.0, 0.25, 0.50, 0.75};
  std::vector<double> mean(fractions.size(), 0.0);
  for (int s = 1; s <= kSeeds; ++s) {
    const auto seed = static_cast<std::uint64_t>(s);
    const auto sd = seed_data(seed);
    const std::vector<std::uint64_t> seeds{seed};
    const auto rows =
        noisy_fraction_sweep(fractions, sd.data.features, sd.cd, desk_schedule(), sd.holdout, seeds, quiet());
    for (std::size_t f = 0; f < fractions.size(); ++f) mean[f] += rows[f].metrics.final_top1 / kSeeds;
  }
  const double secs = seconds_since(t0);
  const double best = *std::min_element(mean.begin() + 1, mean.end());
  return {best <= mean[0] && secs < 900.0,
          fmt("mean top-1 error 0%%=%.4f 25%%=%.4f 50%%=%.4f 75%%=%.4f, %.1fs < 900s", mean[0], mean[1], mean[2],
              mean[3], secs)};
}

double agreement(const CurriculumDesign& a, const CurriculumDesign& b) {
  std::size_t same = 0, total = 0;
  for (std::size_t c = 0; c < a.categories.size(); ++c) {
    std::map<std::string, SubsetLevel> other;
    for (const auto& s : b.categories[c].samples) other[s.id] = s.level;
    for (const auto& s : a.categories[c].samples) {
      same += other.at(s.id) == s.level;
      ++total;
    }
  }
  return static_cast<double>(same) / static_cast<double>(total);
}

Verdict k_sensitivity() {
  auto at = [](const FeatureSet& fs, double k) {
    CurriculumParams p;
    p.k_percent = k;
    return design_curriculum(fs, p);
  };
  const auto data = generate_synthetic(planted(1));
  const double agree = agreement(at(data.features, 50.0), at(data.features, 70.0));
  double mean = 0;
  for (int s = 1; s <= kSeeds; ++s) {
    const auto d = generate_synthetic(planted(static_cast<std::uint64_t>(s)));
    mean += agreement(at(d.features, 50.0), at(d.features, 70.0)) / kSeeds;
  }
  return {agree >= 0.90, fmt("k=50 vs k=70 agreement %.4f (need >= 0.90); mean over seeds 1..10 %.4f", agree, mean)};
}

// Upper-tail chi-square quantile, Wilson-Hilferty approximation.
double chi2_critical(double df, double z) {
  const double a = 2.0 / (9.0 * df);
  return df * std::pow(1.0 - a + z * std::sqrt(a), 3.0);
}

Verdict sampler_exactness() {
  constexpr double kZ001 = 3.090;  // upper 0.001 normal quantile
  SynthConfig cfg;
  cfg.categories = 200;
  cfg.per_category = 20;
  const auto data = generate_synthetic(cfg);
  const auto cd = design_curriculum(data.features, {});
  const SubsetIndex index(cd, data.features);
  const auto stage = default_schedule(256, 1.0)[2];
  const auto& labels = data.features.labels();
  const std::size_t C = cfg.categories;

  Rng rng(77, Stream::Sampler);
  int bad_counts = 0, bad_weights = 0, repeated = 0;
  std::vector<double> clean_freq(C, 0.0);
  std::vector<std::vector<double>> level_freq(3, std::vector<double>(C, 0.0));
  const int batches = 1000;
  for (int b = 0; b < batches; ++b) {
    const auto batch = next_batch(stage, index, rng);
    std::array<std::uint32_t, 3> counts{};
    std::set<CategoryId> seen;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const auto l = level_index(batch.levels[i]);
      ++counts[l];
      bad_weights += batch.weights[i] != (l == 0 ? 1.0 : 0.5);
      const auto cat = labels[batch.indices[i]];
      level_freq[l][cat] += 1;
      if (l == 0) repeated += !seen.insert(cat).second;
    }
    bad_counts += !(counts[0] == 128 && counts[1] == 64 && counts[2] == 64);
  }
  // Clean picks: distinct categories per batch, so each count is
  // Binomial(batches, 128 / C); the variance-corrected statistic is chi-square.
  const double p = 128.0 / static_cast<double>(C), mean = batches * p;
  double clean_stat = 0;
  for (double f : level_freq[0]) clean_stat += (f - mean) * (f - mean) / (mean * (1 - p));
  const double crit = chi2_critical(static_cast<double>(C - 1), kZ001);
  // Noisy levels: uniform over the pool, so category shares follow pool shares.
  bool pools_ok = true;
  std::string pool_stats;
  for (std::size_t l = 1; l < 3; ++l) {
    std::vector<double> share(C, 0.0);
    for (auto i : index.pool(l)) share[labels[i]] += 1.0 / static_cast<double>(index.pool(l).size());
    double stat = 0;
    std::size_t df = 0;
    for (std::size_t c = 0; c < C; ++c) {
      if (share[c] == 0) {
        pools_ok &= level_freq[l][c] == 0;
        continue;
      }
      const double e = share[c] * batches * 64.0;
      stat += (level_freq[l][c] - e) * (level_freq[l][c] - e) / e;
      ++df;
    }
    const double lc = chi2_critical(static_cast<double>(df - 1), kZ001);
    pools_ok &= stat < lc;
    pool_stats += fmt(", level %zu chi2 %.1f < %.1f", l, stat, lc);
  }
  return {bad_counts == 0 && bad_weights == 0 && repeated == 0 && clean_stat < crit && pools_ok,
          fmt("1000 batches of 256 over %zu categories: %d bad compositions, %d bad weights, %d repeated clean "
              "categories, clean chi2 %.1f < %.1f%s",
              C, bad_counts, bad_weights, repeated, clean_stat, crit, pool_stats.c_str())};
}

Verdict gradient_check() {
  Rng rng(31337);
  double worst_logit = 0, worst_param = 0;
  int halving_failures = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t C = 2 + rng.below(9), d = 1 + rng.below(6);
    const std::size_t label = rng.below(C);
    const double w = inst % 2 ? 1.0 : 0.5;

    std::vector<double> z(C);
    for (auto& v : z) v = rng.normal(0.0, 2.0);
    const auto g = weighted_ce_loss(softmax(z), label, w).grad_logits;
    for (std::size_t c = 0; c < C; ++c) {
      const double h = 1e-5;
      auto zp = z, zm = z;
      zp[c] += h;
      zm[c] -= h;
      const double num = static_cast<double>((oracle::weighted_ce(zp, label, w) - oracle::weighted_ce(zm, label, w)) /
                                             (2.0L * h));
      worst_logit = std::max(worst_logit, std::abs(g[c] - num) / std::max(std::abs(g[c]), std::abs(num)));
    }

    // Parameter gradient through the model, checked as a whole vector.
    const Architecture arch = inst % 3 == 0 ? Architecture{ArchitectureKind::Mlp, 1 + rng.below(8)}
                                            : Architecture{ArchitectureKind::Linear, 0};
    auto model = ClassifierModel::initialized(arch, d, C, rng);
    std::vector<float> x(d);
    for (auto& v : x) v = static_cast<float>(rng.normal());
    const auto lg = weighted_ce_loss(model.probabilities(x), label, w);
    std::vector<double> grad(model.params().size(), 0.0);
    model.accumulate_gradient(x, lg.grad_logits, grad);
    double diff2 = 0, norm_a = 0, norm_n = 0;
    for (std::size_t k = 0; k < grad.size(); ++k) {
      const double h = 1e-6, orig = model.params()[k];
      model.params()[k] = orig + h;
      const auto lp = oracle::weighted_ce(model.logits(x), label, w);
      model.params()[k] = orig - h;
      const auto lm = oracle::weighted_ce(model.logits(x), label, w);
      model.params()[k] = orig;
      const double num = static_cast<double>((lp - lm) / (2.0L * h));
      diff2 += (grad[k] - num) * (grad[k] - num);
      norm_a += grad[k] * grad[k];
      norm_n += num * num;
    }
    const double denom = std::sqrt(std::max(norm_a, norm_n));
    if (denom > 0) worst_param = std::max(worst_param, std::sqrt(diff2) / denom);

    // Weight 0.5 gives exactly half of weight 1.
    const auto probs = model.probabilities(x);
    const auto full = weighted_ce_loss(probs, label, 1.0), half = weighted_ce_loss(probs, label, 0.5);
    std::vector<double> gf(grad.size(), 0.0), gh(grad.size(), 0.0);
    model.accumulate_gradient(x, full.grad_logits, gf);
    model.accumulate_gradient(x, half.grad_logits, gh);
    for (std::size_t c = 0; c < C; ++c) halving_failures += half.grad_logits[c] != 0.5 * full.grad_logits[c];
    for (std::size_t k = 0; k < gf.size(); ++k) halving_failures += gh[k] != 0.5 * gf[k];
    halving_failures += half.loss != 0.5 * full.loss;
  }
  return {worst_logit <= 1e-5 && worst_param <= 1e-5 && halving_failures == 0,
          fmt("100 instances: worst relative error logits %.2e, params %.2e (<= 1e-5), %d inexact halvings",
              worst_logit, worst_param, halving_failures)};
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = read_file(e.path());
  }
  return files;
}

Verdict cli_determinism() {
  testing_support::TempDir a("accept"), b("accept");
  std::string out[2];
  int failures = 0;
  const testing_support::TempDir* dirs[2] = {&a, &b};
  for (int r = 0; r < 2; ++r) {
    const auto d = dirs[r]->path().string();
    const std::vector<std::vector<std::string>> commands{
        {"synth", "--per-category", "60", "--seed", "7", "-o", d},
        {"synth", "--per-category", "20", "--format", "csv", "-o", d + "/csv"},
        {"design", "--features", d + "/features.crfs", "-o", d},
        {"design", "--features", d + "/features.crfs", "--method", "kmeans", "-o", d},
        {"design", "--features", d + "/csv/features.csv", "--k-percent", "50", "-o", d + "/csv"},
        {"train", "--features", d + "/features.crfs", "--test", d + "/test.crfs", "--strategies",
         "A,B,C,D,D_kmeans", "--seeds", "1..3", "--scale", "0.0005", "-j", "3", "-o", d + "/runs"},
        {"train", "--features", d + "/features.crfs", "--test", d + "/test.crfs", "--strategies", "D",
         "--noisy-fraction", "0,50,100", "--seeds", "1,2", "--scale", "0.0005", "--arch", "mlp", "-o",
         d + "/sweep"},
        {"analyze", "--curriculum", d + "/curriculum.json", "--reference", d + "/truth.csv", "--runs",
         d + "/runs/runs.json", "-o", d + "/audit"},
    };
    std::ostringstream log;
    for (auto args : commands) {
      args.insert(args.begin(), "dcurr");
      std::ostringstream err;
      failures += cli::run(args, log, err) != cli::kExitOk;
    }
    // Printed paths name the run directory; everything else must match.
    out[r] = log.str();
    for (auto pos = out[r].find(d); pos != std::string::npos; pos = out[r].find(d, pos)) out[r].replace(pos, d.size(), "<dir>");
  }
  const auto sa = snapshot(a.path()), sb = snapshot(b.path());
  std::size_t differing = 0;
  for (const auto& [name, bytes] : sa) differing += !sb.contains(name) || sb.at(name) != bytes;
  differing += sa.size() != sb.size();
  return {failures == 0 && differing == 0 && out[0] == out[1] && sa.size() >= 15,
          fmt("8 commands run twice: %d failed, %zu files compared, %zu differ, stdout %s", failures, sa.size(),
              differing, out[0] == out[1] ? "identical" : "differs")};
}

Verdict round_trips() {
  testing_support::TempDir dir("accept");
  Rng rng(99);
  int failures = 0, designs = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t c = 1 + rng.below(8);
    // Odd instances may leave categories empty; design needs them all filled.
    const bool allow_empty = inst % 2 == 1;
    const auto fs_ = oracle::random_feature_set(rng, c + rng.below(120), 1 + rng.below(16), c, allow_empty);
    for (auto format : {FileFormat::Binary, FileFormat::Csv}) {
      const auto p1 = dir / (format == FileFormat::Binary ? "a.crfs" : "a.csv");
      const auto p2 = dir / (format == FileFormat::Binary ? "b.crfs" : "b.csv");
      save_features(fs_, p1, format);
      const auto loaded = load_features(p1, format);
      save_features(loaded, p2, format);
      failures += read_file(p1) != read_file(p2);
      failures += !(loaded == fs_);
    }
    if (!fs_.empty_categories().empty()) continue;
    ++designs;
    CurriculumParams p;
    p.k_percent = rng.uniform(1.0, 99.0);
    p.n_subsets = 1 + static_cast<std::uint32_t>(rng.below(kMaxSubsets));
    p.seed = rng.next_u64();
    p.method = inst % 4 == 2 ? DesignMethod::KMeans : DesignMethod::Density;
    const auto cd = design(fs_, p);
    save_curriculum(cd, dir / "a.json");
    const auto loaded = load_curriculum(dir / "a.json");
    save_curriculum(loaded, dir / "b.json");
    failures += read_file(dir / "a.json") != read_file(dir / "b.json");
    failures += !(loaded == cd);
  }
  return {failures == 0 && designs >= 50,
          fmt("100 feature sets x (binary, csv), %d curricula: %d failures", designs, failures)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria{
      {"density math matches brute-force oracles", density_oracles},
      {"subset noise rates ordered Clean < Noisy < HighlyNoisy", noise_rate_ordering},
      {"ablation: ModelD and ModelC no worse than ModelA", ablation_ordering},
      {"highly-noisy fraction sweep beats 0%", noisy_fraction_sweep_check},
      {"subset assignment insensitive to k in [50, 70]", k_sensitivity},
      {"sampler compositions, weights and uniformity", sampler_exactness},
      {"weighted cross-entropy gradients", gradient_check},
      {"CLI reruns are byte-identical", cli_determinism},
      {"feature and curriculum files round-trip", round_trips},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("criterion %zu: %s  %s: %s\n", i + 1, v.pass ? "PASS" : "FAIL", criteria[i].name, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
