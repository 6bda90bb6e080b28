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

#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "dcurr/analysis.hpp"
#include "dcurr/curriculum.hpp"
#include "dcurr/dataset.hpp"
#include "dcurr/trainer.hpp"
#include "run_config.hpp"

namespace dcurr::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string printf_string(const char* fmt, auto... args) {
  const int n = std::snprintf(nullptr, 0, fmt, args...);
  std::string s(static_cast<std::size_t>(n) + 1, '\0');
  std::snprintf(s.data(), s.size(), fmt, args...);
  s.resize(static_cast<std::size_t>(n));
  return s;
}

bool given_on_command_line(const std::vector<std::string>& args, std::string_view flag) {
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
    return a == flag || a.starts_with(std::string(flag) + "=");
  });
}

FeatureSet load_any_features(const fs::path& path) {
  return load_features(path, format_from_extension(path));
}

std::string_view level_name(std::size_t level) {
  static constexpr std::string_view names[] = {"clean", "noisy", "highly_noisy"};
  return level < 3 ? names[level] : "other";
}

ojson nan_aware(double v) { return std::isnan(v) ? ojson(nullptr) : ojson(v); }

double json_double(const ojson& j) {
  return j.is_null() ? std::nan("") : j.get<double>();
}

std::vector<double> json_doubles(const ojson& j) {
  std::vector<double> out;
  for (const auto& v : j) out.push_back(json_double(v));
  return out;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  SynthConfig cfg;
  std::uint32_t test_per_category = 100;
  std::string format = "binary";
};

void cmd_synth(const SynthArgs& a, const fs::path& out_dir, std::ostream& out) {
  const FileFormat format = parse_file_format(a.format);
  const std::string ext = format == FileFormat::Csv ? ".csv" : ".crfs";
  const auto data = generate_synthetic(a.cfg);
  fs::create_directories(out_dir);
  save_features(data.features, out_dir / ("features" + ext), format);
  save_truth(data.truth, out_dir / "truth.csv");
  if (a.test_per_category > 0) {
    save_features(generate_holdout(a.cfg, a.test_per_category), out_dir / ("test" + ext),
                  format);
  }
  out << "wrote " << data.features.size() << " samples (" << data.features.num_categories()
      << " categories, dim " << data.features.dim() << ") to " << out_dir.string() << "\n";
}

// ---------------------------------------------------------------- design

std::string design_table(const CurriculumDesign& cd) {
  std::string t = printf_string("%-10s %6s %12s", "category", "n", "d_c");
  for (std::uint32_t l = 0; l < cd.params.n_subsets; ++l) {
    t += printf_string(" %12s", std::string(level_name(l)).c_str());
  }
  t += "\n";
  for (std::size_t c = 0; c < cd.categories.size(); ++c) {
    const auto st = cd.stats(c);
    t += printf_string("%-10u %6zu %12.6g", cd.categories[c].category_id, st.n, st.d_c);
    for (auto size : st.subset_sizes) t += printf_string(" %12zu", size);
    t += "\n";
  }
  return t;
}

struct DesignArgs {
  fs::path features;
  std::string method = "density";
  std::string name;
};

void cmd_design(const DesignArgs& a, CurriculumParams params, const fs::path& out_dir,
                std::ostream& out) {
  params.method = parse_design_method(a.method);
  const auto features = load_any_features(a.features);
  const auto cd = design(features, params);
  std::string name = a.name;
  if (name.empty()) {
    name = params.method == DesignMethod::KMeans ? "curriculum_kmeans.json" : "curriculum.json";
  }
  fs::create_directories(out_dir);
  save_curriculum(cd, out_dir / name);
  out << design_table(cd);
  out << "wrote " << (out_dir / name).string() << "\n";
}

// ---------------------------------------------------------------- train

struct TrainTask {
  StrategyTag strategy;
  double fraction;
  std::uint64_t seed;
  std::string group;
};

struct TrainArgs {
  std::string strategies = "A,B,C,D";
  std::string seeds = "1";
  std::string noisy_fraction;
  std::string arch = "linear";
  std::size_t hidden = 32;
};

std::string group_name(StrategyTag s, double fraction, bool sweep) {
  std::string g(to_string(s));
  if (sweep) g += printf_string("@%g%%", fraction * 100.0);
  return g;
}

std::vector<RunMetrics> run_tasks(const std::vector<TrainTask>& tasks, const FeatureSet& train_set,
                                  const FeatureSet& test_set, const CurriculumDesign& density_cd,
                                  const CurriculumDesign* kmeans_cd, const RunConfig& cfg,
                                  std::ostream& err) {
  const auto schedule = cfg.schedule();
  std::vector<RunMetrics> results(tasks.size());
  std::vector<std::string> logs(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const auto& t = tasks[i];
      std::ostringstream log;
      TrainOptions options = cfg.train_options;
      options.highly_noisy_fraction = t.fraction;
      options.log = &log;
      try {
        const auto& cd = t.strategy == StrategyTag::ModelDKMeans ? *kmeans_cd : density_cd;
        results[i] = train(t.strategy, train_set, cd, schedule, test_set, t.seed, options)
                         .metrics;
      } catch (...) {
        errors[i] = std::current_exception();
      }
      logs[i] = log.str();
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(cfg.jobs, tasks.size()));
  {
    std::vector<std::jthread> pool;
    for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
  }
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (!logs[i].empty()) {
      err << "[" << tasks[i].group << " seed " << tasks[i].seed << "] " << logs[i];
    }
    if (errors[i]) std::rethrow_exception(errors[i]);
  }
  return results;
}

std::pair<double, double> mean_std(const std::vector<double>& xs) {
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double sd = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
  return {mean, sd};
}

ojson run_json(const RunMetrics& m) {
  ojson j;
  j["strategy"] = std::string(to_string(m.strategy));
  j["seed"] = m.seed;
  j["highly_noisy_fraction"] = m.highly_noisy_fraction;
  j["final_top1"] = nan_aware(m.final_top1);
  j["final_topk"] = nan_aware(m.final_topk);
  ojson top1 = ojson::array(), topk = ojson::array();
  for (double v : m.per_category_top1_accuracy) top1.push_back(nan_aware(v));
  for (double v : m.per_category_topk_accuracy) topk.push_back(nan_aware(v));
  j["per_category_top1_accuracy"] = std::move(top1);
  j["per_category_topk_accuracy"] = std::move(topk);
  return j;
}

RunMetrics run_from_json(const ojson& j) {
  RunMetrics m;
  m.strategy = parse_strategy(j.at("strategy").get<std::string>());
  m.seed = j.at("seed").get<std::uint64_t>();
  m.highly_noisy_fraction = j.at("highly_noisy_fraction").get<double>();
  m.final_top1 = json_double(j.at("final_top1"));
  m.final_topk = json_double(j.at("final_topk"));
  m.per_category_top1_accuracy = json_doubles(j.at("per_category_top1_accuracy"));
  m.per_category_topk_accuracy = json_doubles(j.at("per_category_topk_accuracy"));
  return m;
}

void cmd_train(const TrainArgs& a, RunConfig cfg, std::ostream& out, std::ostream& err) {
  cfg.strategies = parse_strategy_list(a.strategies);
  cfg.seeds = parse_seed_list(a.seeds);
  if (!a.noisy_fraction.empty()) cfg.noisy_fractions = parse_percent_list(a.noisy_fraction);
  if (a.arch == "linear") {
    cfg.train_options.architecture = {ArchitectureKind::Linear, 0};
  } else if (a.arch == "mlp") {
    if (a.hidden == 0) throw UsageError("--hidden must be positive for the mlp architecture");
    cfg.train_options.architecture = {ArchitectureKind::Mlp, a.hidden};
  } else {
    throw UsageError("unknown architecture '" + a.arch + "' (expected linear or mlp)");
  }
  if (cfg.features.empty()) throw UsageError("--features is required");
  if (cfg.test.empty()) throw UsageError("--test is required");
  const bool sweep = !cfg.noisy_fractions.empty();
  if (sweep) {
    for (auto s : cfg.strategies) {
      if (s != StrategyTag::ModelD && s != StrategyTag::ModelDKMeans) {
        throw UsageError("--noisy-fraction applies only to ModelD and ModelD_kmeans");
      }
    }
  }
  cfg.validate();

  const auto train_set = load_any_features(cfg.features);
  const auto test_set = load_any_features(cfg.test);

  CurriculumParams params = cfg.curriculum_params;
  params.method = DesignMethod::Density;
  const auto density_cd = cfg.curriculum.empty() ? design(train_set, params)
                                                 : load_curriculum(cfg.curriculum);
  std::unique_ptr<CurriculumDesign> kmeans_cd;
  if (std::find(cfg.strategies.begin(), cfg.strategies.end(), StrategyTag::ModelDKMeans) !=
      cfg.strategies.end()) {
    params.method = DesignMethod::KMeans;
    kmeans_cd = std::make_unique<CurriculumDesign>(
        cfg.kmeans_curriculum.empty() ? design(train_set, params)
                                      : load_curriculum(cfg.kmeans_curriculum));
  }

  std::vector<TrainTask> tasks;
  const std::vector<double> fractions = sweep ? cfg.noisy_fractions : std::vector<double>{1.0};
  for (auto s : cfg.strategies) {
    for (double f : fractions) {
      for (auto seed : cfg.seeds) tasks.push_back({s, f, seed, group_name(s, f, sweep)});
    }
  }
  const auto results = run_tasks(tasks, train_set, test_set, density_cd, kmeans_cd.get(), cfg, err);

  std::string metrics = metrics_csv_header();
  ojson runs = ojson::array();
  for (const auto& m : results) {
    metrics += metrics_csv_rows(m);
    runs.push_back(run_json(m));
  }

  // Group order follows first appearance in the task list.
  std::vector<std::string> groups;
  for (const auto& t : tasks) {
    if (std::find(groups.begin(), groups.end(), t.group) == groups.end()) groups.push_back(t.group);
  }
  std::string summary = "group,runs,top1_mean,top1_std,topk_mean,topk_std\n";
  std::string table = printf_string("%-20s %5s %10s %10s %10s %10s\n", "group", "runs",
                                    "top1_mean", "top1_std", "topk_mean", "topk_std");
  ojson summary_json = ojson::array();
  for (const auto& g : groups) {
    std::vector<double> top1, topk;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      if (tasks[i].group != g) continue;
      top1.push_back(results[i].final_top1);
      topk.push_back(results[i].final_topk);
    }
    const auto [m1, s1] = mean_std(top1);
    const auto [mk, sk] = mean_std(topk);
    summary += printf_string("%s,%zu,%.9g,%.9g,%.9g,%.9g\n", g.c_str(), top1.size(), m1, s1, mk, sk);
    table += printf_string("%-20s %5zu %10.4f %10.4f %10.4f %10.4f\n", g.c_str(), top1.size(), m1,
                           s1, mk, sk);
    ojson row;
    row["group"] = g;
    row["runs"] = top1.size();
    row["top1_mean"] = nan_aware(m1);
    row["top1_std"] = nan_aware(s1);
    row["topk_mean"] = nan_aware(mk);
    row["topk_std"] = nan_aware(sk);
    summary_json.push_back(std::move(row));
  }

  ojson doc;
  doc["topk"] = cfg.train_options.topk;
  doc["runs"] = std::move(runs);
  doc["summary"] = std::move(summary_json);

  fs::create_directories(cfg.output_dir);
  write_file_atomic(cfg.output_dir / "metrics.csv", metrics);
  write_file_atomic(cfg.output_dir / "runs.json", doc.dump(2) + "\n");
  write_file_atomic(cfg.output_dir / "summary.csv", summary);
  out << table;
}

// ---------------------------------------------------------------- analyze

struct AnalyzeArgs {
  fs::path curriculum;
  fs::path reference;
  fs::path runs;
  std::string baseline = "A";
  std::string compare = "D";
};

void cmd_analyze(const AnalyzeArgs& a, const fs::path& out_dir, std::ostream& out) {
  for (const auto* p : {&a.curriculum, &a.reference, &a.runs}) {
    if (!p->empty() && !fs::exists(*p)) throw UsageError("'" + p->string() + "' does not exist");
  }
  StrategyTag baseline_tag, compare_tag;
  try {
    baseline_tag = parse_strategy(a.baseline);
    compare_tag = parse_strategy(a.compare);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  const auto cd = load_curriculum(a.curriculum);
  const auto reference = load_reference(a.reference);

  std::size_t num_categories = 0;
  for (const auto& c : cd.categories) {
    num_categories = std::max<std::size_t>(num_categories, c.category_id + 1);
  }
  const auto rates = per_category_correct_rate(cd, reference, num_categories);

  NoiseAudit audit;
  if (!a.runs.empty()) {
    const auto doc = ojson::parse(read_file(a.runs));
    std::vector<RunMetrics> base, comp;
    for (const auto& j : doc.at("runs")) {
      auto m = run_from_json(j);
      if (m.strategy == baseline_tag) base.push_back(m);
      if (m.strategy == compare_tag) comp.push_back(m);
    }
    if (base.empty() || comp.empty()) {
      throw UsageError("runs file lacks runs for " + std::string(to_string(baseline_tag)) +
                       " or " + std::string(to_string(compare_tag)));
    }
    audit = rate_interval_report(rates, average_runs(base), average_runs(comp));
  } else {
    audit.correct_rate = rates;
    for (double r : rates) ++audit.histogram[rate_bin(r)];
  }
  audit.subset_noise = subset_noise_rates(cd, reference);

  fs::create_directories(out_dir);
  write_file_atomic(out_dir / "audit.json", audit_json(audit));
  write_file_atomic(out_dir / "audit_bins.csv", audit_bins_csv(audit));

  out << printf_string("%-14s %8s %10s %10s\n", "level", "samples", "mislabeled", "rate");
  for (std::size_t l = 0; l < audit.subset_noise.size(); ++l) {
    const auto& n = audit.subset_noise[l];
    const std::string rate = n.rate ? printf_string("%.4f", *n.rate) : "-";
    out << printf_string("%-14s %8zu %10zu %10s\n", std::string(level_name(l)).c_str(), n.count,
                         n.mislabeled, rate.c_str());
  }
  out << "wrote " << (out_dir / "audit.json").string() << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Density-based curriculum design and training on noisy-label data", "dcurr"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Run-config file (key = value, one [section] per command)");
  app.set_version_flag("--version", "dcurr 0.1.0");

  RunConfig cfg;
  fs::path out_dir = ".";
  const auto add_out_dir = [&](CLI::App* sub) {
    sub->add_option("-o,--out-dir", out_dir,
                    std::string("Output directory (env ") + kOutputDirEnv + ")")
        ->capture_default_str();
  };

  auto* synth = app.add_subcommand("synth", "Generate planted noisy-label data");
  SynthArgs synth_args;
  synth->add_option("--categories", synth_args.cfg.categories)->capture_default_str();
  synth->add_option("--per-category", synth_args.cfg.per_category)->capture_default_str();
  synth->add_option("--dim", synth_args.cfg.dim)->capture_default_str();
  synth->add_option("--clean", synth_args.cfg.clean_frac, "Clean fraction")->capture_default_str();
  synth->add_option("--cross", synth_args.cfg.cross_frac, "Cross-label fraction")
      ->capture_default_str();
  synth->add_option("--uniform", synth_args.cfg.uniform_frac, "Uniform-noise fraction")
      ->capture_default_str();
  synth->add_option("--sigma", synth_args.cfg.blob_sigma, "Blob standard deviation")
      ->capture_default_str();
  synth->add_option("--seed", synth_args.cfg.seed)->capture_default_str();
  synth->add_option("--test-per-category", synth_args.test_per_category,
                    "Clean held-out samples per category (0 skips the test file)")
      ->capture_default_str();
  synth->add_option("--format", synth_args.format, "binary or csv")->capture_default_str();
  add_out_dir(synth);

  const auto add_curriculum_params = [&](CLI::App* sub) {
    sub->add_option("--k-percent", cfg.curriculum_params.k_percent, "Cutoff percentile k")
        ->capture_default_str();
    sub->add_option("--subsets", cfg.curriculum_params.n_subsets)->capture_default_str();
    sub->add_option("--curriculum-seed", cfg.curriculum_params.seed, "Seed of the k-means baseline")
        ->capture_default_str();
    sub->add_option("--max-iters", cfg.curriculum_params.kmeans_max_iters)->capture_default_str();
    sub->add_option("--threads", cfg.curriculum_params.threads, "Worker threads (0 = all cores)")
        ->capture_default_str();
  };

  auto* design_cmd = app.add_subcommand("design", "Split every category into curriculum subsets");
  DesignArgs design_args;
  design_cmd->add_option("--features", design_args.features, "Feature file (.crfs or .csv)")
      ->required()
      ->check(CLI::ExistingFile);
  design_cmd->add_option("--method", design_args.method, "density or kmeans")
      ->capture_default_str();
  design_cmd->add_option("--name", design_args.name,
                         "Output file name (default curriculum.json or curriculum_kmeans.json)");
  add_curriculum_params(design_cmd);
  add_out_dir(design_cmd);

  auto* train_cmd = app.add_subcommand("train", "Train strategies over seeds");
  TrainArgs train_args;
  train_cmd->add_option("--features", cfg.features, "Training feature file");
  train_cmd->add_option("--test", cfg.test, "Held-out feature file");
  train_cmd->add_option("--curriculum", cfg.curriculum,
                        "Density curriculum (designed on the fly when absent)");
  train_cmd->add_option("--kmeans-curriculum", cfg.kmeans_curriculum,
                        "k-means curriculum for ModelD_kmeans (designed on the fly when absent)");
  train_cmd->add_option("--strategies", train_args.strategies, "Comma list of A,B,C,D,D_kmeans")
      ->capture_default_str();
  train_cmd->add_option("--seeds", train_args.seeds, "Seeds, e.g. 1..10 or 1,4,7")
      ->capture_default_str();
  train_cmd->add_option("--noisy-fraction", train_args.noisy_fraction,
                        "Highly-noisy percentages to sweep, e.g. 0,25,50,75,100");
  train_cmd->add_option("--batch-size", cfg.batch_size)->capture_default_str();
  train_cmd->add_option("--scale", cfg.scale, "Iteration scale of the learning-rate plan")
      ->capture_default_str();
  train_cmd->add_option("--lr", cfg.initial_lr, "Initial learning rate (default 0.1)");
  train_cmd->add_option("--arch", train_args.arch, "linear or mlp")->capture_default_str();
  train_cmd->add_option("--hidden", train_args.hidden, "Hidden units of the mlp")
      ->capture_default_str();
  train_cmd->add_option("--momentum", cfg.train_options.optimizer.momentum)->capture_default_str();
  train_cmd->add_option("--weight-decay", cfg.train_options.optimizer.weight_decay)
      ->capture_default_str();
  train_cmd->add_option("--topk", cfg.train_options.topk)->capture_default_str();
  train_cmd->add_option("--eval-every", cfg.train_options.eval_every)->capture_default_str();
  train_cmd->add_option("-j,--jobs", cfg.jobs, "Parallel runs")->capture_default_str();
  add_curriculum_params(train_cmd);
  add_out_dir(train_cmd);

  auto* analyze_cmd = app.add_subcommand("analyze", "Audit subset noise against reference labels");
  AnalyzeArgs analyze_args;
  analyze_cmd->add_option("--curriculum", analyze_args.curriculum)->required();
  analyze_cmd->add_option("--reference", analyze_args.reference,
                          "Truth CSV or id,predicted_label CSV")
      ->required();
  analyze_cmd->add_option("--runs", analyze_args.runs, "runs.json from train");
  analyze_cmd->add_option("--baseline", analyze_args.baseline)->capture_default_str();
  analyze_cmd->add_option("--compare", analyze_args.compare)->capture_default_str();
  add_out_dir(analyze_cmd);

  try {
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::Success& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  if (const char* env = std::getenv(kOutputDirEnv);
      env && *env && !given_on_command_line(args, "--out-dir") &&
      !given_on_command_line(args, "-o")) {
    out_dir = env;
  }
  cfg.output_dir = out_dir;

  try {
    if (synth->parsed()) {
      cmd_synth(synth_args, out_dir, out);
    } else if (design_cmd->parsed()) {
      cfg.validate();
      cmd_design(design_args, cfg.curriculum_params, out_dir, out);
    } else if (train_cmd->parsed()) {
      cmd_train(train_args, cfg, out, err);
    } else if (analyze_cmd->parsed()) {
      cmd_analyze(analyze_args, out_dir, out);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace dcurr::cli
