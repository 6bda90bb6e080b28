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

#include "dcurr/curriculum.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <thread>
#include <unordered_map>

#include "json.hpp"

#include "dcurr/density.hpp"
#include "dcurr/errors.hpp"
#include "dcurr/random.hpp"

namespace dcurr {

std::string_view to_string(DesignMethod method) {
  return method == DesignMethod::Density ? "density" : "kmeans";
}

DesignMethod parse_design_method(std::string_view text) {
  if (text == "density") return DesignMethod::Density;
  if (text == "kmeans") return DesignMethod::KMeans;
  throw InvalidArgument("unknown design method '" + std::string(text) + "'");
}

std::size_t CurriculumDesign::num_samples() const {
  std::size_t n = 0;
  for (const auto& c : categories) n += c.samples.size();
  return n;
}

CategoryStats CurriculumDesign::stats(std::size_t category) const {
  const auto& cat = categories.at(category);
  CategoryStats s;
  s.n = cat.samples.size();
  s.d_c = cat.d_c;
  std::size_t levels = params.n_subsets;
  for (const auto& smp : cat.samples) levels = std::max(levels, level_index(smp.level) + 1);
  s.subset_sizes.assign(levels, 0);
  std::vector<double> sums(levels, 0.0);
  for (const auto& smp : cat.samples) {
    ++s.subset_sizes[level_index(smp.level)];
    sums[level_index(smp.level)] += smp.dist;
  }
  s.mean_dist.resize(levels);
  for (std::size_t l = 0; l < levels; ++l) {
    if (s.subset_sizes[l] > 0) s.mean_dist[l] = sums[l] / static_cast<double>(s.subset_sizes[l]);
  }
  return s;
}

// ---------------------------------------------------------------------------
// 1-D partition

namespace {

double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double t = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * t;
}

std::vector<double> quantile_init(const std::vector<double>& sorted, std::uint32_t k) {
  std::vector<double> c(k);
  for (std::uint32_t s = 0; s < k; ++s) {
    c[s] = k == 1 ? quantile(sorted, 0.5)
                  : quantile(sorted, static_cast<double>(s) / static_cast<double>(k - 1));
  }
  return c;
}

std::size_t nearest_centroid(double v, const std::vector<double>& c) {
  std::size_t best = 0;
  double best_d = std::abs(v - c[0]);
  for (std::size_t s = 1; s < c.size(); ++s) {
    const double d = std::abs(v - c[s]);
    if (d < best_d) {
      best_d = d;
      best = s;
    }
  }
  return best;
}

}  // namespace

std::vector<SubsetLevel> partition_category(std::span<const double> dist,
                                            std::uint32_t n_subsets,
                                            std::uint32_t max_iters) {
  if (n_subsets < 1 || n_subsets > kMaxSubsets) {
    throw InvalidArgument("n_subsets must lie in [1, 3]");
  }
  if (dist.empty()) throw InvalidArgument("cannot partition an empty category");
  for (double v : dist) {
    if (!std::isfinite(v)) throw InvalidArgument("non-finite distance");
    if (v < 0) throw InvalidArgument("negative distance");
  }

  std::vector<double> sorted(dist.begin(), dist.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> distinct = sorted;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  std::vector<SubsetLevel> out(dist.size(), SubsetLevel::Clean);
  if (dist.size() < n_subsets) return out;
  if (distinct.size() < n_subsets) {
    // One cluster per distinct value, ascending.
    for (std::size_t i = 0; i < dist.size(); ++i) {
      const auto rank = std::lower_bound(distinct.begin(), distinct.end(), dist[i]) -
                        distinct.begin();
      out[i] = static_cast<SubsetLevel>(rank);
    }
    return out;
  }

  std::vector<double> centroids = quantile_init(sorted, n_subsets);
  if (std::adjacent_find(centroids.begin(), centroids.end()) != centroids.end()) {
    // Heavy duplication collapsed some quantiles; spread over distinct values.
    centroids = quantile_init(distinct, n_subsets);
  }

  std::vector<std::size_t> assign(dist.size());
  for (std::size_t i = 0; i < dist.size(); ++i) assign[i] = nearest_centroid(dist[i], centroids);
  for (std::uint32_t iter = 0; iter < max_iters; ++iter) {
    std::vector<double> sum(n_subsets, 0.0);
    std::vector<std::size_t> count(n_subsets, 0);
    for (std::size_t i = 0; i < dist.size(); ++i) {
      sum[assign[i]] += dist[i];
      ++count[assign[i]];
    }
    for (std::size_t s = 0; s < n_subsets; ++s) {
      if (count[s] > 0) centroids[s] = sum[s] / static_cast<double>(count[s]);
    }
    bool changed = false;
    for (std::size_t i = 0; i < dist.size(); ++i) {
      const std::size_t a = nearest_centroid(dist[i], centroids);
      if (a != assign[i]) {
        assign[i] = a;
        changed = true;
      }
    }
    if (!changed) break;
  }

  std::vector<std::size_t> order(n_subsets);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return centroids[a] < centroids[b]; });
  std::vector<std::size_t> rank(n_subsets);
  for (std::size_t r = 0; r < n_subsets; ++r) rank[order[r]] = r;
  for (std::size_t i = 0; i < dist.size(); ++i) out[i] = static_cast<SubsetLevel>(rank[assign[i]]);
  return out;
}

// ---------------------------------------------------------------------------
// Designs

namespace {

void check_params(const CurriculumParams& params) {
  if (!(params.k_percent > 0.0 && params.k_percent < 100.0)) {
    throw InvalidArgument("k_percent must lie in (0, 100)");
  }
  if (params.n_subsets < 1 || params.n_subsets > kMaxSubsets) {
    throw InvalidArgument("n_subsets must lie in [1, 3]");
  }
}

template <typename Fn>
std::vector<CategoryCurriculum> per_category(const FeatureSet& fs, unsigned threads, Fn fn) {
  const auto groups = fs.indices_by_category();
  for (std::size_t c = 0; c < groups.size(); ++c) {
    if (groups[c].empty()) {
      throw InvalidArgument("category '" + fs.category_names()[c] +
                            "' is empty; curriculum design needs samples in every category");
    }
  }
  std::vector<CategoryCurriculum> out(groups.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, groups.size()));
  if (threads <= 1) {
    for (std::size_t c = 0; c < groups.size(); ++c) out[c] = fn(c, groups[c]);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(groups.size());
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t c = next++; c < groups.size(); c = next++) {
          try {
            out[c] = fn(c, groups[c]);
          } catch (...) {
            errors[c] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

CategoryCurriculum assemble(const FeatureSet& fs, std::size_t category,
                            const std::vector<std::size_t>& members, std::size_t center,
                            double d_c, const std::vector<double>& dist,
                            const std::vector<SubsetLevel>& levels) {
  CategoryCurriculum cc;
  cc.category_id = static_cast<CategoryId>(category);
  cc.center_id = fs.sample_ids()[members[center]];
  cc.d_c = static_cast<float>(d_c);
  cc.samples.reserve(members.size());
  for (std::size_t i = 0; i < members.size(); ++i) {
    cc.samples.push_back({fs.sample_ids()[members[i]], levels[i], static_cast<float>(dist[i])});
  }
  return cc;
}

}  // namespace

CurriculumDesign design_curriculum(const FeatureSet& fs, const CurriculumParams& params) {
  check_params(params);
  CurriculumDesign cd;
  cd.params = params;
  cd.params.method = DesignMethod::Density;
  cd.categories = per_category(
      fs, params.threads, [&](std::size_t c, const std::vector<std::size_t>& members) {
        const FeatureMatrix f = fs.features().gather(members);
        const DistanceMatrix dm = distance_matrix(f);
        const DensityProfile profile = density_profile(dm, params.k_percent);
        std::vector<double> dist(members.size());
        for (std::size_t i = 0; i < members.size(); ++i) dist[i] = dm(profile.center, i);
        std::vector<SubsetLevel> levels(members.size(), SubsetLevel::Clean);
        if (members.size() >= params.n_subsets) {
          levels = partition_category(dist, params.n_subsets, params.kmeans_max_iters);
        }
        return assemble(fs, c, members, profile.center, profile.d_c, dist, levels);
      });
  return cd;
}

CurriculumDesign design_curriculum_kmeans(const FeatureSet& fs,
                                          const CurriculumParams& params) {
  check_params(params);
  CurriculumDesign cd;
  cd.params = params;
  cd.params.method = DesignMethod::KMeans;
  cd.categories = per_category(
      fs, params.threads, [&](std::size_t c, const std::vector<std::size_t>& members) {
        const FeatureMatrix f = fs.features().gather(members);
        const std::size_t n = members.size();
        const std::size_t d = f.cols();
        const DistanceMatrix dm = distance_matrix(f);
        const double d_c = cutoff_distance(dm, params.k_percent);

        auto sq = [&](std::size_t i, const std::vector<double>& centroid) {
          const auto row = f.row(i);
          double s = 0.0;
          for (std::size_t k = 0; k < d; ++k) {
            const double diff = row[k] - centroid[k];
            s += diff * diff;
          }
          return s;
        };
        auto point = [&](std::size_t i) {
          const auto row = f.row(i);
          return std::vector<double>(row.begin(), row.end());
        };

        // Farthest-point seeding from a seeded random first pick.
        Rng rng(params.seed, Stream::KMeansInit, c);
        std::vector<std::vector<double>> centroids;
        const std::size_t k = n < params.n_subsets ? 1 : params.n_subsets;
        centroids.push_back(point(rng.below(n)));
        std::vector<double> mind(n);
        for (std::size_t i = 0; i < n; ++i) mind[i] = sq(i, centroids[0]);
        while (centroids.size() < k) {
          const auto far = static_cast<std::size_t>(
              std::max_element(mind.begin(), mind.end()) - mind.begin());
          if (mind[far] <= 0.0) break;
          centroids.push_back(point(far));
          for (std::size_t i = 0; i < n; ++i) mind[i] = std::min(mind[i], sq(i, centroids.back()));
        }

        const std::size_t kk = centroids.size();
        std::vector<std::size_t> assign(n, 0);
        auto assign_all = [&] {
          bool changed = false;
          for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_d = sq(i, centroids[0]);
            for (std::size_t s = 1; s < kk; ++s) {
              const double dd = sq(i, centroids[s]);
              if (dd < best_d) {
                best_d = dd;
                best = s;
              }
            }
            if (best != assign[i]) changed = true;
            assign[i] = best;
          }
          return changed;
        };
        assign_all();
        for (std::uint32_t iter = 0; iter < params.kmeans_max_iters; ++iter) {
          std::vector<std::vector<double>> sum(kk, std::vector<double>(d, 0.0));
          std::vector<std::size_t> count(kk, 0);
          for (std::size_t i = 0; i < n; ++i) {
            const auto row = f.row(i);
            for (std::size_t q = 0; q < d; ++q) sum[assign[i]][q] += row[q];
            ++count[assign[i]];
          }
          for (std::size_t s = 0; s < kk; ++s) {
            if (count[s] == 0) continue;
            for (std::size_t q = 0; q < d; ++q) {
              centroids[s][q] = sum[s][q] / static_cast<double>(count[s]);
            }
          }
          if (!assign_all()) break;
        }

        std::vector<std::size_t> count(kk, 0);
        for (std::size_t a : assign) ++count[a];
        std::vector<std::size_t> order(kk);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return count[a] > count[b]; });
        std::vector<std::size_t> rank(kk);
        for (std::size_t r = 0; r < kk; ++r) rank[order[r]] = r;

        // Anchor: the member nearest the largest cluster's centroid.
        std::size_t center = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
          const double dd = sq(i, centroids[order[0]]);
          if (dd < best) {
            best = dd;
            center = i;
          }
        }
        std::vector<double> dist(n);
        std::vector<SubsetLevel> levels(n);
        for (std::size_t i = 0; i < n; ++i) {
          dist[i] = dm(center, i);
          levels[i] = static_cast<SubsetLevel>(rank[assign[i]]);
        }
        return assemble(fs, c, members, center, d_c, dist, levels);
      });
  return cd;
}

CurriculumDesign design(const FeatureSet& fs, const CurriculumParams& params) {
  return params.method == DesignMethod::Density ? design_curriculum(fs, params)
                                                : design_curriculum_kmeans(fs, params);
}

// ---------------------------------------------------------------------------
// JSON

namespace {

// Shortest text that parses back to the same value.
template <typename T>
std::string shortest(T v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string json_string(std::string_view s) { return nlohmann::json(std::string(s)).dump(); }

}  // namespace

std::string serialize_curriculum(const CurriculumDesign& cd) {
  std::string out;
  out += "{\n  \"version\": " + std::to_string(CurriculumDesign::kVersion) + ",\n";
  out += "  \"params\": {\"k_percent\": " + shortest(cd.params.k_percent) +
         ", \"n_subsets\": " + std::to_string(cd.params.n_subsets) +
         ", \"kmeans_max_iters\": " + std::to_string(cd.params.kmeans_max_iters) +
         ", \"seed\": " + std::to_string(cd.params.seed) +
         ", \"method\": " + json_string(to_string(cd.params.method)) + "},\n";
  out += "  \"categories\": [";
  for (std::size_t c = 0; c < cd.categories.size(); ++c) {
    const auto& cat = cd.categories[c];
    out += c == 0 ? "\n" : ",\n";
    out += "    {\"category_id\": " + std::to_string(cat.category_id) +
           ", \"center_id\": " + json_string(cat.center_id) + ", \"d_c\": " + shortest(cat.d_c) +
           ", \"samples\": [";
    for (std::size_t i = 0; i < cat.samples.size(); ++i) {
      const auto& s = cat.samples[i];
      out += i == 0 ? "\n" : ",\n";
      out += "      {\"id\": " + json_string(s.id) +
             ", \"level\": " + std::to_string(level_index(s.level)) +
             ", \"dist\": " + shortest(s.dist) + "}";
    }
    out += cat.samples.empty() ? "]}" : "\n    ]}";
  }
  out += cd.categories.empty() ? "]\n}\n" : "\n  ]\n}\n";
  return out;
}

CurriculumDesign parse_curriculum(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("curriculum is not valid JSON: ") + e.what());
  }
  try {
    const auto version = j.at("version").get<std::uint32_t>();
    if (version != CurriculumDesign::kVersion) {
      throw FormatError("unsupported curriculum version " + std::to_string(version));
    }
    CurriculumDesign cd;
    const auto& p = j.at("params");
    cd.params.k_percent = p.at("k_percent").get<double>();
    cd.params.n_subsets = p.at("n_subsets").get<std::uint32_t>();
    if (cd.params.n_subsets < 1 || cd.params.n_subsets > kMaxSubsets) {
      throw FormatError("n_subsets must lie in [1, 3]");
    }
    cd.params.kmeans_max_iters = p.at("kmeans_max_iters").get<std::uint32_t>();
    cd.params.seed = p.at("seed").get<std::uint64_t>();
    cd.params.method = parse_design_method(p.at("method").get<std::string>());
    for (const auto& cj : j.at("categories")) {
      CategoryCurriculum cat;
      cat.category_id = cj.at("category_id").get<CategoryId>();
      cat.center_id = cj.at("center_id").get<std::string>();
      cat.d_c = cj.at("d_c").get<float>();
      std::size_t row = 0;
      for (const auto& sj : cj.at("samples")) {
        CurriculumSample s;
        s.id = sj.at("id").get<std::string>();
        const auto level = sj.at("level").get<std::uint32_t>();
        if (level >= cd.params.n_subsets) throw FormatError("subset level out of range", row);
        s.level = static_cast<SubsetLevel>(level);
        s.dist = sj.at("dist").get<float>();
        cat.samples.push_back(std::move(s));
        ++row;
      }
      cd.categories.push_back(std::move(cat));
    }
    return cd;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed curriculum: ") + e.what());
  }
}

void save_curriculum(const CurriculumDesign& cd, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_curriculum(cd));
}

CurriculumDesign load_curriculum(const std::filesystem::path& path) {
  return parse_curriculum(read_file(path));
}

std::vector<SubsetLevel> bind_levels(const CurriculumDesign& cd, const FeatureSet& fs) {
  std::unordered_map<std::string_view, std::size_t> index;
  index.reserve(fs.size());
  for (std::size_t i = 0; i < fs.size(); ++i) index.emplace(fs.sample_ids()[i], i);

  std::vector<SubsetLevel> levels(fs.size());
  std::vector<bool> seen(fs.size(), false);
  for (const auto& cat : cd.categories) {
    for (const auto& s : cat.samples) {
      const auto it = index.find(s.id);
      if (it == index.end()) {
        throw InvalidArgument("curriculum sample id '" + s.id + "' is not in the feature set");
      }
      if (fs.labels()[it->second] != cat.category_id) {
        throw InvalidArgument("curriculum places '" + s.id + "' in category " +
                              std::to_string(cat.category_id) + " but its label differs");
      }
      if (seen[it->second]) throw InvalidArgument("sample '" + s.id + "' appears twice");
      seen[it->second] = true;
      levels[it->second] = s.level;
    }
  }
  for (std::size_t i = 0; i < fs.size(); ++i) {
    if (!seen[i]) {
      throw InvalidArgument("curriculum does not cover sample '" + fs.sample_ids()[i] + "'");
    }
  }
  return levels;
}

}  // namespace dcurr
