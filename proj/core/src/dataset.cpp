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

#include "dcurr/dataset.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "dcurr/errors.hpp"
#include "dcurr/random.hpp"

namespace dcurr {

static_assert(std::endian::native == std::endian::little,
              "binary feature format assumes a little-endian host");

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<float> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw InvalidArgument("feature buffer size does not match rows * cols");
  }
}

FeatureMatrix FeatureMatrix::gather(std::span<const std::size_t> indices) const {
  FeatureMatrix out(indices.size(), cols_);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto src = row(indices[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

namespace {

void validate(const FeatureMatrix& features, const std::vector<CategoryId>& labels,
              const std::vector<std::string>& ids,
              const std::vector<std::string>& names,
              const std::vector<CategoryId>& empty) {
  const std::size_t n = labels.size();
  if (n == 0) throw InvalidArgument("feature set must contain at least one sample");
  if (features.rows() != n || ids.size() != n) {
    throw InvalidArgument("features, labels and sample ids differ in length");
  }
  if (features.cols() == 0) throw InvalidArgument("feature dimension must be >= 1");
  if (names.empty()) throw InvalidArgument("feature set needs at least one category");

  std::vector<std::size_t> counts(names.size(), 0);
  std::unordered_set<std::string_view> seen;
  seen.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] >= names.size()) {
      throw FormatError("label " + std::to_string(labels[i]) + " outside [0, " +
                            std::to_string(names.size()) + ")",
                        i);
    }
    ++counts[labels[i]];
    if (!seen.insert(ids[i]).second) {
      throw FormatError("duplicate sample id '" + ids[i] + "'", i);
    }
    for (float v : features.row(i)) {
      if (!std::isfinite(v)) throw FormatError("non-finite feature value", i);
    }
  }
  std::vector<bool> flagged(names.size(), false);
  for (CategoryId c : empty) {
    if (c >= names.size()) throw InvalidArgument("empty-category flag out of range");
    flagged[c] = true;
  }
  for (std::size_t c = 0; c < names.size(); ++c) {
    if (counts[c] == 0 && !flagged[c]) {
      throw InvalidArgument("category '" + names[c] +
                            "' has no samples and is not flagged empty");
    }
    if (counts[c] != 0 && flagged[c]) {
      throw InvalidArgument("category '" + names[c] + "' is flagged empty but has samples");
    }
  }
}

}  // namespace

FeatureSet::FeatureSet(FeatureMatrix features, std::vector<CategoryId> labels,
                       std::vector<std::string> sample_ids,
                       std::vector<std::string> category_names,
                       std::vector<CategoryId> empty_categories)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      sample_ids_(std::move(sample_ids)),
      category_names_(std::move(category_names)),
      empty_categories_(std::move(empty_categories)) {
  std::sort(empty_categories_.begin(), empty_categories_.end());
  empty_categories_.erase(std::unique(empty_categories_.begin(), empty_categories_.end()),
                          empty_categories_.end());
  validate(features_, labels_, sample_ids_, category_names_, empty_categories_);
}

FeatureSet FeatureSet::with_derived_empty_flags(FeatureMatrix features,
                                                std::vector<CategoryId> labels,
                                                std::vector<std::string> sample_ids,
                                                std::vector<std::string> category_names) {
  std::vector<bool> used(category_names.size(), false);
  for (CategoryId l : labels) {
    if (l < used.size()) used[l] = true;
  }
  std::vector<CategoryId> empty;
  for (std::size_t c = 0; c < used.size(); ++c) {
    if (!used[c]) empty.push_back(static_cast<CategoryId>(c));
  }
  return FeatureSet(std::move(features), std::move(labels), std::move(sample_ids),
                    std::move(category_names), std::move(empty));
}

std::vector<std::vector<std::size_t>> FeatureSet::indices_by_category() const {
  std::vector<std::vector<std::size_t>> out(num_categories());
  for (std::size_t i = 0; i < labels_.size(); ++i) out[labels_[i]].push_back(i);
  return out;
}

std::string_view to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::Clean: return "clean";
    case NoiseKind::CrossLabel: return "cross-label";
    case NoiseKind::UniformNoise: return "uniform-noise";
  }
  return "unknown";
}

NoiseKind parse_noise_kind(std::string_view text) {
  if (text == "clean") return NoiseKind::Clean;
  if (text == "cross-label") return NoiseKind::CrossLabel;
  if (text == "uniform-noise") return NoiseKind::UniformNoise;
  throw FormatError("unknown noise kind '" + std::string(text) + "'");
}

FileFormat parse_file_format(std::string_view text) {
  if (text == "binary" || text == "crfs") return FileFormat::Binary;
  if (text == "csv") return FileFormat::Csv;
  throw InvalidArgument("unknown feature format '" + std::string(text) + "'");
}

FileFormat format_from_extension(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? FileFormat::Csv : FileFormat::Binary;
}

// ---------------------------------------------------------------------------
// Binary format

namespace {

constexpr char kMagic[4] = {'C', 'R', 'F', 'S'};
constexpr std::uint32_t kBinaryVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

void put_string(std::string& out, std::string_view s) {
  if (s.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw InvalidArgument("string too long for binary format");
  }
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.append(s);
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  void need(std::size_t n, std::optional<std::size_t> row) const {
    if (bytes_.size() - pos_ < n) throw FormatError("unexpected end of file", row);
  }
  std::uint32_t u32(std::optional<std::size_t> row = std::nullopt) {
    need(4, row);
    std::uint32_t v;
    std::memcpy(&v, bytes_.data() + pos_, 4);
    pos_ += 4;
    return v;
  }
  float f32(std::optional<std::size_t> row) {
    need(4, row);
    float v;
    std::memcpy(&v, bytes_.data() + pos_, 4);
    pos_ += 4;
    return v;
  }
  std::string str(std::optional<std::size_t> row = std::nullopt) {
    const std::uint32_t len = u32(row);
    need(len, row);
    std::string s(bytes_.substr(pos_, len));
    pos_ += len;
    return s;
  }
  std::string_view raw(std::size_t n) {
    need(n, std::nullopt);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::string serialize_binary(const FeatureSet& fs) {
  std::string out;
  out.reserve(20 + fs.size() * (16 + 4 * fs.dim()));
  out.append(kMagic, 4);
  put_u32(out, kBinaryVersion);
  put_u32(out, static_cast<std::uint32_t>(fs.size()));
  put_u32(out, static_cast<std::uint32_t>(fs.dim()));
  put_u32(out, static_cast<std::uint32_t>(fs.num_categories()));
  for (const auto& name : fs.category_names()) put_string(out, name);
  for (std::size_t i = 0; i < fs.size(); ++i) {
    put_string(out, fs.sample_ids()[i]);
    put_u32(out, fs.labels()[i]);
    const auto row = fs.features().row(i);
    out.append(reinterpret_cast<const char*>(row.data()), row.size() * sizeof(float));
  }
  return out;
}

FeatureSet parse_binary(std::string_view bytes) {
  Reader in(bytes);
  if (bytes.size() < 4 || std::memcmp(in.raw(4).data(), kMagic, 4) != 0) {
    throw FormatError("bad magic: not a CRFS feature file");
  }
  const std::uint32_t version = in.u32();
  if (version != kBinaryVersion) {
    throw FormatError("unsupported CRFS version " + std::to_string(version));
  }
  const std::uint32_t n = in.u32();
  const std::uint32_t d = in.u32();
  const std::uint32_t c = in.u32();
  if (n == 0 || d == 0 || c == 0) throw FormatError("header declares an empty dimension");

  std::vector<std::string> names;
  names.reserve(c);
  for (std::uint32_t k = 0; k < c; ++k) names.push_back(in.str());

  std::vector<float> data;
  data.reserve(static_cast<std::size_t>(n) * d);
  std::vector<CategoryId> labels;
  std::vector<std::string> ids;
  labels.reserve(n);
  ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back(in.str(i));
    labels.push_back(in.u32(i));
    for (std::uint32_t k = 0; k < d; ++k) {
      const float v = in.f32(i);
      if (!std::isfinite(v)) throw FormatError("non-finite feature value", i);
      data.push_back(v);
    }
  }
  if (!in.at_end()) throw FormatError("trailing bytes after the last record");
  return FeatureSet::with_derived_empty_flags(FeatureMatrix(n, d, std::move(data)),
                                              std::move(labels), std::move(ids),
                                              std::move(names));
}

// ---------------------------------------------------------------------------
// CSV format. An optional first line `# categories: a,b,c` carries category
// names (and so empty trailing categories); without it names are the ids.

constexpr std::string_view kCategoriesPrefix = "# categories:";

std::string format_float(float v) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(v));
  return std::string(buf, static_cast<std::size_t>(len));
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string serialize_csv(const FeatureSet& fs) {
  std::string out;
  out += kCategoriesPrefix;
  for (std::size_t c = 0; c < fs.num_categories(); ++c) {
    const auto& name = fs.category_names()[c];
    if (name.find_first_of(",\r\n") != std::string::npos) {
      throw InvalidArgument("category name '" + name + "' cannot be written to CSV");
    }
    out += c == 0 ? " " : ",";
    out += name;
  }
  out += "\nid,label";
  for (std::size_t k = 0; k < fs.dim(); ++k) out += ",f" + std::to_string(k);
  out += '\n';
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const auto& id = fs.sample_ids()[i];
    if (id.find_first_of(",\r\n") != std::string::npos) {
      throw InvalidArgument("sample id '" + id + "' cannot be written to CSV");
    }
    out += id;
    out += ',';
    out += std::to_string(fs.labels()[i]);
    for (float v : fs.features().row(i)) {
      out += ',';
      out += format_float(v);
    }
    out += '\n';
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

float parse_float_cell(std::string_view cell, std::size_t row) {
  // strtof accepts nan/inf spellings so they can be reported as non-finite.
  std::string tmp(cell);
  char* end = nullptr;
  const float v = std::strtof(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size()) {
    throw FormatError("malformed feature value '" + tmp + "'", row);
  }
  if (!std::isfinite(v)) throw FormatError("non-finite feature value '" + tmp + "'", row);
  return v;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

FeatureSet parse_csv(std::string_view text) {
  auto lines = lines_of(text);
  std::size_t li = 0;
  std::optional<std::vector<std::string>> names;
  if (li < lines.size() && lines[li].starts_with(kCategoriesPrefix)) {
    auto rest = lines[li].substr(kCategoriesPrefix.size());
    if (rest.starts_with(' ')) rest.remove_prefix(1);
    names.emplace();
    for (auto n : split(rest, ',')) names->emplace_back(n);
    ++li;
  }
  if (li >= lines.size()) throw FormatError("missing CSV header");
  const auto header = split(lines[li++], ',');
  if (header.size() < 3 || header[0] != "id" || header[1] != "label") {
    throw FormatError("malformed CSV header: expected id,label,f0..");
  }
  const std::size_t d = header.size() - 2;
  for (std::size_t k = 0; k < d; ++k) {
    if (header[k + 2] != "f" + std::to_string(k)) {
      throw FormatError("malformed CSV header: expected column f" + std::to_string(k));
    }
  }

  std::vector<float> data;
  std::vector<CategoryId> labels;
  std::vector<std::string> ids;
  std::size_t row = 0;
  for (; li < lines.size(); ++li) {
    if (lines[li].empty()) continue;
    const auto cells = split(lines[li], ',');
    if (cells.size() != d + 2) {
      throw FormatError("expected " + std::to_string(d + 2) + " columns, found " +
                            std::to_string(cells.size()),
                        row);
    }
    CategoryId label;
    if (!parse_number(cells[1], label)) {
      throw FormatError("malformed label '" + std::string(cells[1]) + "'", row);
    }
    ids.emplace_back(cells[0]);
    labels.push_back(label);
    for (std::size_t k = 0; k < d; ++k) data.push_back(parse_float_cell(cells[k + 2], row));
    ++row;
  }
  if (row == 0) throw FormatError("CSV contains no samples");
  if (!names) {
    const CategoryId max_label = *std::max_element(labels.begin(), labels.end());
    names.emplace();
    for (CategoryId c = 0; c <= max_label; ++c) names->push_back(std::to_string(c));
  }
  return FeatureSet::with_derived_empty_flags(FeatureMatrix(row, d, std::move(data)),
                                              std::move(labels), std::move(ids),
                                              std::move(*names));
}

}  // namespace

std::string serialize_features(const FeatureSet& fs, FileFormat format) {
  return format == FileFormat::Binary ? serialize_binary(fs) : serialize_csv(fs);
}

FeatureSet parse_features(std::string_view bytes, FileFormat format) {
  return format == FileFormat::Binary ? parse_binary(bytes) : parse_csv(bytes);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed for '" + path.string() + "'");
  return std::move(ss).str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move '" + tmp.string() + "' to '" + path.string() + "'");
}

FeatureSet load_features(const std::filesystem::path& path, FileFormat format) {
  return parse_features(read_file(path), format);
}

void save_features(const FeatureSet& fs, const std::filesystem::path& path,
                   FileFormat format) {
  write_file_atomic(path, serialize_features(fs, format));
}

// ---------------------------------------------------------------------------
// Truth CSV

std::string serialize_truth(const SyntheticTruth& truth) {
  std::string out = "id,true_label,noise_kind\n";
  for (std::size_t i = 0; i < truth.size(); ++i) {
    out += truth.sample_ids[i];
    out += ',';
    out += std::to_string(truth.true_labels[i]);
    out += ',';
    out += to_string(truth.noise_kind[i]);
    out += '\n';
  }
  return out;
}

SyntheticTruth parse_truth(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines[0] != "id,true_label,noise_kind") {
    throw FormatError("malformed truth header: expected id,true_label,noise_kind");
  }
  SyntheticTruth truth;
  for (std::size_t li = 1, row = 0; li < lines.size(); ++li) {
    if (lines[li].empty()) continue;
    const auto cells = split(lines[li], ',');
    if (cells.size() != 3) throw FormatError("expected 3 columns", row);
    CategoryId label;
    if (!parse_number(cells[1], label)) throw FormatError("malformed true_label", row);
    truth.sample_ids.emplace_back(cells[0]);
    truth.true_labels.push_back(label);
    truth.noise_kind.push_back(parse_noise_kind(cells[2]));
    ++row;
  }
  return truth;
}

void save_truth(const SyntheticTruth& truth, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_truth(truth));
}

SyntheticTruth load_truth(const std::filesystem::path& path) {
  return parse_truth(read_file(path));
}

// ---------------------------------------------------------------------------
// Synthetic data

namespace {

struct Counts {
  std::uint32_t clean, cross, uniform;
};

Counts noise_counts(const SynthConfig& cfg) {
  const auto pc = static_cast<double>(cfg.per_category);
  auto n_clean = static_cast<std::uint32_t>(std::llround(cfg.clean_frac * pc));
  auto n_cross = static_cast<std::uint32_t>(std::llround(cfg.cross_frac * pc));
  n_clean = std::min(n_clean, cfg.per_category);
  n_cross = std::min(n_cross, cfg.per_category - n_clean);
  return {n_clean, n_cross, cfg.per_category - n_clean - n_cross};
}

void check_config(const SynthConfig& cfg) {
  const double sum = cfg.clean_frac + cfg.cross_frac + cfg.uniform_frac;
  if (cfg.clean_frac < 0 || cfg.cross_frac < 0 || cfg.uniform_frac < 0 ||
      std::abs(sum - 1.0) > 1e-9) {
    throw InvalidArgument("noise fractions must be non-negative and sum to 1");
  }
  if (cfg.categories < 2) throw InvalidArgument("need at least 2 categories");
  if (cfg.per_category < 1) throw InvalidArgument("per_category must be >= 1");
  if (cfg.dim < 1) throw InvalidArgument("dimension must be >= 1");
  if (!(cfg.blob_sigma >= 0) || !std::isfinite(cfg.blob_sigma)) {
    throw InvalidArgument("blob_sigma must be finite and non-negative");
  }
}

std::vector<double> blob_centers(const SynthConfig& cfg) {
  Rng rng(cfg.seed, Stream::SynthCenters);
  std::vector<double> centers(static_cast<std::size_t>(cfg.categories) * cfg.dim);
  for (auto& v : centers) v = rng.normal();
  return centers;
}

std::vector<std::string> category_names(std::uint32_t c) {
  std::vector<std::string> names;
  for (std::uint32_t k = 0; k < c; ++k) names.push_back("cat" + std::to_string(k));
  return names;
}

std::string sample_id(char prefix, std::uint32_t category, std::uint32_t i) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%c%04u_%05u", prefix, category, i);
  return buf;
}

void draw_from_blob(const std::vector<double>& centers, std::uint32_t blob,
                    const SynthConfig& cfg, Rng& rng, std::span<float> out) {
  for (std::uint32_t k = 0; k < cfg.dim; ++k) {
    out[k] = static_cast<float>(centers[blob * cfg.dim + k] + cfg.blob_sigma * rng.normal());
  }
}

}  // namespace

SyntheticData generate_synthetic(const SynthConfig& cfg) {
  check_config(cfg);
  const auto centers = blob_centers(cfg);
  const Counts counts = noise_counts(cfg);

  std::vector<double> lo(cfg.dim, std::numeric_limits<double>::infinity());
  std::vector<double> hi(cfg.dim, -std::numeric_limits<double>::infinity());
  for (std::uint32_t c = 0; c < cfg.categories; ++c) {
    for (std::uint32_t k = 0; k < cfg.dim; ++k) {
      lo[k] = std::min(lo[k], centers[c * cfg.dim + k] - 3.0 * cfg.blob_sigma);
      hi[k] = std::max(hi[k], centers[c * cfg.dim + k] + 3.0 * cfg.blob_sigma);
    }
  }

  const std::size_t n = static_cast<std::size_t>(cfg.categories) * cfg.per_category;
  FeatureMatrix features(n, cfg.dim);
  std::vector<CategoryId> labels(n);
  std::vector<std::string> ids(n);
  SyntheticTruth truth;
  truth.sample_ids.resize(n);
  truth.true_labels.resize(n);
  truth.noise_kind.resize(n);

  Rng rng(cfg.seed, Stream::SynthSamples);
  std::size_t row = 0;
  for (std::uint32_t c = 0; c < cfg.categories; ++c) {
    for (std::uint32_t i = 0; i < cfg.per_category; ++i, ++row) {
      auto out = features.row(row);
      labels[row] = c;
      ids[row] = sample_id('s', c, i);
      truth.sample_ids[row] = ids[row];
      if (i < counts.clean) {
        draw_from_blob(centers, c, cfg, rng, out);
        truth.true_labels[row] = c;
        truth.noise_kind[row] = NoiseKind::Clean;
      } else if (i < counts.clean + counts.cross) {
        auto other = static_cast<std::uint32_t>(rng.below(cfg.categories - 1));
        if (other >= c) ++other;
        draw_from_blob(centers, other, cfg, rng, out);
        truth.true_labels[row] = other;
        truth.noise_kind[row] = NoiseKind::CrossLabel;
      } else {
        for (std::uint32_t k = 0; k < cfg.dim; ++k) {
          out[k] = static_cast<float>(rng.uniform(lo[k], hi[k]));
        }
        // A uniform draw belongs to no category; its reference label is the
        // nearest blob other than the one it is labeled with.
        double best = std::numeric_limits<double>::infinity();
        std::uint32_t nearest = c == 0 ? 1 : 0;
        for (std::uint32_t b = 0; b < cfg.categories; ++b) {
          if (b == c) continue;
          double s = 0.0;
          for (std::uint32_t k = 0; k < cfg.dim; ++k) {
            const double diff = out[k] - centers[b * cfg.dim + k];
            s += diff * diff;
          }
          if (s < best) {
            best = s;
            nearest = b;
          }
        }
        truth.true_labels[row] = nearest;
        truth.noise_kind[row] = NoiseKind::UniformNoise;
      }
    }
  }
  return {FeatureSet(std::move(features), std::move(labels), std::move(ids),
                     category_names(cfg.categories)),
          std::move(truth)};
}

FeatureSet generate_holdout(const SynthConfig& cfg, std::uint32_t per_category) {
  check_config(cfg);
  if (per_category < 1) throw InvalidArgument("holdout per_category must be >= 1");
  const auto centers = blob_centers(cfg);
  const std::size_t n = static_cast<std::size_t>(cfg.categories) * per_category;
  FeatureMatrix features(n, cfg.dim);
  std::vector<CategoryId> labels(n);
  std::vector<std::string> ids(n);
  Rng rng(cfg.seed, Stream::SynthHoldout);
  std::size_t row = 0;
  for (std::uint32_t c = 0; c < cfg.categories; ++c) {
    for (std::uint32_t i = 0; i < per_category; ++i, ++row) {
      draw_from_blob(centers, c, cfg, rng, features.row(row));
      labels[row] = c;
      ids[row] = sample_id('t', c, i);
    }
  }
  return FeatureSet(std::move(features), std::move(labels), std::move(ids),
                    category_names(cfg.categories));
}

}  // namespace dcurr
