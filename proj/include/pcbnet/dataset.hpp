#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <pcbnet/clip.hpp>
#include <pcbnet/errors.hpp>
#include <pcbnet/image.hpp>
#include <pcbnet/rng.hpp>
#include <pcbnet/tensor.hpp>

namespace pcbnet {

enum class Balance : std::uint8_t { balanced, unbalanced };

// Parsed form of the dataset-name mini-language. Counts are totals per class,
// flip copies included; resolution is width x height.
struct DatasetSpec {
  Balance balance = Balance::balanced;
  std::size_t suspicious_count = 0;
  std::size_t normal_count = 0;
  unsigned test_percent = 30;
  std::size_t depth = 10;
  std::size_t width = 80;
  std::size_t height = 60;
  bool flip = false;

  bool operator==(const DatasetSpec&) const = default;
};

inline constexpr unsigned kDefaultTestPercent = 30;
inline constexpr std::size_t kDefaultDepth = 10;
inline constexpr std::size_t kDefaultWidth = 80;
inline constexpr std::size_t kDefaultHeight = 60;

// True when every axis value appears in the published grid; free values are
// legal everywhere else but get a warning from the CLI.
inline bool in_paper_grid(const DatasetSpec& s) {
  const bool res_ok = (s.width == 160 && s.height == 120) || (s.width == 80 && s.height == 60) ||
                      (s.width == 40 && s.height == 30) || (s.width == 32 && s.height == 24);
  const bool depth_ok = s.depth == 10 || s.depth == 30 || s.depth == 90;
  const bool test_ok = s.test_percent == 20 || s.test_percent == 30 || s.test_percent == 40;
  const bool ratio_ok = s.balance == Balance::balanced
                            ? s.suspicious_count == s.normal_count
                            : s.normal_count == 2 * s.suspicious_count;
  return res_ok && depth_ok && test_ok && ratio_ok;
}

enum class NameStyle : std::uint8_t {
  canonical,    // SBT_<balance>_<ratio>_<N>t_<D>f_<W>x<H>[_flip]
  row_label,    // canonical minus the resolution token (table-row form)
  short_label,  // bal|unb abbreviation, no SBT prefix, no resolution
};

namespace detail {

inline bool parse_size(std::string_view text, std::size_t& out) {
  if (text.empty()) {
    return false;
  }
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

// Matches "<digits><suffix>", e.g. "30t" or "10f".
inline bool match_suffixed(std::string_view token, char suffix, std::size_t& out) {
  if (token.size() < 2 || token.back() != suffix) {
    return false;
  }
  return parse_size(token.substr(0, token.size() - 1), out);
}

inline bool match_resolution(std::string_view token, std::size_t& w, std::size_t& h) {
  const std::size_t x = token.find('x');
  if (x == std::string_view::npos || x == 0 || x + 1 >= token.size()) {
    return false;
  }
  return parse_size(token.substr(0, x), w) && parse_size(token.substr(x + 1), h);
}

[[noreturn]] inline void bad_token(std::string_view name, std::string_view token,
                                   const std::string& why) {
  throw ParseError("dataset name \"" + std::string(name) + "\": token \"" + std::string(token) +
                   "\" " + why);
}

}  // namespace detail

inline DatasetSpec parse_dataset_name(std::string_view name) {
  std::vector<std::string_view> tokens;
  for (std::size_t pos = 0; pos <= name.size();) {
    const std::size_t next = name.find('_', pos);
    const std::size_t end = next == std::string_view::npos ? name.size() : next;
    tokens.push_back(name.substr(pos, end - pos));
    pos = end + 1;
    if (next == std::string_view::npos) {
      break;
    }
  }
  std::size_t i = 0;
  if (i < tokens.size() && tokens[i] == "SBT") {
    ++i;
  }
  if (i >= tokens.size()) {
    throw ParseError("dataset name \"" + std::string(name) + "\" is missing the balance token");
  }

  DatasetSpec spec;
  const std::string_view balance = tokens[i];
  if (balance == "balanced" || balance == "bal") {
    spec.balance = Balance::balanced;
  } else if (balance == "unbalanced" || balance == "unb") {
    spec.balance = Balance::unbalanced;
  } else {
    detail::bad_token(name, balance, "is not a balance (balanced/unbalanced)");
  }
  ++i;

  if (i >= tokens.size()) {
    throw ParseError("dataset name \"" + std::string(name) + "\" is missing the ratio token");
  }
  const std::string_view ratio = tokens[i];
  std::size_t total = 0;
  const std::size_t s_pos = ratio.find('s');
  if (detail::parse_size(ratio, total)) {
    if (spec.balance == Balance::unbalanced) {
      detail::bad_token(name, ratio, "must name both classes (<s>s<n>n) for unbalanced sets");
    }
    if (total == 0 || total % 2 != 0) {
      detail::bad_token(name, ratio, "must be a positive even total");
    }
    spec.suspicious_count = total / 2;
    spec.normal_count = total / 2;
  } else if (s_pos != std::string_view::npos && ratio.size() > s_pos + 1 && ratio.back() == 'n') {
    std::size_t s = 0;
    std::size_t n = 0;
    if (!detail::parse_size(ratio.substr(0, s_pos), s) ||
        !detail::parse_size(ratio.substr(s_pos + 1, ratio.size() - s_pos - 2), n) || s == 0 ||
        n == 0) {
      detail::bad_token(name, ratio, "is not a <s>s<n>n class ratio");
    }
    if (spec.balance == Balance::balanced && s != n) {
      detail::bad_token(name, ratio, "names unequal classes for a balanced set");
    }
    if (spec.balance == Balance::unbalanced && n != 2 * s) {
      detail::bad_token(name, ratio, "violates the 1:2 suspicious-to-normal ratio");
    }
    spec.suspicious_count = s;
    spec.normal_count = n;
  } else {
    detail::bad_token(name, ratio, "is not a sample count or <s>s<n>n ratio");
  }
  ++i;

  std::size_t value = 0;
  if (i < tokens.size() && detail::match_suffixed(tokens[i], 't', value)) {
    if (value == 0 || value >= 100) {
      detail::bad_token(name, tokens[i], "must be a test percentage in (0, 100)");
    }
    spec.test_percent = static_cast<unsigned>(value);
    ++i;
  }
  if (i < tokens.size() && detail::match_suffixed(tokens[i], 'f', value)) {
    if (value == 0) {
      detail::bad_token(name, tokens[i], "must be a positive frame depth");
    }
    spec.depth = value;
    ++i;
  }
  std::size_t w = 0;
  std::size_t h = 0;
  if (i < tokens.size() && detail::match_resolution(tokens[i], w, h)) {
    if (w == 0 || h == 0) {
      detail::bad_token(name, tokens[i], "must be a positive WxH resolution");
    }
    spec.width = w;
    spec.height = h;
    ++i;
  }
  if (i < tokens.size() && tokens[i] == "flip") {
    spec.flip = true;
    ++i;
  }
  if (i < tokens.size()) {
    detail::bad_token(name, tokens[i], "is unexpected here");
  }
  return spec;
}

inline std::string format_dataset_name(const DatasetSpec& spec,
                                       NameStyle style = NameStyle::canonical) {
  std::string out;
  if (style != NameStyle::short_label) {
    out += "SBT_";
  }
  if (spec.balance == Balance::balanced) {
    out += style == NameStyle::short_label ? "bal" : "balanced";
  } else {
    out += style == NameStyle::short_label ? "unb" : "unbalanced";
  }
  out += '_';
  if (spec.balance == Balance::balanced && spec.suspicious_count == spec.normal_count) {
    out += std::to_string(spec.suspicious_count + spec.normal_count);
  } else {
    out += std::to_string(spec.suspicious_count) + "s" + std::to_string(spec.normal_count) + "n";
  }
  out += '_' + std::to_string(spec.test_percent) + "t_" + std::to_string(spec.depth) + "f";
  if (style == NameStyle::canonical) {
    out += '_' + std::to_string(spec.width) + "x" + std::to_string(spec.height);
  }
  if (spec.flip) {
    out += "_flip";
  }
  return out;
}

// One planned dataset entry before any file exists: which pool source it draws
// from (1-based) and whether the mirrored variant is used.
struct PlannedEntry {
  int label = 0;  // 1 = Suspicious
  std::size_t source_index = 0;
  bool flipped = false;

  bool operator==(const PlannedEntry&) const = default;
};

namespace detail {

inline void plan_class(int label, std::size_t requested, std::size_t pool, bool flip_primary,
                       const char* pool_name, std::vector<PlannedEntry>& out) {
  if (requested > 2 * pool) {
    throw InsufficientSamplesError(pool_name, requested, 2 * pool);
  }
  const std::size_t primary = std::min(requested, pool);
  for (std::size_t idx = 1; idx <= primary; ++idx) {
    out.push_back({label, idx, flip_primary});
  }
  for (std::size_t idx = 1; idx <= requested - primary; ++idx) {
    out.push_back({label, idx, !flip_primary});
  }
}

}  // namespace detail

// Deterministic composition by ascending source index, no sampling. The
// primary variant is the original (or the mirror, for *_flip sets); demand
// beyond the pool size wraps into the other variant, which is how the
// unbalanced 60s120n set gains its mirrored normal half.
inline std::vector<PlannedEntry> plan_composition(const DatasetSpec& spec,
                                                  std::size_t suspicious_pool,
                                                  std::size_t normal_pool) {
  if (spec.suspicious_count == 0 || spec.normal_count == 0) {
    throw ValidationError("dataset spec requests an empty class");
  }
  std::vector<PlannedEntry> out;
  out.reserve(spec.suspicious_count + spec.normal_count);
  detail::plan_class(1, spec.suspicious_count, suspicious_pool, spec.flip, "suspicious pool", out);
  detail::plan_class(0, spec.normal_count, normal_pool, spec.flip, "normal pool", out);
  return out;
}

enum class Split : std::uint8_t { train, test };

struct IndexEntry {
  std::string clip_path;
  int label = 0;
  std::string source_id;
  bool flipped = false;
  Split split = Split::train;
  int fold = -1;  // -1 when folds are disabled

  bool operator==(const IndexEntry&) const = default;
};

struct DatasetIndex {
  std::optional<DatasetSpec> spec;
  std::vector<IndexEntry> entries;
};

// Naming convention for materialized clips relative to the dataset root.
inline std::string clip_relative_path(const std::string& source_id, bool flipped) {
  return "clips/" + source_id + (flipped ? "_flip" : "") + ".clip";
}

// Index assembly from ordered pools of source ids (pool position = source
// index). Entries carry the conventional clip paths.
inline DatasetIndex assemble_dataset(const DatasetSpec& spec,
                                     const std::vector<std::string>& suspicious_ids,
                                     const std::vector<std::string>& normal_ids) {
  DatasetIndex index;
  index.spec = spec;
  for (const PlannedEntry& p :
       plan_composition(spec, suspicious_ids.size(), normal_ids.size())) {
    const std::vector<std::string>& pool = p.label == 1 ? suspicious_ids : normal_ids;
    IndexEntry e;
    e.source_id = pool[p.source_index - 1];
    e.flipped = p.flipped;
    e.label = p.label;
    e.clip_path = clip_relative_path(e.source_id, e.flipped);
    index.entries.push_back(std::move(e));
  }
  return index;
}

namespace detail {

// Entries sharing (label, source_id) move between train/test and folds as one
// unit, so a mirrored copy can never leak across the boundary from its
// original.
struct SourceUnit {
  std::string source_id;
  std::vector<std::size_t> entry_indices;
};

inline std::vector<SourceUnit> class_units(const DatasetIndex& index, int label) {
  std::map<std::string, std::vector<std::size_t>> grouped;
  for (std::size_t i = 0; i < index.entries.size(); ++i) {
    if (index.entries[i].label == label) {
      grouped[index.entries[i].source_id].push_back(i);
    }
  }
  std::vector<SourceUnit> units;
  units.reserve(grouped.size());
  for (auto& [id, indices] : grouped) {
    units.push_back({id, std::move(indices)});
  }
  return units;  // sorted by source_id via the map
}

inline std::vector<int> present_labels(const DatasetIndex& index) {
  std::vector<int> labels;
  for (const IndexEntry& e : index.entries) {
    if (std::find(labels.begin(), labels.end(), e.label) == labels.end()) {
      labels.push_back(e.label);
    }
  }
  std::sort(labels.begin(), labels.end());
  return labels;
}

}  // namespace detail

// Stratified train/test assignment: each class contributes round(fraction *
// class_count) test entries, drawn as whole source units in seeded shuffle
// order.
inline DatasetIndex split_train_test(DatasetIndex index, double test_fraction,
                                     std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test fraction must lie in (0, 1)");
  }
  for (const int label : detail::present_labels(index)) {
    std::vector<detail::SourceUnit> units = detail::class_units(index, label);
    std::size_t class_count = 0;
    for (const auto& u : units) {
      class_count += u.entry_indices.size();
    }
    const auto target = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(class_count)));
    if (target == 0) {
      throw ValidationError("class " + std::to_string(label) +
                            " would have zero test entries at fraction " +
                            std::to_string(test_fraction));
    }
    if (target >= class_count) {
      throw ValidationError("class " + std::to_string(label) +
                            " would have zero train entries at fraction " +
                            std::to_string(test_fraction));
    }
    Rng rng(seed, static_cast<std::uint64_t>(label));
    rng.shuffle(units.begin(), units.end());
    std::size_t taken = 0;
    for (const auto& unit : units) {
      const Split side = taken < target ? Split::test : Split::train;
      if (side == Split::test) {
        taken += unit.entry_indices.size();
      }
      for (const std::size_t i : unit.entry_indices) {
        index.entries[i].split = side;
      }
    }
  }
  return index;
}

// Stratified k-fold partition over source units; each unit goes to the fold
// currently holding the fewest entries of its class.
inline DatasetIndex make_folds(DatasetIndex index, std::size_t k, std::uint64_t seed) {
  if (k < 2) {
    throw ConfigError("fold count must be at least 2");
  }
  for (const int label : detail::present_labels(index)) {
    std::vector<detail::SourceUnit> units = detail::class_units(index, label);
    if (units.size() < k) {
      throw ValidationError("class " + std::to_string(label) + " has " +
                            std::to_string(units.size()) + " sources, fewer than " +
                            std::to_string(k) + " folds");
    }
    Rng rng(seed, 16 + static_cast<std::uint64_t>(label));
    rng.shuffle(units.begin(), units.end());
    std::vector<std::size_t> fold_load(k, 0);
    for (const auto& unit : units) {
      const std::size_t fold =
          std::min_element(fold_load.begin(), fold_load.end()) - fold_load.begin();
      fold_load[fold] += unit.entry_indices.size();
      for (const std::size_t i : unit.entry_indices) {
        index.entries[i].fold = static_cast<int>(fold);
      }
    }
  }
  return index;
}

inline constexpr std::string_view kIndexCsvHeader = "clip_path,label,source_id,flipped,split,fold";

inline void write_index(const std::filesystem::path& path, const DatasetIndex& index) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open index file for writing: " + path.string());
  }
  out << kIndexCsvHeader << '\n';
  for (const IndexEntry& e : index.entries) {
    if (e.clip_path.find(',') != std::string::npos ||
        e.source_id.find(',') != std::string::npos) {
      throw ValidationError("index fields must not contain commas: " + e.clip_path);
    }
    out << e.clip_path << ',' << e.label << ',' << e.source_id << ',' << (e.flipped ? 1 : 0)
        << ',' << (e.split == Split::test ? "test" : "train") << ',';
    if (e.fold >= 0) {
      out << e.fold;
    }
    out << '\n';
  }
  if (!out) {
    throw IoError("failed writing index file: " + path.string());
  }
}

inline DatasetIndex read_index(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open index file: " + path.string());
  }
  std::string line;
  if (!std::getline(in, line) || line != kIndexCsvHeader) {
    throw ParseError("index file " + path.string() + " must start with header \"" +
                     std::string(kIndexCsvHeader) + "\"");
  }
  DatasetIndex index;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = line.find(',', pos);
      fields.push_back(line.substr(pos, comma == std::string::npos ? std::string::npos
                                                                   : comma - pos));
      if (comma == std::string::npos) {
        break;
      }
      pos = comma + 1;
    }
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (fields.size() != 6) {
      throw ParseError(where + ": expected 6 CSV fields, got " + std::to_string(fields.size()));
    }
    IndexEntry e;
    e.clip_path = fields[0];
    if (fields[1] != "0" && fields[1] != "1") {
      throw ParseError(where + ": label must be 0 or 1");
    }
    e.label = fields[1] == "1" ? 1 : 0;
    e.source_id = fields[2];
    if (fields[3] != "0" && fields[3] != "1") {
      throw ParseError(where + ": flipped must be 0 or 1");
    }
    e.flipped = fields[3] == "1";
    if (fields[4] == "train") {
      e.split = Split::train;
    } else if (fields[4] == "test") {
      e.split = Split::test;
    } else {
      throw ParseError(where + ": split must be train or test");
    }
    if (fields[5].empty()) {
      e.fold = -1;
    } else {
      std::size_t fold = 0;
      if (!detail::parse_size(fields[5], fold)) {
        throw ParseError(where + ": fold must be empty or a non-negative integer");
      }
      e.fold = static_cast<int>(fold);
    }
    index.entries.push_back(std::move(e));
  }
  return index;
}

// A dataset directory loaded into memory: frames[i] belongs to entries[i].
struct LoadedDataset {
  DatasetIndex index;
  std::vector<Tensorf> volumes;
};

inline LoadedDataset load_dataset(const std::filesystem::path& dir) {
  LoadedDataset data;
  data.index = read_index(dir / "index.csv");
  data.volumes.reserve(data.index.entries.size());
  for (const IndexEntry& e : data.index.entries) {
    data.volumes.push_back(read_clip(dir / e.clip_path));
  }
  if (!data.volumes.empty()) {
    const auto& dims = data.volumes.front().dims();
    for (std::size_t i = 1; i < data.volumes.size(); ++i) {
      if (data.volumes[i].dims() != dims) {
        throw ShapeError("clip " + data.index.entries[i].clip_path + " has dims " +
                         dims_to_string(data.volumes[i].dims()) + ", dataset uses " +
                         dims_to_string(dims));
      }
    }
  }
  return data;
}

namespace detail {

inline std::vector<std::pair<std::string, std::filesystem::path>> list_clip_pool(
    const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw IoError("pool directory does not exist: " + dir.string());
  }
  std::vector<std::pair<std::string, std::filesystem::path>> pool;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".clip") {
      pool.emplace_back(entry.path().stem().string(), entry.path());
    }
  }
  std::sort(pool.begin(), pool.end());
  return pool;
}

inline Tensorf conform_volume(const Tensorf& source, const DatasetSpec& spec, bool loop_pad) {
  Tensorf sampled = temporal_sample(source, spec.depth, loop_pad);
  if (sampled.dim(1) == spec.height && sampled.dim(2) == spec.width) {
    return sampled;
  }
  Tensorf out({spec.depth, spec.height, spec.width});
  const std::size_t src_plane = sampled.dim(1) * sampled.dim(2);
  for (std::size_t d = 0; d < spec.depth; ++d) {
    Tensorf frame = Tensorf::from_data(
        {sampled.dim(1), sampled.dim(2)},
        std::vector<float>(sampled.data() + d * src_plane,
                           sampled.data() + (d + 1) * src_plane));
    const Tensorf resized = resize_bilinear(frame, spec.width, spec.height);
    std::copy(resized.data(), resized.data() + resized.element_count(),
              out.data() + d * spec.height * spec.width);
  }
  return out;
}

}  // namespace detail

// Materializes a dataset directory: conforms every planned source volume to
// the spec (temporal sampling, then resize, then optional mirror), writes
// clips/ and index.csv with a seeded stratified split.
inline DatasetIndex build_dataset_files(const DatasetSpec& spec,
                                        const std::filesystem::path& suspicious_dir,
                                        const std::filesystem::path& normal_dir,
                                        const std::filesystem::path& out_dir, bool loop_pad,
                                        std::uint64_t split_seed) {
  const auto suspicious = detail::list_clip_pool(suspicious_dir);
  const auto normal = detail::list_clip_pool(normal_dir);
  std::vector<std::string> suspicious_ids;
  std::vector<std::string> normal_ids;
  for (const auto& [id, path] : suspicious) {
    suspicious_ids.push_back(id);
  }
  for (const auto& [id, path] : normal) {
    normal_ids.push_back(id);
  }
  DatasetIndex index = assemble_dataset(spec, suspicious_ids, normal_ids);
  index = split_train_test(index, spec.test_percent / 100.0, split_seed);

  std::filesystem::create_directories(out_dir / "clips");
  for (const IndexEntry& e : index.entries) {
    const auto& pool = e.label == 1 ? suspicious : normal;
    const auto source = std::find_if(pool.begin(), pool.end(),
                                     [&](const auto& p) { return p.first == e.source_id; });
    Clip clip;
    clip.frames = detail::conform_volume(read_clip(source->second), spec, loop_pad);
    clip.label = e.label;
    clip.source_id = e.source_id;
    if (e.flipped) {
      clip = flip_horizontal(clip);
    }
    write_clip(out_dir / e.clip_path, clip.frames);
  }
  write_index(out_dir / "index.csv", index);
  return index;
}

}  // namespace pcbnet
