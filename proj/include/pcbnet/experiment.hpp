#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include <pcbnet/dataset.hpp>
#include <pcbnet/errors.hpp>
#include <pcbnet/network.hpp>
#include <pcbnet/rng.hpp>

namespace pcbnet {

// Repeated-run campaigns: each run re-splits (or re-folds) the dataset with
// its own derived seed, trains a fresh network, and contributes one
// EvalResult. Aggregates are always recomputable from the per-run entries.

struct ExperimentSpec {
  std::string dataset_name;  // canonical grammar name; locates the dataset directory
  std::string label;         // table-row display form of the same name
  std::size_t runs = 30;
  std::size_t folds = 0;  // 0 = plain stratified split
  std::size_t epochs = 100;
  unsigned test_percent = kDefaultTestPercent;  // used when folds == 0
  std::size_t batch_size = 8;
  double learning_rate = 1e-4;
  std::uint64_t seed_base = 0;

  friend bool operator==(const ExperimentSpec&, const ExperimentSpec&) = default;
};

inline void validate_experiment_spec(const ExperimentSpec& spec) {
  if (spec.dataset_name.empty()) {
    throw ConfigError("experiment needs a dataset name");
  }
  if (spec.runs == 0) {
    throw ConfigError("experiment needs at least one run");
  }
  if (spec.folds == 1) {
    throw ConfigError("fold count must be 0 (plain split) or at least 2");
  }
  if (spec.epochs == 0) {
    throw ConfigError("experiment needs at least one epoch");
  }
  if (spec.folds == 0 && !(spec.test_percent > 0 && spec.test_percent < 100)) {
    throw ConfigError("test percent must lie in (0, 100)");
  }
  if (spec.batch_size == 0) {
    throw ConfigError("batch size must be positive");
  }
  if (!(spec.learning_rate >= 0.0) || !std::isfinite(spec.learning_rate)) {
    throw ConfigError("learning rate must be finite and non-negative");
  }
}

struct RunResult {
  std::size_t run_index = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  double final_loss = 0.0;  // mean last-epoch training loss
  EvalResult eval;
  double wall_seconds = 0.0;  // in-memory only; reports omit timing for byte-stable output

  friend bool operator==(const RunResult& a, const RunResult& b) {
    return a.run_index == b.run_index && a.seed == b.seed && a.failed == b.failed &&
           a.error == b.error && a.final_loss == b.final_loss && a.eval == b.eval;
  }
};

struct RunReport {
  ExperimentSpec spec;
  std::vector<RunResult> runs;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  double best_accuracy = 0.0;

  friend bool operator==(const RunReport&, const RunReport&) = default;
};

// Arithmetic mean and sample (n-1) standard deviation; a single value has
// deviation zero by convention.
inline std::pair<double, double> aggregate_stats(const std::vector<double>& values) {
  if (values.empty()) {
    throw ValidationError("cannot aggregate an empty sequence");
  }
  double sum = 0.0;
  for (const double v : values) {
    sum += v;
  }
  const double mean = sum / static_cast<double>(values.size());
  if (values.size() == 1) {
    return {mean, 0.0};
  }
  double sq = 0.0;
  for (const double v : values) {
    sq += (v - mean) * (v - mean);
  }
  return {mean, std::sqrt(sq / static_cast<double>(values.size() - 1))};
}

inline void recompute_aggregates(RunReport& report) {
  std::vector<double> accuracies;
  for (const RunResult& r : report.runs) {
    if (!r.failed) {
      accuracies.push_back(r.eval.accuracy);
    }
  }
  if (accuracies.empty()) {
    report.mean_accuracy = 0.0;
    report.std_accuracy = 0.0;
    report.best_accuracy = 0.0;
    return;
  }
  const auto [mean, deviation] = aggregate_stats(accuracies);
  report.mean_accuracy = mean;
  report.std_accuracy = deviation;
  report.best_accuracy = *std::max_element(accuracies.begin(), accuracies.end());
}

namespace detail {

struct SampleSets {
  std::vector<TrainSample<float>> train;
  std::vector<TrainSample<float>> test;
};

inline SampleSets partition_samples(const LoadedDataset& data, const DatasetIndex& assigned,
                                    int test_fold) {
  SampleSets sets;
  for (std::size_t i = 0; i < assigned.entries.size(); ++i) {
    const IndexEntry& e = assigned.entries[i];
    TrainSample<float> sample{&data.volumes[i], e.label, e.clip_path};
    const bool is_test = test_fold < 0 ? e.split == Split::test : e.fold == test_fold;
    (is_test ? sets.test : sets.train).push_back(std::move(sample));
  }
  return sets;
}

inline NetworkConfig config_for(const ExperimentSpec& spec, const LoadedDataset& data,
                                std::uint64_t seed) {
  if (data.volumes.empty()) {
    throw ValidationError("dataset has no clips");
  }
  NetworkConfig config;
  config.depth = data.volumes.front().dim(0);
  config.height = data.volumes.front().dim(1);
  config.width = data.volumes.front().dim(2);
  config.learning_rate = spec.learning_rate;
  config.batch_size = spec.batch_size;
  config.epochs = spec.epochs;
  config.seed = seed;
  return config;
}

// Trains one network on `train`, pooling nothing; returns the last epoch loss.
inline double train_to_completion(Network<float>& net, const std::vector<TrainSample<float>>& train,
                                  std::size_t epochs, std::size_t batch_size, Rng& shuffle_rng) {
  double last_loss = 0.0;
  for (std::size_t e = 0; e < epochs; ++e) {
    last_loss = train_epoch(net, train, batch_size, shuffle_rng);
  }
  return last_loss;
}

inline RunResult execute_run(const ExperimentSpec& spec, const LoadedDataset& data,
                             std::size_t run_index) {
  RunResult result;
  result.run_index = run_index;
  result.seed = spec.seed_base + run_index;
  try {
    const NetworkConfig config = config_for(spec, data, result.seed);
    if (spec.folds == 0) {
      const DatasetIndex assigned =
          split_train_test(data.index, spec.test_percent / 100.0, result.seed);
      const SampleSets sets = partition_samples(data, assigned, -1);
      Network<float> net = build_network<float>(config);
      Rng shuffle_rng(result.seed, 1000);
      result.final_loss =
          train_to_completion(net, sets.train, spec.epochs, spec.batch_size, shuffle_rng);
      result.eval = evaluate(net, sets.test);
    } else {
      const DatasetIndex assigned = make_folds(data.index, spec.folds, result.seed);
      std::uint64_t tp = 0, fn = 0, fp = 0, tn = 0;
      double loss_sum = 0.0;
      for (std::size_t fold = 0; fold < spec.folds; ++fold) {
        const SampleSets sets = partition_samples(data, assigned, static_cast<int>(fold));
        Network<float> net = build_network<float>(config);
        Rng shuffle_rng(result.seed, 1000 + fold);
        loss_sum +=
            train_to_completion(net, sets.train, spec.epochs, spec.batch_size, shuffle_rng);
        const EvalResult fold_eval = evaluate(net, sets.test);
        tp += fold_eval.true_positives;
        fn += fold_eval.false_negatives;
        fp += fold_eval.false_positives;
        tn += fold_eval.true_negatives;
      }
      result.final_loss = loss_sum / static_cast<double>(spec.folds);
      result.eval = eval_from_confusion(tp, fn, fp, tn);
    }
  } catch (const std::exception& e) {
    result.failed = true;
    result.error = e.what();
    result.final_loss = 0.0;
    result.eval = EvalResult{};
  }
  return result;
}

}  // namespace detail

// Worker cap: PCBNET_THREADS when set, else the hardware concurrency.
inline std::size_t thread_cap_from_env() {
  const char* env = std::getenv("PCBNET_THREADS");
  if (env == nullptr || *env == '\0') {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
  }
  std::size_t value = 0;
  if (!detail::parse_size(env, value) || value == 0) {
    throw ConfigError("PCBNET_THREADS must be a positive integer, got \"" + std::string(env) +
                      "\"");
  }
  return value;
}

// Runs are independent; worker count never changes results, only wall time.
inline RunReport run_experiment(const ExperimentSpec& spec, const LoadedDataset& data,
                                std::size_t max_workers = 1) {
  validate_experiment_spec(spec);
  RunReport report;
  report.spec = spec;
  report.runs.resize(spec.runs);

  const std::size_t workers = std::max<std::size_t>(1, std::min(max_workers, spec.runs));
  if (workers == 1) {
    for (std::size_t r = 0; r < spec.runs; ++r) {
      report.runs[r] = detail::execute_run(spec, data, r);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t r = next.fetch_add(1); r < spec.runs; r = next.fetch_add(1)) {
          report.runs[r] = detail::execute_run(spec, data, r);
        }
      });
    }
    for (std::thread& t : pool) {
      t.join();
    }
  }
  recompute_aggregates(report);
  return report;
}

// Grid description: either an explicit "names" list or axes {"composition",
// "test_percent", "depth", "resolution", "flip"} expanded as a Cartesian
// product in that nesting order. "epochs", "batch_size", and "learning_rate"
// apply to every expanded spec.
inline std::vector<ExperimentSpec> grid_expand(const nlohmann::json& grid) {
  if (!grid.is_object()) {
    throw ConfigError("grid description must be a JSON object");
  }
  static const std::vector<std::string> known{
      "names",  "composition", "test_percent", "depth",         "resolution",
      "flip",   "epochs",      "batch_size",   "learning_rate", "datasets_dir"};
  std::string unknown;
  for (const auto& [key, value] : grid.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      unknown += unknown.empty() ? key : ", " + key;
    }
  }
  if (!unknown.empty()) {
    throw ConfigError("grid description has unknown fields: " + unknown);
  }

  ExperimentSpec base;
  if (grid.contains("epochs")) {
    base.epochs = grid.at("epochs").get<std::size_t>();
  }
  if (grid.contains("batch_size")) {
    base.batch_size = grid.at("batch_size").get<std::size_t>();
  }
  if (grid.contains("learning_rate")) {
    base.learning_rate = grid.at("learning_rate").get<double>();
  }

  std::vector<DatasetSpec> expanded;
  if (grid.contains("names")) {
    for (const std::string axis : {"composition", "test_percent", "depth", "resolution", "flip"}) {
      if (grid.contains(axis)) {
        throw ConfigError("grid description mixes \"names\" with axis \"" + axis + "\"");
      }
    }
    const auto& names = grid.at("names");
    if (!names.is_array() || names.empty()) {
      throw ConfigError("grid \"names\" must be a non-empty array");
    }
    for (const auto& name : names) {
      expanded.push_back(parse_dataset_name(name.get<std::string>()));
    }
  } else {
    if (!grid.contains("composition")) {
      throw ConfigError("grid description needs \"names\" or a \"composition\" axis");
    }
    const auto axis_values = [&grid](const char* axis) {
      const auto& arr = grid.at(axis);
      if (!arr.is_array() || arr.empty()) {
        throw ConfigError("grid axis \"" + std::string(axis) + "\" must be a non-empty array");
      }
      return arr;
    };
    for (const auto& comp : axis_values("composition")) {
      std::vector<DatasetSpec> layer{parse_dataset_name(comp.get<std::string>())};
      if (grid.contains("test_percent")) {
        std::vector<DatasetSpec> next;
        for (const DatasetSpec& s : layer) {
          for (const auto& tp : axis_values("test_percent")) {
            DatasetSpec with = s;
            const auto value = tp.get<std::uint64_t>();
            if (value == 0 || value >= 100) {
              throw ConfigError("grid test_percent values must lie in (0, 100)");
            }
            with.test_percent = static_cast<unsigned>(value);
            next.push_back(with);
          }
        }
        layer = std::move(next);
      }
      if (grid.contains("depth")) {
        std::vector<DatasetSpec> next;
        for (const DatasetSpec& s : layer) {
          for (const auto& d : axis_values("depth")) {
            DatasetSpec with = s;
            with.depth = d.get<std::size_t>();
            if (with.depth == 0) {
              throw ConfigError("grid depth values must be positive");
            }
            next.push_back(with);
          }
        }
        layer = std::move(next);
      }
      if (grid.contains("resolution")) {
        std::vector<DatasetSpec> next;
        for (const DatasetSpec& s : layer) {
          for (const auto& res : axis_values("resolution")) {
            DatasetSpec with = s;
            std::size_t w = 0;
            std::size_t h = 0;
            const auto text = res.get<std::string>();
            if (!detail::match_resolution(text, w, h) || w == 0 || h == 0) {
              throw ConfigError("grid resolution \"" + text + "\" is not WxH");
            }
            with.width = w;
            with.height = h;
            next.push_back(with);
          }
        }
        layer = std::move(next);
      }
      if (grid.contains("flip")) {
        std::vector<DatasetSpec> next;
        for (const DatasetSpec& s : layer) {
          for (const auto& fl : axis_values("flip")) {
            DatasetSpec with = s;
            with.flip = fl.get<bool>();
            next.push_back(with);
          }
        }
        layer = std::move(next);
      }
      expanded.insert(expanded.end(), layer.begin(), layer.end());
    }
  }

  std::vector<ExperimentSpec> specs;
  specs.reserve(expanded.size());
  for (const DatasetSpec& ds : expanded) {
    ExperimentSpec spec = base;
    spec.dataset_name = format_dataset_name(ds, NameStyle::canonical);
    spec.label = format_dataset_name(ds, NameStyle::row_label);
    spec.test_percent = ds.test_percent;
    specs.push_back(std::move(spec));
  }
  return specs;
}

inline nlohmann::ordered_json report_to_json(const RunReport& report) {
  nlohmann::ordered_json doc;
  doc["dataset"] = report.spec.dataset_name;
  doc["label"] = report.spec.label;
  doc["runs"] = report.spec.runs;
  doc["folds"] = report.spec.folds;
  doc["epochs"] = report.spec.epochs;
  doc["test_percent"] = report.spec.test_percent;
  doc["batch_size"] = report.spec.batch_size;
  doc["learning_rate"] = report.spec.learning_rate;
  doc["seed_base"] = report.spec.seed_base;
  doc["aggregate"] = {{"mean_accuracy", report.mean_accuracy},
                      {"std_accuracy", report.std_accuracy},
                      {"best_accuracy", report.best_accuracy}};
  nlohmann::ordered_json runs = nlohmann::ordered_json::array();
  for (const RunResult& r : report.runs) {
    nlohmann::ordered_json row;
    row["run"] = r.run_index;
    row["seed"] = r.seed;
    row["failed"] = r.failed;
    row["error"] = r.error;
    row["final_loss"] = r.final_loss;
    row["confusion"] = {{"tp", r.eval.true_positives},
                        {"fn", r.eval.false_negatives},
                        {"fp", r.eval.false_positives},
                        {"tn", r.eval.true_negatives}};
    row["accuracy"] = r.eval.accuracy;
    row["suspicious_accuracy"] = r.eval.suspicious_accuracy;
    row["normal_accuracy"] = r.eval.normal_accuracy;
    runs.push_back(std::move(row));
  }
  doc["run_results"] = std::move(runs);
  return doc;
}

inline RunReport report_from_json(const nlohmann::json& doc) {
  RunReport report;
  report.spec.dataset_name = doc.at("dataset").get<std::string>();
  report.spec.label = doc.at("label").get<std::string>();
  report.spec.runs = doc.at("runs").get<std::size_t>();
  report.spec.folds = doc.at("folds").get<std::size_t>();
  report.spec.epochs = doc.at("epochs").get<std::size_t>();
  report.spec.test_percent = doc.at("test_percent").get<unsigned>();
  report.spec.batch_size = doc.at("batch_size").get<std::size_t>();
  report.spec.learning_rate = doc.at("learning_rate").get<double>();
  report.spec.seed_base = doc.at("seed_base").get<std::uint64_t>();
  report.mean_accuracy = doc.at("aggregate").at("mean_accuracy").get<double>();
  report.std_accuracy = doc.at("aggregate").at("std_accuracy").get<double>();
  report.best_accuracy = doc.at("aggregate").at("best_accuracy").get<double>();
  for (const auto& row : doc.at("run_results")) {
    RunResult r;
    r.run_index = row.at("run").get<std::size_t>();
    r.seed = row.at("seed").get<std::uint64_t>();
    r.failed = row.at("failed").get<bool>();
    r.error = row.at("error").get<std::string>();
    r.final_loss = row.at("final_loss").get<double>();
    r.eval = eval_from_confusion(
        row.at("confusion").at("tp").get<std::uint64_t>(),
        row.at("confusion").at("fn").get<std::uint64_t>(),
        row.at("confusion").at("fp").get<std::uint64_t>(),
        row.at("confusion").at("tn").get<std::uint64_t>());
    report.runs.push_back(std::move(r));
  }
  return report;
}

inline constexpr std::string_view kReportCsvHeader =
    "run,seed,failed,final_loss,tp,fn,fp,tn,accuracy,suspicious_accuracy,normal_accuracy";

namespace detail {

// Shortest round-trip decimal form, the same rendering the JSON emitter uses.
inline std::string number_text(double v) { return nlohmann::json(v).dump(); }

}  // namespace detail

inline std::string report_to_csv(const RunReport& report) {
  std::string out{kReportCsvHeader};
  out += '\n';
  for (const RunResult& r : report.runs) {
    out += std::to_string(r.run_index) + ',' + std::to_string(r.seed) + ',' +
           (r.failed ? "1" : "0") + ',' + detail::number_text(r.final_loss) + ',' +
           std::to_string(r.eval.true_positives) + ',' + std::to_string(r.eval.false_negatives) +
           ',' + std::to_string(r.eval.false_positives) + ',' +
           std::to_string(r.eval.true_negatives) + ',' + detail::number_text(r.eval.accuracy) +
           ',' + detail::number_text(r.eval.suspicious_accuracy) + ',' +
           detail::number_text(r.eval.normal_accuracy) + '\n';
  }
  return out;
}

namespace detail {

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open report file for writing: " + path.string());
  }
  out << text;
  if (!out) {
    throw IoError("failed writing report file: " + path.string());
  }
}

}  // namespace detail

// Writes <stem>.json and <stem>.csv; emission is byte-stable for a fixed
// report, so repeated experiments diff clean.
inline void emit_report(const RunReport& report, const std::filesystem::path& stem) {
  std::filesystem::path json_path = stem;
  json_path += ".json";
  std::filesystem::path csv_path = stem;
  csv_path += ".csv";
  detail::write_text_file(json_path, report_to_json(report).dump(2) + "\n");
  detail::write_text_file(csv_path, report_to_csv(report));
}

namespace detail {

// Percentage with one decimal, trailing ".0" dropped: 1.0 -> "100%",
// 32.0/36.0 -> "88.9%".
inline std::string percent1(double fraction) {
  const double scaled = std::round(fraction * 1000.0) / 10.0;
  std::string text = std::to_string(scaled);
  text.erase(text.find('.') + 2);
  if (text.size() >= 2 && text.compare(text.size() - 2, 2, ".0") == 0) {
    text.erase(text.size() - 2);
  }
  return text + "%";
}

// Percentage with two decimals, trailing zeros dropped: 50.0/54.0 -> "92.59%".
inline std::string percent2(double fraction) {
  const double scaled = std::round(fraction * 10000.0) / 100.0;
  std::string text = std::to_string(scaled);
  text.erase(text.find('.') + 3);
  while (text.back() == '0') {
    text.pop_back();
  }
  if (text.back() == '.') {
    text.pop_back();
  }
  return text + "%";
}

inline std::string pad_to(std::string text, std::size_t width) {
  if (text.size() < width) {
    text.append(width - text.size(), ' ');
  }
  return text;
}

}  // namespace detail

// Confusion matrix in the report layout: predicted classes across the top,
// actual classes down the side, per-class accuracy on each row, overall
// accuracy at the bottom.
inline std::string render_confusion_text(const EvalResult& eval) {
  const std::string tp = std::to_string(eval.true_positives);
  const std::string fn = std::to_string(eval.false_negatives);
  const std::string fp = std::to_string(eval.false_positives);
  const std::string tn = std::to_string(eval.true_negatives);
  const std::size_t col = std::max<std::size_t>(
      {10, tp.size() + 2, fn.size() + 2, fp.size() + 2, tn.size() + 2});

  std::string out;
  out += detail::pad_to("", 12) + detail::pad_to("Suspicious", col) + detail::pad_to("Normal", col) +
         "Accuracy\n";
  out += detail::pad_to("Suspicious", 12) + detail::pad_to(tp, col) + detail::pad_to(fn, col) +
         detail::percent1(eval.suspicious_accuracy) + "\n";
  out += detail::pad_to("Normal", 12) + detail::pad_to(fp, col) + detail::pad_to(tn, col) +
         detail::percent1(eval.normal_accuracy) + "\n";
  out += detail::pad_to("Overall", 12) + detail::pad_to("", col) + detail::pad_to("", col) +
         detail::percent2(eval.accuracy) + "\n";
  return out;
}

struct ModelComparison {
  double base_mean = 0.0;
  double base_std = 0.0;
  double base_best = 0.0;
  double proposed_mean = 0.0;
  double proposed_std = 0.0;
  double proposed_best = 0.0;
  double delta = 0.0;  // proposed_mean - base_mean

  friend bool operator==(const ModelComparison&, const ModelComparison&) = default;
};

inline ModelComparison compare_models(const RunReport& base, const RunReport& proposed) {
  ModelComparison cmp;
  cmp.base_mean = base.mean_accuracy;
  cmp.base_std = base.std_accuracy;
  cmp.base_best = base.best_accuracy;
  cmp.proposed_mean = proposed.mean_accuracy;
  cmp.proposed_std = proposed.std_accuracy;
  cmp.proposed_best = proposed.best_accuracy;
  cmp.delta = proposed.mean_accuracy - base.mean_accuracy;
  return cmp;
}

// Comparison table: one row per model with mean, deviation, and best single
// run, then the mean delta with an explicit sign.
inline std::string render_comparison_text(const ModelComparison& cmp, const std::string& base_name,
                                          const std::string& proposed_name) {
  const std::size_t name_col =
      std::max<std::size_t>({10, base_name.size() + 2, proposed_name.size() + 2});
  std::string out;
  out += detail::pad_to("Model", name_col) + detail::pad_to("Avg Accuracy", 15) +
         detail::pad_to("Std Deviation", 16) + "Best Result\n";
  out += detail::pad_to(base_name, name_col) + detail::pad_to(detail::percent1(cmp.base_mean), 15) +
         detail::pad_to(detail::number_text(std::round(cmp.base_std * 10000.0) / 10000.0), 16) +
         detail::percent1(cmp.base_best) + "\n";
  out += detail::pad_to(proposed_name, name_col) +
         detail::pad_to(detail::percent1(cmp.proposed_mean), 15) +
         detail::pad_to(detail::number_text(std::round(cmp.proposed_std * 10000.0) / 10000.0), 16) +
         detail::percent1(cmp.proposed_best) + "\n";
  const double delta_pct = std::round(cmp.delta * 1000.0) / 10.0;
  std::string delta_text = detail::percent1(std::abs(cmp.delta));
  delta_text.insert(delta_text.begin(), delta_pct < 0.0 ? '-' : '+');
  out += detail::pad_to("Delta", name_col) + delta_text + "\n";
  return out;
}

}  // namespace pcbnet
