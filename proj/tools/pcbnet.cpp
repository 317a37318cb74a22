// Command-line surface for the suspicious-behaviour pipeline: segment
// extraction, dataset assembly, synthetic pools, training, evaluation, and
// repeated-run experiments. Failures exit nonzero with one JSON error record
// on stderr: {"error":{"code":...,"message":...}}.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <pcbnet/pcbnet.hpp>

namespace {

namespace fs = std::filesystem;

void print_warnings(const std::vector<std::string>& warnings) {
  for (const std::string& w : warnings) {
    std::cerr << "warning: " << w << "\n";
  }
}

nlohmann::json load_json_file(const fs::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw pcbnet::IoError(std::string("cannot open ") + what + ": " + path.string());
  }
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw pcbnet::ParseError(std::string(what) + " " + path.string() + ": " + e.what());
  }
}

int run_extract(const fs::path& manifest_path, const fs::path& frames_dir, const fs::path& out_dir) {
  const pcbnet::AnnotationManifest manifest = pcbnet::load_manifest(manifest_path);
  pcbnet::require_valid_manifest(manifest);
  const fs::path video_path = frames_dir / (manifest.video_id + ".clip");
  const pcbnet::Tensorf video = pcbnet::read_clip(video_path);
  if (video.dim(0) != manifest.frame_count) {
    throw pcbnet::ValidationError("frames file " + video_path.string() + " holds " +
                                  std::to_string(video.dim(0)) + " frames but the manifest says " +
                                  std::to_string(manifest.frame_count));
  }

  const pcbnet::PcbExtraction extraction = pcbnet::extract_pcb_segments(manifest);
  fs::create_directories(out_dir);
  const std::size_t plane = video.dim(1) * video.dim(2);
  for (const pcbnet::PcbSegment& segment : extraction.segments) {
    const std::size_t frames = segment.end - segment.start;
    pcbnet::Tensorf slice = pcbnet::Tensorf::from_data(
        {frames, video.dim(1), video.dim(2)},
        std::vector<float>(video.data() + segment.start * plane,
                           video.data() + segment.end * plane));
    const fs::path out_path =
        out_dir / (manifest.video_id + "_pcb" + std::to_string(segment.ordinal) + ".clip");
    pcbnet::write_clip(out_path, slice);
    std::cout << out_path.string() << " frames [" << segment.start << "," << segment.end << ")\n";
  }
  std::cout << "extracted " << extraction.segments.size() << " segment(s) from "
            << manifest.video_id << " (" << extraction.dropped_zero_width
            << " zero-width candidate(s) dropped)\n";
  return 0;
}

int run_build_dataset(const std::string& name, const fs::path& suspicious_dir,
                      const fs::path& normal_dir, const fs::path& out_dir, bool loop_pad) {
  const pcbnet::DatasetSpec spec = pcbnet::parse_dataset_name(name);
  if (!pcbnet::in_paper_grid(spec)) {
    std::cerr << "warning: \"" << name << "\" uses axis values outside the published grid\n";
  }
  const pcbnet::DatasetIndex index =
      pcbnet::build_dataset_files(spec, suspicious_dir, normal_dir, out_dir, loop_pad,
                                  /*split_seed=*/0);
  std::cout << "built " << pcbnet::format_dataset_name(spec) << ": " << index.entries.size()
            << " clips in " << out_dir.string() << "\n";
  return 0;
}

int run_synth(std::size_t per_class, const std::string& resolution, std::size_t depth,
              std::uint64_t seed, const fs::path& out_dir) {
  std::size_t width = 0;
  std::size_t height = 0;
  if (!pcbnet::detail::match_resolution(resolution, width, height) || width == 0 || height == 0) {
    throw pcbnet::ParseError("resolution \"" + resolution + "\" is not WxH");
  }
  const pcbnet::SynthPools pools = pcbnet::synth_generate(per_class, width, height, depth, seed);
  pcbnet::write_synth_pools(pools, out_dir);
  std::cout << "wrote " << pools.suspicious.size() << " suspicious and " << pools.normal.size()
            << " normal clips to " << out_dir.string() << "\n";
  return 0;
}

pcbnet::NetworkConfig config_from_dataset(const pcbnet::LoadedDataset& data) {
  if (data.volumes.empty()) {
    throw pcbnet::ValidationError("dataset has no clips");
  }
  pcbnet::NetworkConfig config;
  config.depth = data.volumes.front().dim(0);
  config.height = data.volumes.front().dim(1);
  config.width = data.volumes.front().dim(2);
  return config;
}

std::vector<pcbnet::TrainSample<float>> samples_for_split(const pcbnet::LoadedDataset& data,
                                                          pcbnet::Split side) {
  std::vector<pcbnet::TrainSample<float>> samples;
  for (std::size_t i = 0; i < data.index.entries.size(); ++i) {
    const pcbnet::IndexEntry& e = data.index.entries[i];
    if (e.split == side) {
      samples.push_back({&data.volumes[i], e.label, e.clip_path});
    }
  }
  return samples;
}

int run_train(const fs::path& dataset_dir, std::size_t epochs, std::size_t batch, double lr,
              std::uint64_t seed, const fs::path& checkpoint_path) {
  const pcbnet::LoadedDataset data = pcbnet::load_dataset(dataset_dir);
  pcbnet::NetworkConfig config = config_from_dataset(data);
  config.epochs = epochs;
  config.batch_size = batch;
  config.learning_rate = lr;
  config.seed = seed;

  pcbnet::Network<float> net = pcbnet::build_network<float>(config);
  print_warnings(net.warnings);

  const auto train_samples = samples_for_split(data, pcbnet::Split::train);
  if (train_samples.empty()) {
    throw pcbnet::ValidationError("dataset has no train entries");
  }
  pcbnet::Rng shuffle_rng(seed, 1000);
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    const double loss = pcbnet::train_epoch(net, train_samples, batch, shuffle_rng);
    std::cout << "epoch " << (epoch + 1) << "/" << epochs << " loss "
              << nlohmann::json(loss).dump() << "\n";
  }
  pcbnet::save_checkpoint(net, checkpoint_path);
  std::cout << "checkpoint written to " << checkpoint_path.string() << "\n";

  const auto test_samples = samples_for_split(data, pcbnet::Split::test);
  if (!test_samples.empty()) {
    const pcbnet::EvalResult eval = pcbnet::evaluate(net, test_samples);
    std::cout << pcbnet::render_confusion_text(eval);
  }
  return 0;
}

int run_eval(const fs::path& dataset_dir, const fs::path& checkpoint_path,
             const fs::path& report_path) {
  const pcbnet::LoadedDataset data = pcbnet::load_dataset(dataset_dir);
  pcbnet::Network<float> net = pcbnet::load_checkpoint(checkpoint_path);
  pcbnet::NetworkConfig expected = net.config;
  const pcbnet::NetworkConfig from_data = config_from_dataset(data);
  expected.depth = from_data.depth;
  expected.height = from_data.height;
  expected.width = from_data.width;
  pcbnet::check_config_matches(expected, net.config);

  const auto test_samples = samples_for_split(data, pcbnet::Split::test);
  if (test_samples.empty()) {
    throw pcbnet::ValidationError("dataset has no test entries");
  }
  const pcbnet::EvalResult eval = pcbnet::evaluate(net, test_samples);

  nlohmann::ordered_json doc;
  doc["dataset"] = dataset_dir.string();
  doc["checkpoint"] = checkpoint_path.string();
  doc["test_clips"] = test_samples.size();
  doc["confusion"] = {{"tp", eval.true_positives},
                      {"fn", eval.false_negatives},
                      {"fp", eval.false_positives},
                      {"tn", eval.true_negatives}};
  doc["accuracy"] = eval.accuracy;
  doc["suspicious_accuracy"] = eval.suspicious_accuracy;
  doc["normal_accuracy"] = eval.normal_accuracy;
  std::ofstream out(report_path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw pcbnet::IoError("cannot open report for writing: " + report_path.string());
  }
  out << doc.dump(2) << "\n";
  if (!out) {
    throw pcbnet::IoError("failed writing report: " + report_path.string());
  }

  std::cout << pcbnet::render_confusion_text(eval);
  return 0;
}

int run_experiment_cmd(const fs::path& grid_path, std::size_t runs, std::size_t folds,
                       std::uint64_t seed, const fs::path& out_dir) {
  const nlohmann::json grid = load_json_file(grid_path, "grid file");
  std::vector<pcbnet::ExperimentSpec> specs = pcbnet::grid_expand(grid);

  fs::path datasets_dir = grid_path.parent_path();
  if (grid.contains("datasets_dir")) {
    const fs::path given = grid.at("datasets_dir").get<std::string>();
    datasets_dir = given.is_absolute() ? given : grid_path.parent_path() / given;
  }

  const std::size_t workers = pcbnet::thread_cap_from_env();
  fs::create_directories(out_dir);

  std::string summary = "dataset,label,runs,folds,mean_accuracy,std_accuracy,best_accuracy\n";
  for (pcbnet::ExperimentSpec& spec : specs) {
    spec.runs = runs;
    spec.folds = folds;
    spec.seed_base = seed;

    const fs::path dataset_dir = datasets_dir / spec.dataset_name;
    if (!fs::exists(dataset_dir / "index.csv")) {
      throw pcbnet::IoError("dataset \"" + spec.dataset_name + "\" not found under " +
                            datasets_dir.string());
    }
    const pcbnet::LoadedDataset data = pcbnet::load_dataset(dataset_dir);
    const pcbnet::RunReport report = pcbnet::run_experiment(spec, data, workers);
    pcbnet::emit_report(report, out_dir / spec.dataset_name);

    summary += spec.dataset_name + ',' + spec.label + ',' + std::to_string(spec.runs) + ',' +
               std::to_string(spec.folds) + ',' + nlohmann::json(report.mean_accuracy).dump() +
               ',' + nlohmann::json(report.std_accuracy).dump() + ',' +
               nlohmann::json(report.best_accuracy).dump() + '\n';
    std::cout << spec.label << ": mean accuracy " << nlohmann::json(report.mean_accuracy).dump()
              << ", std " << nlohmann::json(report.std_accuracy).dump() << "\n";
  }

  const fs::path summary_path = out_dir / "summary.csv";
  std::ofstream out(summary_path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw pcbnet::IoError("cannot open summary for writing: " + summary_path.string());
  }
  out << summary;
  if (!out) {
    throw pcbnet::IoError("failed writing summary: " + summary_path.string());
  }
  std::cout << "reports written to " << out_dir.string() << "\n";
  return 0;
}

int report_error(const std::string& code, const std::string& message) {
  nlohmann::ordered_json record;
  record["error"] = {{"code", code}, {"message", message}};
  std::cerr << record.dump() << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"suspicious-behaviour clip pipeline"};
  app.require_subcommand(1);

  std::string manifest_file;
  std::string frames_dir;
  std::string extract_out;
  auto* extract = app.add_subcommand("extract", "cut pre-crime segments out of an annotated video");
  extract->add_option("--manifest", manifest_file, "annotation manifest JSON")->required();
  extract->add_option("--frames", frames_dir, "directory holding <video_id>.clip")->required();
  extract->add_option("--out", extract_out, "output directory for segment clips")->required();

  std::string dataset_name;
  std::string suspicious_dir;
  std::string normal_dir;
  std::string build_out;
  bool loop_pad = false;
  auto* build = app.add_subcommand("build-dataset", "assemble a named dataset from segment pools");
  build->add_option("--name", dataset_name, "dataset name in the grammar")->required();
  build->add_option("--suspicious", suspicious_dir, "suspicious segment pool")->required();
  build->add_option("--normal", normal_dir, "normal segment pool")->required();
  build->add_option("--out", build_out, "output dataset directory")->required();
  build->add_flag("--loop-pad", loop_pad, "loop short segments instead of rejecting them");

  std::size_t per_class = 0;
  std::string resolution;
  std::size_t synth_depth = 0;
  std::uint64_t synth_seed = 0;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "generate synthetic motion pools");
  synth->add_option("--per-class", per_class, "clips per class")->required();
  synth->add_option("--resolution", resolution, "frame size as WxH")->required();
  synth->add_option("--depth", synth_depth, "frames per clip")->required();
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--out", synth_out, "output directory")->required();

  std::string train_dataset;
  std::size_t epochs = 100;
  std::size_t batch = 8;
  double lr = 1e-4;
  std::uint64_t train_seed = 0;
  std::string checkpoint_file;
  auto* train = app.add_subcommand("train", "train a classifier on a dataset's train split");
  train->add_option("--dataset", train_dataset, "dataset directory")->required();
  train->add_option("--epochs", epochs, "training epochs");
  train->add_option("--batch", batch, "batch size");
  train->add_option("--lr", lr, "learning rate");
  train->add_option("--seed", train_seed, "initialisation and shuffle seed");
  train->add_option("--checkpoint", checkpoint_file, "checkpoint output path")->required();

  std::string eval_dataset;
  std::string eval_checkpoint;
  std::string report_file;
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset's test split");
  eval->add_option("--dataset", eval_dataset, "dataset directory")->required();
  eval->add_option("--checkpoint", eval_checkpoint, "checkpoint path")->required();
  eval->add_option("--report", report_file, "report JSON output path")->required();

  std::string grid_file;
  std::size_t runs = 30;
  std::size_t folds = 0;
  std::uint64_t experiment_seed = 0;
  std::string experiment_out;
  auto* experiment = app.add_subcommand("experiment", "run a grid of repeated training campaigns");
  experiment->add_option("--grid", grid_file, "grid description JSON")->required();
  experiment->add_option("--runs", runs, "runs per configuration");
  experiment->add_option("--folds", folds, "cross-validation folds; 0 = plain split");
  experiment->add_option("--seed", experiment_seed, "seed base; run i uses seed base + i");
  experiment->add_option("--out", experiment_out, "report output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e);  // --help and friends
    }
    app.exit(e);
    return report_error("usage", e.what());
  }

  try {
    if (extract->parsed()) {
      return run_extract(manifest_file, frames_dir, extract_out);
    }
    if (build->parsed()) {
      return run_build_dataset(dataset_name, suspicious_dir, normal_dir, build_out, loop_pad);
    }
    if (synth->parsed()) {
      return run_synth(per_class, resolution, synth_depth, synth_seed, synth_out);
    }
    if (train->parsed()) {
      return run_train(train_dataset, epochs, batch, lr, train_seed, checkpoint_file);
    }
    if (eval->parsed()) {
      return run_eval(eval_dataset, eval_checkpoint, report_file);
    }
    if (experiment->parsed()) {
      return run_experiment_cmd(grid_file, runs, folds, experiment_seed, experiment_out);
    }
  } catch (const pcbnet::Error& e) {
    return report_error(e.code(), e.what());
  } catch (const std::exception& e) {
    return report_error("internal", e.what());
  }
  return report_error("usage", "no subcommand selected");
}
