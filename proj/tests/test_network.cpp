#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include <pcbnet/network.hpp>
#include <pcbnet/synth.hpp>

#include "support/temp_dir.hpp"

using namespace pcbnet;

namespace {

NetworkConfig tiny_config() {
  NetworkConfig c;
  c.depth = 8;
  c.height = 8;
  c.width = 8;
  c.conv_filters = {2, 2, 2, 2};
  c.dense_width = 4;
  c.batch_size = 2;
  c.seed = 7;
  return c;
}

Tensor<float> random_batch(const NetworkConfig& c, std::size_t n, Rng& rng) {
  Tensor<float> batch({n, 1, c.depth, c.height, c.width});
  fill_uniform(batch, rng, -1.0f, 1.0f);
  return batch;
}

}  // namespace

TEST_CASE("parameter count closed form matches allocated tensors") {
  std::vector<NetworkConfig> configs;
  configs.push_back(tiny_config());
  {
    NetworkConfig c;
    c.depth = 8;
    c.height = 12;
    c.width = 16;
    c.conv_filters = {3, 4, 5, 6};
    c.dense_width = 7;
    configs.push_back(c);
  }
  for (const NetworkConfig& c : configs) {
    Network<float> net = build_network<float>(c);
    std::size_t total = 0;
    for (const Tensor<float>* t : param_tensors(net)) {
      total += t->size();
    }
    CHECK(total == parameter_count(c));
  }
}

TEST_CASE("parameter count for the published input sizes") {
  NetworkConfig small;
  small.depth = 10;
  small.height = 24;
  small.width = 32;
  CHECK(flatten_width(small) == 6144);
  CHECK(parameter_count(small) == 3'341'858);
  CHECK(config_warnings(small).empty());

  NetworkConfig base;  // defaults: 80x60, depth 10
  CHECK(flatten_width(base) == 38400);
  CHECK(parameter_count(base) == 19'856'930);
  CHECK(config_warnings(base).empty());
}

TEST_CASE("oversized input trips the parameter warning without building") {
  NetworkConfig huge;
  huge.depth = 90;
  huge.height = 120;
  huge.width = 160;
  CHECK(parameter_count(huge) > kParameterWarningThreshold);
  const auto warnings = config_warnings(huge);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("parameters") != std::string::npos);
}

TEST_CASE("config validation rejects degenerate setups") {
  NetworkConfig c = tiny_config();

  SUBCASE("extent that pools to zero") {
    c.depth = 3;
    CHECK_THROWS_WITH_AS(validate_network_config(c),
                         doctest::Contains("collapses to zero after pooling"), ConfigError);
  }
  SUBCASE("zero filter count") {
    c.conv_filters[2] = 0;
    CHECK_THROWS_AS(validate_network_config(c), ConfigError);
  }
  SUBCASE("zero dense width") {
    c.dense_width = 0;
    CHECK_THROWS_AS(validate_network_config(c), ConfigError);
  }
  SUBCASE("zero batch size") {
    c.batch_size = 0;
    CHECK_THROWS_AS(validate_network_config(c), ConfigError);
  }
  SUBCASE("negative learning rate") {
    c.learning_rate = -0.5;
    CHECK_THROWS_AS(validate_network_config(c), ConfigError);
  }
  SUBCASE("zero extent") {
    c.width = 0;
    CHECK_THROWS_AS(validate_network_config(c), ConfigError);
  }
}

TEST_CASE("build_network is seed-deterministic with zero biases") {
  const NetworkConfig c = tiny_config();
  Network<float> a = build_network<float>(c);
  Network<float> b = build_network<float>(c);
  CHECK(encode_checkpoint(a) == encode_checkpoint(b));

  NetworkConfig other = c;
  other.seed = c.seed + 1;
  Network<float> d = build_network<float>(other);
  CHECK(encode_checkpoint(a) != encode_checkpoint(d));

  for (const Tensor<float>* t : param_tensors(a)) {
    if (t->rank() == 1) {
      for (float v : t->values()) {
        CHECK(v == 0.0f);
      }
    }
  }
}

TEST_CASE("forward produces one logit row per batch entry") {
  const NetworkConfig c = tiny_config();
  Network<float> net = build_network<float>(c);
  Rng rng(31, 0);
  Tensor<float> batch = random_batch(c, 3, rng);
  Tensor<float> logits = forward(net, batch);
  REQUIRE(logits.rank() == 2);
  CHECK(logits.dim(0) == 3);
  CHECK(logits.dim(1) == kOutputClasses);
  CHECK(all_finite(logits));
}

TEST_CASE("duplicated batch rows yield bitwise-identical logits") {
  const NetworkConfig c = tiny_config();
  Network<float> net = build_network<float>(c);
  Rng rng(32, 0);
  Tensor<float> batch({2, 1, c.depth, c.height, c.width});
  const std::size_t volume = c.depth * c.height * c.width;
  for (std::size_t i = 0; i < volume; ++i) {
    batch[i] = rng.next_float();
  }
  std::memcpy(batch.data() + volume, batch.data(), volume * sizeof(float));

  Tensor<float> logits = forward(net, batch);
  CHECK(std::memcmp(logits.data(), logits.data() + kOutputClasses,
                    kOutputClasses * sizeof(float)) == 0);
}

TEST_CASE("forward rejects batches with the wrong volume shape") {
  const NetworkConfig c = tiny_config();
  Network<float> net = build_network<float>(c);
  Tensor<float> wrong({2, 1, c.depth, c.height, c.width + 1});
  CHECK_THROWS_AS(forward(net, wrong), ShapeError);
  Tensor<float> flat({2, c.depth * c.height * c.width});
  CHECK_THROWS_AS(forward(net, flat), ShapeError);
}

TEST_CASE("predict_label breaks ties toward normal") {
  const float tied[2] = {0.5f, 0.5f};
  CHECK(predict_label(tied) == 0);
  const float suspicious[2] = {-1.0f, 2.0f};
  CHECK(predict_label(suspicious) == 1);
  const float normal[2] = {3.0f, -0.25f};
  CHECK(predict_label(normal) == 0);
}

TEST_CASE("eval_from_confusion arithmetic") {
  SUBCASE("published confusion matrix") {
    const EvalResult r = eval_from_confusion(18, 0, 4, 32);
    CHECK(r.accuracy == doctest::Approx(50.0 / 54.0).epsilon(1e-12));
    CHECK(r.suspicious_accuracy == 1.0);
    CHECK(r.normal_accuracy == doctest::Approx(32.0 / 36.0).epsilon(1e-12));
  }
  SUBCASE("all correct") {
    const EvalResult r = eval_from_confusion(5, 0, 0, 5);
    CHECK(r.accuracy == 1.0);
    CHECK(r.suspicious_accuracy == 1.0);
    CHECK(r.normal_accuracy == 1.0);
  }
  SUBCASE("zero denominators stay zero") {
    const EvalResult empty = eval_from_confusion(0, 0, 0, 0);
    CHECK(empty.accuracy == 0.0);
    CHECK(empty.suspicious_accuracy == 0.0);
    CHECK(empty.normal_accuracy == 0.0);

    const EvalResult no_suspicious = eval_from_confusion(0, 0, 4, 12);
    CHECK(no_suspicious.suspicious_accuracy == 0.0);
    CHECK(no_suspicious.normal_accuracy == 0.75);
  }
}

TEST_CASE("train_epoch input validation") {
  const NetworkConfig c = tiny_config();
  Network<float> net = build_network<float>(c);
  Rng rng(33, 0);

  std::vector<TrainSample<float>> empty;
  CHECK_THROWS_WITH_AS(train_epoch(net, empty, 2, rng),
                       doctest::Contains("training set is empty"), ValidationError);

  Tensor<float> good({c.depth, c.height, c.width});
  std::vector<TrainSample<float>> one{{&good, 0, "ok"}};
  CHECK_THROWS_AS(train_epoch(net, one, 0, rng), ConfigError);

  Tensor<float> bad({c.depth, c.height, c.width + 2});
  std::vector<TrainSample<float>> mixed{{&good, 0, "ok"}, {&bad, 1, "oddball"}};
  CHECK_THROWS_WITH_AS(train_epoch(net, mixed, 2, rng), doctest::Contains("\"oddball\""),
                       ShapeError);

  CHECK_THROWS_WITH_AS(evaluate(net, empty), doctest::Contains("evaluation set is empty"),
                       ValidationError);
}

TEST_CASE("zero learning rate leaves parameters bitwise unchanged") {
  NetworkConfig c = tiny_config();
  c.learning_rate = 0.0;
  Network<float> net = build_network<float>(c);
  const std::vector<unsigned char> before = encode_checkpoint(net);

  Rng data_rng(34, 0);
  Tensor<float> vol_a({c.depth, c.height, c.width});
  Tensor<float> vol_b({c.depth, c.height, c.width});
  fill_uniform(vol_a, data_rng, 0.0f, 1.0f);
  fill_uniform(vol_b, data_rng, 0.0f, 1.0f);
  std::vector<TrainSample<float>> samples{{&vol_a, 1, "a"}, {&vol_b, 0, "b"}};

  Rng rng(35, 0);
  const double loss1 = train_epoch(net, samples, 2, rng);
  CHECK(loss1 > 0.0);
  CHECK(net.step_count == 1);

  auto params = param_tensors(net);
  Network<float> fresh = build_network<float>(c);
  auto fresh_params = param_tensors(fresh);
  for (std::size_t i = 0; i < params.size(); ++i) {
    REQUIRE(params[i]->same_shape(*fresh_params[i]));
    CHECK(std::memcmp(params[i]->data(), fresh_params[i]->data(),
                      params[i]->size() * sizeof(float)) == 0);
  }
  // Moments moved even though the parameters did not.
  CHECK(encode_checkpoint(net) != before);
}

TEST_CASE("training is reproducible from the seeds alone") {
  const NetworkConfig c = tiny_config();
  Rng data_rng(36, 0);
  std::vector<Tensor<float>> volumes;
  for (int i = 0; i < 6; ++i) {
    volumes.emplace_back(std::vector<std::size_t>{c.depth, c.height, c.width});
    fill_uniform(volumes.back(), data_rng, 0.0f, 1.0f);
  }
  auto make_samples = [&] {
    std::vector<TrainSample<float>> samples;
    for (int i = 0; i < 6; ++i) {
      samples.push_back({&volumes[i], i % 2, "clip" + std::to_string(i)});
    }
    return samples;
  };

  auto run = [&](std::vector<double>& losses) {
    Network<float> net = build_network<float>(c);
    auto samples = make_samples();
    Rng rng(c.seed, 1000);
    for (int epoch = 0; epoch < 3; ++epoch) {
      losses.push_back(train_epoch(net, samples, c.batch_size, rng));
    }
    return encode_checkpoint(net);
  };

  std::vector<double> losses_a, losses_b;
  const auto bytes_a = run(losses_a);
  const auto bytes_b = run(losses_b);
  CHECK(losses_a == losses_b);
  CHECK(bytes_a == bytes_b);
  CHECK(losses_a.size() == 3);
}

TEST_CASE("a tiny network overfits four synthetic clips") {
  NetworkConfig c;
  c.depth = 8;
  c.height = 12;
  c.width = 16;
  c.conv_filters = {2, 2, 2, 2};
  c.dense_width = 8;
  c.learning_rate = 1e-3;
  c.batch_size = 4;
  c.seed = 3;
  Network<float> net = build_network<float>(c);

  const SynthPools pools = synth_generate(2, c.width, c.height, c.depth, 91);
  std::vector<TrainSample<float>> samples;
  for (const Clip& clip : pools.suspicious) {
    samples.push_back({&clip.frames, 1, clip.source_id});
  }
  for (const Clip& clip : pools.normal) {
    samples.push_back({&clip.frames, 0, clip.source_id});
  }
  REQUIRE(samples.size() == 4);

  Rng rng(c.seed, 1000);
  double loss = 1e9;
  int epochs_used = 0;
  for (int epoch = 0; epoch < 200; ++epoch) {
    loss = train_epoch(net, samples, c.batch_size, rng);
    ++epochs_used;
    if (loss < 0.01) {
      break;
    }
  }
  CHECK(loss < 0.01);
  MESSAGE("overfit reached loss ", loss, " after ", epochs_used, " epochs");

  const EvalResult eval = evaluate(net, samples);
  CHECK(eval.accuracy == 1.0);
}

TEST_CASE("checkpoint survives encode/decode round trips") {
  const NetworkConfig c = tiny_config();
  Network<float> net = build_network<float>(c);

  Rng data_rng(37, 0);
  Tensor<float> vol({c.depth, c.height, c.width});
  fill_uniform(vol, data_rng, 0.0f, 1.0f);
  std::vector<TrainSample<float>> samples{{&vol, 1, "a"}};
  Rng rng(38, 0);
  train_epoch(net, samples, 1, rng);  // populate Adam moments and step count

  const std::vector<unsigned char> bytes = encode_checkpoint(net);
  Network<float> restored = decode_checkpoint(bytes);
  CHECK(restored.config == c);
  CHECK(restored.step_count == net.step_count);
  CHECK(encode_checkpoint(restored) == bytes);

  testutil::TempDir dir("ckpt");
  const auto path = dir.path() / "net.ckpt";
  save_checkpoint(net, path);
  Network<float> loaded = load_checkpoint(path);
  CHECK(encode_checkpoint(loaded) == bytes);

  // The restored network evaluates identically to the original.
  const EvalResult a = evaluate(net, samples);
  const EvalResult b = evaluate(loaded, samples);
  CHECK(a == b);
}

TEST_CASE("checkpoint decoding reports corruption with byte offsets") {
  const NetworkConfig c = tiny_config();
  Network<float> net = build_network<float>(c);
  const std::vector<unsigned char> good = encode_checkpoint(net);

  // Fixed header layout: magic 0, version 4, config 8..71, tensor count 72,
  // first tensor header 76 (u16 name length, then "conv1.weights").
  SUBCASE("bad magic") {
    auto bytes = good;
    bytes[0] = 'X';
    try {
      decode_checkpoint(bytes);
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(std::string(e.what()).find("magic") != std::string::npos);
      REQUIRE(e.byte_offset().has_value());
      CHECK(*e.byte_offset() == 0);
    }
  }
  SUBCASE("unsupported version") {
    auto bytes = good;
    bytes[4] = 9;
    try {
      decode_checkpoint(bytes);
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(std::string(e.what()).find("version 9") != std::string::npos);
      REQUIRE(e.byte_offset().has_value());
      CHECK(*e.byte_offset() == 4);
    }
  }
  SUBCASE("wrong tensor count") {
    auto bytes = good;
    bytes[72] = 7;
    bytes[73] = bytes[74] = bytes[75] = 0;
    try {
      decode_checkpoint(bytes);
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(std::string(e.what()).find("holds 7 tensors, expected 36") != std::string::npos);
      REQUIRE(e.byte_offset().has_value());
      CHECK(*e.byte_offset() == 72);
    }
  }
  SUBCASE("unexpected tensor name") {
    auto bytes = good;
    bytes[78] = 'x';  // first byte of "conv1.weights"
    try {
      decode_checkpoint(bytes);
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(std::string(e.what()).find("\"conv1.weights\" was expected") != std::string::npos);
      REQUIRE(e.byte_offset().has_value());
      CHECK(*e.byte_offset() == 76);
    }
  }
  SUBCASE("wrong tensor dims") {
    auto bytes = good;
    // rank byte sits right after the 13-char name; extents follow it.
    const std::size_t dims_at = 76 + 2 + 13 + 1;
    bytes[dims_at] = 3;
    try {
      decode_checkpoint(bytes);
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(std::string(e.what()).find("has dims") != std::string::npos);
      REQUIRE(e.byte_offset().has_value());
      CHECK(*e.byte_offset() == 76);
    }
  }
  SUBCASE("truncation") {
    auto bytes = good;
    bytes.resize(bytes.size() - 3);
    try {
      decode_checkpoint(bytes);
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(std::string(e.what()).find("truncated") != std::string::npos);
      CHECK(e.byte_offset().has_value());
    }
  }
  SUBCASE("trailing bytes") {
    auto bytes = good;
    bytes.push_back(0);
    try {
      decode_checkpoint(bytes);
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(std::string(e.what()).find("trailing bytes") != std::string::npos);
      REQUIRE(e.byte_offset().has_value());
      CHECK(*e.byte_offset() == good.size());
    }
  }
}

TEST_CASE("loading a checkpoint against a mismatched config names the fields") {
  const NetworkConfig c = tiny_config();
  Network<float> net = build_network<float>(c);
  testutil::TempDir dir("ckpt_cfg");
  const auto path = dir.path() / "net.ckpt";
  save_checkpoint(net, path);

  NetworkConfig expected = c;
  expected.depth = 12;
  CHECK_THROWS_WITH_AS(load_checkpoint(path, expected),
                       doctest::Contains("mismatch in field depth"), ConfigError);

  expected.dense_width = 16;
  CHECK_THROWS_WITH_AS(load_checkpoint(path, expected),
                       doctest::Contains("fields depth, dense_width"), ConfigError);

  // Non-structural fields may differ freely.
  NetworkConfig relaxed = c;
  relaxed.learning_rate = 0.5;
  relaxed.epochs = 1;
  relaxed.seed = 999;
  Network<float> loaded = load_checkpoint(path, relaxed);
  CHECK(loaded.config == c);

  CHECK_THROWS_AS(load_checkpoint(dir.path() / "missing.ckpt"), IoError);
}
