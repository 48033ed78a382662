// Command-line surface: generate / train / eval / stream / bench / plot.
//
// Exit codes: 0 success, 2 validation error, 3 numeric divergence, 4 I/O
// error.  All randomness flows from --seed, fanned out to labeled
// sub-streams, so identical invocations produce byte-identical outputs.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "assm/checkpoint.hpp"
#include "assm/config_file.hpp"
#include "assm/datagen.hpp"
#include "assm/dataset_io.hpp"
#include "assm/errors.hpp"
#include "assm/kalman.hpp"
#include "assm/metrics.hpp"
#include "assm/model.hpp"
#include "assm/stream.hpp"
#include "assm/trace_plot.hpp"
#include "assm/train.hpp"

namespace {

using assm::KeyValueConfig;
using nlohmann::json;

constexpr std::uint64_t kModelSeedStream = 101;
constexpr std::uint64_t kTrainSeedStream = 102;

const std::set<std::string> kGenKeys = {
    "gen.n_train",   "gen.n_test",    "gen.seq_len",  "gen.spike_prob",
    "gen.amp_min",   "gen.amp_max",   "gen.freq_min", "gen.freq_max",
    "gen.noise_std", "gen.spike_min", "gen.spike_max", "gen.channels"};

const std::set<std::string> kModelKeys = {"model.state_dim", "model.activation",
                                          "model.distance"};

const std::set<std::string> kTrainKeys = {
    "train.alpha",      "train.learning_rate", "train.epochs",
    "train.bptt_window", "train.batch_size",   "train.grad_clip",
    "train.mask_recon_to_normal"};

const std::set<std::string> kStreamKeys = {
    "stream.online_update", "stream.update_period", "stream.window_capacity",
    "stream.learning_rate", "stream.alpha",         "stream.grad_clip"};

const std::set<std::string> kEvalKeys = {"eval.horizon"};
const std::set<std::string> kBenchKeys = {"bench.input_dim"};
const std::set<std::string> kPlotKeys = {"plot.sequence"};

std::set<std::string> merge_keys(std::initializer_list<std::set<std::string>> sets) {
  std::set<std::string> merged;
  for (const auto& s : sets) merged.insert(s.begin(), s.end());
  return merged;
}

struct CommonOptions {
  std::uint64_t seed = 0;
  std::string config_path;
  std::string format = "csv";

  KeyValueConfig load_config(const std::set<std::string>& allowed) const {
    if (config_path.empty()) return KeyValueConfig{};
    auto config = KeyValueConfig::from_file(config_path);
    config.require_known(allowed);
    return config;
  }
};

assm::Activation parse_activation(const std::string& name) {
  if (name == "tanh") return assm::Activation::kTanh;
  if (name == "identity") return assm::Activation::kIdentity;
  throw assm::ValidationError("unknown activation '" + name +
                              "' (use tanh or identity)");
}

assm::Distance parse_distance(const std::string& name) {
  if (name == "l2") return assm::Distance::kL2;
  if (name == "squared-l2" || name == "squared_l2") {
    return assm::Distance::kSquaredL2;
  }
  throw assm::ValidationError("unknown distance '" + name +
                              "' (use l2 or squared-l2)");
}

assm::GenConfig gen_config_from(const KeyValueConfig& config,
                                std::uint64_t seed) {
  assm::GenConfig gen;
  gen.n_train = config.get_int("gen.n_train", gen.n_train);
  gen.n_test = config.get_int("gen.n_test", gen.n_test);
  gen.seq_len = config.get_int("gen.seq_len", gen.seq_len);
  gen.spike_prob = config.get_double("gen.spike_prob", gen.spike_prob);
  gen.amp_range.lo = config.get_double("gen.amp_min", gen.amp_range.lo);
  gen.amp_range.hi = config.get_double("gen.amp_max", gen.amp_range.hi);
  gen.freq_range.lo = config.get_double("gen.freq_min", gen.freq_range.lo);
  gen.freq_range.hi = config.get_double("gen.freq_max", gen.freq_range.hi);
  gen.noise_std = config.get_double("gen.noise_std", gen.noise_std);
  gen.spike_magnitude_range.lo =
      config.get_double("gen.spike_min", gen.spike_magnitude_range.lo);
  gen.spike_magnitude_range.hi =
      config.get_double("gen.spike_max", gen.spike_magnitude_range.hi);
  gen.channels = config.get_int("gen.channels", gen.channels);
  gen.seed = seed;
  gen.validate();
  return gen;
}

json losses_json(const std::vector<double>& values) {
  json arr = json::array();
  for (double v : values) arr.push_back(v);
  return arr;
}

json method_report(const assm::EvalResult& result, double threshold) {
  json method;
  method["threshold"] = threshold;
  method["f1"] = result.f1;
  method["roc_auc"] = result.roc_auc;
  if (result.mean_latency) {
    method["mean_latency"] = *result.mean_latency;
  } else {
    method["mean_latency"] = nullptr;
  }
  method["events_detected"] = result.events_detected;
  method["events_missed"] = result.events_missed;
  method["counts"] = {{"tp", result.counts.tp},
                      {"fp", result.counts.fp},
                      {"tn", result.counts.tn},
                      {"fn", result.counts.fn}};
  if (result.throughput) {
    method["throughput"] = {
        {"samples_per_second", result.throughput->samples_per_second},
        {"ns_per_sample", result.throughput->ns_per_sample}};
  }
  return method;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw assm::IoError("cannot open for writing: " + path);
  out << text;
  if (!out) throw assm::IoError("write failed: " + path);
}

// Pooled per-timestep scores for a method across a split, sequences scored
// independently from the zero initial state.
template <typename ScoreFn>
void pool_scores(const std::vector<assm::LabeledSequence>& split,
                 const ScoreFn& score_fn, std::vector<double>* scores,
                 std::vector<int>* labels) {
  for (const auto& seq : split) {
    const auto seq_scores = score_fn(seq);
    scores->insert(scores->end(), seq_scores.begin(), seq_scores.end());
    labels->insert(labels->end(), seq.ys.begin(), seq.ys.end());
  }
}

std::vector<double> assm_scores(const assm::ModelConfig& config,
                                const assm::Parameters& params,
                                const assm::LabeledSequence& seq) {
  return assm::scores_of(assm::run_sequence(config, params, seq.xs));
}

int run_generate(const CommonOptions& common, const std::string& out_prefix) {
  const auto config = common.load_config(kGenKeys);
  const auto gen = gen_config_from(config, common.seed);
  const auto dataset = assm::generate_dataset(gen);
  assm::write_dataset(out_prefix, dataset, assm::parse_format(common.format));
  std::cerr << "wrote " << dataset.train.size() << " train and "
            << dataset.test.size() << " test sequences to " << out_prefix
            << ".*\n";
  return 0;
}

int run_train(const CommonOptions& common, const std::string& data_prefix,
              const std::string& checkpoint_path,
              const std::string& report_path, std::optional<double> alpha,
              std::optional<int> epochs, std::optional<int> state_dim) {
  const auto config = common.load_config(merge_keys({kModelKeys, kTrainKeys}));
  const auto dataset =
      assm::read_dataset(data_prefix, assm::parse_format(common.format));

  assm::ModelConfig model_config;
  model_config.input_dim = dataset.train.front().dim();
  model_config.state_dim =
      state_dim.value_or(config.get_int("model.state_dim", 16));
  model_config.activation =
      parse_activation(config.get_string("model.activation", "tanh"));
  model_config.distance =
      parse_distance(config.get_string("model.distance", "l2"));
  model_config.seed = assm::derive_seed(common.seed, kModelSeedStream);

  assm::TrainConfig train_config;
  train_config.alpha =
      alpha.value_or(config.get_double("train.alpha", train_config.alpha));
  train_config.learning_rate =
      config.get_double("train.learning_rate", train_config.learning_rate);
  train_config.epochs =
      epochs.value_or(config.get_int("train.epochs", train_config.epochs));
  train_config.bptt_window =
      config.get_int("train.bptt_window", train_config.bptt_window);
  train_config.batch_size =
      config.get_int("train.batch_size", train_config.batch_size);
  train_config.grad_clip =
      config.get_double("train.grad_clip", train_config.grad_clip);
  train_config.mask_recon_to_normal = config.get_bool(
      "train.mask_recon_to_normal", train_config.mask_recon_to_normal);
  train_config.seed = assm::derive_seed(common.seed, kTrainSeedStream);

  auto [params, report] = assm::train(model_config, train_config, dataset.train);

  assm::Checkpoint ck;
  ck.config = model_config;
  ck.params = params;
  ck.threshold = report.threshold;
  ck.meta.train_seed = train_config.seed;
  ck.meta.epochs = train_config.epochs;
  ck.meta.final_total_loss = report.total_loss.back();
  ck.meta.final_recon_loss = report.recon_loss.back();
  ck.meta.final_class_loss = report.class_loss.back();
  assm::save_checkpoint(checkpoint_path, ck);

  for (size_t e = 0; e < report.total_loss.size(); ++e) {
    std::cerr << "epoch " << e << ": total " << report.total_loss[e]
              << " recon " << report.recon_loss[e] << " class "
              << report.class_loss[e] << " (" << report.epoch_seconds[e]
              << " s)\n";
  }
  std::cerr << "calibrated threshold " << report.threshold << " (train F1 "
            << report.threshold_f1 << ")\n";

  if (!report_path.empty()) {
    // Timing stays on stderr so the report is byte-stable across runs.
    json out;
    out["epochs"] = train_config.epochs;
    out["state_dim"] = model_config.state_dim;
    out["alpha"] = train_config.alpha;
    out["total_loss"] = losses_json(report.total_loss);
    out["recon_loss"] = losses_json(report.recon_loss);
    out["class_loss"] = losses_json(report.class_loss);
    out["threshold"] = report.threshold;
    out["threshold_f1"] = report.threshold_f1;
    write_text_file(report_path, out.dump(2) + "\n");
  }
  return 0;
}

int run_eval(const CommonOptions& common, const std::string& data_prefix,
             const std::string& checkpoint_path, const std::string& report_path,
             std::optional<double> threshold_override, int horizon,
             bool with_throughput) {
  const auto config = common.load_config(kEvalKeys);
  horizon = config.get_int("eval.horizon", horizon);
  const auto dataset =
      assm::read_dataset(data_prefix, assm::parse_format(common.format));
  const auto ck = assm::load_checkpoint(checkpoint_path);
  if (ck.config.input_dim != dataset.test.front().dim()) {
    throw assm::ValidationError("checkpoint and dataset dimensions differ");
  }

  // ASSM: threshold calibrated during training (or overridden).
  const double assm_threshold = threshold_override.value_or(ck.threshold);
  std::vector<std::vector<double>> assm_test_scores;
  std::vector<std::vector<int>> test_labels;
  for (const auto& seq : dataset.test) {
    assm_test_scores.push_back(assm_scores(ck.config, ck.params, seq));
    test_labels.push_back(seq.ys);
  }

  // KF baseline: same calibration protocol, fit threshold on train scores.
  const auto kf_model = assm::default_kf_model(dataset.config.channels,
                                               dataset.config.noise_std);
  std::vector<double> kf_train_scores;
  std::vector<int> train_labels;
  pool_scores(
      dataset.train,
      [&](const assm::LabeledSequence& seq) { return kf_run(kf_model, seq.xs); },
      &kf_train_scores, &train_labels);
  const auto kf_calibrated =
      assm::calibrate_threshold(kf_train_scores, train_labels);
  std::vector<std::vector<double>> kf_test_scores;
  for (const auto& seq : dataset.test) {
    kf_test_scores.push_back(assm::kf_run(kf_model, seq.xs));
  }

  auto assm_result = assm::evaluate_sequences(assm_test_scores, test_labels,
                                              assm_threshold, horizon);
  auto kf_result = assm::evaluate_sequences(kf_test_scores, test_labels,
                                            kf_calibrated.threshold, horizon);

  if (with_throughput) {
    assm::StreamConfig stream_config;
    stream_config.threshold = assm_threshold;
    assm_result.throughput = assm::bench_stream(
        ck.config.state_dim, ck.config.input_dim, 100000, stream_config);
    assm::KfState kf_state = assm::kf_initial_state(kf_model);
    assm::Vec sample = assm::Vec::Zero(ck.config.input_dim);
    kf_result.throughput = assm::measure_throughput(
        [&]() {
          auto [next, score] = assm::kf_step(kf_model, kf_state, sample);
          kf_state = std::move(next);
          (void)score;
        },
        100000);
  }

  json report;
  report["horizon"] = horizon;
  report["n_test_sequences"] = dataset.test.size();
  report["n_test_samples"] = assm_result.counts.total();
  report["methods"]["assm"] = method_report(assm_result, assm_threshold);
  report["methods"]["kf"] = method_report(kf_result, kf_calibrated.threshold);

  const std::string text = report.dump(2) + "\n";
  if (report_path.empty()) {
    std::cout << text;
  } else {
    write_text_file(report_path, text);
    std::cerr << "assm: f1 " << assm_result.f1 << " auc " << assm_result.roc_auc
              << " | kf: f1 " << kf_result.f1 << " auc " << kf_result.roc_auc
              << "\n";
  }
  return 0;
}

int run_stream(const CommonOptions& common, const std::string& checkpoint_path,
               std::optional<double> threshold_override) {
  const auto config = common.load_config(kStreamKeys);
  const auto ck = assm::load_checkpoint(checkpoint_path);

  assm::StreamConfig stream_config;
  stream_config.threshold = threshold_override.value_or(ck.threshold);
  stream_config.online_update = config.get_bool("stream.online_update", false);
  stream_config.update_period =
      config.get_int("stream.update_period", stream_config.update_period);
  stream_config.window_capacity =
      config.get_int("stream.window_capacity", stream_config.window_capacity);
  stream_config.learning_rate =
      config.get_double("stream.learning_rate", stream_config.learning_rate);
  stream_config.alpha = config.get_double("stream.alpha", stream_config.alpha);
  stream_config.grad_clip =
      config.get_double("stream.grad_clip", stream_config.grad_clip);

  auto handle = assm::open_stream(
      ck.config, std::make_shared<assm::Parameters>(ck.params), stream_config);

  std::string line;
  std::int64_t line_no = 0;
  std::int64_t last_t = std::numeric_limits<std::int64_t>::min();
  while (std::getline(std::cin, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto record = assm::parse_sample_record(line, line_no);
    if (record.t <= last_t) {
      throw assm::ValidationError(
          "stdin:" + std::to_string(line_no) +
          ": t must be strictly increasing within a stream");
    }
    last_t = record.t;
    const auto verdict = handle.push(record.x, record.y);
    std::cout << assm::verdict_to_json(
                     assm::Verdict{verdict.score, verdict.is_anomaly, record.t})
              << "\n";
    std::cout.flush();
  }
  return 0;
}

int run_bench(const CommonOptions& common, int state_dim, std::int64_t samples,
              const std::string& out_path) {
  const auto config = common.load_config(kBenchKeys);
  const int input_dim = config.get_int("bench.input_dim", 1);
  assm::StreamConfig stream_config;
  stream_config.threshold = 1e9;  // alarms are irrelevant to timing
  const auto result = assm::bench_stream(state_dim, input_dim, samples,
                                         stream_config, common.seed);
  json out;
  out["state_dim"] = state_dim;
  out["input_dim"] = input_dim;
  out["samples"] = samples;
  out["samples_per_second"] = result.samples_per_second;
  out["ns_per_sample"] = result.ns_per_sample;
  const std::string text = out.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_text_file(out_path, text);
  }
  return 0;
}

int run_plot(const CommonOptions& common, const std::string& data_prefix,
             const std::string& checkpoint_path, const std::string& out_path,
             int sequence_index) {
  const auto config = common.load_config(kPlotKeys);
  sequence_index = config.get_int("plot.sequence", sequence_index);
  const auto dataset =
      assm::read_dataset(data_prefix, assm::parse_format(common.format));
  if (sequence_index < 0 ||
      sequence_index >= static_cast<int>(dataset.test.size())) {
    throw assm::ValidationError("plot: sequence index out of range");
  }
  const auto ck = assm::load_checkpoint(checkpoint_path);
  const auto& seq = dataset.test[static_cast<size_t>(sequence_index)];
  if (ck.config.input_dim != seq.dim()) {
    throw assm::ValidationError("checkpoint and dataset dimensions differ");
  }

  const auto kf_model = assm::default_kf_model(dataset.config.channels,
                                               dataset.config.noise_std);
  std::vector<assm::ScoreTrace> traces;
  traces.push_back({"assm", assm_scores(ck.config, ck.params, seq)});
  traces.push_back({"kf", assm::kf_run(kf_model, seq.xs)});
  assm::emit_trace_plot(traces, seq.ys, out_path);
  std::cerr << "wrote " << out_path << " and " << assm::trace_csv_path(out_path)
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming anomaly detection with an adaptive gated state-space model"};
  app.require_subcommand(1);

  CommonOptions common;
  std::string out_path;
  std::string data_prefix;
  std::string checkpoint_path;
  std::string report_path;
  std::optional<double> alpha;
  std::optional<int> epochs;
  std::optional<int> state_dim;
  std::optional<double> threshold;
  int horizon = 25;
  bool with_throughput = false;
  int bench_state_dim = 16;
  std::int64_t bench_samples = 100000;
  int plot_sequence = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", common.seed, "Root random seed");
    sub->add_option("--config", common.config_path,
                    "Key-value config file (key = value lines)");
    sub->add_option("--format", common.format, "Data file format: csv|ndjson")
        ->check(CLI::IsMember({"csv", "ndjson"}));
  };

  auto* generate = app.add_subcommand("generate", "Generate a synthetic dataset");
  add_common(generate);
  generate->add_option("--out", out_path, "Output path prefix")->required();

  auto* train = app.add_subcommand("train", "Train a model on a dataset");
  add_common(train);
  train->add_option("--data", data_prefix, "Dataset path prefix")->required();
  train->add_option("--checkpoint", checkpoint_path, "Checkpoint output path")
      ->required();
  train->add_option("--out", report_path, "Training report JSON path");
  train->add_option("--alpha", alpha, "Loss balance weight");
  train->add_option("--epochs", epochs, "Training epochs");
  train->add_option("--state-dim", state_dim, "Hidden state dimension");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint against the KF baseline");
  add_common(eval);
  eval->add_option("--data", data_prefix, "Dataset path prefix")->required();
  eval->add_option("--checkpoint", checkpoint_path, "Checkpoint path")
      ->required();
  eval->add_option("--out", report_path, "Report JSON path (default stdout)");
  eval->add_option("--threshold", threshold, "Override the calibrated threshold");
  eval->add_option("--horizon", horizon, "Detection latency horizon (steps)");
  eval->add_flag("--with-throughput", with_throughput,
                 "Also measure throughput (timing is nondeterministic)");

  auto* stream = app.add_subcommand(
      "stream", "Score NDJSON samples from stdin, one verdict per line");
  add_common(stream);
  stream->add_option("--checkpoint", checkpoint_path, "Checkpoint path")
      ->required();
  stream->add_option("--threshold", threshold, "Override the calibrated threshold");

  auto* bench = app.add_subcommand("bench", "Measure single-stream throughput");
  add_common(bench);
  bench->add_option("--state-dim", bench_state_dim, "Hidden state dimension");
  bench->add_option("--samples", bench_samples, "Timed samples (>= 1e4)");
  bench->add_option("--out", out_path, "Result JSON path (default stdout)");

  auto* plot = app.add_subcommand("plot", "Plot score traces for one test sequence");
  add_common(plot);
  plot->add_option("--data", data_prefix, "Dataset path prefix")->required();
  plot->add_option("--checkpoint", checkpoint_path, "Checkpoint path")
      ->required();
  plot->add_option("--out", out_path, "Output SVG path")->required();
  plot->add_option("--sequence", plot_sequence, "Test sequence index");

  try {
    app.parse(argc, argv);
    if (generate->parsed()) return run_generate(common, out_path);
    if (train->parsed()) {
      return run_train(common, data_prefix, checkpoint_path, report_path,
                       alpha, epochs, state_dim);
    }
    if (eval->parsed()) {
      return run_eval(common, data_prefix, checkpoint_path, report_path,
                      threshold, horizon, with_throughput);
    }
    if (stream->parsed()) return run_stream(common, checkpoint_path, threshold);
    if (bench->parsed()) {
      return run_bench(common, bench_state_dim, bench_samples, out_path);
    }
    if (plot->parsed()) {
      return run_plot(common, data_prefix, checkpoint_path, out_path,
                      plot_sequence);
    }
    return 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const assm::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const assm::DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const assm::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
}
