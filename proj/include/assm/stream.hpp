#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "assm/metrics.hpp"
#include "assm/model.hpp"

namespace assm {

struct StreamConfig {
  double threshold = 0.0;     // alarm iff score > threshold
  bool online_update = false;
  int update_period = 100;    // steps between online gradient steps
  int window_capacity = 128;  // ring buffer size for recent samples
  // Hyperparameters for the online gradient step.
  double learning_rate = 1e-3;
  double alpha = 1.0;
  double grad_clip = 5.0;

  void validate() const;
};

struct Verdict {
  double score = 0.0;
  bool is_anomaly = false;
  std::int64_t t = 0;
};

// Live per-stream inference state.  Single owner; many handles may share
// read-only Parameters.  Online updates clone-and-swap this handle's copy
// and never touch the shared one.  Memory is bounded by window_capacity.
class StreamHandle {
 public:
  StreamHandle(const ModelConfig& config,
               std::shared_ptr<const Parameters> params,
               const StreamConfig& stream_config);

  // Ingest one sample: state update, score, verdict, and (when enabled and
  // due) one truncated-BPTT gradient step over the buffered window.
  // Rejects non-finite samples without advancing any state.
  Verdict push(const Vec& x_t, std::optional<int> y_t = std::nullopt);

  std::int64_t samples_seen() const { return samples_seen_; }
  std::int64_t alarms_raised() const { return alarms_raised_; }
  std::int64_t buffered_samples() const { return buffer_count_; }
  const Parameters& params() const { return *params_; }
  const ModelConfig& model_config() const { return config_; }
  const StreamConfig& stream_config() const { return stream_config_; }
  const HiddenState& state() const { return state_; }

 private:
  void maybe_update();

  ModelConfig config_;
  std::shared_ptr<const Parameters> params_;
  StreamConfig stream_config_;
  HiddenState state_;
  StepWorkspace ws_;

  // Ring buffer of recent samples, only populated when online updates are
  // enabled.
  Mat buffer_x_;  // capacity x m
  std::vector<std::optional<int>> buffer_y_;
  std::int64_t buffer_count_ = 0;
  std::int64_t buffer_pos_ = 0;

  std::int64_t samples_seen_ = 0;
  std::int64_t alarms_raised_ = 0;
};

StreamHandle open_stream(const ModelConfig& config,
                         std::shared_ptr<const Parameters> params,
                         const StreamConfig& stream_config);

StreamHandle open_stream(const ModelConfig& config, const Parameters& params,
                         const StreamConfig& stream_config);

// Throughput of the streaming fast path on a synthetic input, single
// stream, one sample per push.
ThroughputResult bench_stream(int state_dim, int input_dim, std::int64_t n,
                              const StreamConfig& stream_config = {},
                              std::uint64_t seed = 0);

}  // namespace assm
