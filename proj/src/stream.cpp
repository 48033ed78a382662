#include "assm/stream.hpp"

#include <cmath>

#include "assm/train.hpp"

namespace assm {

void StreamConfig::validate() const {
  if (!std::isfinite(threshold)) {
    throw ValidationError("threshold must be finite");
  }
  if (update_period < 1) throw ValidationError("update_period must be >= 1");
  if (window_capacity < 1) {
    throw ValidationError("window_capacity must be >= 1");
  }
  if (online_update) {
    if (learning_rate < 0.0) {
      throw ValidationError("learning_rate must be >= 0");
    }
    if (alpha < 0.0) throw ValidationError("alpha must be >= 0");
    if (grad_clip <= 0.0) throw ValidationError("grad_clip must be > 0");
  }
}

StreamHandle::StreamHandle(const ModelConfig& config,
                           std::shared_ptr<const Parameters> params,
                           const StreamConfig& stream_config)
    : config_(config),
      params_(std::move(params)),
      stream_config_(stream_config) {
  config_.validate();
  stream_config_.validate();
  if (!params_) throw ValidationError("null parameters");
  params_->validate_shapes(config_);
  state_ = initial_state(config_);
  ws_.resize(config_.state_dim, config_.input_dim);
  if (stream_config_.online_update) {
    buffer_x_.resize(stream_config_.window_capacity, config_.input_dim);
    buffer_y_.resize(stream_config_.window_capacity);
  }
}

Verdict StreamHandle::push(const Vec& x_t, std::optional<int> y_t) {
  if (x_t.size() != config_.input_dim) {
    throw ValidationError("push: sample dimension mismatch");
  }
  if (!x_t.allFinite()) {
    throw ValidationError("push: non-finite sample rejected");
  }
  if (y_t && *y_t != 0 && *y_t != 1) {
    throw ValidationError("push: label must be 0 or 1");
  }

  const double score =
      step_into(config_, *params_, state_.h, state_.x_prev, x_t, ws_);
  state_.h.swap(ws_.h);
  state_.x_prev = x_t;
  state_.t += 1;

  Verdict verdict{score, score > stream_config_.threshold, state_.t - 1};
  samples_seen_ += 1;
  if (verdict.is_anomaly) alarms_raised_ += 1;

  if (stream_config_.online_update) {
    buffer_x_.row(buffer_pos_) = x_t.transpose();
    buffer_y_[buffer_pos_] = y_t;
    buffer_pos_ = (buffer_pos_ + 1) % stream_config_.window_capacity;
    if (buffer_count_ < stream_config_.window_capacity) buffer_count_ += 1;
    if (y_t && samples_seen_ % stream_config_.update_period == 0) {
      maybe_update();
    }
  }
  return verdict;
}

// One clipped gradient step over the most recent contiguous run of labeled
// samples in the buffer.  The handle's parameter copy is cloned and swapped;
// the shared Parameters object is never mutated.
void StreamHandle::maybe_update() {
  const std::int64_t capacity = stream_config_.window_capacity;
  std::int64_t run = 0;
  while (run < buffer_count_) {
    const std::int64_t idx =
        ((buffer_pos_ - 1 - run) % capacity + capacity) % capacity;
    if (!buffer_y_[idx]) break;
    ++run;
  }
  if (run == 0) return;

  LabeledSequence window;
  window.xs.resize(run, config_.input_dim);
  window.ys.resize(run);
  for (std::int64_t i = 0; i < run; ++i) {
    const std::int64_t idx =
        ((buffer_pos_ - run + i) % capacity + capacity) % capacity;
    window.xs.row(i) = buffer_x_.row(idx);
    window.ys[i] = *buffer_y_[idx];
  }

  Gradients grads =
      backward(config_, *params_, window, stream_config_.alpha,
               static_cast<int>(run));
  clip_gradients(grads, stream_config_.grad_clip);
  auto updated = std::make_shared<Parameters>(*params_);
  apply_update(*updated, grads, stream_config_.learning_rate);
  if (!updated->all_finite()) {
    throw DivergenceError("online update produced non-finite parameters");
  }
  params_ = std::move(updated);
}

StreamHandle open_stream(const ModelConfig& config,
                         std::shared_ptr<const Parameters> params,
                         const StreamConfig& stream_config) {
  return StreamHandle(config, std::move(params), stream_config);
}

StreamHandle open_stream(const ModelConfig& config, const Parameters& params,
                         const StreamConfig& stream_config) {
  return StreamHandle(config, std::make_shared<Parameters>(params),
                      stream_config);
}

ThroughputResult bench_stream(int state_dim, int input_dim, std::int64_t n,
                              const StreamConfig& stream_config,
                              std::uint64_t seed) {
  ModelConfig config;
  config.state_dim = state_dim;
  config.input_dim = input_dim;
  config.seed = seed;
  config.validate();
  const Parameters params = init_parameters(config);
  StreamHandle handle = open_stream(config, params, stream_config);

  // Pre-generated input block, cycled; generation stays out of the timing.
  const Eigen::Index block = 4096;
  Mat samples(block, input_dim);
  for (Eigen::Index i = 0; i < block; ++i) {
    for (int c = 0; c < input_dim; ++c) {
      samples(i, c) = std::sin(0.05 * static_cast<double>(i) + c);
    }
  }
  Vec x(input_dim);
  Eigen::Index cursor = 0;
  return measure_throughput(
      [&]() {
        x = samples.row(cursor).transpose();
        handle.push(x);
        cursor = (cursor + 1) % block;
      },
      n);
}

}  // namespace assm
