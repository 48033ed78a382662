#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "assm/errors.hpp"

namespace assm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class Activation { kTanh, kIdentity };
enum class Distance { kL2, kSquaredL2 };

struct ModelConfig {
  int input_dim = 1;   // m, observation dimension
  int state_dim = 16;  // d, hidden dimension
  Activation activation = Activation::kTanh;
  Distance distance = Distance::kL2;
  std::uint64_t seed = 0;

  void validate() const;
};

// Learnable tensors of the model.
//
//   h_t   = A h_{t-1} + B x_t + C sigma(G_{t-1})
//   G_t   = gamma * relu(D h_t + E x_t)
//   xhat_t = W_f h_t + b_f
//   s_t   = dist(x_t, xhat_t)
//
// w_s and b_s calibrate the unbounded score into a probability,
// sigmoid(w_s * s_t + b_s), for the classification loss term.
struct Parameters {
  Mat A;  // d x d
  Mat B;  // d x m
  Mat C;  // d x d
  Mat D;  // d x d
  Mat E;  // d x m
  double gamma = 1.0;
  Mat W_f;  // m x d
  Vec b_f;  // m
  double w_s = 1.0;
  double b_s = 0.0;

  void validate_shapes(const ModelConfig& config) const;
  bool all_finite() const;
  bool bitwise_equal(const Parameters& other) const;
};

struct HiddenState {
  Vec h;       // d
  Vec x_prev;  // m, previous observation (needed by the gate)
  std::int64_t t = 0;
};

struct StepOutput {
  Vec h;         // d
  Vec gate;      // d, G_{t-1} that fed this step
  Vec x_hat;     // m, reconstruction
  double score;  // >= 0
};

// Scratch buffers so repeated stepping performs no heap allocation.  The
// streaming engine and the batch runner share this code path, which keeps
// their outputs bit-identical.
struct StepWorkspace {
  Vec u;      // gate preactivation D h_prev + E x_prev
  Vec gate;   // gamma * relu(u)
  Vec act;    // sigma(gate)
  Vec h;      // next hidden state
  Vec x_hat;  // reconstruction

  void resize(int state_dim, int input_dim);
};

Parameters init_parameters(const ModelConfig& config);

HiddenState initial_state(const ModelConfig& config);

// gamma * relu(D h_prev + E x_prev), elementwise.
Vec compute_gate(const Parameters& params, const Vec& h_prev,
                 const Vec& x_prev);

// A h_prev + B x_t + C sigma(gate).
Vec state_update(const ModelConfig& config, const Parameters& params,
                 const Vec& h_prev, const Vec& x_t, const Vec& gate);

// W_f h + b_f.
Vec project(const Parameters& params, const Vec& h);

double anomaly_score(const Vec& x_t, const Vec& x_hat, Distance distance);

// One recurrence step: gate -> state update -> projection -> score.
// Assumes dimensions already validated; writes results into the workspace
// and returns the score.
double step_into(const ModelConfig& config, const Parameters& params,
                 const Vec& h_prev, const Vec& x_prev, const Vec& x_t,
                 StepWorkspace& ws);

// Pure single-step API; state carries (h_t, x_t, t+1) forward.
std::pair<HiddenState, StepOutput> step(const ModelConfig& config,
                                        const Parameters& params,
                                        const HiddenState& state,
                                        const Vec& x_t);

// Folds step over the rows of xs (T x m) from the zero initial state.
std::vector<StepOutput> run_sequence(const ModelConfig& config,
                                     const Parameters& params, const Mat& xs);

std::vector<double> scores_of(const std::vector<StepOutput>& outputs);

}  // namespace assm
