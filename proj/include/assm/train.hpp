#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "assm/dataset.hpp"
#include "assm/model.hpp"

namespace assm {

struct TrainConfig {
  double alpha = 1.0;          // weight of the classification term
  double learning_rate = 3e-3;
  int epochs = 20;
  int bptt_window = 100;       // truncation length; >= T means exact BPTT
  int batch_size = 32;
  double grad_clip = 5.0;      // global gradient norm cap
  std::uint64_t seed = 0;
  // Restrict the reconstruction term to normal (y=0) steps.  Off by default:
  // the loss sums both terms over every timestep.
  bool mask_recon_to_normal = false;

  void validate() const;
};

// Structure-matched mirror of Parameters holding d(loss)/d(theta).
struct Gradients {
  Mat A, B, C, D, E;
  double gamma = 0.0;
  Mat W_f;
  Vec b_f;
  double w_s = 0.0;
  double b_s = 0.0;

  static Gradients zeros(const ModelConfig& config);
  double squared_norm() const;
  bool all_finite() const;
  void add_scaled(const Gradients& other, double factor);
  void scale(double factor);
};

struct LossTerms {
  double total = 0.0;
  double recon = 0.0;
  double classification = 0.0;
};

struct TrainReport {
  std::vector<double> total_loss;    // one entry per epoch (mean per sequence)
  std::vector<double> recon_loss;
  std::vector<double> class_loss;
  std::vector<double> epoch_seconds;
  double threshold = 0.0;     // F1-calibrated on the training scores
  double threshold_f1 = 0.0;
};

struct ThresholdResult {
  double threshold = 0.0;
  double f1 = 0.0;
};

//   recon = sum_t ||x_t - xhat_t||^2
//   class = sum_t bce(sigmoid(w_s s_t + b_s), y_t)
//   total = recon + alpha * class
LossTerms total_loss(const ModelConfig& config, const Parameters& params,
                     const LabeledSequence& seq, double alpha,
                     bool mask_recon_to_normal = false);

// Exact reverse-mode gradient of total_loss through the full recurrence,
// including the gate path.  Truncation detaches the hidden state at window
// boundaries: gradients never flow across more than bptt_window consecutive
// steps.  ReLU subgradient at exactly 0 is taken as 0.
Gradients backward(const ModelConfig& config, const Parameters& params,
                   const LabeledSequence& seq, double alpha, int bptt_window,
                   bool mask_recon_to_normal = false);

// Central-difference oracle, (L(th+eps) - L(th-eps)) / 2 eps per scalar.
// O(P * T) loss evaluations; intended for small models only.
Gradients finite_difference_gradient(const ModelConfig& config,
                                     const Parameters& params,
                                     const LabeledSequence& seq, double alpha,
                                     double epsilon,
                                     bool mask_recon_to_normal = false);

// Returns pre-clip norm; scales gradients so the global norm is at most
// max_norm.
double clip_gradients(Gradients& grads, double max_norm);

void apply_update(Parameters& params, const Gradients& grads,
                  double learning_rate);

// Mini-batch gradient descent with norm clipping, deterministic in
// (config.seed, tconfig.seed, dataset order).  Calibrates the alarm
// threshold on the training scores afterwards.
std::pair<Parameters, TrainReport> train(
    const ModelConfig& config, const TrainConfig& tconfig,
    const std::vector<LabeledSequence>& dataset);

// Sweeps all midpoints between sorted distinct scores plus +-infinity and
// returns the threshold maximizing F1 (alarm iff score > threshold).  Ties
// break toward the higher threshold.
ThresholdResult calibrate_threshold(const std::vector<double>& scores,
                                    const std::vector<int>& labels);

}  // namespace assm
