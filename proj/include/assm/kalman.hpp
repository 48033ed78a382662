#pragma once

#include <utility>
#include <vector>

#include "assm/model.hpp"

namespace assm {

// Linear-Gaussian state-space model for the classical baseline.
struct KfModel {
  Mat F;   // k x k state transition
  Mat H;   // m x k observation
  Mat Q;   // k x k process noise covariance (PSD)
  Mat R;   // m x m observation noise covariance (PD)
  Vec x0;  // k
  Mat P0;  // k x k initial covariance (PSD)

  void validate() const;
  int state_dim() const { return static_cast<int>(F.rows()); }
  int obs_dim() const { return static_cast<int>(H.rows()); }
};

struct KfState {
  Vec x;  // posterior mean
  Mat P;  // posterior covariance, kept symmetric
  std::int64_t t = 0;
};

// Constant-velocity model per channel: position + velocity, unit step.
// R is matched to the synthetic generator's observation noise.
KfModel default_kf_model(int channels, double noise_std);

KfState kf_initial_state(const KfModel& model);

// Standard predict/update.  The returned score is the squared Mahalanobis
// innovation  nu' S^-1 nu  with  nu = x_t - H x_pred,  S = H P_pred H' + R.
std::pair<KfState, double> kf_step(const KfModel& model, const KfState& state,
                                   const Vec& x_t);

std::vector<double> kf_run(const KfModel& model, const Mat& xs);

}  // namespace assm
