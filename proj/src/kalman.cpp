#include "assm/kalman.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace assm {

namespace {

void check_symmetric_psd(const Mat& m, const char* name, bool strict) {
  if (m.rows() != m.cols()) {
    throw ValidationError(std::string(name) + " must be square");
  }
  if (!m.isApprox(m.transpose(), 1e-9)) {
    throw ValidationError(std::string(name) + " must be symmetric");
  }
  if (strict) {
    Eigen::LLT<Mat> llt(m);
    if (llt.info() != Eigen::Success) {
      throw ValidationError(std::string(name) +
                            " must be positive definite");
    }
  } else {
    Eigen::SelfAdjointEigenSolver<Mat> eig(m, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-9) {
      throw ValidationError(std::string(name) +
                            " must be positive semidefinite");
    }
  }
}

}  // namespace

void KfModel::validate() const {
  const auto k = F.rows();
  const auto m = H.rows();
  if (F.cols() != k) throw ValidationError("F must be square");
  if (H.cols() != k) throw ValidationError("H has wrong column count");
  if (x0.size() != k) throw ValidationError("x0 has wrong size");
  if (Q.rows() != k || Q.cols() != k) throw ValidationError("Q has wrong shape");
  if (P0.rows() != k || P0.cols() != k) {
    throw ValidationError("P0 has wrong shape");
  }
  if (R.rows() != m || R.cols() != m) throw ValidationError("R has wrong shape");
  check_symmetric_psd(Q, "Q", false);
  check_symmetric_psd(P0, "P0", false);
  check_symmetric_psd(R, "R", true);
}

KfModel default_kf_model(int channels, double noise_std) {
  if (channels < 1) throw ValidationError("channels must be >= 1");
  const int k = 2 * channels;
  KfModel model;
  model.F = Mat::Zero(k, k);
  model.H = Mat::Zero(channels, k);
  for (int c = 0; c < channels; ++c) {
    model.F(2 * c, 2 * c) = 1.0;
    model.F(2 * c, 2 * c + 1) = 1.0;
    model.F(2 * c + 1, 2 * c + 1) = 1.0;
    model.H(c, 2 * c) = 1.0;
  }
  model.Q = 1e-3 * Mat::Identity(k, k);
  model.R = noise_std * noise_std * Mat::Identity(channels, channels);
  model.x0 = Vec::Zero(k);
  model.P0 = Mat::Identity(k, k);
  model.validate();
  return model;
}

KfState kf_initial_state(const KfModel& model) {
  return KfState{model.x0, model.P0, 0};
}

std::pair<KfState, double> kf_step(const KfModel& model, const KfState& state,
                                   const Vec& x_t) {
  if (x_t.size() != model.H.rows()) {
    throw ValidationError("kf_step: observation has wrong dimension");
  }
  if (!x_t.allFinite()) throw ValidationError("kf_step: non-finite input");

  // Predict.
  const Vec x_pred = model.F * state.x;
  const Mat P_pred = model.F * state.P * model.F.transpose() + model.Q;

  // Innovation and its covariance.
  const Vec nu = x_t - model.H * x_pred;
  const Mat S = model.H * P_pred * model.H.transpose() + model.R;
  Eigen::LLT<Mat> llt(S);
  if (llt.info() != Eigen::Success) {
    throw DivergenceError("kf_step: innovation covariance not invertible");
  }
  const double score = nu.dot(llt.solve(nu));

  // Update with Joseph form, then symmetrize.
  const Mat K = llt.solve(model.H * P_pred.transpose()).transpose();
  const Mat I_KH =
      Mat::Identity(model.state_dim(), model.state_dim()) - K * model.H;
  Mat P_post = I_KH * P_pred * I_KH.transpose() +
               K * model.R * K.transpose();
  P_post = 0.5 * (P_post + P_post.transpose()).eval();

  KfState next{x_pred + K * nu, std::move(P_post), state.t + 1};
  return {std::move(next), score};
}

std::vector<double> kf_run(const KfModel& model, const Mat& xs) {
  model.validate();
  if (xs.rows() == 0) throw ValidationError("kf_run: empty sequence");
  if (xs.cols() != model.H.rows()) {
    throw ValidationError("kf_run: observation dimension mismatch");
  }
  std::vector<double> scores;
  scores.reserve(xs.rows());
  KfState state = kf_initial_state(model);
  for (Eigen::Index t = 0; t < xs.rows(); ++t) {
    auto [next, score] = kf_step(model, state, xs.row(t).transpose());
    state = std::move(next);
    scores.push_back(score);
  }
  return scores;
}

}  // namespace assm
