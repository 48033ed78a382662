#include "assm/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "assm/rng.hpp"

namespace assm {

void TrainConfig::validate() const {
  if (alpha < 0.0) throw ValidationError("alpha must be >= 0");
  if (learning_rate < 0.0) throw ValidationError("learning_rate must be >= 0");
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  if (bptt_window < 1) throw ValidationError("bptt_window must be >= 1");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (grad_clip <= 0.0) throw ValidationError("grad_clip must be > 0");
}

Gradients Gradients::zeros(const ModelConfig& config) {
  const int d = config.state_dim;
  const int m = config.input_dim;
  Gradients g;
  g.A = Mat::Zero(d, d);
  g.B = Mat::Zero(d, m);
  g.C = Mat::Zero(d, d);
  g.D = Mat::Zero(d, d);
  g.E = Mat::Zero(d, m);
  g.gamma = 0.0;
  g.W_f = Mat::Zero(m, d);
  g.b_f = Vec::Zero(m);
  g.w_s = 0.0;
  g.b_s = 0.0;
  return g;
}

double Gradients::squared_norm() const {
  return A.squaredNorm() + B.squaredNorm() + C.squaredNorm() +
         D.squaredNorm() + E.squaredNorm() + gamma * gamma +
         W_f.squaredNorm() + b_f.squaredNorm() + w_s * w_s + b_s * b_s;
}

bool Gradients::all_finite() const {
  return A.allFinite() && B.allFinite() && C.allFinite() && D.allFinite() &&
         E.allFinite() && std::isfinite(gamma) && W_f.allFinite() &&
         b_f.allFinite() && std::isfinite(w_s) && std::isfinite(b_s);
}

void Gradients::add_scaled(const Gradients& other, double factor) {
  A += factor * other.A;
  B += factor * other.B;
  C += factor * other.C;
  D += factor * other.D;
  E += factor * other.E;
  gamma += factor * other.gamma;
  W_f += factor * other.W_f;
  b_f += factor * other.b_f;
  w_s += factor * other.w_s;
  b_s += factor * other.b_s;
}

void Gradients::scale(double factor) {
  A *= factor;
  B *= factor;
  C *= factor;
  D *= factor;
  E *= factor;
  gamma *= factor;
  W_f *= factor;
  b_f *= factor;
  w_s *= factor;
  b_s *= factor;
}

namespace {

double sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z))
                  : std::exp(z) / (1.0 + std::exp(z));
}

// bce(sigmoid(z), y) = softplus(z) - y z, numerically stable form.
double bce_from_logit(double z, int y) {
  const double softplus =
      z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
  return softplus - static_cast<double>(y) * z;
}

// Everything the backward pass needs from the forward recurrence.
// Step t (1-based) lives in column t-1; u holds the gate preactivation
// D h_{t-1} + E x_{t-1} that produced the gate feeding step t.
struct ForwardTrace {
  Mat h;     // d x T
  Mat u;     // d x T
  Mat act;   // d x T, sigma(gamma relu(u))
  Mat e;     // m x T, x_t - xhat_t
  Vec s;     // T, anomaly scores
  Vec p;     // T, sigmoid(w_s s + b_s)
  LossTerms loss;
};

void check_training_inputs(const ModelConfig& config, const Parameters& params,
                           const LabeledSequence& seq, double alpha) {
  config.validate();
  params.validate_shapes(config);
  seq.validate();
  if (seq.dim() != config.input_dim) {
    throw ValidationError("sequence dimension does not match model");
  }
  if (alpha < 0.0) throw ValidationError("alpha must be >= 0");
}

ForwardTrace forward_pass(const ModelConfig& config, const Parameters& params,
                          const LabeledSequence& seq, double alpha,
                          bool mask_recon) {
  const auto T = seq.length();
  const int d = config.state_dim;
  const int m = config.input_dim;

  ForwardTrace tr;
  tr.h.resize(d, T);
  tr.u.resize(d, T);
  tr.act.resize(d, T);
  tr.e.resize(m, T);
  tr.s.resize(T);
  tr.p.resize(T);

  Vec h_prev = Vec::Zero(d);
  Vec x_prev = Vec::Zero(m);
  Vec x_t(m);
  double recon = 0.0;
  double cls = 0.0;
  for (Eigen::Index i = 0; i < T; ++i) {
    x_t = seq.xs.row(i).transpose();
    tr.u.col(i).noalias() = params.D * h_prev;
    tr.u.col(i).noalias() += params.E * x_prev;
    if (config.activation == Activation::kTanh) {
      tr.act.col(i) =
          (params.gamma * tr.u.col(i).cwiseMax(0.0)).array().tanh();
    } else {
      tr.act.col(i) = params.gamma * tr.u.col(i).cwiseMax(0.0);
    }
    tr.h.col(i).noalias() = params.A * h_prev;
    tr.h.col(i).noalias() += params.B * x_t;
    tr.h.col(i).noalias() += params.C * tr.act.col(i);

    tr.e.col(i) = x_t;
    tr.e.col(i).noalias() -= params.W_f * tr.h.col(i);
    tr.e.col(i) -= params.b_f;

    const double sq = tr.e.col(i).squaredNorm();
    tr.s(i) = config.distance == Distance::kL2 ? std::sqrt(sq) : sq;
    const double z = params.w_s * tr.s(i) + params.b_s;
    tr.p(i) = sigmoid(z);

    if (!mask_recon || seq.ys[i] == 0) recon += sq;
    cls += bce_from_logit(z, seq.ys[i]);

    h_prev = tr.h.col(i);
    x_prev = x_t;
  }
  tr.loss.recon = recon;
  tr.loss.classification = cls;
  tr.loss.total = recon + alpha * cls;
  if (!std::isfinite(tr.loss.total)) {
    throw DivergenceError("loss is non-finite");
  }
  return tr;
}

// Reverse sweep over a forward trace; adds gradients into out.
void backprop(const ModelConfig& config, const Parameters& params,
              const LabeledSequence& seq, double alpha, int bptt_window,
              bool mask_recon, const ForwardTrace& tr, Gradients& out) {
  const auto T = seq.length();
  const int d = config.state_dim;
  const int m = config.input_dim;
  const bool l2 = config.distance == Distance::kL2;
  const bool tanh_act = config.activation == Activation::kTanh;

  Vec carry = Vec::Zero(d);  // d(loss)/d(h_i) from steps > i
  Vec dxhat(m), g(d), da(d), dgate(d), du(d);
  Vec h_prev(d), x_prev(m), x_t(m);
  for (Eigen::Index i = T - 1; i >= 0; --i) {
    x_t = seq.xs.row(i).transpose();
    if (i > 0) {
      h_prev = tr.h.col(i - 1);
      x_prev = seq.xs.row(i - 1).transpose();
    } else {
      h_prev.setZero();
      x_prev.setZero();
    }

    const double dbce_dz = tr.p(i) - static_cast<double>(seq.ys[i]);
    out.w_s += alpha * dbce_dz * tr.s(i);
    out.b_s += alpha * dbce_dz;

    // d(loss)/d(xhat_i): reconstruction plus the score path.
    const bool recon_active = !mask_recon || seq.ys[i] == 0;
    if (recon_active) {
      dxhat = -2.0 * tr.e.col(i);
    } else {
      dxhat.setZero();
    }
    const double ds = alpha * dbce_dz * params.w_s;
    if (l2) {
      if (tr.s(i) > 0.0) dxhat += ds * (-tr.e.col(i) / tr.s(i));
    } else {
      dxhat += ds * (-2.0 * tr.e.col(i));
    }

    out.W_f.noalias() += dxhat * tr.h.col(i).transpose();
    out.b_f += dxhat;

    g = carry;
    g.noalias() += params.W_f.transpose() * dxhat;

    out.A.noalias() += g * h_prev.transpose();
    out.B.noalias() += g * x_t.transpose();
    out.C.noalias() += g * tr.act.col(i).transpose();

    da.noalias() = params.C.transpose() * g;
    if (tanh_act) {
      dgate = da.array() * (1.0 - tr.act.col(i).array().square());
    } else {
      dgate = da;
    }
    const Vec relu_u = tr.u.col(i).cwiseMax(0.0);
    out.gamma += relu_u.dot(dgate);
    // ReLU subgradient at exactly 0 is 0.
    du = (tr.u.col(i).array() > 0.0)
             .select(params.gamma * dgate.array(), 0.0);
    out.D.noalias() += du * h_prev.transpose();
    out.E.noalias() += du * x_prev.transpose();

    carry.noalias() = params.A.transpose() * g;
    carry.noalias() += params.D.transpose() * du;
    if (i % bptt_window == 0) carry.setZero();
  }
  if (!out.all_finite()) {
    throw DivergenceError(
        "backward produced non-finite gradients (exploding recurrence)");
  }
}

}  // namespace

LossTerms total_loss(const ModelConfig& config, const Parameters& params,
                     const LabeledSequence& seq, double alpha,
                     bool mask_recon_to_normal) {
  check_training_inputs(config, params, seq, alpha);
  return forward_pass(config, params, seq, alpha, mask_recon_to_normal).loss;
}

Gradients backward(const ModelConfig& config, const Parameters& params,
                   const LabeledSequence& seq, double alpha, int bptt_window,
                   bool mask_recon_to_normal) {
  check_training_inputs(config, params, seq, alpha);
  if (bptt_window < 1) throw ValidationError("bptt_window must be >= 1");
  const ForwardTrace tr =
      forward_pass(config, params, seq, alpha, mask_recon_to_normal);
  Gradients out = Gradients::zeros(config);
  backprop(config, params, seq, alpha, bptt_window, mask_recon_to_normal, tr,
           out);
  return out;
}

Gradients finite_difference_gradient(const ModelConfig& config,
                                     const Parameters& params,
                                     const LabeledSequence& seq, double alpha,
                                     double epsilon,
                                     bool mask_recon_to_normal) {
  check_training_inputs(config, params, seq, alpha);
  if (epsilon <= 0.0) throw ValidationError("epsilon must be > 0");

  Parameters probe = params;
  Gradients fd = Gradients::zeros(config);
  auto central = [&](double* slot) {
    const double orig = *slot;
    *slot = orig + epsilon;
    const double up =
        forward_pass(config, probe, seq, alpha, mask_recon_to_normal)
            .loss.total;
    *slot = orig - epsilon;
    const double down =
        forward_pass(config, probe, seq, alpha, mask_recon_to_normal)
            .loss.total;
    *slot = orig;
    return (up - down) / (2.0 * epsilon);
  };

  auto diff_mat = [&](Mat& param, Mat& grad) {
    for (Eigen::Index i = 0; i < param.size(); ++i) {
      grad.data()[i] = central(param.data() + i);
    }
  };
  diff_mat(probe.A, fd.A);
  diff_mat(probe.B, fd.B);
  diff_mat(probe.C, fd.C);
  diff_mat(probe.D, fd.D);
  diff_mat(probe.E, fd.E);
  fd.gamma = central(&probe.gamma);
  diff_mat(probe.W_f, fd.W_f);
  for (Eigen::Index i = 0; i < probe.b_f.size(); ++i) {
    fd.b_f(i) = central(probe.b_f.data() + i);
  }
  fd.w_s = central(&probe.w_s);
  fd.b_s = central(&probe.b_s);
  return fd;
}

double clip_gradients(Gradients& grads, double max_norm) {
  const double norm = std::sqrt(grads.squared_norm());
  if (norm > max_norm && norm > 0.0) {
    grads.scale(max_norm / norm);
  }
  return norm;
}

void apply_update(Parameters& params, const Gradients& grads,
                  double learning_rate) {
  if (learning_rate == 0.0) return;
  params.A -= learning_rate * grads.A;
  params.B -= learning_rate * grads.B;
  params.C -= learning_rate * grads.C;
  params.D -= learning_rate * grads.D;
  params.E -= learning_rate * grads.E;
  params.gamma -= learning_rate * grads.gamma;
  params.W_f -= learning_rate * grads.W_f;
  params.b_f -= learning_rate * grads.b_f;
  params.w_s -= learning_rate * grads.w_s;
  params.b_s -= learning_rate * grads.b_s;
}

std::pair<Parameters, TrainReport> train(
    const ModelConfig& config, const TrainConfig& tconfig,
    const std::vector<LabeledSequence>& dataset) {
  config.validate();
  tconfig.validate();
  validate_dataset(dataset);
  if (dataset.front().dim() != config.input_dim) {
    throw ValidationError("dataset dimension does not match model");
  }

  Parameters params = init_parameters(config);
  const auto n = dataset.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  Rng shuffle_rng(derive_seed(tconfig.seed, 0x73687566));

  TrainReport report;
  Gradients batch_grad = Gradients::zeros(config);
  for (int epoch = 0; epoch < tconfig.epochs; ++epoch) {
    const auto epoch_start = std::chrono::steady_clock::now();
    // Fisher-Yates with the deterministic stream.
    for (size_t i = n - 1; i > 0; --i) {
      const size_t j =
          static_cast<size_t>(shuffle_rng.uniform() * static_cast<double>(i + 1));
      std::swap(order[i], order[std::min(j, i)]);
    }

    double epoch_total = 0.0, epoch_recon = 0.0, epoch_class = 0.0;
    size_t pos = 0;
    while (pos < n) {
      const size_t batch_end =
          std::min(pos + static_cast<size_t>(tconfig.batch_size), n);
      const double batch_count = static_cast<double>(batch_end - pos);
      batch_grad.scale(0.0);
      for (size_t k = pos; k < batch_end; ++k) {
        const LabeledSequence& seq = dataset[order[k]];
        ForwardTrace tr;
        try {
          tr = forward_pass(config, params, seq, tconfig.alpha,
                            tconfig.mask_recon_to_normal);
          backprop(config, params, seq, tconfig.alpha, tconfig.bptt_window,
                   tconfig.mask_recon_to_normal, tr, batch_grad);
        } catch (const DivergenceError&) {
          std::ostringstream msg;
          msg << "training diverged at epoch " << epoch;
          throw DivergenceError(msg.str(), epoch);
        }
        epoch_total += tr.loss.total;
        epoch_recon += tr.loss.recon;
        epoch_class += tr.loss.classification;
      }
      batch_grad.scale(1.0 / batch_count);
      clip_gradients(batch_grad, tconfig.grad_clip);
      apply_update(params, batch_grad, tconfig.learning_rate);
      if (!params.all_finite()) {
        std::ostringstream msg;
        msg << "training diverged at epoch " << epoch;
        throw DivergenceError(msg.str(), epoch);
      }
      pos = batch_end;
    }
    const double count = static_cast<double>(n);
    report.total_loss.push_back(epoch_total / count);
    report.recon_loss.push_back(epoch_recon / count);
    report.class_loss.push_back(epoch_class / count);
    report.epoch_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      epoch_start)
            .count());
  }

  // Calibrate the alarm threshold on the pooled training scores.
  std::vector<double> scores;
  std::vector<int> labels;
  for (const auto& seq : dataset) {
    const auto outputs = run_sequence(config, params, seq.xs);
    for (const auto& o : outputs) scores.push_back(o.score);
    labels.insert(labels.end(), seq.ys.begin(), seq.ys.end());
  }
  const auto calibrated = calibrate_threshold(scores, labels);
  report.threshold = calibrated.threshold;
  report.threshold_f1 = calibrated.f1;
  return {std::move(params), std::move(report)};
}

ThresholdResult calibrate_threshold(const std::vector<double>& scores,
                                    const std::vector<int>& labels) {
  if (scores.size() != labels.size()) {
    throw ValidationError("scores and labels differ in length");
  }
  if (scores.empty()) throw ValidationError("calibrate_threshold: empty input");
  std::int64_t positives = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw ValidationError("labels must be 0 or 1");
    positives += y;
  }
  if (positives == 0) {
    throw ValidationError("calibrate_threshold needs at least one positive");
  }
  for (double s : scores) {
    if (!std::isfinite(s)) {
      throw ValidationError("calibrate_threshold: non-finite score");
    }
  }

  const auto n = scores.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] > scores[b]; });

  // Predicting positive iff score > threshold, candidate thresholds are
  // +inf, midpoints between adjacent distinct scores (descending), -inf.
  // Scanning k (= alarms raised) upward visits thresholds in decreasing
  // order, so keeping the first maximum breaks ties toward fewer alarms.
  const double p = static_cast<double>(positives);
  double best_f1 = 0.0;  // k = 0: recall 0 => F1 0
  double best_threshold = std::numeric_limits<double>::infinity();
  std::int64_t tp = 0;
  size_t k = 0;
  while (k < n) {
    size_t j = k;
    while (j < n && scores[order[j]] == scores[order[k]]) {
      tp += labels[order[j]];
      ++j;
    }
    const double threshold =
        j < n ? 0.5 * (scores[order[k]] + scores[order[j]])
              : -std::numeric_limits<double>::infinity();
    const double precision = static_cast<double>(tp) / static_cast<double>(j);
    const double recall = static_cast<double>(tp) / p;
    const double f1 = precision + recall > 0.0
                          ? 2.0 * precision * recall / (precision + recall)
                          : 0.0;
    if (f1 > best_f1) {
      best_f1 = f1;
      best_threshold = threshold;
    }
    k = j;
  }
  return {best_threshold, best_f1};
}

}  // namespace assm
