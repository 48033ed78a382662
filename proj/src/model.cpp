#include "assm/model.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstring>
#include <sstream>

#include "assm/rng.hpp"

namespace assm {

namespace {

void check_dim(const char* what, Eigen::Index got, Eigen::Index want) {
  if (got != want) {
    std::ostringstream msg;
    msg << what << ": dimension " << got << ", expected " << want;
    throw ValidationError(msg.str());
  }
}

void check_shape(const char* what, const Mat& m, Eigen::Index rows,
                 Eigen::Index cols) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream msg;
    msg << what << ": shape " << m.rows() << "x" << m.cols() << ", expected "
        << rows << "x" << cols;
    throw ValidationError(msg.str());
  }
}

Mat random_matrix(Eigen::Index rows, Eigen::Index cols, double bound,
                  Rng& rng) {
  Mat out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      out(i, j) = rng.uniform(-bound, bound);
    }
  }
  return out;
}

double spectral_radius(const Mat& a) {
  Eigen::EigenSolver<Mat> solver(a, /*computeEigenvectors=*/false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

void ModelConfig::validate() const {
  if (input_dim < 1) throw ValidationError("input_dim must be >= 1");
  if (state_dim < 1) throw ValidationError("state_dim must be >= 1");
}

void Parameters::validate_shapes(const ModelConfig& config) const {
  const Eigen::Index d = config.state_dim;
  const Eigen::Index m = config.input_dim;
  check_shape("A", A, d, d);
  check_shape("B", B, d, m);
  check_shape("C", C, d, d);
  check_shape("D", D, d, d);
  check_shape("E", E, d, m);
  check_shape("W_f", W_f, m, d);
  check_dim("b_f", b_f.size(), m);
}

bool Parameters::all_finite() const {
  return A.allFinite() && B.allFinite() && C.allFinite() && D.allFinite() &&
         E.allFinite() && std::isfinite(gamma) && W_f.allFinite() &&
         b_f.allFinite() && std::isfinite(w_s) && std::isfinite(b_s);
}

bool Parameters::bitwise_equal(const Parameters& other) const {
  auto mat_eq = [](const Mat& a, const Mat& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
  };
  auto vec_eq = [](const Vec& a, const Vec& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
  };
  return mat_eq(A, other.A) && mat_eq(B, other.B) && mat_eq(C, other.C) &&
         mat_eq(D, other.D) && mat_eq(E, other.E) && gamma == other.gamma &&
         mat_eq(W_f, other.W_f) && vec_eq(b_f, other.b_f) &&
         w_s == other.w_s && b_s == other.b_s;
}

Parameters init_parameters(const ModelConfig& config) {
  config.validate();
  const int d = config.state_dim;
  const int m = config.input_dim;
  const double bound = 1.0 / std::sqrt(static_cast<double>(d));
  Rng rng(derive_seed(config.seed, 0x70617261));

  Parameters p;
  p.A = random_matrix(d, d, bound, rng);
  const double rho = spectral_radius(p.A);
  if (rho > 0.9) p.A *= 0.9 / rho;
  p.B = random_matrix(d, m, bound, rng);
  p.C = random_matrix(d, d, bound, rng);
  p.D = random_matrix(d, d, bound, rng);
  p.E = random_matrix(d, m, bound, rng);
  p.gamma = 1.0;
  p.W_f = random_matrix(m, d, bound, rng);
  p.b_f = Vec::Zero(m);
  p.w_s = 1.0;
  p.b_s = 0.0;
  return p;
}

HiddenState initial_state(const ModelConfig& config) {
  config.validate();
  return HiddenState{Vec::Zero(config.state_dim), Vec::Zero(config.input_dim),
                     0};
}

Vec compute_gate(const Parameters& params, const Vec& h_prev,
                 const Vec& x_prev) {
  check_dim("compute_gate: h_prev", h_prev.size(), params.D.cols());
  check_dim("compute_gate: x_prev", x_prev.size(), params.E.cols());
  return params.gamma * (params.D * h_prev + params.E * x_prev).cwiseMax(0.0);
}

Vec state_update(const ModelConfig& config, const Parameters& params,
                 const Vec& h_prev, const Vec& x_t, const Vec& gate) {
  check_dim("state_update: h_prev", h_prev.size(), params.A.cols());
  check_dim("state_update: x_t", x_t.size(), params.B.cols());
  check_dim("state_update: gate", gate.size(), params.C.cols());
  if (!x_t.allFinite() || !h_prev.allFinite() || !gate.allFinite()) {
    throw ValidationError("state_update: non-finite input");
  }
  Vec act;
  if (config.activation == Activation::kTanh) {
    act = gate.array().tanh();
  } else {
    act = gate;
  }
  return params.A * h_prev + params.B * x_t + params.C * act;
}

Vec project(const Parameters& params, const Vec& h) {
  check_dim("project: h", h.size(), params.W_f.cols());
  return params.W_f * h + params.b_f;
}

double anomaly_score(const Vec& x_t, const Vec& x_hat, Distance distance) {
  check_dim("anomaly_score: x_hat", x_hat.size(), x_t.size());
  const double sq = (x_t - x_hat).squaredNorm();
  return distance == Distance::kL2 ? std::sqrt(sq) : sq;
}

void StepWorkspace::resize(int state_dim, int input_dim) {
  u.resize(state_dim);
  gate.resize(state_dim);
  act.resize(state_dim);
  h.resize(state_dim);
  x_hat.resize(input_dim);
}

double step_into(const ModelConfig& config, const Parameters& params,
                 const Vec& h_prev, const Vec& x_prev, const Vec& x_t,
                 StepWorkspace& ws) {
  ws.u.noalias() = params.D * h_prev;
  ws.u.noalias() += params.E * x_prev;
  ws.gate = params.gamma * ws.u.cwiseMax(0.0);
  if (config.activation == Activation::kTanh) {
    ws.act = ws.gate.array().tanh();
  } else {
    ws.act = ws.gate;
  }
  ws.h.noalias() = params.A * h_prev;
  ws.h.noalias() += params.B * x_t;
  ws.h.noalias() += params.C * ws.act;
  ws.x_hat.noalias() = params.W_f * ws.h;
  ws.x_hat += params.b_f;
  const double sq = (x_t - ws.x_hat).squaredNorm();
  return config.distance == Distance::kL2 ? std::sqrt(sq) : sq;
}

std::pair<HiddenState, StepOutput> step(const ModelConfig& config,
                                        const Parameters& params,
                                        const HiddenState& state,
                                        const Vec& x_t) {
  params.validate_shapes(config);
  check_dim("step: state.h", state.h.size(), config.state_dim);
  check_dim("step: state.x_prev", state.x_prev.size(), config.input_dim);
  check_dim("step: x_t", x_t.size(), config.input_dim);
  if (!x_t.allFinite()) throw ValidationError("step: non-finite input");

  StepWorkspace ws;
  ws.resize(config.state_dim, config.input_dim);
  const double score =
      step_into(config, params, state.h, state.x_prev, x_t, ws);
  HiddenState next{ws.h, x_t, state.t + 1};
  StepOutput out{ws.h, ws.gate, ws.x_hat, score};
  return {std::move(next), std::move(out)};
}

std::vector<StepOutput> run_sequence(const ModelConfig& config,
                                     const Parameters& params, const Mat& xs) {
  params.validate_shapes(config);
  if (xs.rows() == 0) throw ValidationError("run_sequence: empty sequence");
  check_dim("run_sequence: xs columns", xs.cols(), config.input_dim);
  if (!xs.allFinite()) throw ValidationError("run_sequence: non-finite input");

  const auto T = xs.rows();
  std::vector<StepOutput> outputs;
  outputs.reserve(T);

  StepWorkspace ws;
  ws.resize(config.state_dim, config.input_dim);
  Vec h = Vec::Zero(config.state_dim);
  Vec x_prev = Vec::Zero(config.input_dim);
  Vec x_t(config.input_dim);
  for (Eigen::Index t = 0; t < T; ++t) {
    x_t = xs.row(t).transpose();
    const double score = step_into(config, params, h, x_prev, x_t, ws);
    outputs.push_back(StepOutput{ws.h, ws.gate, ws.x_hat, score});
    h = ws.h;
    x_prev = x_t;
  }
  return outputs;
}

std::vector<double> scores_of(const std::vector<StepOutput>& outputs) {
  std::vector<double> scores;
  scores.reserve(outputs.size());
  for (const auto& o : outputs) scores.push_back(o.score);
  return scores;
}

}  // namespace assm
