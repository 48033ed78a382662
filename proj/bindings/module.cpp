// Python bindings for the core operations: model stepping and scoring,
// training, data generation, the Kalman baseline, metrics, streaming, and
// checkpoint I/O.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "assm/checkpoint.hpp"
#include "assm/datagen.hpp"
#include "assm/dataset_io.hpp"
#include "assm/kalman.hpp"
#include "assm/metrics.hpp"
#include "assm/model.hpp"
#include "assm/stream.hpp"
#include "assm/train.hpp"

namespace py = pybind11;

using namespace assm;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Streaming anomaly detection with an adaptive gated state-space model";

  py::register_exception<ValidationError>(m, "ValidationError",
                                          PyExc_ValueError);
  py::register_exception<DivergenceError>(m, "DivergenceError",
                                          PyExc_ArithmeticError);
  py::register_exception<IoError>(m, "IoError", PyExc_IOError);

  py::enum_<Activation>(m, "Activation")
      .value("TANH", Activation::kTanh)
      .value("IDENTITY", Activation::kIdentity);
  py::enum_<Distance>(m, "Distance")
      .value("L2", Distance::kL2)
      .value("SQUARED_L2", Distance::kSquaredL2);

  py::class_<ModelConfig>(m, "ModelConfig")
      .def(py::init<>())
      .def_readwrite("input_dim", &ModelConfig::input_dim)
      .def_readwrite("state_dim", &ModelConfig::state_dim)
      .def_readwrite("activation", &ModelConfig::activation)
      .def_readwrite("distance", &ModelConfig::distance)
      .def_readwrite("seed", &ModelConfig::seed)
      .def("validate", &ModelConfig::validate);

  py::class_<Parameters>(m, "Parameters")
      .def(py::init<>())
      .def_readwrite("A", &Parameters::A)
      .def_readwrite("B", &Parameters::B)
      .def_readwrite("C", &Parameters::C)
      .def_readwrite("D", &Parameters::D)
      .def_readwrite("E", &Parameters::E)
      .def_readwrite("gamma", &Parameters::gamma)
      .def_readwrite("W_f", &Parameters::W_f)
      .def_readwrite("b_f", &Parameters::b_f)
      .def_readwrite("w_s", &Parameters::w_s)
      .def_readwrite("b_s", &Parameters::b_s)
      .def("all_finite", &Parameters::all_finite)
      .def("bitwise_equal", &Parameters::bitwise_equal);

  py::class_<HiddenState>(m, "HiddenState")
      .def_readonly("h", &HiddenState::h)
      .def_readonly("x_prev", &HiddenState::x_prev)
      .def_readonly("t", &HiddenState::t);

  py::class_<StepOutput>(m, "StepOutput")
      .def_readonly("h", &StepOutput::h)
      .def_readonly("gate", &StepOutput::gate)
      .def_readonly("x_hat", &StepOutput::x_hat)
      .def_readonly("score", &StepOutput::score);

  m.def("init_parameters", &init_parameters, py::arg("config"));
  m.def("initial_state", &initial_state, py::arg("config"));
  m.def("compute_gate", &compute_gate, py::arg("params"), py::arg("h_prev"),
        py::arg("x_prev"));
  m.def("state_update", &state_update, py::arg("config"), py::arg("params"),
        py::arg("h_prev"), py::arg("x_t"), py::arg("gate"));
  m.def("project", &project, py::arg("params"), py::arg("h"));
  m.def("anomaly_score", &anomaly_score, py::arg("x_t"), py::arg("x_hat"),
        py::arg("distance"));
  m.def("step", &step, py::arg("config"), py::arg("params"), py::arg("state"),
        py::arg("x_t"));
  m.def("run_sequence", &run_sequence, py::arg("config"), py::arg("params"),
        py::arg("xs"));
  m.def(
      "score_sequence",
      [](const ModelConfig& config, const Parameters& params, const Mat& xs) {
        return scores_of(run_sequence(config, params, xs));
      },
      py::arg("config"), py::arg("params"), py::arg("xs"),
      "Anomaly scores for a whole sequence run from the zero state");

  py::class_<LabeledSequence>(m, "LabeledSequence")
      .def(py::init([](Mat xs, std::vector<int> ys) {
             LabeledSequence seq{std::move(xs), std::move(ys)};
             seq.validate();
             return seq;
           }),
           py::arg("xs"), py::arg("ys"))
      .def_readonly("xs", &LabeledSequence::xs)
      .def_readonly("ys", &LabeledSequence::ys)
      .def("__len__", [](const LabeledSequence& s) { return s.length(); });

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("alpha", &TrainConfig::alpha)
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("bptt_window", &TrainConfig::bptt_window)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("grad_clip", &TrainConfig::grad_clip)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("mask_recon_to_normal",
                     &TrainConfig::mask_recon_to_normal);

  py::class_<Gradients>(m, "Gradients")
      .def_readonly("A", &Gradients::A)
      .def_readonly("B", &Gradients::B)
      .def_readonly("C", &Gradients::C)
      .def_readonly("D", &Gradients::D)
      .def_readonly("E", &Gradients::E)
      .def_readonly("gamma", &Gradients::gamma)
      .def_readonly("W_f", &Gradients::W_f)
      .def_readonly("b_f", &Gradients::b_f)
      .def_readonly("w_s", &Gradients::w_s)
      .def_readonly("b_s", &Gradients::b_s)
      .def("squared_norm", &Gradients::squared_norm);

  py::class_<LossTerms>(m, "LossTerms")
      .def_readonly("total", &LossTerms::total)
      .def_readonly("recon", &LossTerms::recon)
      .def_readonly("classification", &LossTerms::classification);

  py::class_<TrainReport>(m, "TrainReport")
      .def_readonly("total_loss", &TrainReport::total_loss)
      .def_readonly("recon_loss", &TrainReport::recon_loss)
      .def_readonly("class_loss", &TrainReport::class_loss)
      .def_readonly("epoch_seconds", &TrainReport::epoch_seconds)
      .def_readonly("threshold", &TrainReport::threshold)
      .def_readonly("threshold_f1", &TrainReport::threshold_f1);

  m.def("total_loss", &total_loss, py::arg("config"), py::arg("params"),
        py::arg("seq"), py::arg("alpha"),
        py::arg("mask_recon_to_normal") = false);
  m.def("backward", &backward, py::arg("config"), py::arg("params"),
        py::arg("seq"), py::arg("alpha"), py::arg("bptt_window"),
        py::arg("mask_recon_to_normal") = false);
  m.def("finite_difference_gradient", &finite_difference_gradient,
        py::arg("config"), py::arg("params"), py::arg("seq"), py::arg("alpha"),
        py::arg("epsilon"), py::arg("mask_recon_to_normal") = false);
  m.def("train", &train, py::arg("config"), py::arg("train_config"),
        py::arg("dataset"));

  py::class_<ThresholdResult>(m, "ThresholdResult")
      .def_readonly("threshold", &ThresholdResult::threshold)
      .def_readonly("f1", &ThresholdResult::f1);
  m.def("calibrate_threshold", &calibrate_threshold, py::arg("scores"),
        py::arg("labels"));

  py::class_<Interval>(m, "Interval")
      .def(py::init<double, double>(), py::arg("lo"), py::arg("hi"))
      .def_readwrite("lo", &Interval::lo)
      .def_readwrite("hi", &Interval::hi);

  py::class_<GenConfig>(m, "GenConfig")
      .def(py::init<>())
      .def_readwrite("n_train", &GenConfig::n_train)
      .def_readwrite("n_test", &GenConfig::n_test)
      .def_readwrite("seq_len", &GenConfig::seq_len)
      .def_readwrite("spike_prob", &GenConfig::spike_prob)
      .def_readwrite("amp_range", &GenConfig::amp_range)
      .def_readwrite("freq_range", &GenConfig::freq_range)
      .def_readwrite("noise_std", &GenConfig::noise_std)
      .def_readwrite("spike_magnitude_range", &GenConfig::spike_magnitude_range)
      .def_readwrite("channels", &GenConfig::channels)
      .def_readwrite("seed", &GenConfig::seed);

  py::class_<Dataset>(m, "Dataset")
      .def_readonly("train", &Dataset::train)
      .def_readonly("test", &Dataset::test)
      .def_readonly("config", &Dataset::config);
  m.def("generate_dataset", &generate_dataset, py::arg("config"));

  py::class_<KfModel>(m, "KfModel")
      .def(py::init<>())
      .def_readwrite("F", &KfModel::F)
      .def_readwrite("H", &KfModel::H)
      .def_readwrite("Q", &KfModel::Q)
      .def_readwrite("R", &KfModel::R)
      .def_readwrite("x0", &KfModel::x0)
      .def_readwrite("P0", &KfModel::P0)
      .def("validate", &KfModel::validate);
  m.def("default_kf_model", &default_kf_model, py::arg("channels"),
        py::arg("noise_std"));
  m.def("kf_run", &kf_run, py::arg("model"), py::arg("xs"));

  py::class_<ConfusionCounts>(m, "ConfusionCounts")
      .def_readonly("tp", &ConfusionCounts::tp)
      .def_readonly("fp", &ConfusionCounts::fp)
      .def_readonly("tn", &ConfusionCounts::tn)
      .def_readonly("fn", &ConfusionCounts::fn);

  py::class_<LatencyResult>(m, "LatencyResult")
      .def_readonly("mean", &LatencyResult::mean)
      .def_readonly("detected", &LatencyResult::detected)
      .def_readonly("missed", &LatencyResult::missed);

  m.def("f1_score", &f1_score, py::arg("preds"), py::arg("labels"));
  m.def("roc_auc", &roc_auc, py::arg("scores"), py::arg("labels"));
  m.def("detection_latency", &detection_latency, py::arg("preds"),
        py::arg("labels"), py::arg("horizon"));

  py::class_<StreamConfig>(m, "StreamConfig")
      .def(py::init<>())
      .def_readwrite("threshold", &StreamConfig::threshold)
      .def_readwrite("online_update", &StreamConfig::online_update)
      .def_readwrite("update_period", &StreamConfig::update_period)
      .def_readwrite("window_capacity", &StreamConfig::window_capacity)
      .def_readwrite("learning_rate", &StreamConfig::learning_rate)
      .def_readwrite("alpha", &StreamConfig::alpha)
      .def_readwrite("grad_clip", &StreamConfig::grad_clip);

  py::class_<Verdict>(m, "Verdict")
      .def_readonly("score", &Verdict::score)
      .def_readonly("is_anomaly", &Verdict::is_anomaly)
      .def_readonly("t", &Verdict::t);

  py::class_<StreamHandle>(m, "StreamHandle")
      .def("push", &StreamHandle::push, py::arg("x_t"),
           py::arg("y_t") = std::nullopt)
      .def_property_readonly("samples_seen", &StreamHandle::samples_seen)
      .def_property_readonly("alarms_raised", &StreamHandle::alarms_raised)
      .def_property_readonly("params", &StreamHandle::params,
                             py::return_value_policy::copy);
  m.def(
      "open_stream",
      [](const ModelConfig& config, const Parameters& params,
         const StreamConfig& stream_config) {
        return open_stream(config, params, stream_config);
      },
      py::arg("config"), py::arg("params"), py::arg("stream_config"));

  py::class_<ThroughputResult>(m, "ThroughputResult")
      .def_readonly("samples_per_second", &ThroughputResult::samples_per_second)
      .def_readonly("ns_per_sample", &ThroughputResult::ns_per_sample);
  m.def("bench_stream", &bench_stream, py::arg("state_dim"),
        py::arg("input_dim"), py::arg("n"),
        py::arg("stream_config") = StreamConfig{}, py::arg("seed") = 0);

  py::class_<CheckpointMeta>(m, "CheckpointMeta")
      .def(py::init<>())
      .def_readwrite("train_seed", &CheckpointMeta::train_seed)
      .def_readwrite("epochs", &CheckpointMeta::epochs)
      .def_readwrite("final_total_loss", &CheckpointMeta::final_total_loss)
      .def_readwrite("final_recon_loss", &CheckpointMeta::final_recon_loss)
      .def_readwrite("final_class_loss", &CheckpointMeta::final_class_loss);

  py::class_<Checkpoint>(m, "Checkpoint")
      .def(py::init<>())
      .def_readwrite("format_version", &Checkpoint::format_version)
      .def_readwrite("config", &Checkpoint::config)
      .def_readwrite("params", &Checkpoint::params)
      .def_readwrite("threshold", &Checkpoint::threshold)
      .def_readwrite("meta", &Checkpoint::meta);
  m.def("save_checkpoint", &save_checkpoint, py::arg("path"),
        py::arg("checkpoint"));
  m.def("load_checkpoint", &load_checkpoint, py::arg("path"));
}
