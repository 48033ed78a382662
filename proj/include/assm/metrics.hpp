#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace assm {

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;
  std::int64_t total() const { return tp + fp + tn + fn; }
};

ConfusionCounts confusion_counts(const std::vector<int>& preds,
                                 const std::vector<int>& labels);

// 2PR/(P+R); 0 when precision + recall is 0.
double f1_score(const std::vector<int>& preds, const std::vector<int>& labels);
double f1_from_counts(const ConfusionCounts& counts);

// Probability a random positive outscores a random negative, ties counted
// one half.  Sort-and-sweep, O(n log n).  Requires both classes present.
double roc_auc(const std::vector<double>& scores,
               const std::vector<int>& labels);

struct EventLatency {
  std::int64_t onset = 0;                // first timestep of the event
  std::optional<std::int64_t> latency;   // empty = missed within the horizon
};

struct LatencyResult {
  std::optional<double> mean;  // over detected events; empty if none detected
  std::vector<EventLatency> events;
  std::int64_t detected = 0;
  std::int64_t missed = 0;
};

// Events are maximal runs of consecutive 1-labels.  An event starting at t0
// is detected by the first alarm at t in [t0, t0 + horizon); later alarms do
// not count and the event is recorded as missed.
LatencyResult detection_latency(const std::vector<int>& preds,
                                const std::vector<int>& labels, int horizon);

struct ThroughputResult {
  double samples_per_second = 0.0;
  double ns_per_sample = 0.0;
};

// Times n consecutive calls of step_fn after n/10 warm-up calls.
ThroughputResult measure_throughput(const std::function<void()>& step_fn,
                                    std::int64_t n);

struct EvalResult {
  double f1 = 0.0;
  double roc_auc = 0.0;
  std::optional<double> mean_latency;
  std::optional<ThroughputResult> throughput;
  ConfusionCounts counts;
  std::int64_t events_detected = 0;
  std::int64_t events_missed = 0;
};

// Thresholds scores (alarm iff score > threshold) and assembles the metric
// suite.  Throughput is measured separately and slotted in by the caller.
EvalResult evaluate(const std::vector<double>& scores,
                    const std::vector<int>& labels, double threshold,
                    int horizon);

// Split-level evaluation: F1 / AUC / counts over the pooled timesteps,
// latency segmented per sequence so events never span sequence boundaries.
EvalResult evaluate_sequences(const std::vector<std::vector<double>>& scores,
                              const std::vector<std::vector<int>>& labels,
                              double threshold, int horizon);

}  // namespace assm
