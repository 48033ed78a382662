#include "assm/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

#include "assm/errors.hpp"

namespace assm {

namespace {

void check_lengths(size_t a, size_t b) {
  if (a != b) throw ValidationError("preds and labels differ in length");
}

void check_binary(const std::vector<int>& values, const char* what) {
  for (int v : values) {
    if (v != 0 && v != 1) {
      throw ValidationError(std::string(what) + " must be 0 or 1");
    }
  }
}

}  // namespace

ConfusionCounts confusion_counts(const std::vector<int>& preds,
                                 const std::vector<int>& labels) {
  check_lengths(preds.size(), labels.size());
  check_binary(preds, "predictions");
  check_binary(labels, "labels");
  ConfusionCounts c;
  for (size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] == 1) {
      (labels[i] == 1 ? c.tp : c.fp)++;
    } else {
      (labels[i] == 1 ? c.fn : c.tn)++;
    }
  }
  return c;
}

double f1_from_counts(const ConfusionCounts& c) {
  const double p_den = static_cast<double>(c.tp + c.fp);
  const double r_den = static_cast<double>(c.tp + c.fn);
  const double precision = p_den > 0 ? c.tp / p_den : 0.0;
  const double recall = r_den > 0 ? c.tp / r_den : 0.0;
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

double f1_score(const std::vector<int>& preds,
                const std::vector<int>& labels) {
  return f1_from_counts(confusion_counts(preds, labels));
}

double roc_auc(const std::vector<double>& scores,
               const std::vector<int>& labels) {
  check_lengths(scores.size(), labels.size());
  check_binary(labels, "labels");
  const auto n = scores.size();
  std::int64_t positives = std::accumulate(labels.begin(), labels.end(),
                                           std::int64_t{0});
  std::int64_t negatives = static_cast<std::int64_t>(n) - positives;
  if (positives == 0 || negatives == 0) {
    throw ValidationError("roc_auc requires both classes");
  }

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });

  // Walk tie groups in ascending score order; each positive beats every
  // negative strictly below its group and half-ties within it.
  double weighted_wins = 0.0;  // integer-and-halves, exact in double
  std::int64_t negatives_below = 0;
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    std::int64_t group_pos = 0;
    std::int64_t group_neg = 0;
    while (j < n && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1 ? group_pos : group_neg)++;
      ++j;
    }
    weighted_wins += static_cast<double>(group_pos) *
                     (static_cast<double>(negatives_below) +
                      0.5 * static_cast<double>(group_neg));
    negatives_below += group_neg;
    i = j;
  }
  return weighted_wins /
         (static_cast<double>(positives) * static_cast<double>(negatives));
}

LatencyResult detection_latency(const std::vector<int>& preds,
                                const std::vector<int>& labels, int horizon) {
  check_lengths(preds.size(), labels.size());
  check_binary(preds, "predictions");
  check_binary(labels, "labels");
  if (horizon < 1) throw ValidationError("horizon must be >= 1");

  const auto n = static_cast<std::int64_t>(labels.size());
  LatencyResult result;
  double latency_sum = 0.0;
  std::int64_t t = 0;
  while (t < n) {
    if (labels[t] != 1) {
      ++t;
      continue;
    }
    EventLatency event;
    event.onset = t;
    for (std::int64_t u = t; u < n && u - t < horizon; ++u) {
      if (preds[u] == 1) {
        event.latency = u - t;
        break;
      }
    }
    if (event.latency) {
      latency_sum += static_cast<double>(*event.latency);
      result.detected++;
    } else {
      result.missed++;
    }
    result.events.push_back(event);
    while (t < n && labels[t] == 1) ++t;  // skip the rest of the event
  }
  if (result.detected > 0) {
    result.mean = latency_sum / static_cast<double>(result.detected);
  }
  return result;
}

ThroughputResult measure_throughput(const std::function<void()>& step_fn,
                                    std::int64_t n) {
  if (n < 10000) {
    throw ValidationError(
        "measure_throughput: need n >= 1e4 for stable timing");
  }
  for (std::int64_t i = 0; i < n / 10; ++i) step_fn();

  const auto start = std::chrono::steady_clock::now();
  for (std::int64_t i = 0; i < n; ++i) step_fn();
  const auto stop = std::chrono::steady_clock::now();

  const double ns =
      std::chrono::duration<double, std::nano>(stop - start).count();
  if (ns <= 0.0) {
    throw ValidationError("measure_throughput: timer resolution insufficient");
  }
  ThroughputResult r;
  r.ns_per_sample = ns / static_cast<double>(n);
  r.samples_per_second = 1e9 / r.ns_per_sample;
  return r;
}

EvalResult evaluate(const std::vector<double>& scores,
                    const std::vector<int>& labels, double threshold,
                    int horizon) {
  check_lengths(scores.size(), labels.size());
  std::vector<int> preds(scores.size());
  for (size_t i = 0; i < scores.size(); ++i) {
    preds[i] = scores[i] > threshold ? 1 : 0;
  }
  EvalResult result;
  result.counts = confusion_counts(preds, labels);
  result.f1 = f1_from_counts(result.counts);
  result.roc_auc = roc_auc(scores, labels);
  const auto latency = detection_latency(preds, labels, horizon);
  result.mean_latency = latency.mean;
  result.events_detected = latency.detected;
  result.events_missed = latency.missed;
  return result;
}

EvalResult evaluate_sequences(const std::vector<std::vector<double>>& scores,
                              const std::vector<std::vector<int>>& labels,
                              double threshold, int horizon) {
  check_lengths(scores.size(), labels.size());
  if (scores.empty()) throw ValidationError("evaluate_sequences: empty split");

  std::vector<double> pooled_scores;
  std::vector<int> pooled_labels;
  double latency_sum = 0.0;
  std::int64_t detected = 0, missed = 0;
  for (size_t s = 0; s < scores.size(); ++s) {
    check_lengths(scores[s].size(), labels[s].size());
    pooled_scores.insert(pooled_scores.end(), scores[s].begin(),
                         scores[s].end());
    pooled_labels.insert(pooled_labels.end(), labels[s].begin(),
                         labels[s].end());
    std::vector<int> preds(scores[s].size());
    for (size_t i = 0; i < scores[s].size(); ++i) {
      preds[i] = scores[s][i] > threshold ? 1 : 0;
    }
    const auto latency = detection_latency(preds, labels[s], horizon);
    for (const auto& event : latency.events) {
      if (event.latency) latency_sum += static_cast<double>(*event.latency);
    }
    detected += latency.detected;
    missed += latency.missed;
  }

  EvalResult result = evaluate(pooled_scores, pooled_labels, threshold,
                               horizon);
  result.mean_latency.reset();
  if (detected > 0) {
    result.mean_latency = latency_sum / static_cast<double>(detected);
  }
  result.events_detected = detected;
  result.events_missed = missed;
  return result;
}

}  // namespace assm
