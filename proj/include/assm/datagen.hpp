#pragma once

#include <cstdint>
#include <vector>

#include "assm/dataset.hpp"
#include "assm/rng.hpp"

namespace assm {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Synthetic benchmark: sinusoids with per-sequence random amplitude,
// frequency and phase, Gaussian noise, and labeled point spikes.
struct GenConfig {
  int n_train = 10000;
  int n_test = 2000;
  int seq_len = 100;
  double spike_prob = 0.05;
  Interval amp_range{0.5, 2.0};
  Interval freq_range{0.02, 0.1};  // cycles per step
  double noise_std = 0.05;
  Interval spike_magnitude_range{3.0, 6.0};  // in units of amplitude
  int channels = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Dataset {
  std::vector<LabeledSequence> train;
  std::vector<LabeledSequence> test;
  GenConfig config;
};

LabeledSequence generate_sequence(const GenConfig& config, Rng& rng);

// Train and test come from independent sub-streams of config.seed; each
// sequence draws from its own derived seed, so output is reproducible no
// matter how generation is scheduled.
Dataset generate_dataset(const GenConfig& config);

}  // namespace assm
