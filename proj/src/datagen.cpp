#include "assm/datagen.hpp"

#include <cmath>
#include <sstream>

namespace assm {

void LabeledSequence::validate() const {
  if (xs.rows() < 1) throw ValidationError("sequence must be nonempty");
  if (static_cast<Eigen::Index>(ys.size()) != xs.rows()) {
    std::ostringstream msg;
    msg << "sequence has " << xs.rows() << " samples but " << ys.size()
        << " labels";
    throw ValidationError(msg.str());
  }
  for (int y : ys) {
    if (y != 0 && y != 1) {
      throw ValidationError("labels must be 0 or 1");
    }
  }
}

void validate_dataset(const std::vector<LabeledSequence>& sequences) {
  if (sequences.empty()) throw ValidationError("dataset is empty");
  const auto dim = sequences.front().xs.cols();
  for (const auto& seq : sequences) {
    seq.validate();
    if (seq.xs.cols() != dim) {
      throw ValidationError("dataset sequences have mixed dimensions");
    }
  }
}

void GenConfig::validate() const {
  if (n_train < 1) throw ValidationError("n_train must be >= 1");
  if (n_test < 1) throw ValidationError("n_test must be >= 1");
  if (seq_len < 1) throw ValidationError("seq_len must be >= 1");
  if (!(spike_prob >= 0.0 && spike_prob <= 1.0)) {
    throw ValidationError("spike_prob must be in [0, 1]");
  }
  if (amp_range.lo > amp_range.hi || freq_range.lo > freq_range.hi ||
      spike_magnitude_range.lo > spike_magnitude_range.hi) {
    throw ValidationError("interval lower bound exceeds upper bound");
  }
  if (noise_std < 0.0) throw ValidationError("noise_std must be >= 0");
  if (channels < 1) throw ValidationError("channels must be >= 1");
}

LabeledSequence generate_sequence(const GenConfig& config, Rng& rng) {
  config.validate();
  const int T = config.seq_len;
  const int m = config.channels;

  std::vector<double> amp(m), freq(m), phase(m);
  for (int c = 0; c < m; ++c) {
    amp[c] = rng.uniform(config.amp_range.lo, config.amp_range.hi);
    freq[c] = rng.uniform(config.freq_range.lo, config.freq_range.hi);
    phase[c] = rng.uniform(0.0, 2.0 * M_PI);
  }

  LabeledSequence seq;
  seq.xs.resize(T, m);
  seq.ys.assign(T, 0);
  for (int t = 0; t < T; ++t) {
    for (int c = 0; c < m; ++c) {
      double x = amp[c] * std::sin(2.0 * M_PI * freq[c] * t + phase[c]) +
                 config.noise_std * rng.normal();
      if (rng.bernoulli(config.spike_prob)) {
        double magnitude = amp[c] * rng.uniform(config.spike_magnitude_range.lo,
                                                config.spike_magnitude_range.hi);
        double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
        x += sign * magnitude;
        seq.ys[t] = 1;
      }
      seq.xs(t, c) = x;
    }
  }
  return seq;
}

namespace {

std::vector<LabeledSequence> generate_split(const GenConfig& config, int count,
                                            std::uint64_t split_seed) {
  std::vector<LabeledSequence> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    Rng rng(derive_seed(split_seed, static_cast<std::uint64_t>(i)));
    out.push_back(generate_sequence(config, rng));
  }
  return out;
}

}  // namespace

Dataset generate_dataset(const GenConfig& config) {
  config.validate();
  Dataset ds;
  ds.config = config;
  ds.train = generate_split(config, config.n_train, derive_seed(config.seed, 1));
  ds.test = generate_split(config, config.n_test, derive_seed(config.seed, 2));
  return ds;
}

}  // namespace assm
