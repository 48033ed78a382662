#pragma once

#include <vector>

#include "assm/model.hpp"

namespace assm {

// One sensor sequence with per-step binary anomaly labels.
// xs is T x m (rows are timesteps), ys has length T.
struct LabeledSequence {
  Mat xs;
  std::vector<int> ys;

  Eigen::Index length() const { return xs.rows(); }
  int dim() const { return static_cast<int>(xs.cols()); }
  void validate() const;
};

void validate_dataset(const std::vector<LabeledSequence>& sequences);

}  // namespace assm
