#pragma once

#include <cstdint>
#include <string>

#include "assm/model.hpp"

namespace assm {

struct CheckpointMeta {
  std::uint64_t train_seed = 0;
  int epochs = 0;
  double final_total_loss = 0.0;
  double final_recon_loss = 0.0;
  double final_class_loss = 0.0;
};

// Versioned binary container: magic, version, little-endian payload, FNV-1a
// checksum trailer.  Tensors round-trip bit-exactly.
struct Checkpoint {
  static constexpr int kFormatVersion = 1;

  int format_version = kFormatVersion;
  ModelConfig config;
  Parameters params;
  double threshold = 0.0;
  CheckpointMeta meta;
};

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);

Checkpoint load_checkpoint(const std::string& path);

}  // namespace assm
