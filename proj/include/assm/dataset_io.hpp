#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "assm/datagen.hpp"
#include "assm/stream.hpp"

namespace assm {

enum class FileFormat { kCsv, kNdjson };

FileFormat parse_format(const std::string& name);
std::string format_extension(FileFormat format);

// 17-significant-digit decimal, enough to round-trip any double exactly.
std::string format_double(double value);

// One timestep of a stream file.  t must be strictly increasing.
struct SampleRecord {
  std::int64_t t = 0;
  Vec x;
  std::optional<int> y;
};

// Sequence files.
//   CSV:    header  seq_id,t,x_0..x_{m-1},y  then one row per timestep.
//   NDJSON: one {"seq_id":..,"t":..,"x":[..],"y":..} object per line.
// Rejections (ragged rows, non-numeric fields, bad labels) carry the
// offending line number.
void write_sequences(const std::string& path,
                     const std::vector<LabeledSequence>& sequences,
                     FileFormat format);
std::vector<LabeledSequence> read_sequences(const std::string& path,
                                            FileFormat format);

// A dataset is stored as three files sharing a prefix:
//   <prefix>.meta.json, <prefix>.train.<ext>, <prefix>.test.<ext>
void write_dataset(const std::string& prefix, const Dataset& dataset,
                   FileFormat format);
Dataset read_dataset(const std::string& prefix, FileFormat format);

// Streaming wire format: one SampleRecord object per input line ("seq_id"
// optional and ignored), one verdict object per output line.
SampleRecord parse_sample_record(const std::string& line,
                                 std::int64_t line_number);
std::string verdict_to_json(const Verdict& verdict);

}  // namespace assm
