#include "assm/dataset_io.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace assm {

namespace {

using nlohmann::json;

[[noreturn]] void fail_at(const std::string& path, std::int64_t line,
                          const std::string& what) {
  std::ostringstream msg;
  msg << path << ":" << line << ": " << what;
  throw ValidationError(msg.str());
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

double parse_double_strict(const std::string& token, const std::string& path,
                           std::int64_t line) {
  double value = 0.0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  const auto result = std::from_chars(begin, end, value);
  if (result.ec != std::errc{} || result.ptr != end || token.empty()) {
    fail_at(path, line, "non-numeric field '" + token + "'");
  }
  return value;
}

std::int64_t parse_int_strict(const std::string& token,
                              const std::string& path, std::int64_t line) {
  std::int64_t value = 0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  const auto result = std::from_chars(begin, end, value);
  if (result.ec != std::errc{} || result.ptr != end || token.empty()) {
    fail_at(path, line, "non-integer field '" + token + "'");
  }
  return value;
}

int parse_label(std::int64_t value, const std::string& path,
                std::int64_t line) {
  if (value != 0 && value != 1) {
    fail_at(path, line,
            "label out of range (got " + std::to_string(value) + ")");
  }
  return static_cast<int>(value);
}

struct RowAccumulator {
  std::vector<LabeledSequence> sequences;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::int64_t current_seq = -1;
  std::int64_t last_t = -1;
  int dim = -1;

  void flush() {
    if (rows.empty()) return;
    LabeledSequence seq;
    seq.xs.resize(static_cast<Eigen::Index>(rows.size()), dim);
    for (size_t r = 0; r < rows.size(); ++r) {
      for (int c = 0; c < dim; ++c) seq.xs(static_cast<Eigen::Index>(r), c) = rows[r][c];
    }
    seq.ys = labels;
    sequences.push_back(std::move(seq));
    rows.clear();
    labels.clear();
  }

  void add(std::int64_t seq_id, std::int64_t t, std::vector<double> x,
           int y, const std::string& path, std::int64_t line) {
    if (dim == -1) dim = static_cast<int>(x.size());
    if (static_cast<int>(x.size()) != dim) {
      fail_at(path, line, "inconsistent sample dimension");
    }
    if (seq_id != current_seq) {
      if (seq_id < current_seq) {
        fail_at(path, line, "seq_id must be nondecreasing");
      }
      flush();
      current_seq = seq_id;
      last_t = -1;
    }
    if (t <= last_t) {
      fail_at(path, line, "t must be strictly increasing within a sequence");
    }
    last_t = t;
    rows.push_back(std::move(x));
    labels.push_back(y);
  }
};

void write_sequences_csv(std::ofstream& out,
                         const std::vector<LabeledSequence>& sequences) {
  const int m = sequences.front().dim();
  out << "seq_id,t";
  for (int c = 0; c < m; ++c) out << ",x_" << c;
  out << ",y\n";
  for (size_t s = 0; s < sequences.size(); ++s) {
    const auto& seq = sequences[s];
    for (Eigen::Index t = 0; t < seq.length(); ++t) {
      out << s << ',' << t;
      for (int c = 0; c < m; ++c) out << ',' << format_double(seq.xs(t, c));
      out << ',' << seq.ys[t] << '\n';
    }
  }
}

void write_sequences_ndjson(std::ofstream& out,
                            const std::vector<LabeledSequence>& sequences) {
  const int m = sequences.front().dim();
  for (size_t s = 0; s < sequences.size(); ++s) {
    const auto& seq = sequences[s];
    for (Eigen::Index t = 0; t < seq.length(); ++t) {
      out << "{\"seq_id\":" << s << ",\"t\":" << t << ",\"x\":[";
      for (int c = 0; c < m; ++c) {
        if (c > 0) out << ',';
        out << format_double(seq.xs(t, c));
      }
      out << "],\"y\":" << seq.ys[t] << "}\n";
    }
  }
}

std::vector<LabeledSequence> read_sequences_csv(const std::string& path,
                                                std::ifstream& in) {
  std::string line;
  std::int64_t line_no = 0;
  if (!std::getline(in, line)) throw ValidationError(path + ": empty dataset file");
  ++line_no;
  const auto header = split_csv(line);
  if (header.size() < 4 || header[0] != "seq_id" || header[1] != "t" ||
      header.back() != "y") {
    fail_at(path, line_no, "malformed header");
  }
  const int m = static_cast<int>(header.size()) - 3;

  RowAccumulator acc;
  bool any = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (static_cast<int>(fields.size()) != m + 3) {
      fail_at(path, line_no, "ragged row: expected " + std::to_string(m + 3) +
                                 " fields, got " +
                                 std::to_string(fields.size()));
    }
    const auto seq_id = parse_int_strict(fields[0], path, line_no);
    const auto t = parse_int_strict(fields[1], path, line_no);
    std::vector<double> x(m);
    for (int c = 0; c < m; ++c) {
      x[c] = parse_double_strict(fields[2 + c], path, line_no);
    }
    const int y = parse_label(parse_int_strict(fields[2 + m], path, line_no),
                              path, line_no);
    acc.add(seq_id, t, std::move(x), y, path, line_no);
    any = true;
  }
  acc.flush();
  if (!any) throw ValidationError(path + ": empty dataset file");
  return std::move(acc.sequences);
}

std::vector<LabeledSequence> read_sequences_ndjson(const std::string& path,
                                                   std::ifstream& in) {
  RowAccumulator acc;
  std::string line;
  std::int64_t line_no = 0;
  bool any = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      fail_at(path, line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!record.is_object() || !record.contains("seq_id") ||
        !record.contains("t") || !record.contains("x") ||
        !record.contains("y")) {
      fail_at(path, line_no, "record must have seq_id, t, x, y");
    }
    if (!record["seq_id"].is_number_integer() ||
        !record["t"].is_number_integer() || !record["x"].is_array() ||
        !record["y"].is_number_integer()) {
      fail_at(path, line_no, "non-numeric field");
    }
    std::vector<double> x;
    for (const auto& v : record["x"]) {
      if (!v.is_number()) fail_at(path, line_no, "non-numeric sample entry");
      x.push_back(v.get<double>());
    }
    if (x.empty()) fail_at(path, line_no, "empty sample vector");
    const int y =
        parse_label(record["y"].get<std::int64_t>(), path, line_no);
    acc.add(record["seq_id"].get<std::int64_t>(),
            record["t"].get<std::int64_t>(), std::move(x), y, path, line_no);
    any = true;
  }
  acc.flush();
  if (!any) throw ValidationError(path + ": empty dataset file");
  return std::move(acc.sequences);
}

}  // namespace

FileFormat parse_format(const std::string& name) {
  if (name == "csv") return FileFormat::kCsv;
  if (name == "ndjson") return FileFormat::kNdjson;
  throw ValidationError("unknown format '" + name + "' (use csv or ndjson)");
}

std::string format_extension(FileFormat format) {
  return format == FileFormat::kCsv ? "csv" : "ndjson";
}

std::string format_double(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value,
                                    std::chars_format::general, 17);
  return std::string(buf, result.ptr);
}

void write_sequences(const std::string& path,
                     const std::vector<LabeledSequence>& sequences,
                     FileFormat format) {
  validate_dataset(sequences);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  if (format == FileFormat::kCsv) {
    write_sequences_csv(out, sequences);
  } else {
    write_sequences_ndjson(out, sequences);
  }
  if (!out) throw IoError("write failed: " + path);
}

std::vector<LabeledSequence> read_sequences(const std::string& path,
                                            FileFormat format) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  auto sequences = format == FileFormat::kCsv
                       ? read_sequences_csv(path, in)
                       : read_sequences_ndjson(path, in);
  validate_dataset(sequences);
  return sequences;
}

void write_dataset(const std::string& prefix, const Dataset& dataset,
                   FileFormat format) {
  dataset.config.validate();
  const std::string ext = format_extension(format);

  json meta;
  meta["kind"] = "assm-dataset";
  meta["format_version"] = 1;
  meta["n_train"] = dataset.config.n_train;
  meta["n_test"] = dataset.config.n_test;
  meta["seq_len"] = dataset.config.seq_len;
  meta["spike_prob"] = dataset.config.spike_prob;
  meta["amp_range"] = {dataset.config.amp_range.lo, dataset.config.amp_range.hi};
  meta["freq_range"] = {dataset.config.freq_range.lo,
                        dataset.config.freq_range.hi};
  meta["noise_std"] = dataset.config.noise_std;
  meta["spike_magnitude_range"] = {dataset.config.spike_magnitude_range.lo,
                                   dataset.config.spike_magnitude_range.hi};
  meta["channels"] = dataset.config.channels;
  meta["seed"] = dataset.config.seed;

  std::ofstream meta_out(prefix + ".meta.json", std::ios::trunc);
  if (!meta_out) throw IoError("cannot open for writing: " + prefix + ".meta.json");
  meta_out << meta.dump(2) << "\n";
  if (!meta_out) throw IoError("write failed: " + prefix + ".meta.json");

  write_sequences(prefix + ".train." + ext, dataset.train, format);
  write_sequences(prefix + ".test." + ext, dataset.test, format);
}

Dataset read_dataset(const std::string& prefix, FileFormat format) {
  const std::string meta_path = prefix + ".meta.json";
  std::ifstream meta_in(meta_path);
  if (!meta_in) throw IoError("cannot open: " + meta_path);
  json meta;
  try {
    meta_in >> meta;
  } catch (const json::parse_error& e) {
    throw ValidationError(meta_path + ": invalid JSON: " + e.what());
  }
  if (meta.value("kind", "") != "assm-dataset") {
    throw ValidationError(meta_path + ": not a dataset metadata file");
  }

  Dataset ds;
  try {
    ds.config.n_train = meta.at("n_train").get<int>();
    ds.config.n_test = meta.at("n_test").get<int>();
    ds.config.seq_len = meta.at("seq_len").get<int>();
    ds.config.spike_prob = meta.at("spike_prob").get<double>();
    ds.config.amp_range = {meta.at("amp_range")[0].get<double>(),
                           meta.at("amp_range")[1].get<double>()};
    ds.config.freq_range = {meta.at("freq_range")[0].get<double>(),
                            meta.at("freq_range")[1].get<double>()};
    ds.config.noise_std = meta.at("noise_std").get<double>();
    ds.config.spike_magnitude_range = {
        meta.at("spike_magnitude_range")[0].get<double>(),
        meta.at("spike_magnitude_range")[1].get<double>()};
    ds.config.channels = meta.at("channels").get<int>();
    ds.config.seed = meta.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ValidationError(meta_path + ": " + e.what());
  }

  const std::string ext = format_extension(format);
  ds.train = read_sequences(prefix + ".train." + ext, format);
  ds.test = read_sequences(prefix + ".test." + ext, format);
  if (static_cast<int>(ds.train.size()) != ds.config.n_train ||
      static_cast<int>(ds.test.size()) != ds.config.n_test) {
    throw ValidationError(prefix + ": sequence counts disagree with metadata");
  }
  return ds;
}

SampleRecord parse_sample_record(const std::string& line,
                                 std::int64_t line_number) {
  json record;
  try {
    record = json::parse(line);
  } catch (const json::parse_error& e) {
    fail_at("stdin", line_number, std::string("invalid JSON: ") + e.what());
  }
  if (!record.is_object() || !record.contains("t") || !record.contains("x")) {
    fail_at("stdin", line_number, "record must have t and x");
  }
  if (!record["t"].is_number_integer() || !record["x"].is_array()) {
    fail_at("stdin", line_number, "non-numeric field");
  }
  SampleRecord sample;
  sample.t = record["t"].get<std::int64_t>();
  sample.x.resize(static_cast<Eigen::Index>(record["x"].size()));
  Eigen::Index i = 0;
  for (const auto& v : record["x"]) {
    if (!v.is_number()) fail_at("stdin", line_number, "non-numeric sample entry");
    sample.x(i++) = v.get<double>();
  }
  if (sample.x.size() == 0) fail_at("stdin", line_number, "empty sample vector");
  if (record.contains("y") && !record["y"].is_null()) {
    if (!record["y"].is_number_integer()) {
      fail_at("stdin", line_number, "label must be an integer");
    }
    sample.y = parse_label(record["y"].get<std::int64_t>(), "stdin",
                           line_number);
  }
  return sample;
}

std::string verdict_to_json(const Verdict& verdict) {
  std::ostringstream out;
  out << "{\"t\":" << verdict.t << ",\"score\":" << format_double(verdict.score)
      << ",\"is_anomaly\":" << (verdict.is_anomaly ? "true" : "false") << "}";
  return out.str();
}

}  // namespace assm
