#include "assm/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace assm {

namespace {

constexpr char kMagic[8] = {'A', 'S', 'S', 'M', 'C', 'K', 'P', 'T'};

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    hash ^= b;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_i64(std::string& out, std::int64_t v) {
  put_u64(out, static_cast<std::uint64_t>(v));
}

void put_f64(std::string& out, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, sizeof(v));
  put_u64(out, v);
}

void put_matrix(std::string& out, const Mat& m) {
  put_i64(out, m.rows());
  put_i64(out, m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) put_f64(out, m(r, c));
  }
}

void put_vector(std::string& out, const Vec& v) {
  put_i64(out, v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) put_f64(out, v(i));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(
               static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(
               static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    }
    pos_ += 8;
    return v;
  }

  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }

  unsigned char byte() {
    need(1);
    return static_cast<unsigned char>(bytes_[pos_++]);
  }

  double f64() {
    const std::uint64_t v = u64();
    double d;
    std::memcpy(&d, &v, sizeof(d));
    return d;
  }

  Mat matrix() {
    const auto rows = i64();
    const auto cols = i64();
    if (rows < 0 || cols < 0 || rows > (1 << 24) || cols > (1 << 24)) {
      throw IoError("checkpoint: implausible tensor shape");
    }
    Mat m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = f64();
    }
    return m;
  }

  Vec vector() {
    const auto size = i64();
    if (size < 0 || size > (1 << 24)) {
      throw IoError("checkpoint: implausible vector size");
    }
    Vec v(size);
    for (Eigen::Index i = 0; i < size; ++i) v(i) = f64();
    return v;
  }

  bool exhausted() const { return pos_ == bytes_.size(); }

 private:
  void need(size_t count) {
    if (pos_ + count > bytes_.size()) {
      throw IoError("checkpoint: truncated file");
    }
  }

  const std::string& bytes_;
  size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
  checkpoint.config.validate();
  checkpoint.params.validate_shapes(checkpoint.config);

  std::string payload;
  put_u64(payload, checkpoint.config.seed);
  put_i64(payload, checkpoint.config.input_dim);
  put_i64(payload, checkpoint.config.state_dim);
  payload.push_back(
      checkpoint.config.activation == Activation::kTanh ? '\x00' : '\x01');
  payload.push_back(
      checkpoint.config.distance == Distance::kL2 ? '\x00' : '\x01');

  put_matrix(payload, checkpoint.params.A);
  put_matrix(payload, checkpoint.params.B);
  put_matrix(payload, checkpoint.params.C);
  put_matrix(payload, checkpoint.params.D);
  put_matrix(payload, checkpoint.params.E);
  put_f64(payload, checkpoint.params.gamma);
  put_matrix(payload, checkpoint.params.W_f);
  put_vector(payload, checkpoint.params.b_f);
  put_f64(payload, checkpoint.params.w_s);
  put_f64(payload, checkpoint.params.b_s);

  put_f64(payload, checkpoint.threshold);
  put_u64(payload, checkpoint.meta.train_seed);
  put_i64(payload, checkpoint.meta.epochs);
  put_f64(payload, checkpoint.meta.final_total_loss);
  put_f64(payload, checkpoint.meta.final_recon_loss);
  put_f64(payload, checkpoint.meta.final_class_loss);

  std::string out(kMagic, sizeof(kMagic));
  put_u32(out, static_cast<std::uint32_t>(checkpoint.format_version));
  out += payload;
  put_u64(out, fnv1a(payload));

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open for writing: " + path);
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw IoError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open: " + path);
  std::ostringstream buffer;
  buffer << file.rdbuf();
  const std::string bytes = buffer.str();

  if (bytes.size() < sizeof(kMagic) + 4 + 8) {
    throw IoError("checkpoint: truncated file");
  }
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw IoError("checkpoint: bad magic header");
  }

  const std::string head = bytes.substr(sizeof(kMagic), 4);
  Reader head_reader(head);
  const std::uint32_t version = head_reader.u32();
  if (version != Checkpoint::kFormatVersion) {
    std::ostringstream msg;
    msg << "checkpoint: unsupported format version " << version
        << " (supported: " << Checkpoint::kFormatVersion << ")";
    throw IoError(msg.str());
  }

  const std::string payload =
      bytes.substr(sizeof(kMagic) + 4, bytes.size() - sizeof(kMagic) - 4 - 8);
  const std::string trailer = bytes.substr(bytes.size() - 8);
  Reader trailer_reader(trailer);
  if (trailer_reader.u64() != fnv1a(payload)) {
    throw IoError("checkpoint: checksum mismatch (corrupt file)");
  }

  Reader r(payload);
  Checkpoint ck;
  ck.format_version = static_cast<int>(version);
  ck.config.seed = r.u64();
  ck.config.input_dim = static_cast<int>(r.i64());
  ck.config.state_dim = static_cast<int>(r.i64());
  ck.config.activation =
      r.byte() == 0 ? Activation::kTanh : Activation::kIdentity;
  ck.config.distance = r.byte() == 0 ? Distance::kL2 : Distance::kSquaredL2;

  ck.params.A = r.matrix();
  ck.params.B = r.matrix();
  ck.params.C = r.matrix();
  ck.params.D = r.matrix();
  ck.params.E = r.matrix();
  ck.params.gamma = r.f64();
  ck.params.W_f = r.matrix();
  ck.params.b_f = r.vector();
  ck.params.w_s = r.f64();
  ck.params.b_s = r.f64();

  ck.threshold = r.f64();
  ck.meta.train_seed = r.u64();
  ck.meta.epochs = static_cast<int>(r.i64());
  ck.meta.final_total_loss = r.f64();
  ck.meta.final_recon_loss = r.f64();
  ck.meta.final_class_loss = r.f64();
  if (!r.exhausted()) throw IoError("checkpoint: trailing bytes in payload");

  ck.config.validate();
  ck.params.validate_shapes(ck.config);
  return ck;
}

}  // namespace assm
