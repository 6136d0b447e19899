#include "menkf/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "menkf/error.hpp"

namespace menkf::io {

std::string format_double(double x) {
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc()) throw Error(ErrorCode::kIo, "cannot format number");
  return std::string(buf.data(), end);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

// ---------------------------------------------------------------- datasets

std::string dataset_csv(const Dataset& data) {
  const Eigen::Index m = data.size();
  const bool has_prob = data.true_prob.size() == m && m > 0;
  const bool has_label = static_cast<Eigen::Index>(data.labels.size()) == m && m > 0;
  std::string out;
  for (Eigen::Index j = 0; j < data.features_f.cols(); ++j) {
    out += "emb_f_" + std::to_string(j) + ",";
  }
  for (Eigen::Index j = 0; j < data.features_g.cols(); ++j) {
    out += "emb_g_" + std::to_string(j) + ",";
  }
  out += "target_logit";
  if (has_prob) out += ",true_prob";
  if (has_label) out += ",label";
  out += "\n";
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < data.features_f.cols(); ++j) {
      out += format_double(data.features_f(i, j)) + ",";
    }
    for (Eigen::Index j = 0; j < data.features_g.cols(); ++j) {
      out += format_double(data.features_g(i, j)) + ",";
    }
    out += format_double(data.target_logit(i));
    if (has_prob) out += "," + format_double(data.true_prob(i));
    if (has_label) out += "," + std::to_string(data.labels[static_cast<std::size_t>(i)]);
    out += "\n";
  }
  return out;
}

void write_dataset_csv(const fs::path& path, const Dataset& data) {
  write_file(path, dataset_csv(data));
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

Dataset parse_dataset_csv(std::string_view text, const std::string& source) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = trim(text.substr(start, nl - start));
    lines.push_back(line);
    start = nl + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw Error(ErrorCode::kParse, source + ": empty dataset file");

  auto fail = [&](std::size_t row, const std::string& column, const std::string& why) {
    throw Error(ErrorCode::kParse,
                source + ": row " + std::to_string(row) + ", column '" + column + "': " + why);
  };

  // Header: emb_f_* then emb_g_* then target_logit [true_prob] [label].
  const auto header = split_fields(lines.front());
  std::vector<std::string> names;
  for (auto h : header) names.emplace_back(trim(h));
  std::size_t p = 0;
  std::size_t q = 0;
  std::size_t col = 0;
  while (col < names.size() && names[col] == "emb_f_" + std::to_string(p)) {
    ++p;
    ++col;
  }
  while (col < names.size() && names[col] == "emb_g_" + std::to_string(q)) {
    ++q;
    ++col;
  }
  if (p == 0) fail(1, col < names.size() ? names[col] : "", "expected emb_f_0");
  if (q == 0) fail(1, col < names.size() ? names[col] : "", "expected emb_g_0");
  if (col >= names.size() || names[col] != "target_logit") {
    fail(1, col < names.size() ? names[col] : "", "expected target_logit");
  }
  ++col;
  bool has_prob = false;
  bool has_label = false;
  if (col < names.size() && names[col] == "true_prob") {
    has_prob = true;
    ++col;
  }
  if (col < names.size() && names[col] == "label") {
    has_label = true;
    ++col;
  }
  if (col != names.size()) fail(1, names[col], "unexpected column");

  const auto m = static_cast<Eigen::Index>(lines.size() - 1);
  Dataset d;
  d.features_f.resize(m, static_cast<Eigen::Index>(p));
  d.features_g.resize(m, static_cast<Eigen::Index>(q));
  d.target_logit.resize(m);
  if (has_prob) d.true_prob.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const std::size_t row = static_cast<std::size_t>(i) + 2;
    const auto fields = split_fields(lines[static_cast<std::size_t>(i) + 1]);
    if (fields.size() != names.size()) {
      fail(row, fields.size() < names.size() ? names[fields.size()] : "<extra>",
           "expected " + std::to_string(names.size()) + " fields, found " +
               std::to_string(fields.size()));
    }
    auto number = [&](std::size_t c) {
      const std::string_view f = trim(fields[c]);
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        fail(row, names[c], "not a number: '" + std::string(f) + "'");
      }
      if (!std::isfinite(v)) fail(row, names[c], "non-finite value");
      return v;
    };
    std::size_t c = 0;
    for (std::size_t j = 0; j < p; ++j, ++c) d.features_f(i, static_cast<Eigen::Index>(j)) = number(c);
    for (std::size_t j = 0; j < q; ++j, ++c) d.features_g(i, static_cast<Eigen::Index>(j)) = number(c);
    d.target_logit(i) = number(c++);
    if (has_prob) {
      const double pr = number(c);
      if (pr < 0.0 || pr > 1.0) fail(row, names[c], "probability outside [0, 1]");
      d.true_prob(i) = pr;
      ++c;
    }
    if (has_label) {
      const double lab = number(c);
      if (lab != 0.0 && lab != 1.0) fail(row, names[c], "label must be 0 or 1");
      d.labels.push_back(static_cast<int>(lab));
    }
  }
  return d;
}

Dataset read_dataset_csv(const fs::path& path) {
  return parse_dataset_csv(read_file(path), path.string());
}

// ------------------------------------------------------------- checkpoints

namespace {

class Writer {
 public:
  void bytes(std::string_view s) { buf_.append(s); }
  void u32(std::uint32_t v) {
    for (int k = 0; k < 4; ++k) buf_.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
  }
  void u64(std::uint64_t v) {
    for (int k = 0; k < 8; ++k) buf_.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  const std::string& str() const { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  Reader(std::string_view data, std::string source) : data_(data), source_(std::move(source)) {}

  std::string_view bytes(std::size_t n) {
    need(n);
    auto out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_++])) << (8 * k);
    }
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_++])) << (8 * k);
    }
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) {
      throw Error(ErrorCode::kParse, source_ + ": truncated checkpoint");
    }
  }
  std::string_view data_;
  std::string source_;
  std::size_t pos_ = 0;
};

constexpr std::string_view kMagic = "MENKFCKP";

void write_arm(Writer& w, const ArmSpec& arm) {
  w.u64(arm.input_dim);
  w.u32(static_cast<std::uint32_t>(arm.activation));
  w.u64(arm.hidden.size());
  for (std::size_t h : arm.hidden) w.u64(h);
}

ArmSpec read_arm(Reader& r, const std::string& source) {
  ArmSpec arm;
  arm.input_dim = r.u64();
  const std::uint32_t act = r.u32();
  if (act > static_cast<std::uint32_t>(Activation::kRelu)) {
    throw Error(ErrorCode::kParse, source + ": unknown activation tag");
  }
  arm.activation = static_cast<Activation>(act);
  const std::uint64_t depth = r.u64();
  if (depth > 1024) throw Error(ErrorCode::kParse, source + ": implausible depth");
  for (std::uint64_t k = 0; k < depth; ++k) arm.hidden.push_back(r.u64());
  return arm;
}

}  // namespace

void save_checkpoint(const fs::path& path, const Checkpoint& ckpt) {
  Writer w;
  w.bytes(kMagic);
  w.u32(kCheckpointVersion);
  write_arm(w, ckpt.arm_f);
  write_arm(w, ckpt.arm_g);
  w.u64(ckpt.config_hash);
  const Matrix& members = ckpt.ensemble.members();
  w.u64(static_cast<std::uint64_t>(members.rows()));
  w.u64(static_cast<std::uint64_t>(members.cols()));
  for (Eigen::Index i = 0; i < members.rows(); ++i) {
    for (Eigen::Index j = 0; j < members.cols(); ++j) w.f64(members(i, j));
  }
  write_file(path, w.str());
}

Checkpoint load_checkpoint(const fs::path& path) {
  const std::string raw = read_file(path);
  const std::string source = path.string();
  Reader r(raw, source);
  if (r.bytes(kMagic.size()) != kMagic) {
    throw Error(ErrorCode::kParse, source + ": not a checkpoint file");
  }
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::kParse,
                source + ": unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ckpt;
  ckpt.arm_f = read_arm(r, source);
  ckpt.arm_g = read_arm(r, source);
  ckpt.config_hash = r.u64();
  const std::uint64_t n = r.u64();
  const std::uint64_t d = r.u64();
  if (d != ckpt.layout().dim()) {
    throw Error(ErrorCode::kParse, source + ": member width does not match arm specs");
  }
  if (n > (raw.size() / 8) / std::max<std::uint64_t>(d, 1)) {
    throw Error(ErrorCode::kParse, source + ": truncated checkpoint");
  }
  Matrix members(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < members.rows(); ++i) {
    for (Eigen::Index j = 0; j < members.cols(); ++j) members(i, j) = r.f64();
  }
  if (!r.done()) throw Error(ErrorCode::kParse, source + ": trailing bytes in checkpoint");
  ckpt.ensemble = Ensemble(std::move(members));
  return ckpt;
}

// ------------------------------------------------------------ other outputs

void write_trace_csv(const fs::path& path, const TrainingTrace& trace) {
  std::string out = "step,pass,batch,arm_weight,noise_var,innovation_norm\n";
  std::size_t step = 0;
  for (const TraceRow& row : trace.rows) {
    out += std::to_string(step++) + "," + std::to_string(row.pass) + "," +
           std::to_string(row.batch) + "," + format_double(row.diagnostics.arm_weight) + "," +
           format_double(row.diagnostics.noise_var) + "," +
           format_double(row.diagnostics.innovation_norm) + "\n";
  }
  write_file(path, out);
}

void write_intervals_csv(const fs::path& path, std::span<const PointSummary> summaries,
                         std::span<const double> truth) {
  if (summaries.size() != truth.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "intervals and truth lengths differ");
  }
  std::string out = "index,truth,point,median,lo,hi,width,covered\n";
  for (std::size_t k = 0; k < summaries.size(); ++k) {
    const PointSummary& s = summaries[k];
    const bool covered = s.lo <= truth[k] && truth[k] <= s.hi;
    out += std::to_string(k) + "," + format_double(truth[k]) + "," + format_double(s.point) +
           "," + format_double(s.median) + "," + format_double(s.lo) + "," +
           format_double(s.hi) + "," + format_double(s.width) + "," + (covered ? "1" : "0") +
           "\n";
  }
  write_file(path, out);
}

// ---------------------------------------------------------------- digests

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kIo, "SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int k = 0; k < len; ++k) {
    out.push_back(kHex[md[k] >> 4]);
    out.push_back(kHex[md[k] & 0xf]);
  }
  return out;
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_file(path)); }

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace menkf::io
