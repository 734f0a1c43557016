#include "qbar/persistence.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include "json.hpp"

namespace qbar {
namespace {

using nlohmann::json;

// All binary payloads are little-endian. The writers below assume a
// little-endian host (checked at startup in debug builds; every supported
// target here is).

class ByteWriter {
 public:
  void u32(uint32_t v) { append(&v, sizeof v); }
  void f32(float v) { append(&v, sizeof v); }
  void f64(double v) { append(&v, sizeof v); }
  void bytes(const void* p, size_t n) { append(p, n); }
  std::vector<std::byte> take() { return std::move(buf_); }

 private:
  void append(const void* p, size_t n) {
    const auto* b = static_cast<const std::byte*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  std::vector<std::byte> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::byte> bytes) : bytes_(bytes) {}

  uint32_t u32() {
    uint32_t v;
    copy(&v, sizeof v);
    return v;
  }
  float f32() {
    float v;
    copy(&v, sizeof v);
    return v;
  }
  double f64() {
    double v;
    copy(&v, sizeof v);
    return v;
  }
  std::string str(size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  void raw(void* dst, size_t n) { copy(dst, n); }
  size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(size_t n) {
    if (bytes_.size() - pos_ < n)
      fail(ErrorCode::TruncatedFile,
           "need " + std::to_string(n) + " more bytes, have " +
               std::to_string(bytes_.size() - pos_));
  }
  void copy(void* dst, size_t n) {
    need(n);
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }

  std::span<const std::byte> bytes_;
  size_t pos_ = 0;
};

constexpr char kEmbeddingMagic[4] = {'Q', 'B', 'A', 'R'};
constexpr char kCheckpointMagic[4] = {'Q', 'B', 'C', 'K'};

void check_magic(ByteReader& r, const char (&magic)[4], const char* what) {
  const std::string got = r.str(4);
  if (std::memcmp(got.data(), magic, 4) != 0)
    fail(ErrorCode::BadMagic, std::string("not a ") + what + " file");
}

}  // namespace

std::vector<std::byte> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, "cannot open " + path.string());
  std::vector<char> data((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorCode::IoFailure, "read failed for " + path.string());
  const auto* p = reinterpret_cast<const std::byte*>(data.data());
  return {p, p + data.size()};
}

void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::byte> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::IoFailure, "write failed for " + path.string());
}

bool write_file_if_changed(const std::filesystem::path& path,
                           std::span<const std::byte> bytes) {
  std::error_code ec;
  if (std::filesystem::exists(path, ec)) {
    const auto existing = read_file_bytes(path);
    if (existing.size() == bytes.size() &&
        std::memcmp(existing.data(), bytes.data(), bytes.size()) == 0)
      return true;
  }
  write_file_bytes(path, bytes);
  return false;
}

// ---------------------------------------------------------------------------
// Embeddings
// ---------------------------------------------------------------------------

std::vector<std::byte> encode_embedding(const EmbeddingFile& file) {
  ByteWriter w;
  w.bytes(kEmbeddingMagic, 4);
  w.u32(kEmbeddingVersion);
  w.u32(static_cast<uint32_t>(file.blocks.size()));
  for (const auto& b : file.blocks) {
    if (b.values.size() != size_t(b.rows) * b.dim)
      fail(ErrorCode::DimensionMismatch,
           "block " + b.name + " value count does not match rows*dim");
    for (float v : b.values)
      if (!std::isfinite(v))
        fail(ErrorCode::NonFiniteValue, "non-finite value in block " + b.name);
    w.u32(static_cast<uint32_t>(b.name.size()));
    w.bytes(b.name.data(), b.name.size());
    w.u32(b.rows);
    w.u32(b.dim);
    w.bytes(b.values.data(), b.values.size() * sizeof(float));
  }
  return w.take();
}

EmbeddingFile decode_embedding(std::span<const std::byte> bytes) {
  ByteReader r(bytes);
  check_magic(r, kEmbeddingMagic, "QBAR embedding");
  const uint32_t version = r.u32();
  if (version != kEmbeddingVersion)
    fail(ErrorCode::UnsupportedVersion,
         "embedding version " + std::to_string(version));
  const uint32_t count = r.u32();
  EmbeddingFile out;
  for (uint32_t i = 0; i < count; ++i) {
    EmbeddingFile::Block b;
    const uint32_t name_len = r.u32();
    b.name = r.str(name_len);
    b.rows = r.u32();
    b.dim = r.u32();
    const uint64_t n = uint64_t(b.rows) * b.dim;
    if (n > r.remaining() / sizeof(float))
      fail(ErrorCode::TruncatedFile,
           "declared " + std::to_string(n) + " values exceed payload");
    b.values.resize(n);
    r.raw(b.values.data(), n * sizeof(float));
    for (float v : b.values)
      if (!std::isfinite(v))
        fail(ErrorCode::NonFiniteValue, "non-finite value in block " + b.name);
    out.blocks.push_back(std::move(b));
  }
  if (r.remaining() != 0)
    fail(ErrorCode::CorruptPayload, "trailing bytes after embedding payload");
  return out;
}

void write_embedding(const std::filesystem::path& path,
                     const EmbeddingFile& file) {
  write_file_bytes(path, encode_embedding(file));
}

EmbeddingFile read_embedding(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    fail(ErrorCode::MissingFile, path.string() + " does not exist");
  return decode_embedding(read_file_bytes(path));
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

const char* label_name(Label l) {
  switch (l) {
    case Label::normal: return "normal";
    case Label::splice: return "splice";
    case Label::inject: return "inject";
  }
  return "?";
}

const char* split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::test: return "test";
  }
  return "?";
}

std::optional<Label> label_from_name(std::string_view s) {
  for (Label l : {Label::normal, Label::splice, Label::inject})
    if (s == label_name(l)) return l;
  return std::nullopt;
}

std::optional<Split> split_from_name(std::string_view s) {
  for (Split v : {Split::train, Split::validation, Split::test})
    if (s == split_name(v)) return v;
  return std::nullopt;
}

std::string encode_manifest(const DatasetManifest& manifest) {
  json j;
  j["schema_version"] = manifest.schema_version;
  j["modalities"] = json::array();
  for (const auto& [name, dim] : manifest.modalities)
    j["modalities"].push_back({{"name", name}, {"dim", dim}});
  j["creators"] = json::array();
  for (const auto& c : manifest.creators)
    j["creators"].push_back({{"id", c.id}, {"profile_seed", c.profile_seed}});
  j["videos"] = json::array();
  for (const auto& v : manifest.videos)
    j["videos"].push_back({{"id", v.id},
                           {"creator_id", v.creator_id},
                           {"index", v.index},
                           {"label", label_name(v.label)},
                           {"split", split_name(v.split)},
                           {"path", v.path}});
  j["sensational_corpus"] = manifest.sensational_corpus;
  return j.dump(2) + "\n";
}

void save_manifest(const std::filesystem::path& path,
                   const DatasetManifest& manifest) {
  const std::string text = encode_manifest(manifest);
  const auto* p = reinterpret_cast<const std::byte*>(text.data());
  write_file_bytes(path, {p, p + text.size()});
}

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& where) {
  for (const auto& [key, _] : j.items())
    if (!allowed.contains(key))
      fail(ErrorCode::SchemaViolation,
           "unknown key '" + key + "' in " + where);
}

}  // namespace

DatasetManifest load_manifest(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    fail(ErrorCode::MissingFile, path.string() + " does not exist");
  json j;
  try {
    std::ifstream in(path);
    j = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::SchemaViolation, std::string("manifest parse: ") + e.what());
  }

  DatasetManifest m;
  m.base_dir = path.parent_path();
  try {
    check_keys(j, {"schema_version", "modalities", "creators", "videos",
                   "sensational_corpus"},
               "manifest");
    m.schema_version = j.at("schema_version").get<int>();
    if (m.schema_version != kManifestVersion)
      fail(ErrorCode::VersionMismatch,
           "manifest schema_version " + std::to_string(m.schema_version));
    for (const auto& e : j.at("modalities")) {
      check_keys(e, {"name", "dim"}, "modalities entry");
      const std::string name = e.at("name").get<std::string>();
      if (!modality_from_name(name))
        fail(ErrorCode::SchemaViolation, "unknown modality '" + name + "'");
      m.modalities.emplace_back(name, e.at("dim").get<size_t>());
    }
    for (const auto& e : j.at("creators")) {
      check_keys(e, {"id", "profile_seed"}, "creators entry");
      m.creators.push_back(
          {e.at("id").get<std::string>(), e.at("profile_seed").get<uint64_t>()});
    }
    for (const auto& e : j.at("videos")) {
      check_keys(e, {"id", "creator_id", "index", "label", "split", "path"},
                 "videos entry");
      VideoEntry v;
      v.id = e.at("id").get<std::string>();
      v.creator_id = e.at("creator_id").get<std::string>();
      v.index = e.at("index").get<int>();
      const auto label = label_from_name(e.at("label").get<std::string>());
      const auto split = split_from_name(e.at("split").get<std::string>());
      if (!label)
        fail(ErrorCode::SchemaViolation,
             "video " + v.id + " has unknown label");
      if (!split)
        fail(ErrorCode::SchemaViolation,
             "video " + v.id + " has unknown split");
      v.label = *label;
      v.split = *split;
      v.path = e.at("path").get<std::string>();
      m.videos.push_back(std::move(v));
    }
    m.sensational_corpus =
        j.at("sensational_corpus").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    fail(ErrorCode::SchemaViolation, std::string("manifest schema: ") + e.what());
  }

  // Eager validation: ids, files, temporal ordering.
  std::set<std::string> video_ids;
  std::set<std::string> creator_ids;
  for (const auto& c : m.creators)
    if (!creator_ids.insert(c.id).second)
      fail(ErrorCode::SchemaViolation, "duplicate creator id " + c.id);
  for (const auto& v : m.videos) {
    if (!video_ids.insert(v.id).second)
      fail(ErrorCode::SchemaViolation, "duplicate video id " + v.id);
    if (!creator_ids.contains(v.creator_id))
      fail(ErrorCode::SchemaViolation,
           "video " + v.id + " references unknown creator " + v.creator_id);
    if (!std::filesystem::exists(m.base_dir / v.path))
      fail(ErrorCode::MissingFile, "embedding " + v.path + " does not exist");
  }
  for (const auto& p : m.sensational_corpus)
    if (!std::filesystem::exists(m.base_dir / p))
      fail(ErrorCode::MissingFile, "corpus file " + p + " does not exist");

  struct Range {
    int max_train = std::numeric_limits<int>::min();
    int min_val = std::numeric_limits<int>::max();
    int max_val = std::numeric_limits<int>::min();
    int min_test = std::numeric_limits<int>::max();
  };
  std::map<std::string, Range> ranges;
  for (const auto& v : m.videos) {
    Range& r = ranges[v.creator_id];
    switch (v.split) {
      case Split::train: r.max_train = std::max(r.max_train, v.index); break;
      case Split::validation:
        r.min_val = std::min(r.min_val, v.index);
        r.max_val = std::max(r.max_val, v.index);
        break;
      case Split::test: r.min_test = std::min(r.min_test, v.index); break;
    }
  }
  for (const auto& [creator, r] : ranges) {
    if (r.max_train >= r.min_val || r.max_train >= r.min_test)
      fail(ErrorCode::TemporalLeak,
           "creator " + creator + ": training index does not predate "
           "validation/test");
    if (r.max_val >= r.min_test)
      fail(ErrorCode::TemporalLeak,
           "creator " + creator + ": validation index does not predate test");
  }
  return m;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

std::vector<std::byte> encode_model(const ModelCheckpoint& model) {
  if (model.theta_star.size() != size_t(model.ansatz.parameter_count()))
    fail(ErrorCode::CorruptPayload, "theta length does not match ansatz");
  if (model.center.size() != size_t(1) << model.ansatz.n_qubits)
    fail(ErrorCode::CorruptPayload, "center length does not match ansatz");

  json h;
  h["schema_version"] = model.schema_version;
  h["creator_id"] = model.creator_id;
  h["ansatz"] = {{"n_qubits", model.ansatz.n_qubits},
                 {"n_layers", model.ansatz.n_layers}};
  h["train"] = {{"lambda", model.train.lambda},
                {"learning_rate", model.train.learning_rate},
                {"epochs", model.train.epochs},
                {"batch_size", model.train.batch_size},
                {"seed", model.train.seed},
                {"optimizer", optimizer_name(model.train.optimizer)}};
  if (model.projection)
    h["projection"] = {{"seed", model.projection->seed},
                       {"in_dim", model.projection->in_dim},
                       {"out_dim", model.projection->out_dim}};
  else
    h["projection"] = nullptr;
  h["normalizers"] = {
      {"quant", {{"mean", model.quant_norm.mean}, {"std", model.quant_norm.std_dev}}},
      {"dir", {{"mean", model.dir_norm.mean}, {"std", model.dir_norm.std_dev}}}};
  if (model.decision) {
    h["decision"] = {{"gamma", model.decision->gamma}};
    // tau may be +-infinity (degenerate calibrations); JSON has no inf
    if (std::isfinite(model.decision->tau))
      h["decision"]["tau"] = model.decision->tau;
    else
      h["decision"]["tau"] = model.decision->tau > 0 ? "inf" : "-inf";
  } else {
    h["decision"] = nullptr;
  }
  h["sizes"] = {{"theta", model.theta_star.size()},
                {"center", model.center.size()},
                {"w_mut", model.w_mut.size()}};
  const std::string header = h.dump();

  ByteWriter w;
  w.bytes(kCheckpointMagic, 4);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<uint32_t>(header.size()));
  w.bytes(header.data(), header.size());
  w.bytes(model.theta_star.data(), model.theta_star.size() * sizeof(double));
  w.bytes(model.center.data(), model.center.size() * sizeof(cdouble));
  w.bytes(model.w_mut.data(), model.w_mut.size() * sizeof(double));
  return w.take();
}

ModelCheckpoint decode_model(std::span<const std::byte> bytes) {
  ByteReader r(bytes);
  check_magic(r, kCheckpointMagic, "QBAR checkpoint");
  const uint32_t version = r.u32();
  if (version != kCheckpointVersion)
    fail(ErrorCode::VersionMismatch,
         "checkpoint version " + std::to_string(version));
  const uint32_t header_len = r.u32();
  const std::string header = r.str(header_len);

  ModelCheckpoint m;
  size_t theta_n = 0, center_n = 0, wmut_n = 0;
  try {
    const json h = json::parse(header);
    check_keys(h, {"schema_version", "creator_id", "ansatz", "train",
                   "projection", "normalizers", "decision", "sizes"},
               "checkpoint header");
    m.schema_version = h.at("schema_version").get<int>();
    m.creator_id = h.at("creator_id").get<std::string>();
    m.ansatz.n_qubits = h.at("ansatz").at("n_qubits").get<int>();
    m.ansatz.n_layers = h.at("ansatz").at("n_layers").get<int>();
    const json& t = h.at("train");
    m.train.lambda = t.at("lambda").get<double>();
    m.train.learning_rate = t.at("learning_rate").get<double>();
    m.train.epochs = t.at("epochs").get<int>();
    m.train.batch_size = t.at("batch_size").get<int>();
    m.train.seed = t.at("seed").get<uint64_t>();
    const auto opt = optimizer_from_name(t.at("optimizer").get<std::string>());
    if (!opt) fail(ErrorCode::CorruptPayload, "unknown optimizer name");
    m.train.optimizer = *opt;
    if (!h.at("projection").is_null()) {
      ProjectionSpec p;
      p.seed = h.at("projection").at("seed").get<uint64_t>();
      p.in_dim = h.at("projection").at("in_dim").get<size_t>();
      p.out_dim = h.at("projection").at("out_dim").get<size_t>();
      m.projection = p;
    }
    m.quant_norm.mean = h.at("normalizers").at("quant").at("mean").get<double>();
    m.quant_norm.std_dev = h.at("normalizers").at("quant").at("std").get<double>();
    m.dir_norm.mean = h.at("normalizers").at("dir").at("mean").get<double>();
    m.dir_norm.std_dev = h.at("normalizers").at("dir").at("std").get<double>();
    if (!h.at("decision").is_null()) {
      DecisionConfig d;
      d.gamma = h.at("decision").at("gamma").get<double>();
      const json& tau = h.at("decision").at("tau");
      if (tau.is_string()) {
        const double inf = std::numeric_limits<double>::infinity();
        if (tau.get<std::string>() == "inf") d.tau = inf;
        else if (tau.get<std::string>() == "-inf") d.tau = -inf;
        else fail(ErrorCode::CorruptPayload, "bad tau encoding");
      } else {
        d.tau = tau.get<double>();
      }
      m.decision = d;
    }
    theta_n = h.at("sizes").at("theta").get<size_t>();
    center_n = h.at("sizes").at("center").get<size_t>();
    wmut_n = h.at("sizes").at("w_mut").get<size_t>();
  } catch (const json::exception& e) {
    fail(ErrorCode::CorruptPayload, std::string("checkpoint header: ") + e.what());
  }

  const size_t expect =
      theta_n * sizeof(double) + center_n * sizeof(cdouble) +
      wmut_n * sizeof(double);
  if (r.remaining() != expect)
    fail(ErrorCode::CorruptPayload,
         "payload is " + std::to_string(r.remaining()) + " bytes, expected " +
             std::to_string(expect));

  m.theta_star.resize(theta_n);
  r.raw(m.theta_star.data(), theta_n * sizeof(double));
  m.center.resize(center_n);
  r.raw(m.center.data(), center_n * sizeof(cdouble));
  m.w_mut.resize(wmut_n);
  r.raw(m.w_mut.data(), wmut_n * sizeof(double));

  // structural re-validation
  if (m.theta_star.size() != size_t(m.ansatz.parameter_count()))
    fail(ErrorCode::CorruptPayload, "parameter count does not match ansatz");
  if (m.center.size() != size_t(1) << m.ansatz.n_qubits)
    fail(ErrorCode::CorruptPayload, "center length does not match ansatz");
  double norm2 = 0.0;
  for (const auto& z : m.center) norm2 += std::norm(z);
  if (std::abs(norm2 - 1.0) > 1e-6)
    fail(ErrorCode::CorruptPayload,
         "center norm^2 = " + std::to_string(norm2) + " is not 1");
  return m;
}

void save_model(const std::filesystem::path& path,
                const ModelCheckpoint& model) {
  write_file_bytes(path, encode_model(model));
}

ModelCheckpoint load_model(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    fail(ErrorCode::MissingFile, path.string() + " does not exist");
  return decode_model(read_file_bytes(path));
}

}  // namespace qbar
