#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qbar/error.hpp"
#include "qbar/features.hpp"
#include "qbar/peqad.hpp"
#include "qbar/scoring.hpp"

namespace qbar {

// ---------------------------------------------------------------------------
// Embedding files (.qemb)
//
//   magic "QBAR" | u32 version | u32 block count |
//   per block: u32 name length, UTF-8 name, u32 rows, u32 dim,
//              rows*dim float32, row-major
//
// All integers and floats little-endian. Values are stored as float32;
// computation happens in double after load.
// ---------------------------------------------------------------------------

inline constexpr uint32_t kEmbeddingVersion = 1;

struct EmbeddingFile {
  struct Block {
    std::string name;
    uint32_t rows = 0;
    uint32_t dim = 0;
    std::vector<float> values;  // rows * dim, row-major
  };
  std::vector<Block> blocks;
};

std::vector<std::byte> encode_embedding(const EmbeddingFile& file);
EmbeddingFile decode_embedding(std::span<const std::byte> bytes);

void write_embedding(const std::filesystem::path& path,
                     const EmbeddingFile& file);
EmbeddingFile read_embedding(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Dataset manifest (JSON)
// ---------------------------------------------------------------------------

inline constexpr int kManifestVersion = 1;

enum class Label { normal, splice, inject };
enum class Split { train, validation, test };

const char* label_name(Label l);
const char* split_name(Split s);
std::optional<Label> label_from_name(std::string_view s);
std::optional<Split> split_from_name(std::string_view s);

struct CreatorEntry {
  std::string id;
  uint64_t profile_seed = 0;
};

struct VideoEntry {
  std::string id;
  std::string creator_id;
  int index = 0;  // temporal order within the creator
  Label label = Label::normal;
  Split split = Split::train;
  std::string path;  // embedding file, relative to the manifest
};

struct DatasetManifest {
  int schema_version = kManifestVersion;
  std::vector<std::pair<std::string, size_t>> modalities;  // name -> dim
  std::vector<CreatorEntry> creators;
  std::vector<VideoEntry> videos;
  std::vector<std::string> sensational_corpus;  // embedding paths
  std::filesystem::path base_dir;               // set on load; not serialized
};

std::string encode_manifest(const DatasetManifest& manifest);
void save_manifest(const std::filesystem::path& path,
                   const DatasetManifest& manifest);

/// Parses and eagerly validates: schema, closed vocabularies, unique video
/// ids, referenced files exist, and per-creator temporal ordering
/// (max train index < min validation index <= ... < min test index).
DatasetManifest load_manifest(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Model checkpoints (.qbck)
//
//   magic "QBCK" | u32 version | u32 header length | header JSON |
//   theta (f64 * P) | center (f64 * 2*2^n, interleaved re/im) | w_mut (f64 * D)
// ---------------------------------------------------------------------------

inline constexpr uint32_t kCheckpointVersion = 1;

struct ModelCheckpoint {
  int schema_version = kCheckpointVersion;
  std::string creator_id;
  AnsatzConfig ansatz;
  TrainConfig train;
  std::optional<ProjectionSpec> projection;
  std::vector<double> theta_star;
  std::vector<cdouble> center;  // unit norm
  std::vector<double> w_mut;
  ScoreNormalizer quant_norm;
  ScoreNormalizer dir_norm;
  std::optional<DecisionConfig> decision;  // present once calibrated

  bool operator==(const ModelCheckpoint&) const = default;
};

std::vector<std::byte> encode_model(const ModelCheckpoint& model);
ModelCheckpoint decode_model(std::span<const std::byte> bytes);

void save_model(const std::filesystem::path& path,
                const ModelCheckpoint& model);
ModelCheckpoint load_model(const std::filesystem::path& path);

// Small shared file helpers.
std::vector<std::byte> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::byte> bytes);
/// Writes only when the content differs; returns true when the file was
/// already byte-identical.
bool write_file_if_changed(const std::filesystem::path& path,
                           std::span<const std::byte> bytes);

}  // namespace qbar
