#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "qbar/features.hpp"
#include "qbar/persistence.hpp"

namespace qbar {

/// Per-creator generator parameters. Segments of a video are drawn around the
/// creator mean with an isotropic std; a per-modality trend direction gives
/// consecutive segments a within-video drift. Trend positions are centered
/// under the position weights, so the pooled vector of an unmutated video has
/// expectation exactly mu_m; only mutations that disturb segment order see
/// the trend.
struct CreatorProfile {
  std::string creator_id;
  uint64_t seed = 0;
  int segments_per_video = 12;  // K
  std::map<Modality, std::vector<double>> mean;
  std::map<Modality, std::vector<double>> trend;
  std::map<Modality, double> sigma;
  std::vector<double> position_weights;  // w_k = exp(-k/K), normalized
};

struct GeneratorConfig {
  std::map<Modality, size_t> dims = {{Modality::text, 32},
                                     {Modality::audio, 16},
                                     {Modality::visual, 32},
                                     {Modality::meta, 8}};
  int segments_per_video = 12;
  double sigma = 0.5;
  double mean_prior_scale = 3.0;
  double trend_scale = 2.5;
};

std::vector<double> position_weights(int k);

CreatorProfile gen_creator(uint64_t global_seed, size_t creator_index,
                           const GeneratorConfig& config);

struct SyntheticVideo {
  std::string creator_id;
  std::string video_id;
  int index = 0;  // temporal order
  Label label = Label::normal;
  // segment matrices, row-major (segment-major); rows may differ from K
  // after a deleting splice
  std::map<Modality, std::vector<double>> segments;
  std::map<Modality, size_t> segment_rows;
  std::map<Modality, std::vector<double>> pooled;
};

SyntheticVideo sample_video(const CreatorProfile& profile, int index);

struct SpliceSpec {
  bool permute = true;
  double delete_fraction = 0.25;  // in [0, 0.5]
};

struct InjectSpec {
  double strength = 2.0;   // s >= 0
  uint64_t axis_seed = 0;  // ground-truth sensational direction
};

struct MutationSpec {
  enum class Kind { splice, inject };
  Kind kind = Kind::splice;
  SpliceSpec splice;
  InjectSpec inject;
  uint64_t seed = 0;  // stream for the mutation's own randomness
};

/// Unit-norm ground-truth sensational direction in raw text-embedding space.
std::vector<double> sensational_direction(uint64_t axis_seed, size_t text_dim);

/// Applies a seeded permutation to segment order (all modalities together),
/// drops the last ceil(delta*K) segments after permutation, and re-pools with
/// the original position weights for the surviving positions.
SyntheticVideo mutate_splice(const SyntheticVideo& video,
                             const MutationSpec& spec,
                             const CreatorProfile& profile);

/// Replaces ceil(K/4) randomly chosen text segments with draws centered at
/// mu_text + trend_offset + strength * sigma_text * w_true; other modalities
/// are untouched. strength = 0 reproduces normal sampling statistics.
SyntheticVideo mutate_inject(const SyntheticVideo& video,
                             const MutationSpec& spec,
                             const CreatorProfile& profile);

struct DatasetPreset {
  size_t creators = 20;
  size_t normals_per_creator = 20;
  size_t test_splice_per_creator = 4;
  size_t test_inject_per_creator = 4;
  double inject_strength = 2.0;
  SpliceSpec splice;
  size_t corpus_size = 50;
  double corpus_strength = 6.0;
  GeneratorConfig gen;
};

struct GenSummary {
  size_t creators = 0;
  size_t train_normals = 0;
  size_t validation_normals = 0;
  size_t validation_mutants = 0;
  size_t test_normals = 0;
  size_t test_mutants = 0;
  size_t corpus_files = 0;
  size_t files_written = 0;
  size_t files_unchanged = 0;
};

/// Generates the full dataset (videos, mutants, sensational corpus), writes
/// embedding files and the manifest under out_dir, and returns the manifest
/// plus summary counts. Pure function of (global_seed, preset): re-running
/// produces byte-identical files.
std::pair<DatasetManifest, GenSummary> gen_dataset(
    const std::filesystem::path& out_dir, uint64_t global_seed,
    const DatasetPreset& preset);

}  // namespace qbar
