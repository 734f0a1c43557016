#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "qbar/error.hpp"

namespace qbar {

enum class Modality { text = 0, audio = 1, visual = 2, meta = 3 };

inline constexpr std::array<Modality, 4> kAllModalities = {
    Modality::text, Modality::audio, Modality::visual, Modality::meta};

const char* modality_name(Modality m);
std::optional<Modality> modality_from_name(std::string_view name);

struct ModalityEmbedding {
  Modality modality;
  std::vector<double> values;
};

/// Concatenation of the per-modality layer-normalized vectors, in canonical
/// order text -> audio -> visual -> meta.
struct FusedVector {
  std::vector<double> values;
  std::vector<size_t> source_dims;
  bool degenerate = false;  // some modality had ~zero variance
};

struct LayerNormResult {
  std::vector<double> values;
  bool degenerate = false;
};

/// Zero-mean, unit population-std normalization. A (near-)constant input maps
/// to the all-zeros vector with the degenerate flag set rather than erroring.
LayerNormResult layer_normalize(std::span<const double> v);

/// Fuses the given embeddings; the declared modality set is exactly the set
/// present in `parts`. Input order is irrelevant (canonicalized).
FusedVector fuse(std::span<const ModalityEmbedding> parts);

/// As above with an explicit declared modality set; a declared modality with
/// no embedding raises MissingModality.
FusedVector fuse(std::span<const ModalityEmbedding> parts,
                 std::span<const Modality> declared);

inline constexpr size_t kQuantumDim = 4096;  // 2^12

/// Seeded random-orthonormal projection; regenerating from the same spec
/// yields the identical matrix. Not trained.
struct ProjectionSpec {
  uint64_t seed = 0;
  size_t in_dim = 0;
  size_t out_dim = kQuantumDim;

  bool operator==(const ProjectionSpec&) const = default;
};

/// Row-major out_dim x in_dim matrix with orthonormal rows, obtained from the
/// QR factorization of a seeded standard-Gaussian matrix.
std::vector<double> projection_matrix(const ProjectionSpec& spec);

/// Fits a fused vector to the quantum dimension: zero-pad when D < out_dim,
/// identity when equal, seeded orthonormal projection when D > out_dim (a
/// spec is then required).
std::vector<double> fit_to_qdim(const FusedVector& x,
                                const std::optional<ProjectionSpec>& spec,
                                size_t out_dim = kQuantumDim);

}  // namespace qbar
