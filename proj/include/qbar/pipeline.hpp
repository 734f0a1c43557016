#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "qbar/eval.hpp"
#include "qbar/persistence.hpp"
#include "qbar/scoring.hpp"
#include "qbar/synthgen.hpp"

namespace qbar {

/// Converts a pooled embedding file (one row per modality) into the fused
/// vector, validating names and dims against the manifest declaration.
FusedVector fuse_embedding(const EmbeddingFile& file,
                           const DatasetManifest& manifest);

FusedVector load_fused(const DatasetManifest& manifest,
                       const std::string& rel_path);

/// Fits the fused vector to the model's quantum dimension and encodes it.
StateVector encode_for_model(const FusedVector& fused,
                             const AnsatzConfig& ansatz,
                             const std::optional<ProjectionSpec>& projection);

struct TrainOutcome {
  ModelCheckpoint checkpoint;
  TrainReport report;
};

/// Trains one creator on its train split, fits the mutation axis against the
/// manifest's sensational corpus and the score normalizers on the train
/// normals. The checkpoint is uncalibrated (no gamma/tau yet).
TrainOutcome train_creator(const DatasetManifest& manifest,
                           const std::string& creator_id,
                           const TrainConfig& train_config,
                           const AnsatzConfig& ansatz, double shrinkage,
                           bool quiet = true);

/// Calibrates (gamma, tau) on the creator's validation split and returns the
/// updated checkpoint plus the achieved validation F1.
std::pair<ModelCheckpoint, CalibrationResult> calibrate_creator(
    const ModelCheckpoint& checkpoint, const DatasetManifest& manifest);

struct ScoreRecord {
  double s_quant = 0.0;
  double s_dir = 0.0;
  double z_quant = 0.0;
  double z_dir = 0.0;
  double s_final = 0.0;
  Decision decision = Decision::normal;
};

/// Scores one fused vector under a calibrated checkpoint.
ScoreRecord score_fused(const ModelCheckpoint& checkpoint,
                        const FusedVector& fused);

struct VideoScore {
  std::string video_id;
  std::string creator_id;
  Label label = Label::normal;
  ScoreRecord record;
};

struct CreatorEval {
  std::string creator_id;
  ConfusionCounts counts;
  Prf1 metrics;
  double aupr = 0.0;
  double fpr = 0.0;
};

struct SeedEval {
  uint64_t seed = 0;
  std::string variant = "calibrated";
  std::vector<CreatorEval> per_creator;
  ConfusionCounts pooled_counts;
  Prf1 pooled;
  double pooled_aupr = 0.0;
  std::vector<PrPoint> pr_points;
  std::vector<VideoScore> scores;
};

/// Evaluates the manifest's test split under per-creator checkpoints.
/// `gamma_override`, when set, re-picks tau on validation at that gamma.
SeedEval evaluate_seed(const DatasetManifest& manifest,
                       const std::map<std::string, ModelCheckpoint>& models,
                       uint64_t seed, const std::string& variant = "calibrated",
                       const std::optional<double>& gamma_override = {});

struct RobustnessRow {
  double sigma = 0.0;
  Prf1 pooled;
};

/// Adds seeded i.i.d. Gaussian noise to the test fused vectors before
/// dimension fitting, re-scores, and reports pooled metrics per sigma.
/// sigma = 0 reproduces the clean evaluation exactly.
std::vector<RobustnessRow> robustness_sweep(
    const DatasetManifest& manifest,
    const std::map<std::string, ModelCheckpoint>& models,
    const std::vector<double>& sigmas, uint64_t noise_seed);

// CSV emission (deterministic formatting, "%.17g" for doubles).
std::string results_csv(const std::vector<SeedEval>& evals);
std::string pr_curve_csv(const std::vector<SeedEval>& evals);
std::string robustness_csv(
    const std::vector<std::pair<uint64_t, std::vector<RobustnessRow>>>& rows);

}  // namespace qbar
