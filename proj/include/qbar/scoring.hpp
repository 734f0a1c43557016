#pragma once

#include <span>
#include <vector>

#include "qbar/error.hpp"

namespace qbar {

/// Fisher discriminant direction in fused-vector space; positive scores point
/// toward the sensational class.
struct MutationAxis {
  std::vector<double> w_mut;
  std::vector<double> mean_normal;
  std::vector<double> mean_sensational;
  double shrinkage = 1e-3;
};

/// w = (S_pooled + a I)^{-1} (mu_sensational - mu_normal), with the pooled
/// within-class covariance and a = shrinkage * trace(S_pooled) / D. The ridge
/// is mandatory in practice: the corpora are smaller than D.
MutationAxis fit_mutation_axis(std::span<const std::vector<double>> normal_corpus,
                               std::span<const std::vector<double>> sensational_corpus,
                               double shrinkage = 1e-3);

/// Cosine similarity of x with the mutation axis, in [-1, 1]. A degenerate
/// (near-zero) x scores 0; `degenerate`, when given, reports that case.
double s_dir(std::span<const double> x, const MutationAxis& axis,
             bool* degenerate = nullptr);

/// Z-score statistics fitted on training normals; std clamped to 1e-12.
struct ScoreNormalizer {
  double mean = 0.0;
  double std_dev = 1.0;

  bool operator==(const ScoreNormalizer&) const = default;

  double normalize(double score) const { return (score - mean) / std_dev; }
};

ScoreNormalizer fit_normalizer(std::span<const double> scores);

/// gamma * N(s_quant) + (1 - gamma) * N(s_dir).
double s_final(double s_quant, double s_dir, const ScoreNormalizer& quant_norm,
               const ScoreNormalizer& dir_norm, double gamma);

struct DecisionConfig {
  double gamma = 0.5;
  double tau = 0.0;

  bool operator==(const DecisionConfig&) const = default;
};

enum class Decision { normal, anomaly };

/// Anomaly iff s_final > tau, strictly.
Decision classify(double s_final, const DecisionConfig& config);

struct ValidationSample {
  double s_quant = 0.0;
  double s_dir = 0.0;
  bool is_anomaly = false;
};

struct CalibrationResult {
  DecisionConfig config;
  double f1 = 0.0;
};

/// Grid search gamma in {0.0, 0.1, ..., 1.0}; for each gamma tau sweeps all
/// midpoints between consecutive sorted S_final values plus +-infinity.
/// Maximizes F1 (anomaly = positive); ties broken by smaller gamma, then
/// smaller tau.
CalibrationResult calibrate(std::span<const ValidationSample> validation,
                            const ScoreNormalizer& quant_norm,
                            const ScoreNormalizer& dir_norm);

/// The tau sweep alone, at a fixed gamma (used by the gamma-ablation path).
CalibrationResult calibrate_tau(std::span<const ValidationSample> validation,
                                const ScoreNormalizer& quant_norm,
                                const ScoreNormalizer& dir_norm, double gamma);

}  // namespace qbar
