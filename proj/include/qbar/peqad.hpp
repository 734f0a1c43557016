#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qbar/features.hpp"
#include "qbar/statevector.hpp"

namespace qbar {

struct TrainConfig {
  enum class Optimizer { adam, sgd };

  double lambda = 1e-4;
  double learning_rate = 0.01;
  int epochs = 200;
  int batch_size = 0;  // <= 0 or >= N means full batch
  uint64_t seed = 0;
  Optimizer optimizer = Optimizer::adam;

  bool operator==(const TrainConfig&) const = default;

  // Adam moments
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

  void validate() const;
};

const char* optimizer_name(TrainConfig::Optimizer o);
std::optional<TrainConfig::Optimizer> optimizer_from_name(std::string_view s);

struct TrainReport {
  std::vector<double> loss_per_epoch;  // full-set loss at the start of each epoch
  double initial_loss = 0.0;
  double final_loss = 0.0;
  double wall_seconds = 0.0;
};

struct PeqadModel {
  AnsatzConfig ansatz;
  ParamVector theta_star;
  StateVector center;
  std::optional<ProjectionSpec> projection;
  TrainConfig train_meta;
};

/// Angles drawn i.i.d. uniform from [-pi, pi) using the seeded mt19937_64
/// stream; reproducible across platforms.
ParamVector init_theta(const AnsatzConfig& config, uint64_t seed);

/// c = mean_i of run_ansatz(psi_i, theta_0), renormalized to unit norm, and
/// fixed for the remainder of training.
StateVector init_center(std::span<const StateVector> encoded_train,
                        const AnsatzConfig& config,
                        std::span<const double> theta_0);

/// (1/N) sum_i ||psi_out_i - c||^2 + (lambda/2) sum_k theta_k^2, with the
/// distance evaluated as 2 - 2 Re<c|psi_out_i> (both unit norm).
double hypersphere_loss(std::span<const StateVector> mapped_batch,
                        const StateVector& center,
                        std::span<const double> theta, double lambda);

/// Full training loss at theta (maps the inputs through the ansatz first).
double training_loss(std::span<const StateVector> train_states_in,
                     const StateVector& center, const AnsatzConfig& config,
                     std::span<const double> theta, double lambda);

/// dL/d theta_k = -(2/N) sum_i grad_overlap_real(c, psi_i, theta)_k
///              + lambda * theta_k
std::vector<double> loss_gradient(std::span<const StateVector> train_states_in,
                                  const StateVector& center,
                                  const AnsatzConfig& config,
                                  std::span<const double> theta, double lambda);

std::pair<PeqadModel, TrainReport> train(
    std::span<const StateVector> train_states_in, const TrainConfig& config,
    const AnsatzConfig& ansatz);

/// ||run_ansatz(psi_in, theta*) - c||^2, in [0, 4].
double distance(const PeqadModel& model, const StateVector& psi_in);

}  // namespace qbar
