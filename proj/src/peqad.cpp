#include "qbar/peqad.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <thread>

#include "qbar/rng.hpp"

namespace qbar {
namespace {

// Runs fn(i) for i in [0, n) across a couple of worker threads. Each index is
// processed wholly by one thread, so per-index outputs are bit-deterministic
// regardless of scheduling.
void parallel_for_index(size_t n, const std::function<void(size_t)>& fn) {
  unsigned workers = std::thread::hardware_concurrency();
  if (workers == 0) workers = 1;
  workers = std::min<unsigned>({workers, static_cast<unsigned>(n), 8});
  if (workers <= 1 || n <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (size_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

// Pairwise reduction over the sample axis, ascending sample index.
std::vector<double> pairwise_reduce_vectors(
    const std::vector<std::vector<double>>& per_sample) {
  const size_t n = per_sample.size();
  if (n == 1) return per_sample[0];
  std::vector<std::vector<double>> level = per_sample;
  while (level.size() > 1) {
    std::vector<std::vector<double>> next;
    for (size_t i = 0; i + 1 < level.size(); i += 2) {
      std::vector<double> s = level[i];
      for (size_t k = 0; k < s.size(); ++k) s[k] += level[i + 1][k];
      next.push_back(std::move(s));
    }
    if (level.size() % 2 == 1) next.push_back(level.back());
    level = std::move(next);
  }
  return level[0];
}

double theta_reg(std::span<const double> theta, double lambda) {
  double s = 0.0;
  for (double t : theta) s += t * t;
  return 0.5 * lambda * s;
}

// Per-sample Re<c|U(theta)|x_i>, canonical pairwise mean.
double mean_overlap_real(std::span<const StateVector> inputs,
                         const StateVector& center, const AnsatzConfig& config,
                         std::span<const double> theta) {
  std::vector<double> re(inputs.size());
  parallel_for_index(inputs.size(), [&](size_t i) {
    re[i] = overlap(center, run_ansatz(inputs[i], config, theta)).real();
  });
  return pairwise_sum(re) / double(inputs.size());
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) fail(ErrorCode::BadConfig, "epochs must be >= 1");
  if (!(learning_rate > 0.0)) fail(ErrorCode::BadConfig, "learning_rate must be > 0");
  if (lambda < 0.0) fail(ErrorCode::BadConfig, "lambda must be >= 0");
}

const char* optimizer_name(TrainConfig::Optimizer o) {
  return o == TrainConfig::Optimizer::adam ? "adam" : "sgd";
}

std::optional<TrainConfig::Optimizer> optimizer_from_name(std::string_view s) {
  if (s == "adam") return TrainConfig::Optimizer::adam;
  if (s == "sgd") return TrainConfig::Optimizer::sgd;
  return std::nullopt;
}

ParamVector init_theta(const AnsatzConfig& config, uint64_t seed) {
  config.validate();
  Rng rng(seed);
  ParamVector theta(config.parameter_count());
  for (double& t : theta)
    t = rng.uniform(-std::numbers::pi, std::numbers::pi);
  return theta;
}

StateVector init_center(std::span<const StateVector> encoded_train,
                        const AnsatzConfig& config,
                        std::span<const double> theta_0) {
  if (encoded_train.empty())
    fail(ErrorCode::DegenerateCenter, "no training states");
  const size_t dim = encoded_train[0].dim();
  std::vector<std::vector<double>> mapped(encoded_train.size());
  parallel_for_index(encoded_train.size(), [&](size_t i) {
    StateVector out = run_ansatz(encoded_train[i], config, theta_0);
    std::vector<double> flat(2 * dim);
    for (size_t k = 0; k < dim; ++k) {
      flat[2 * k] = out.amplitude(k).real();
      flat[2 * k + 1] = out.amplitude(k).imag();
    }
    mapped[i] = std::move(flat);
  });
  std::vector<double> sum = pairwise_reduce_vectors(mapped);
  double norm2 = 0.0;
  for (double v : sum) norm2 += v * v;
  const double n = double(encoded_train.size());
  const double norm = std::sqrt(norm2) / n;
  if (norm < 1e-6)
    fail(ErrorCode::DegenerateCenter, "mean mapped state has norm < 1e-6");
  std::vector<cdouble> amps(dim);
  const double inv = 1.0 / (norm * n);
  for (size_t k = 0; k < dim; ++k)
    amps[k] = cdouble(sum[2 * k] * inv, sum[2 * k + 1] * inv);
  return StateVector(config.n_qubits, std::move(amps));
}

double hypersphere_loss(std::span<const StateVector> mapped_batch,
                        const StateVector& center,
                        std::span<const double> theta, double lambda) {
  if (mapped_batch.empty())
    fail(ErrorCode::DimensionMismatch, "empty batch");
  std::vector<double> dist(mapped_batch.size());
  for (size_t i = 0; i < mapped_batch.size(); ++i) {
    if (mapped_batch[i].dim() != center.dim())
      fail(ErrorCode::DimensionMismatch, "state/center dim mismatch");
    dist[i] = 2.0 - 2.0 * overlap(center, mapped_batch[i]).real();
  }
  return pairwise_sum(dist) / double(mapped_batch.size()) +
         theta_reg(theta, lambda);
}

double training_loss(std::span<const StateVector> train_states_in,
                     const StateVector& center, const AnsatzConfig& config,
                     std::span<const double> theta, double lambda) {
  const double f = mean_overlap_real(train_states_in, center, config, theta);
  return 2.0 - 2.0 * f + theta_reg(theta, lambda);
}

namespace {

// Shared by loss_gradient and train: the adjoint's forward pass also yields
// the batch loss.
std::vector<double> loss_gradient_impl(
    std::span<const StateVector> train_states_in, const StateVector& center,
    const AnsatzConfig& config, std::span<const double> theta, double lambda,
    double* loss_out) {
  const size_t n = train_states_in.size();
  if (n == 0) fail(ErrorCode::DimensionMismatch, "empty batch");
  std::vector<std::vector<double>> per_sample(n);
  std::vector<double> re(n, 0.0);
  parallel_for_index(n, [&](size_t i) {
    per_sample[i] =
        grad_overlap_real(center, train_states_in[i], config, theta, &re[i]);
  });
  std::vector<double> g = pairwise_reduce_vectors(per_sample);
  const double scale = -2.0 / double(n);
  for (size_t k = 0; k < g.size(); ++k) g[k] = scale * g[k] + lambda * theta[k];
  if (loss_out)
    *loss_out =
        2.0 - 2.0 * pairwise_sum(re) / double(n) + theta_reg(theta, lambda);
  return g;
}

}  // namespace

std::vector<double> loss_gradient(std::span<const StateVector> train_states_in,
                                  const StateVector& center,
                                  const AnsatzConfig& config,
                                  std::span<const double> theta,
                                  double lambda) {
  return loss_gradient_impl(train_states_in, center, config, theta, lambda,
                            nullptr);
}

std::pair<PeqadModel, TrainReport> train(
    std::span<const StateVector> train_states_in, const TrainConfig& config,
    const AnsatzConfig& ansatz) {
  config.validate();
  ansatz.validate();
  if (train_states_in.empty())
    fail(ErrorCode::DegenerateCenter, "no training states");

  const auto t_start = std::chrono::steady_clock::now();
  const size_t n = train_states_in.size();
  const size_t batch =
      (config.batch_size <= 0 || size_t(config.batch_size) >= n)
          ? n
          : size_t(config.batch_size);

  ParamVector theta = init_theta(ansatz, config.seed);
  StateVector center = init_center(train_states_in, ansatz, theta);

  const size_t p = theta.size();
  std::vector<double> m(p, 0.0), v(p, 0.0);
  TrainReport report;
  report.loss_per_epoch.reserve(config.epochs);

  size_t cursor = 0;  // deterministic contiguous mini-batches, no shuffling
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::span<const StateVector> slice = train_states_in;
    std::vector<StateVector> scratch;
    if (batch < n) {
      // non-default path; the reported loss stays the full-set loss
      report.loss_per_epoch.push_back(
          training_loss(train_states_in, center, ansatz, theta, config.lambda));
      scratch.reserve(batch);
      for (size_t i = 0; i < batch; ++i)
        scratch.push_back(train_states_in[(cursor + i) % n]);
      cursor = (cursor + batch) % n;
      slice = scratch;
    }
    double epoch_loss = 0.0;
    const std::vector<double> g = loss_gradient_impl(
        slice, center, ansatz, theta, config.lambda, &epoch_loss);
    if (batch >= n) report.loss_per_epoch.push_back(epoch_loss);

    if (p == 0) continue;
    if (config.optimizer == TrainConfig::Optimizer::adam) {
      const double b1t = std::pow(TrainConfig::kBeta1, epoch + 1);
      const double b2t = std::pow(TrainConfig::kBeta2, epoch + 1);
      for (size_t k = 0; k < p; ++k) {
        m[k] = TrainConfig::kBeta1 * m[k] + (1.0 - TrainConfig::kBeta1) * g[k];
        v[k] = TrainConfig::kBeta2 * v[k] +
               (1.0 - TrainConfig::kBeta2) * g[k] * g[k];
        const double mh = m[k] / (1.0 - b1t);
        const double vh = v[k] / (1.0 - b2t);
        theta[k] -= config.learning_rate * mh /
                    (std::sqrt(vh) + TrainConfig::kEpsilon);
      }
    } else {
      for (size_t k = 0; k < p; ++k)
        theta[k] -= config.learning_rate * g[k];
    }
  }

  report.initial_loss = report.loss_per_epoch.front();
  report.final_loss =
      training_loss(train_states_in, center, ansatz, theta, config.lambda);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();

  PeqadModel model{ansatz, std::move(theta), std::move(center), std::nullopt,
                   config};
  return {std::move(model), std::move(report)};
}

double distance(const PeqadModel& model, const StateVector& psi_in) {
  if (psi_in.dim() != model.center.dim())
    fail(ErrorCode::DimensionMismatch, "state/center dim mismatch");
  const StateVector out = run_ansatz(psi_in, model.ansatz, model.theta_star);
  return 2.0 - 2.0 * overlap(model.center, out).real();
}

}  // namespace qbar
