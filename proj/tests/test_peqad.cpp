#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "qbar/peqad.hpp"
#include "qbar/rng.hpp"

using namespace qbar;
using doctest::Approx;

namespace {

std::vector<StateVector> cluster_states(int n, size_t count, uint64_t seed) {
  Rng rng(seed);
  const size_t dim = size_t(1) << n;
  std::vector<double> mean(dim);
  for (double& v : mean) v = rng.gaussian();
  std::vector<StateVector> out;
  for (size_t i = 0; i < count; ++i) {
    std::vector<double> x = mean;
    for (double& v : x) v += 0.1 * rng.gaussian();
    out.push_back(amplitude_encode(x));
  }
  return out;
}

}  // namespace

TEST_CASE("init_theta determinism, range, and length") {
  const AnsatzConfig def{};
  const auto a = init_theta(def, 7);
  const auto b = init_theta(def, 7);
  CHECK(a == b);
  CHECK(a.size() == 240);
  for (double t : a) {
    CHECK(t >= -std::numbers::pi);
    CHECK(t < std::numbers::pi);
  }
  CHECK(init_theta(AnsatzConfig{4, 3}, 1).size() == 24);
  CHECK(init_theta(def, 8) != a);
}

TEST_CASE("init_center basics") {
  const AnsatzConfig cfg{3, 2};
  const auto theta = init_theta(cfg, 5);
  const auto states = cluster_states(3, 1, 11);

  // mean of one sample is that sample's mapped state
  const StateVector c1 = init_center(states, cfg, theta);
  const StateVector mapped = run_ansatz(states[0], cfg, theta);
  for (size_t i = 0; i < c1.dim(); ++i)
    CHECK(std::abs(c1.amplitude(i) - mapped.amplitude(i)) < 1e-12);

  // two identical samples: same center
  const std::vector<StateVector> twice = {states[0], states[0]};
  const StateVector c2 = init_center(twice, cfg, theta);
  for (size_t i = 0; i < c2.dim(); ++i)
    CHECK(std::abs(c2.amplitude(i) - mapped.amplitude(i)) < 1e-12);
}

TEST_CASE("init_center of two orthogonal mapped states") {
  // zero-layer ansatz: the map is the identity, so feed orthogonal states
  const AnsatzConfig cfg{2, 0};
  std::vector<double> e0 = {1.0, 0.0, 0.0, 0.0};
  std::vector<double> e1 = {0.0, 1.0, 0.0, 0.0};
  const std::vector<StateVector> states = {amplitude_encode(e0),
                                           amplitude_encode(e1)};
  const StateVector c = init_center(states, cfg, std::vector<double>{});
  // (psi1 + psi2)/sqrt(2)
  CHECK(c.amplitude(0).real() == Approx(std::sqrt(0.5)).epsilon(1e-12));
  CHECK(c.amplitude(1).real() == Approx(std::sqrt(0.5)).epsilon(1e-12));
  CHECK(std::abs(c.amplitude(2)) == 0.0);
}

TEST_CASE("init_center degenerate mean") {
  const AnsatzConfig cfg{1, 0};
  const std::vector<StateVector> opposed = {
      amplitude_encode(std::vector<double>{1.0, 0.0}),
      amplitude_encode(std::vector<double>{-1.0, 0.0})};
  try {
    init_center(opposed, cfg, std::vector<double>{});
    CHECK(false);
  } catch (const QbarError& e) {
    CHECK(e.code() == ErrorCode::DegenerateCenter);
  }
}

TEST_CASE("hypersphere_loss closed-form cases") {
  const AnsatzConfig cfg{2, 0};
  const StateVector psi = amplitude_encode(std::vector<double>{1.0, 0, 0, 0});
  const StateVector orth = amplitude_encode(std::vector<double>{0, 1.0, 0, 0});

  // zero distance, no parameters
  const std::vector<StateVector> batch1 = {psi};
  CHECK(hypersphere_loss(batch1, psi, std::vector<double>{}, 0.5) == 0.0);

  // orthogonal unit vectors, lambda = 0
  const std::vector<StateVector> batch2 = {orth};
  CHECK(hypersphere_loss(batch2, psi, std::vector<double>{}, 0.0) == Approx(2.0));

  // random case against the elementwise sum oracle
  Rng rng(3);
  const auto states = cluster_states(3, 6, 17);
  const StateVector center = init_center(states, AnsatzConfig{3, 0},
                                         std::vector<double>{});
  std::vector<double> theta(10);
  for (double& t : theta) t = rng.gaussian();
  const double lambda = 0.37;
  double expect = 0.0;
  for (const auto& s : states) {
    double d2 = 0.0;
    for (size_t i = 0; i < s.dim(); ++i)
      d2 += std::norm(s.amplitude(i) - center.amplitude(i));
    expect += d2;
  }
  expect /= double(states.size());
  double reg = 0.0;
  for (double t : theta) reg += t * t;
  expect += 0.5 * lambda * reg;
  CHECK(hypersphere_loss(states, center, theta, lambda) ==
        Approx(expect).epsilon(1e-12));
}

TEST_CASE("training gradient matches finite differences of the loss") {
  const AnsatzConfig cfg{4, 2};
  const auto states = cluster_states(4, 3, 23);
  const auto theta0 = init_theta(cfg, 29);
  const StateVector center = init_center(states, cfg, theta0);
  const double lambda = 1e-3;

  // evaluate away from the initialization so the gradient is nontrivial
  ParamVector theta = theta0;
  Rng rng(31);
  for (double& t : theta) t += 0.2 * rng.gaussian();

  const auto analytic = loss_gradient(states, center, cfg, theta, lambda);
  const auto fd = oracle::finite_difference(
      [&](std::span<const double> th) {
        return training_loss(states, center, cfg, th, lambda);
      },
      theta, 1e-5);
  for (size_t k = 0; k < analytic.size(); ++k) {
    const double scale = std::max(std::abs(fd[k]), 1e-6);
    CHECK(std::abs(analytic[k] - fd[k]) / scale < 1e-5);
  }
}

TEST_CASE("a small gradient step does not increase the loss (lambda = 0)") {
  for (uint64_t trial = 0; trial < 5; ++trial) {
    const AnsatzConfig cfg{3, 2};
    const auto states = cluster_states(3, 4, 100 + trial);
    ParamVector theta = init_theta(cfg, 200 + trial);
    Rng rng(300 + trial);
    for (double& t : theta) t += 0.3 * rng.gaussian();
    const StateVector center =
        init_center(states, cfg, init_theta(cfg, 200 + trial));

    const double before = training_loss(states, center, cfg, theta, 0.0);
    const auto g = loss_gradient(states, center, cfg, theta, 0.0);
    for (size_t k = 0; k < theta.size(); ++k) theta[k] -= 1e-4 * g[k];
    const double after = training_loss(states, center, cfg, theta, 0.0);
    CHECK(after <= before + 1e-12);
  }
}

TEST_CASE("train: zero layers and lambda leave the loss constant") {
  const AnsatzConfig cfg{3, 0};
  const auto states = cluster_states(3, 4, 41);
  TrainConfig tc;
  tc.lambda = 0.0;
  tc.epochs = 5;
  tc.seed = 1;
  const auto [model, report] = train(states, tc, cfg);
  CHECK(report.loss_per_epoch.size() == 5);
  for (double l : report.loss_per_epoch)
    CHECK(l == Approx(report.loss_per_epoch[0]).epsilon(1e-15));
  CHECK(report.final_loss == Approx(report.initial_loss).epsilon(1e-15));
  CHECK(model.theta_star.empty());
}

TEST_CASE("train determinism: same seed gives bit-identical theta") {
  const AnsatzConfig cfg{4, 2};
  const auto states = cluster_states(4, 5, 51);
  TrainConfig tc;
  tc.epochs = 10;
  tc.seed = 9;
  const auto [m1, r1] = train(states, tc, cfg);
  const auto [m2, r2] = train(states, tc, cfg);
  CHECK(m1.theta_star == m2.theta_star);
  CHECK(r1.loss_per_epoch == r2.loss_per_epoch);
  for (size_t i = 0; i < m1.center.dim(); ++i)
    CHECK(m1.center.amplitude(i) == m2.center.amplitude(i));

  TrainConfig other = tc;
  other.seed = 10;
  const auto [m3, r3] = train(states, other, cfg);
  CHECK(m1.theta_star != m3.theta_star);
}

TEST_CASE("train loss is invariant to sample order up to roundoff") {
  const AnsatzConfig cfg{3, 1};
  auto states = cluster_states(3, 6, 61);
  TrainConfig tc;
  tc.epochs = 3;
  tc.seed = 2;
  const auto [m1, r1] = train(states, tc, cfg);
  std::reverse(states.begin(), states.end());
  const auto [m2, r2] = train(states, tc, cfg);
  for (size_t e = 0; e < r1.loss_per_epoch.size(); ++e)
    CHECK(r1.loss_per_epoch[e] == Approx(r2.loss_per_epoch[e]).epsilon(1e-12));
}

TEST_CASE("train report structure and behavior on a small instance") {
  const AnsatzConfig cfg{5, 3};
  const auto states = cluster_states(5, 8, 71);
  TrainConfig tc;
  tc.epochs = 20;
  tc.seed = 3;
  const auto [model, report] = train(states, tc, cfg);
  CHECK(report.loss_per_epoch.size() == 20);
  CHECK(report.initial_loss == report.loss_per_epoch.front());
  CHECK(report.final_loss >= 0.0);
  CHECK(report.wall_seconds > 0.0);
  CHECK(model.theta_star.size() == size_t(cfg.parameter_count()));
  // the achieved ratio on the reference configuration is recorded by the
  // acceptance suite; here only internal consistency is asserted
  CHECK(std::isfinite(report.final_loss));
}

TEST_CASE("distance identities") {
  const AnsatzConfig cfg{2, 0};
  const StateVector e0 = amplitude_encode(std::vector<double>{1, 0, 0, 0});
  const StateVector e1 = amplitude_encode(std::vector<double>{0, 1, 0, 0});
  const StateVector neg = amplitude_encode(std::vector<double>{-1, 0, 0, 0});

  PeqadModel model{cfg, {}, e0, std::nullopt, TrainConfig{}};
  CHECK(distance(model, e0) == Approx(0.0).epsilon(1e-15));
  CHECK(distance(model, e1) == Approx(2.0));
  CHECK(distance(model, neg) == Approx(4.0));

  Rng rng(81);
  for (int i = 0; i < 20; ++i) {
    std::vector<double> x(4);
    for (double& v : x) v = rng.gaussian();
    const double d = distance(model, amplitude_encode(x));
    CHECK(d >= 0.0);
    CHECK(d <= 4.0);
  }
}

TEST_CASE("sgd optimizer path") {
  const AnsatzConfig cfg{3, 1};
  const auto states = cluster_states(3, 4, 91);
  TrainConfig tc;
  tc.optimizer = TrainConfig::Optimizer::sgd;
  tc.epochs = 5;
  tc.seed = 4;
  const auto [model, report] = train(states, tc, cfg);
  CHECK(report.loss_per_epoch.size() == 5);
  CHECK(model.theta_star.size() == 6);
}

TEST_CASE("mini-batch path is deterministic") {
  const AnsatzConfig cfg{3, 1};
  const auto states = cluster_states(3, 6, 95);
  TrainConfig tc;
  tc.batch_size = 2;
  tc.epochs = 4;
  tc.seed = 5;
  const auto [m1, r1] = train(states, tc, cfg);
  const auto [m2, r2] = train(states, tc, cfg);
  CHECK(m1.theta_star == m2.theta_star);
  CHECK(r1.loss_per_epoch.size() == 4);
}
