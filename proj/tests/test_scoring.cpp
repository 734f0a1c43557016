#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "qbar/rng.hpp"
#include "qbar/scoring.hpp"

using namespace qbar;
using doctest::Approx;

namespace {

std::vector<std::vector<double>> gaussian_class(Rng& rng, size_t n, size_t d,
                                                const std::vector<double>& mean,
                                                double sigma) {
  std::vector<std::vector<double>> out(n, std::vector<double>(d));
  for (auto& row : out)
    for (size_t j = 0; j < d; ++j) row[j] = mean[j] + sigma * rng.gaussian();
  return out;
}

}  // namespace

TEST_CASE("fit_mutation_axis sign convention in 1-D... via 2-D padding") {
  // two 2-D classes separated along the first coordinate
  Rng rng(1);
  const auto normal = gaussian_class(rng, 30, 2, {0.0, 0.0}, 0.4);
  const auto sens = gaussian_class(rng, 30, 2, {1.0, 0.0}, 0.4);
  const auto axis = fit_mutation_axis(normal, sens, 1e-3);
  CHECK(axis.w_mut[0] > 0.0);  // points toward the sensational class

  // swapping the corpora flips the direction
  const auto flipped = fit_mutation_axis(sens, normal, 1e-3);
  CHECK(flipped.w_mut[0] < 0.0);
  for (size_t i = 0; i < 2; ++i)
    CHECK(flipped.w_mut[i] == Approx(-axis.w_mut[i]).epsilon(1e-9));
}

TEST_CASE("fit_mutation_axis degenerate and small-class errors") {
  const std::vector<std::vector<double>> same = {{1.0, 2.0}, {1.2, 1.8},
                                                 {0.8, 2.2}};
  try {
    fit_mutation_axis(same, same, 1e-3);
    CHECK(false);
  } catch (const QbarError& e) {
    CHECK(e.code() == ErrorCode::DegenerateAxis);
  }
  const std::vector<std::vector<double>> one = {{1.0, 2.0}};
  CHECK_THROWS_AS(fit_mutation_axis(one, same, 1e-3), QbarError);
}

TEST_CASE("fit_mutation_axis matches a dense linear-solve oracle") {
  Rng rng(7);
  const size_t d = 2;
  const auto a = gaussian_class(rng, 12, d, {0.3, -0.5}, 0.7);
  const auto b = gaussian_class(rng, 9, d, {1.4, 0.6}, 0.5);
  const double shrink = 1e-3;
  const auto axis = fit_mutation_axis(a, b, shrink);

  // oracle: explicit pooled covariance + Gaussian elimination
  std::vector<double> mu_a(d, 0.0), mu_b(d, 0.0);
  for (const auto& r : a)
    for (size_t j = 0; j < d; ++j) mu_a[j] += r[j] / double(a.size());
  for (const auto& r : b)
    for (size_t j = 0; j < d; ++j) mu_b[j] += r[j] / double(b.size());
  std::vector<std::vector<double>> cov(d, std::vector<double>(d, 0.0));
  for (const auto& r : a)
    for (size_t i = 0; i < d; ++i)
      for (size_t j = 0; j < d; ++j)
        cov[i][j] += (r[i] - mu_a[i]) * (r[j] - mu_a[j]);
  for (const auto& r : b)
    for (size_t i = 0; i < d; ++i)
      for (size_t j = 0; j < d; ++j)
        cov[i][j] += (r[i] - mu_b[i]) * (r[j] - mu_b[j]);
  const double dof = double(a.size() + b.size() - 2);
  double trace = 0.0;
  for (size_t i = 0; i < d; ++i) {
    for (size_t j = 0; j < d; ++j) cov[i][j] /= dof;
    trace += cov[i][i];
  }
  for (size_t i = 0; i < d; ++i) cov[i][i] += shrink * trace / double(d);
  std::vector<double> diff(d);
  for (size_t j = 0; j < d; ++j) diff[j] = mu_b[j] - mu_a[j];
  const auto expected = oracle::solve_dense(cov, diff);

  for (size_t j = 0; j < d; ++j)
    CHECK(axis.w_mut[j] == Approx(expected[j]).epsilon(1e-8));
  CHECK(axis.mean_normal[0] == Approx(mu_a[0]).epsilon(1e-12));
  CHECK(axis.mean_sensational[1] == Approx(mu_b[1]).epsilon(1e-12));
}

TEST_CASE("s_dir endpoints and invariances") {
  MutationAxis axis;
  axis.w_mut = {0.6, 0.8, 0.0};
  CHECK(s_dir(std::vector<double>{0.6, 0.8, 0.0}, axis) == Approx(1.0));
  CHECK(s_dir(std::vector<double>{-0.6, -0.8, 0.0}, axis) == Approx(-1.0));
  CHECK(s_dir(std::vector<double>{0.0, 0.0, 5.0}, axis) ==
        Approx(0.0).epsilon(1e-15));

  // positive rescaling of either side changes nothing
  Rng rng(5);
  std::vector<double> x(3);
  for (double& v : x) v = rng.gaussian();
  const double base = s_dir(x, axis);
  std::vector<double> x2 = x;
  for (double& v : x2) v *= 37.5;
  CHECK(s_dir(x2, axis) == Approx(base).epsilon(1e-12));
  MutationAxis axis2 = axis;
  for (double& v : axis2.w_mut) v *= 0.004;
  CHECK(s_dir(x, axis2) == Approx(base).epsilon(1e-12));
  CHECK(base >= -1.0);
  CHECK(base <= 1.0);

  bool degenerate = false;
  CHECK(s_dir(std::vector<double>{0.0, 0.0, 0.0}, axis, &degenerate) == 0.0);
  CHECK(degenerate);

  CHECK_THROWS_AS(s_dir(std::vector<double>{1.0}, axis), QbarError);
}

TEST_CASE("fit_normalizer arithmetic and clamping") {
  const auto nz = fit_normalizer(std::vector<double>{1.0, 2.0, 3.0});
  CHECK(nz.mean == Approx(2.0));
  CHECK(nz.std_dev == Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-12));
  CHECK(nz.normalize(3.0) == Approx(1.2247448713915889).epsilon(1e-12));

  const auto flat = fit_normalizer(std::vector<double>{4.0, 4.0, 4.0, 4.0});
  CHECK(flat.std_dev == 1e-12);
  CHECK(flat.normalize(4.0) == 0.0);

  CHECK_THROWS_AS(fit_normalizer(std::vector<double>{1.0}), QbarError);

  // mean of the normalized fit set is zero
  Rng rng(9);
  std::vector<double> scores(23);
  for (double& s : scores) s = 3.0 + 0.5 * rng.gaussian();
  const auto n2 = fit_normalizer(scores);
  double m = 0.0;
  for (double s : scores) m += n2.normalize(s);
  CHECK(std::abs(m / double(scores.size())) < 1e-12);
}

TEST_CASE("s_final endpoints and symmetry") {
  ScoreNormalizer qn{2.0, 0.5};
  ScoreNormalizer dn{-1.0, 2.0};
  // gamma = 1: only the quant channel matters
  CHECK(s_final(2.5, 123.0, qn, dn, 1.0) == Approx(1.0));
  // gamma = 0: only the dir channel matters
  CHECK(s_final(-55.0, 1.0, qn, dn, 0.0) == Approx(1.0));
  // gamma = 0.5 with normalized scores (+1, -1) cancels
  ScoreNormalizer unit{0.0, 1.0};
  CHECK(s_final(1.0, -1.0, unit, unit, 0.5) == Approx(0.0));

  CHECK_THROWS_AS(s_final(0.0, 0.0, qn, dn, 1.5), QbarError);
  CHECK_THROWS_AS(s_final(0.0, 0.0, qn, dn, -0.1), QbarError);
}

TEST_CASE("classify is strict at the boundary") {
  const DecisionConfig cfg{0.5, 1.25};
  CHECK(classify(1.25, cfg) == Decision::normal);
  CHECK(classify(1.25 + 1e-12, cfg) == Decision::anomaly);
  const DecisionConfig never{0.5, std::numeric_limits<double>::infinity()};
  CHECK(classify(1e300, never) == Decision::normal);
}

TEST_CASE("classify invariant under increasing transforms") {
  Rng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const double s = rng.gaussian();
    const double tau = rng.gaussian();
    auto f = [](double x) { return std::exp(0.3 * x) + 2.0 * x; };  // increasing
    const DecisionConfig a{0.5, tau};
    const DecisionConfig b{0.5, f(tau)};
    CHECK(classify(s, a) == classify(f(s), b));
  }
}

TEST_CASE("calibrate on a separable validation set reaches F1 = 1") {
  std::vector<ValidationSample> v;
  for (int i = 0; i < 5; ++i) v.push_back({0.1 * i, 0.0, false});
  for (int i = 0; i < 5; ++i) v.push_back({1.0 + 0.1 * i, 0.0, true});
  ScoreNormalizer unit{0.0, 1.0};
  const auto r = calibrate(v, unit, unit);
  CHECK(r.f1 == 1.0);
  CHECK(r.config.gamma >= 0.0);
  CHECK(r.config.gamma <= 1.0);
  // separation happens on the quant channel; the winning tau separates
  for (const auto& s : v) {
    const double score = s_final(s.s_quant, s.s_dir, unit, unit, r.config.gamma);
    CHECK((score > r.config.tau) == s.is_anomaly);
  }
}

TEST_CASE("calibrate ties resolve to the smallest gamma then tau") {
  // both channels identical: every gamma gives the same scores, so the
  // tie-break must return gamma = 0
  std::vector<ValidationSample> v = {{0.0, 0.0, false}, {1.0, 1.0, true}};
  ScoreNormalizer unit{0.0, 1.0};
  const auto r = calibrate(v, unit, unit);
  CHECK(r.f1 == 1.0);
  CHECK(r.config.gamma == 0.0);
  CHECK(r.config.tau == Approx(0.5));
}

TEST_CASE("calibrate with constant scores picks the all-positive extreme") {
  std::vector<ValidationSample> v = {{1.0, 1.0, true},
                                     {1.0, 1.0, false},
                                     {1.0, 1.0, true}};
  ScoreNormalizer unit{0.0, 1.0};
  const auto r = calibrate(v, unit, unit);
  // tau = -inf flags everything: P = 2/3, R = 1, F1 = 0.8 beats F1 = 0
  CHECK(r.config.gamma == 0.0);
  CHECK(std::isinf(r.config.tau));
  CHECK(r.config.tau < 0);
  CHECK(r.f1 == Approx(0.8));
}

TEST_CASE("calibrate rejects one-class validation") {
  ScoreNormalizer unit{0.0, 1.0};
  std::vector<ValidationSample> only_neg = {{0.0, 0.0, false},
                                            {1.0, 1.0, false}};
  CHECK_THROWS_AS(calibrate(only_neg, unit, unit), QbarError);
  try {
    calibrate(only_neg, unit, unit);
  } catch (const QbarError& e) {
    CHECK(e.code() == ErrorCode::OneClassValidation);
  }
}

TEST_CASE("calibrate beats or matches both single-channel endpoints") {
  Rng rng(31);
  ScoreNormalizer unit{0.0, 1.0};
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ValidationSample> v;
    for (int i = 0; i < 12; ++i)
      v.push_back({rng.gaussian(), rng.gaussian(), rng.uniform01() < 0.4});
    bool has_pos = false, has_neg = false;
    for (const auto& s : v) (s.is_anomaly ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg) continue;

    const auto full = calibrate(v, unit, unit);
    const auto g0 = calibrate_tau(v, unit, unit, 0.0);
    const auto g1 = calibrate_tau(v, unit, unit, 1.0);
    CHECK(full.f1 >= g0.f1);
    CHECK(full.f1 >= g1.f1);
  }
}

TEST_CASE("calibrate equals the exhaustive oracle sweep exactly") {
  Rng rng(77);
  ScoreNormalizer unit{0.0, 1.0};
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ValidationSample> v;
    std::vector<bool> labels;
    for (int i = 0; i < 10; ++i) {
      const bool y = rng.uniform01() < 0.5;
      v.push_back({rng.gaussian(), rng.gaussian(), y});
      labels.push_back(y);
    }
    bool has_pos = false, has_neg = false;
    for (bool y : labels) (y ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg) continue;

    const auto got = calibrate(v, unit, unit);
    double best = -1.0;
    for (int gi = 0; gi <= 10; ++gi) {
      std::vector<double> scores;
      for (const auto& s : v)
        scores.push_back(s_final(s.s_quant, s.s_dir, unit, unit, gi / 10.0));
      best = std::max(best, oracle::best_f1_over_thresholds(labels, scores));
    }
    CHECK(got.f1 == best);
  }
}
