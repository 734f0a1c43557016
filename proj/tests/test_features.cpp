#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "qbar/features.hpp"
#include "qbar/rng.hpp"

using namespace qbar;
using doctest::Approx;

TEST_CASE("layer_normalize arithmetic under the population convention") {
  const auto r = layer_normalize(std::vector<double>{1.0, 2.0, 3.0});
  CHECK_FALSE(r.degenerate);
  CHECK(r.values[0] == Approx(-1.2247448713915889).epsilon(1e-12));
  CHECK(r.values[1] == Approx(0.0));
  CHECK(r.values[2] == Approx(1.2247448713915889).epsilon(1e-12));
}

TEST_CASE("layer_normalize degenerate and error cases") {
  const auto r = layer_normalize(std::vector<double>{5.0, 5.0, 5.0});
  CHECK(r.degenerate);
  CHECK(r.values == std::vector<double>{0.0, 0.0, 0.0});

  CHECK_THROWS_AS(layer_normalize(std::vector<double>{1.0}), QbarError);
  CHECK_THROWS_AS(layer_normalize(std::vector<double>{1.0, std::nan("")}),
                  QbarError);
}

TEST_CASE("layer_normalize output mean is zero") {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> v(17);
    for (double& x : v) x = 10.0 * rng.gaussian() + 4.0;
    const auto r = layer_normalize(v);
    double mean = 0.0, var = 0.0;
    for (double x : r.values) mean += x;
    mean /= double(r.values.size());
    for (double x : r.values) var += x * x;
    var /= double(r.values.size());
    CHECK(std::abs(mean) < 1e-12);
    CHECK(var == Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("fuse concatenates layer-normalized modalities in canonical order") {
  const ModalityEmbedding text{Modality::text, {1.0, 2.0, 3.0}};
  const ModalityEmbedding audio{Modality::audio, {0.0, 4.0}};
  const auto fused = fuse(std::vector<ModalityEmbedding>{text, audio});
  CHECK(fused.values.size() == 5);
  CHECK(fused.source_dims == std::vector<size_t>{3, 2});
  const auto lt = layer_normalize(text.values);
  const auto la = layer_normalize(audio.values);
  for (size_t i = 0; i < 3; ++i) CHECK(fused.values[i] == lt.values[i]);
  for (size_t i = 0; i < 2; ++i) CHECK(fused.values[3 + i] == la.values[i]);

  // permuted input order canonicalizes to the same output
  const auto swapped = fuse(std::vector<ModalityEmbedding>{audio, text});
  CHECK(swapped.values == fused.values);
}

TEST_CASE("fuse with a single declared modality equals layer_normalize") {
  const ModalityEmbedding text{Modality::text, {2.0, -1.0, 0.5, 9.0}};
  const auto fused = fuse(std::vector<ModalityEmbedding>{text});
  CHECK(fused.values == layer_normalize(text.values).values);
}

TEST_CASE("fuse error cases") {
  const ModalityEmbedding text{Modality::text, {1.0, 2.0}};
  const ModalityEmbedding text2{Modality::text, {3.0, 4.0}};
  CHECK_THROWS_AS(fuse(std::vector<ModalityEmbedding>{text, text2}), QbarError);

  const std::vector<Modality> declared = {Modality::text, Modality::audio};
  try {
    fuse(std::vector<ModalityEmbedding>{text}, declared);
    CHECK(false);
  } catch (const QbarError& e) {
    CHECK(e.code() == ErrorCode::MissingModality);
  }
}

TEST_CASE("fit_to_qdim pads, passes through, and validates") {
  FusedVector x;
  x.values = {1.0, 2.0, 3.0};
  const auto padded = fit_to_qdim(x, std::nullopt, 8);
  CHECK(padded.size() == 8);
  CHECK(padded[0] == 1.0);
  CHECK(padded[2] == 3.0);
  CHECK(padded[3] == 0.0);
  CHECK(padded[7] == 0.0);

  // padding preserves the norm
  double nx = 0.0, np = 0.0;
  for (double v : x.values) nx += v * v;
  for (double v : padded) np += v * v;
  CHECK(nx == np);

  FusedVector y;
  y.values.assign(8, 1.5);
  CHECK(fit_to_qdim(y, std::nullopt, 8) == y.values);

  FusedVector big;
  big.values.assign(16, 1.0);
  CHECK_THROWS_AS(fit_to_qdim(big, std::nullopt, 8), QbarError);
  try {
    fit_to_qdim(big, std::nullopt, 8);
  } catch (const QbarError& e) {
    CHECK(e.code() == ErrorCode::MissingProjection);
  }
}

TEST_CASE("projection rows are orthonormal and seed-stable (small)") {
  const ProjectionSpec spec{1234, 48, 16};
  const auto p = projection_matrix(spec);
  CHECK(p.size() == 48 * 16);
  for (size_t r1 = 0; r1 < 16; ++r1)
    for (size_t r2 = r1; r2 < 16; ++r2) {
      double dot = 0.0;
      for (size_t c = 0; c < 48; ++c) dot += p[r1 * 48 + c] * p[r2 * 48 + c];
      CHECK(std::abs(dot - (r1 == r2 ? 1.0 : 0.0)) < 1e-10);
    }
  CHECK(projection_matrix(spec) == p);

  FusedVector x;
  Rng rng(9);
  x.values.resize(48);
  for (double& v : x.values) v = rng.gaussian();
  const auto y1 = fit_to_qdim(x, spec, 16);
  const auto y2 = fit_to_qdim(x, spec, 16);
  CHECK(y1 == y2);
  // orthonormal rows cannot grow the norm
  double nx = 0.0, ny = 0.0;
  for (double v : x.values) nx += v * v;
  for (double v : y1) ny += v * v;
  CHECK(ny <= nx + 1e-12);
}

TEST_CASE("projection at full scale: 8192 -> 4096" * doctest::timeout(300)) {
  // the reference quantum dimension; P P^T = I_4096 within 1e-10
  const ProjectionSpec spec{42, 8192, 4096};
  const auto p = projection_matrix(spec);

  using RowMajor =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMajor> pm(p.data(), 4096, 8192);
  const Eigen::MatrixXd gram = pm * pm.transpose();
  const double max_err =
      (gram - Eigen::MatrixXd::Identity(4096, 4096)).cwiseAbs().maxCoeff();
  CHECK(max_err < 1e-10);

  Rng rng(7);
  FusedVector x;
  x.values.resize(8192);
  for (double& v : x.values) v = rng.gaussian();
  const auto y1 = fit_to_qdim(x, spec, 4096);
  const auto y2 = fit_to_qdim(x, spec, 4096);
  CHECK(y1 == y2);
}
