#include "qbar/scoring.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace qbar {
namespace {

Eigen::MatrixXd to_matrix(std::span<const std::vector<double>> rows, size_t d) {
  Eigen::MatrixXd m(rows.size(), d);
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != d)
      fail(ErrorCode::DimensionMismatch, "corpus rows have unequal dims");
    for (size_t j = 0; j < d; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
  }
  return m;
}

double f1_from_counts(long tp, long fp, long fn) {
  const double p = (tp + fp) > 0 ? double(tp) / double(tp + fp) : 0.0;
  const double r = (tp + fn) > 0 ? double(tp) / double(tp + fn) : 0.0;
  return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

}  // namespace

MutationAxis fit_mutation_axis(
    std::span<const std::vector<double>> normal_corpus,
    std::span<const std::vector<double>> sensational_corpus, double shrinkage) {
  if (normal_corpus.size() < 2 || sensational_corpus.size() < 2)
    fail(ErrorCode::ClassTooSmall, "each class needs at least 2 samples");
  const size_t d = normal_corpus[0].size();
  Eigen::MatrixXd a = to_matrix(normal_corpus, d);
  Eigen::MatrixXd b = to_matrix(sensational_corpus, d);

  const Eigen::VectorXd mu_n = a.colwise().mean();
  const Eigen::VectorXd mu_s = b.colwise().mean();
  const Eigen::VectorXd diff = mu_s - mu_n;
  if (diff.norm() <= 1e-12)
    fail(ErrorCode::DegenerateAxis, "class means coincide; no direction");

  a.rowwise() -= mu_n.transpose();
  b.rowwise() -= mu_s.transpose();
  const double dof = double(normal_corpus.size() + sensational_corpus.size() - 2);
  Eigen::MatrixXd pooled = (a.transpose() * a + b.transpose() * b) / dof;
  const double alpha = shrinkage * pooled.trace() / double(d);
  pooled.diagonal().array() += alpha;

  Eigen::LDLT<Eigen::MatrixXd> ldlt(pooled);
  if (ldlt.info() != Eigen::Success)
    fail(ErrorCode::SingularCovariance, "regularized covariance not factorizable");
  Eigen::VectorXd w = ldlt.solve(diff);
  if (!w.allFinite())
    fail(ErrorCode::SingularCovariance, "solve produced non-finite direction");
  if (w.norm() <= 1e-12)
    fail(ErrorCode::DegenerateAxis, "mutation axis has zero norm");

  MutationAxis axis;
  axis.shrinkage = shrinkage;
  axis.w_mut.assign(w.data(), w.data() + w.size());
  axis.mean_normal.assign(mu_n.data(), mu_n.data() + mu_n.size());
  axis.mean_sensational.assign(mu_s.data(), mu_s.data() + mu_s.size());
  return axis;
}

double s_dir(std::span<const double> x, const MutationAxis& axis,
             bool* degenerate) {
  if (x.size() != axis.w_mut.size())
    fail(ErrorCode::DimensionMismatch,
         "vector dim " + std::to_string(x.size()) + " != axis dim " +
             std::to_string(axis.w_mut.size()));
  double xw = 0.0, xx = 0.0, ww = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    xw += x[i] * axis.w_mut[i];
    xx += x[i] * x[i];
    ww += axis.w_mut[i] * axis.w_mut[i];
  }
  const double nx = std::sqrt(xx);
  if (degenerate) *degenerate = false;
  if (nx <= 1e-12) {
    if (degenerate) *degenerate = true;
    return 0.0;
  }
  return xw / (nx * std::sqrt(ww));
}

ScoreNormalizer fit_normalizer(std::span<const double> scores) {
  if (scores.size() < 2)
    fail(ErrorCode::TooFewScores, "normalizer needs at least 2 scores");
  const double n = static_cast<double>(scores.size());
  double mean = 0.0;
  for (double s : scores) mean += s;
  mean /= n;
  double var = 0.0;
  for (double s : scores) var += (s - mean) * (s - mean);
  var /= n;  // population variance
  ScoreNormalizer out;
  out.mean = mean;
  out.std_dev = std::max(std::sqrt(var), 1e-12);
  return out;
}

double s_final(double s_quant, double s_dir, const ScoreNormalizer& quant_norm,
               const ScoreNormalizer& dir_norm, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0))
    fail(ErrorCode::GammaOutOfRange, "gamma must lie in [0,1]");
  return gamma * quant_norm.normalize(s_quant) +
         (1.0 - gamma) * dir_norm.normalize(s_dir);
}

Decision classify(double s_final, const DecisionConfig& config) {
  return s_final > config.tau ? Decision::anomaly : Decision::normal;
}

namespace {

void check_two_classes(std::span<const ValidationSample> validation) {
  size_t n_pos = 0;
  for (const auto& v : validation) n_pos += v.is_anomaly ? 1 : 0;
  if (validation.empty() || n_pos == 0 || n_pos == validation.size())
    fail(ErrorCode::OneClassValidation,
         "validation must contain both classes");
}

// Sweeps tau over -inf, midpoints of consecutive distinct sorted scores,
// +inf; improves `best` only strictly, so earlier (gamma, tau) win ties.
void sweep_tau(std::span<const ValidationSample> validation,
               const ScoreNormalizer& quant_norm,
               const ScoreNormalizer& dir_norm, double gamma,
               CalibrationResult& best) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> scores(validation.size());
  for (size_t i = 0; i < validation.size(); ++i)
    scores[i] = s_final(validation[i].s_quant, validation[i].s_dir, quant_norm,
                        dir_norm, gamma);

  std::vector<double> sorted = scores;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<double> taus;
  taus.push_back(-inf);
  for (size_t i = 0; i + 1 < sorted.size(); ++i)
    taus.push_back(0.5 * (sorted[i] + sorted[i + 1]));
  taus.push_back(inf);

  for (double tau : taus) {
    long tp = 0, fp = 0, fn = 0;
    for (size_t i = 0; i < validation.size(); ++i) {
      const bool pred = scores[i] > tau;
      if (pred && validation[i].is_anomaly) ++tp;
      else if (pred) ++fp;
      else if (validation[i].is_anomaly) ++fn;
    }
    const double f1 = f1_from_counts(tp, fp, fn);
    if (f1 > best.f1) {
      best.f1 = f1;
      best.config.gamma = gamma;
      best.config.tau = tau;
    }
  }
}

}  // namespace

CalibrationResult calibrate(std::span<const ValidationSample> validation,
                            const ScoreNormalizer& quant_norm,
                            const ScoreNormalizer& dir_norm) {
  check_two_classes(validation);
  CalibrationResult best;
  best.f1 = -1.0;
  for (int gi = 0; gi <= 10; ++gi)
    sweep_tau(validation, quant_norm, dir_norm, gi / 10.0, best);
  return best;
}

CalibrationResult calibrate_tau(std::span<const ValidationSample> validation,
                                const ScoreNormalizer& quant_norm,
                                const ScoreNormalizer& dir_norm, double gamma) {
  check_two_classes(validation);
  CalibrationResult best;
  best.f1 = -1.0;
  sweep_tau(validation, quant_norm, dir_norm, gamma, best);
  return best;
}

}  // namespace qbar
