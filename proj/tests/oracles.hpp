// Test-only oracles, independent of the library's computation paths:
// dense-matrix circuit simulation, finite differences, quadratic-time
// average precision, exhaustive threshold sweeps, and a hand-rolled
// linear solver for the discriminant axis.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <complex>
#include <functional>
#include <vector>

#include "qbar/statevector.hpp"

namespace oracle {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using qbar::AnsatzConfig;

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Mat ry_mat(double t) {
  Mat m(2, 2);
  m << std::cos(t / 2), -std::sin(t / 2), std::sin(t / 2), std::cos(t / 2);
  return m;
}

inline Mat rz_mat(double t) {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = std::polar(1.0, -t / 2);
  m(1, 1) = std::polar(1.0, t / 2);
  return m;
}

// qubit 0 is the most significant bit: embed G at position q via
// I_{2^q} (x) G (x) I_{2^{n-1-q}}
inline Mat embed_single(const Mat& g, int n, int q) {
  const Mat left = Mat::Identity(1 << q, 1 << q);
  const Mat right = Mat::Identity(1 << (n - 1 - q), 1 << (n - 1 - q));
  return kron(kron(left, g), right);
}

inline Mat cnot_mat(int n, int control, int target) {
  const size_t dim = size_t(1) << n;
  const size_t cb = size_t(1) << (n - 1 - control);
  const size_t tb = size_t(1) << (n - 1 - target);
  Mat m = Mat::Zero(dim, dim);
  for (size_t i = 0; i < dim; ++i) {
    const size_t j = (i & cb) ? (i ^ tb) : i;
    m(j, i) = 1.0;
  }
  return m;
}

// Full circuit unitary built gate-by-gate as a dense matrix product.
inline Mat ansatz_matrix(const AnsatzConfig& config,
                         std::span<const double> theta) {
  const int n = config.n_qubits;
  const size_t dim = size_t(1) << n;
  Mat u = Mat::Identity(dim, dim);
  for (int l = 0; l < config.n_layers; ++l) {
    const double* th = theta.data() + size_t(l) * 2 * n;
    for (int q = 0; q < n; ++q)
      u = embed_single(ry_mat(th[2 * q]), n, q) * u;
    for (int q = 0; q < n; ++q)
      u = embed_single(rz_mat(th[2 * q + 1]), n, q) * u;
    for (int q = 0; q + 1 < n; ++q) u = cnot_mat(n, q, q + 1) * u;
  }
  return u;
}

inline Vec to_eigen(const qbar::StateVector& s) {
  Vec v(s.dim());
  for (size_t i = 0; i < s.dim(); ++i) v(i) = s.amplitude(i);
  return v;
}

// Central finite differences of a scalar function of theta.
inline std::vector<double> finite_difference(
    const std::function<double(std::span<const double>)>& f,
    std::vector<double> theta, double eps) {
  std::vector<double> g(theta.size());
  for (size_t k = 0; k < theta.size(); ++k) {
    const double orig = theta[k];
    theta[k] = orig + eps;
    const double hi = f(theta);
    theta[k] = orig - eps;
    const double lo = f(theta);
    theta[k] = orig;
    g[k] = (hi - lo) / (2 * eps);
  }
  return g;
}

// Quadratic-time average precision: each positive contributes the precision
// at its own score threshold (>= semantics).
inline double average_precision(const std::vector<bool>& labels,
                                const std::vector<double>& scores) {
  double ap = 0.0;
  long n_pos = 0;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (!labels[i]) continue;
    ++n_pos;
    long tp = 0, at_least = 0;
    for (size_t j = 0; j < labels.size(); ++j) {
      if (scores[j] >= scores[i]) {
        ++at_least;
        if (labels[j]) ++tp;
      }
    }
    ap += double(tp) / double(at_least);
  }
  return ap / double(n_pos);
}

inline double f1_at(const std::vector<bool>& labels,
                    const std::vector<double>& scores, double tau) {
  long tp = 0, fp = 0, fn = 0;
  for (size_t i = 0; i < labels.size(); ++i) {
    const bool pred = scores[i] > tau;
    if (pred && labels[i]) ++tp;
    else if (pred) ++fp;
    else if (labels[i]) ++fn;
  }
  const double p = (tp + fp) > 0 ? double(tp) / (tp + fp) : 0.0;
  const double r = (tp + fn) > 0 ? double(tp) / (tp + fn) : 0.0;
  return (p + r) > 0 ? 2 * p * r / (p + r) : 0.0;
}

// Max F1 over every achievable threshold: tau = -inf plus each distinct
// score value spans all classification outcomes of the rule s > tau.
inline double best_f1_over_thresholds(const std::vector<bool>& labels,
                                      const std::vector<double>& scores) {
  double best = f1_at(labels, scores,
                      -std::numeric_limits<double>::infinity());
  for (double t : scores) best = std::max(best, f1_at(labels, scores, t));
  return best;
}

// Gaussian elimination with partial pivoting; independent of Eigen's LDLT.
inline std::vector<double> solve_dense(std::vector<std::vector<double>> a,
                                       std::vector<double> b) {
  const size_t n = b.size();
  for (size_t col = 0; col < n; ++col) {
    size_t pivot = col;
    for (size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (size_t i = n; i-- > 0;) {
    double s = b[i];
    for (size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

}  // namespace oracle
