#include "qbar/features.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <string>

#include "qbar/rng.hpp"

namespace qbar {

const char* modality_name(Modality m) {
  switch (m) {
    case Modality::text: return "text";
    case Modality::audio: return "audio";
    case Modality::visual: return "visual";
    case Modality::meta: return "meta";
  }
  return "?";
}

std::optional<Modality> modality_from_name(std::string_view name) {
  for (Modality m : kAllModalities)
    if (name == modality_name(m)) return m;
  return std::nullopt;
}

LayerNormResult layer_normalize(std::span<const double> v) {
  if (v.size() < 2)
    fail(ErrorCode::TooShort, "layer_normalize needs at least 2 values");
  for (double x : v)
    if (!std::isfinite(x))
      fail(ErrorCode::NonFiniteValue, "layer_normalize input not finite");
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= n;  // population variance
  const double sd = std::sqrt(var);
  LayerNormResult out;
  out.values.resize(v.size());
  if (sd < 1e-12) {
    out.degenerate = true;  // constant vector; zeros, not an error
    return out;
  }
  for (size_t i = 0; i < v.size(); ++i) out.values[i] = (v[i] - mean) / sd;
  return out;
}

FusedVector fuse(std::span<const ModalityEmbedding> parts) {
  std::vector<Modality> declared;
  for (const auto& p : parts)
    if (std::find(declared.begin(), declared.end(), p.modality) ==
        declared.end())
      declared.push_back(p.modality);
  return fuse(parts, declared);
}

FusedVector fuse(std::span<const ModalityEmbedding> parts,
                 std::span<const Modality> declared) {
  FusedVector out;
  for (Modality m : kAllModalities) {
    if (std::find(declared.begin(), declared.end(), m) == declared.end())
      continue;
    const ModalityEmbedding* found = nullptr;
    for (const auto& p : parts) {
      if (p.modality != m) continue;
      if (found)
        fail(ErrorCode::DuplicateModality,
             std::string("duplicate embedding for ") + modality_name(m));
      found = &p;
    }
    if (!found)
      fail(ErrorCode::MissingModality,
           std::string("no embedding for declared modality ") +
               modality_name(m));
    auto ln = layer_normalize(found->values);
    out.degenerate = out.degenerate || ln.degenerate;
    out.source_dims.push_back(ln.values.size());
    out.values.insert(out.values.end(), ln.values.begin(), ln.values.end());
  }
  // anything in parts that is not declared is a caller mistake
  for (const auto& p : parts)
    if (std::find(declared.begin(), declared.end(), p.modality) ==
        declared.end())
      fail(ErrorCode::DuplicateModality,
           std::string("embedding for undeclared modality ") +
               modality_name(p.modality));
  return out;
}

std::vector<double> projection_matrix(const ProjectionSpec& spec) {
  if (spec.out_dim == 0 || spec.in_dim < spec.out_dim)
    fail(ErrorCode::DimensionMismatch,
         "projection requires in_dim >= out_dim > 0");
  const auto rows = static_cast<Eigen::Index>(spec.out_dim);
  const auto cols = static_cast<Eigen::Index>(spec.in_dim);
  // Gaussian in_dim x out_dim matrix, column-by-column in a fixed draw order;
  // thin QR gives orthonormal columns, transposed into orthonormal rows.
  Rng rng(spec.seed);
  Eigen::MatrixXd g(cols, rows);
  for (Eigen::Index j = 0; j < rows; ++j)
    for (Eigen::Index i = 0; i < cols; ++i) g(i, j) = rng.gaussian();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd thin_q =
      qr.householderQ() * Eigen::MatrixXd::Identity(cols, rows);
  std::vector<double> out(spec.out_dim * spec.in_dim);
  for (size_t r = 0; r < spec.out_dim; ++r)
    for (size_t c = 0; c < spec.in_dim; ++c)
      out[r * spec.in_dim + c] =
          thin_q(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r));
  return out;
}

std::vector<double> fit_to_qdim(const FusedVector& x,
                                const std::optional<ProjectionSpec>& spec,
                                size_t out_dim) {
  const size_t d = x.values.size();
  if (d == out_dim) return x.values;
  if (d < out_dim) {
    std::vector<double> out(out_dim, 0.0);
    std::copy(x.values.begin(), x.values.end(), out.begin());
    return out;
  }
  if (!spec)
    fail(ErrorCode::MissingProjection,
         "fused dimension " + std::to_string(d) + " exceeds " +
             std::to_string(out_dim) + " and no projection spec was given");
  if (spec->in_dim != d || spec->out_dim != out_dim)
    fail(ErrorCode::DimensionMismatch, "projection spec dims do not match");
  // The QR is expensive at full scale; keep the most recent matrix around.
  static std::mutex cache_mutex;
  static ProjectionSpec cached_spec;
  static std::shared_ptr<const std::vector<double>> cached_matrix;
  std::shared_ptr<const std::vector<double>> p;
  {
    std::lock_guard<std::mutex> lock(cache_mutex);
    if (cached_matrix && cached_spec.seed == spec->seed &&
        cached_spec.in_dim == spec->in_dim &&
        cached_spec.out_dim == spec->out_dim) {
      p = cached_matrix;
    }
  }
  if (!p) {
    p = std::make_shared<const std::vector<double>>(projection_matrix(*spec));
    std::lock_guard<std::mutex> lock(cache_mutex);
    cached_spec = *spec;
    cached_matrix = p;
  }
  std::vector<double> out(out_dim, 0.0);
  for (size_t r = 0; r < out_dim; ++r) {
    const double* row = p->data() + r * d;
    double s = 0.0;
    for (size_t c = 0; c < d; ++c) s += row[c] * x.values[c];
    out[r] = s;
  }
  return out;
}

}  // namespace qbar
