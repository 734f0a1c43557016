#include "qbar/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "qbar/peqad.hpp"
#include "qbar/rng.hpp"

namespace qbar {
namespace {

constexpr uint64_t kTagProjection = 0x70726F6AULL;  // "proj"
constexpr uint64_t kTagNoise = 0x6E6F697365ULL;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<VideoEntry> creator_split(const DatasetManifest& manifest,
                                      const std::string& creator_id,
                                      Split split) {
  std::vector<VideoEntry> out;
  for (const auto& v : manifest.videos)
    if (v.creator_id == creator_id && v.split == split) out.push_back(v);
  std::sort(out.begin(), out.end(), [](const VideoEntry& a, const VideoEntry& b) {
    return a.index != b.index ? a.index < b.index : a.id < b.id;
  });
  return out;
}

const CreatorEntry& find_creator(const DatasetManifest& manifest,
                                 const std::string& creator_id) {
  for (const auto& c : manifest.creators)
    if (c.id == creator_id) return c;
  fail(ErrorCode::UnknownCreator, "creator " + creator_id + " not in manifest");
}

double quant_score(const ModelCheckpoint& ckpt, const StateVector& encoded) {
  const StateVector center(ckpt.ansatz.n_qubits, ckpt.center);
  const StateVector out = run_ansatz(encoded, ckpt.ansatz, ckpt.theta_star);
  return 2.0 - 2.0 * overlap(center, out).real();
}

MutationAxis axis_from_checkpoint(const ModelCheckpoint& ckpt) {
  MutationAxis axis;
  axis.w_mut = ckpt.w_mut;
  return axis;
}

}  // namespace

FusedVector fuse_embedding(const EmbeddingFile& file,
                           const DatasetManifest& manifest) {
  std::vector<ModalityEmbedding> parts;
  std::vector<Modality> declared;
  for (const auto& [name, dim] : manifest.modalities) {
    const auto m = modality_from_name(name);
    if (!m) fail(ErrorCode::SchemaViolation, "unknown modality " + name);
    declared.push_back(*m);
    const EmbeddingFile::Block* found = nullptr;
    for (const auto& b : file.blocks)
      if (b.name == name) {
        if (found)
          fail(ErrorCode::DuplicateModality, "duplicate block " + name);
        found = &b;
      }
    if (!found) fail(ErrorCode::MissingModality, "no block " + name);
    if (found->rows != 1)
      fail(ErrorCode::CorruptPayload,
           "block " + name + " is not a pooled (single-row) embedding");
    if (found->dim != dim)
      fail(ErrorCode::DimensionMismatch,
           "block " + name + " dim " + std::to_string(found->dim) +
               " != declared " + std::to_string(dim));
    ModalityEmbedding e;
    e.modality = *m;
    e.values.assign(found->values.begin(), found->values.end());
    parts.push_back(std::move(e));
  }
  return fuse(parts, declared);
}

FusedVector load_fused(const DatasetManifest& manifest,
                       const std::string& rel_path) {
  return fuse_embedding(read_embedding(manifest.base_dir / rel_path), manifest);
}

StateVector encode_for_model(const FusedVector& fused,
                             const AnsatzConfig& ansatz,
                             const std::optional<ProjectionSpec>& projection) {
  const size_t out_dim = size_t(1) << ansatz.n_qubits;
  return amplitude_encode(fit_to_qdim(fused, projection, out_dim));
}

TrainOutcome train_creator(const DatasetManifest& manifest,
                           const std::string& creator_id,
                           const TrainConfig& train_config,
                           const AnsatzConfig& ansatz, double shrinkage,
                           bool quiet) {
  find_creator(manifest, creator_id);
  const auto train_videos = creator_split(manifest, creator_id, Split::train);
  if (train_videos.empty())
    fail(ErrorCode::DegenerateCenter,
         "creator " + creator_id + " has no train videos");

  std::vector<FusedVector> fused;
  fused.reserve(train_videos.size());
  for (const auto& v : train_videos) fused.push_back(load_fused(manifest, v.path));

  const size_t d = fused[0].values.size();
  const size_t out_dim = size_t(1) << ansatz.n_qubits;
  std::optional<ProjectionSpec> projection;
  if (d > out_dim)
    projection = ProjectionSpec{
        derive_seed(train_config.seed, {kTagProjection}), d, out_dim};

  std::vector<StateVector> encoded;
  encoded.reserve(fused.size());
  for (const auto& f : fused)
    encoded.push_back(encode_for_model(f, ansatz, projection));

  auto [model, report] = train(encoded, train_config, ansatz);
  model.projection = projection;
  if (!quiet) {
    std::fprintf(stderr, "[train %s] initial %.6f final %.6f (%d epochs)\n",
                 creator_id.c_str(), report.initial_loss, report.final_loss,
                 train_config.epochs);
  }

  // Mutation axis: this creator's train normals vs the sensational corpus.
  std::vector<std::vector<double>> normal_rows;
  for (const auto& f : fused) normal_rows.push_back(f.values);
  std::vector<std::vector<double>> corpus_rows;
  for (const auto& rel : manifest.sensational_corpus)
    corpus_rows.push_back(load_fused(manifest, rel).values);
  const MutationAxis axis =
      fit_mutation_axis(normal_rows, corpus_rows, shrinkage);

  // Normalizers fitted on the train normals' scores.
  std::vector<double> q_scores, d_scores;
  for (size_t i = 0; i < fused.size(); ++i) {
    q_scores.push_back(distance(model, encoded[i]));
    d_scores.push_back(s_dir(fused[i].values, axis));
  }

  ModelCheckpoint ckpt;
  ckpt.creator_id = creator_id;
  ckpt.ansatz = model.ansatz;
  ckpt.train = train_config;
  ckpt.projection = projection;
  ckpt.theta_star = model.theta_star;
  ckpt.center.assign(model.center.amplitudes().begin(),
                     model.center.amplitudes().end());
  ckpt.w_mut = axis.w_mut;
  ckpt.quant_norm = fit_normalizer(q_scores);
  ckpt.dir_norm = fit_normalizer(d_scores);
  return {std::move(ckpt), std::move(report)};
}

std::pair<ModelCheckpoint, CalibrationResult> calibrate_creator(
    const ModelCheckpoint& checkpoint, const DatasetManifest& manifest) {
  const auto videos =
      creator_split(manifest, checkpoint.creator_id, Split::validation);
  std::vector<ValidationSample> samples;
  const MutationAxis axis = axis_from_checkpoint(checkpoint);
  for (const auto& v : videos) {
    const FusedVector fused = load_fused(manifest, v.path);
    ValidationSample s;
    s.s_quant = quant_score(
        checkpoint,
        encode_for_model(fused, checkpoint.ansatz, checkpoint.projection));
    s.s_dir = s_dir(fused.values, axis);
    s.is_anomaly = v.label != Label::normal;
    samples.push_back(s);
  }
  const CalibrationResult result =
      calibrate(samples, checkpoint.quant_norm, checkpoint.dir_norm);
  ModelCheckpoint updated = checkpoint;
  updated.decision = result.config;
  return {std::move(updated), result};
}

ScoreRecord score_fused(const ModelCheckpoint& checkpoint,
                        const FusedVector& fused) {
  if (!checkpoint.decision)
    fail(ErrorCode::UncalibratedModel,
         "checkpoint for " + checkpoint.creator_id + " has no (gamma, tau)");
  const MutationAxis axis = axis_from_checkpoint(checkpoint);
  ScoreRecord r;
  r.s_quant = quant_score(
      checkpoint,
      encode_for_model(fused, checkpoint.ansatz, checkpoint.projection));
  r.s_dir = s_dir(fused.values, axis);
  r.z_quant = checkpoint.quant_norm.normalize(r.s_quant);
  r.z_dir = checkpoint.dir_norm.normalize(r.s_dir);
  r.s_final = s_final(r.s_quant, r.s_dir, checkpoint.quant_norm,
                      checkpoint.dir_norm, checkpoint.decision->gamma);
  r.decision = classify(r.s_final, *checkpoint.decision);
  return r;
}

SeedEval evaluate_seed(const DatasetManifest& manifest,
                       const std::map<std::string, ModelCheckpoint>& models,
                       uint64_t seed, const std::string& variant,
                       const std::optional<double>& gamma_override) {
  SeedEval out;
  out.seed = seed;
  out.variant = variant;

  std::vector<bool> pooled_labels, pooled_preds;
  std::vector<double> pooled_scores;

  for (const auto& creator : manifest.creators) {
    auto it = models.find(creator.id);
    if (it == models.end())
      fail(ErrorCode::MissingCheckpoint,
           "creator " + creator.id + " seed " + std::to_string(seed));
    ModelCheckpoint ckpt = it->second;
    if (gamma_override) {
      // re-pick tau on validation at the forced gamma
      const auto videos = creator_split(manifest, creator.id, Split::validation);
      std::vector<ValidationSample> samples;
      const MutationAxis axis = axis_from_checkpoint(ckpt);
      for (const auto& v : videos) {
        const FusedVector fused = load_fused(manifest, v.path);
        ValidationSample s;
        s.s_quant = quant_score(
            ckpt, encode_for_model(fused, ckpt.ansatz, ckpt.projection));
        s.s_dir = s_dir(fused.values, axis);
        s.is_anomaly = v.label != Label::normal;
        samples.push_back(s);
      }
      ckpt.decision =
          calibrate_tau(samples, ckpt.quant_norm, ckpt.dir_norm, *gamma_override)
              .config;
    }

    const auto test_videos = creator_split(manifest, creator.id, Split::test);
    std::vector<bool> labels, preds;
    std::vector<double> scores;
    for (const auto& v : test_videos) {
      const FusedVector fused = load_fused(manifest, v.path);
      const ScoreRecord r = score_fused(ckpt, fused);
      VideoScore vs;
      vs.video_id = v.id;
      vs.creator_id = v.creator_id;
      vs.label = v.label;
      vs.record = r;
      out.scores.push_back(std::move(vs));
      labels.push_back(v.label != Label::normal);
      preds.push_back(r.decision == Decision::anomaly);
      scores.push_back(r.s_final);
    }

    CreatorEval ce;
    ce.creator_id = creator.id;
    ce.counts = confusion(labels, preds);
    ce.metrics = prf1(ce.counts);
    ce.aupr = aupr(labels, scores);
    ce.fpr = (ce.counts.fp + ce.counts.tn) > 0
                 ? double(ce.counts.fp) / double(ce.counts.fp + ce.counts.tn)
                 : 0.0;
    out.per_creator.push_back(std::move(ce));

    pooled_labels.insert(pooled_labels.end(), labels.begin(), labels.end());
    pooled_preds.insert(pooled_preds.end(), preds.begin(), preds.end());
    pooled_scores.insert(pooled_scores.end(), scores.begin(), scores.end());
  }

  out.pooled_counts = confusion(pooled_labels, pooled_preds);
  out.pooled = prf1(out.pooled_counts);
  out.pooled_aupr = aupr(pooled_labels, pooled_scores);
  out.pr_points = pr_curve(pooled_labels, pooled_scores);
  return out;
}

std::vector<RobustnessRow> robustness_sweep(
    const DatasetManifest& manifest,
    const std::map<std::string, ModelCheckpoint>& models,
    const std::vector<double>& sigmas, uint64_t noise_seed) {
  std::vector<RobustnessRow> rows;
  for (size_t si = 0; si < sigmas.size(); ++si) {
    const double sigma = sigmas[si];
    std::vector<bool> labels, preds;
    size_t video_ordinal = 0;
    for (const auto& creator : manifest.creators) {
      auto it = models.find(creator.id);
      if (it == models.end())
        fail(ErrorCode::MissingCheckpoint, "creator " + creator.id);
      const ModelCheckpoint& ckpt = it->second;
      for (const auto& v : creator_split(manifest, creator.id, Split::test)) {
        FusedVector fused = load_fused(manifest, v.path);
        if (sigma != 0.0) {
          Rng rng(derive_seed(noise_seed, {kTagNoise, si, video_ordinal}));
          for (double& x : fused.values) x += sigma * rng.gaussian();
        }
        ++video_ordinal;
        const ScoreRecord r = score_fused(ckpt, fused);
        labels.push_back(v.label != Label::normal);
        preds.push_back(r.decision == Decision::anomaly);
      }
    }
    RobustnessRow row;
    row.sigma = sigma;
    row.pooled = prf1(confusion(labels, preds));
    rows.push_back(row);
  }
  return rows;
}

std::string results_csv(const std::vector<SeedEval>& evals) {
  std::string out =
      "seed,variant,creator,tp,fp,tn,fn,precision,recall,f1,aupr,fpr\n";
  for (const auto& e : evals) {
    for (const auto& c : e.per_creator) {
      out += std::to_string(e.seed) + "," + e.variant + "," + c.creator_id +
             "," + std::to_string(c.counts.tp) + "," +
             std::to_string(c.counts.fp) + "," + std::to_string(c.counts.tn) +
             "," + std::to_string(c.counts.fn) + "," +
             fmt_double(c.metrics.precision) + "," +
             fmt_double(c.metrics.recall) + "," + fmt_double(c.metrics.f1) +
             "," + fmt_double(c.aupr) + "," + fmt_double(c.fpr) + "\n";
    }
    const double pooled_fpr =
        (e.pooled_counts.fp + e.pooled_counts.tn) > 0
            ? double(e.pooled_counts.fp) /
                  double(e.pooled_counts.fp + e.pooled_counts.tn)
            : 0.0;
    out += std::to_string(e.seed) + "," + e.variant + ",ALL," +
           std::to_string(e.pooled_counts.tp) + "," +
           std::to_string(e.pooled_counts.fp) + "," +
           std::to_string(e.pooled_counts.tn) + "," +
           std::to_string(e.pooled_counts.fn) + "," +
           fmt_double(e.pooled.precision) + "," + fmt_double(e.pooled.recall) +
           "," + fmt_double(e.pooled.f1) + "," + fmt_double(e.pooled_aupr) +
           "," + fmt_double(pooled_fpr) + "\n";
  }
  return out;
}

std::string pr_curve_csv(const std::vector<SeedEval>& evals) {
  std::string out = "seed,variant,threshold,precision,recall\n";
  for (const auto& e : evals)
    for (const auto& p : e.pr_points)
      out += std::to_string(e.seed) + "," + e.variant + "," +
             fmt_double(p.threshold) + "," + fmt_double(p.precision) + "," +
             fmt_double(p.recall) + "\n";
  return out;
}

std::string robustness_csv(
    const std::vector<std::pair<uint64_t, std::vector<RobustnessRow>>>& rows) {
  std::string out = "seed,sigma,precision,recall,f1\n";
  for (const auto& [seed, seed_rows] : rows)
    for (const auto& r : seed_rows)
      out += std::to_string(seed) + "," + fmt_double(r.sigma) + "," +
             fmt_double(r.pooled.precision) + "," +
             fmt_double(r.pooled.recall) + "," + fmt_double(r.pooled.f1) + "\n";
  return out;
}

}  // namespace qbar
