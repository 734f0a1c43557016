#include "qbar/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "qbar/rng.hpp"

namespace qbar {
namespace {

// stream tags
constexpr uint64_t kTagCreator = 0x63726561746F72ULL;  // "creator"
constexpr uint64_t kTagVideo = 0x766964656FULL;        // "video"
constexpr uint64_t kTagMutation = 0x6D757461746552ULL;
constexpr uint64_t kTagAxis = 0x61786973ULL;
constexpr uint64_t kTagCorpus = 0x636F72707573ULL;

// Trend positions centered under the position weights: sum_k w_k t_k = 0.
std::vector<double> centered_trend_positions(const std::vector<double>& w) {
  const int k = static_cast<int>(w.size());
  std::vector<double> t(k, 0.0);
  for (int i = 0; i < k; ++i) t[i] = double(i) / double(k - 1);
  double c = 0.0;
  for (int i = 0; i < k; ++i) c += w[i] * t[i];
  for (int i = 0; i < k; ++i) t[i] -= c;
  return t;
}

std::string format_id(const char* fmt, size_t a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, a);
  return buf;
}

void pool_segments(const std::vector<double>& segments, size_t rows, size_t dim,
                   const std::vector<double>& weights,
                   std::vector<double>& out) {
  out.assign(dim, 0.0);
  for (size_t k = 0; k < rows; ++k) {
    const double w = weights[k];
    const double* row = segments.data() + k * dim;
    for (size_t d = 0; d < dim; ++d) out[d] += w * row[d];
  }
}

void repool(SyntheticVideo& v, const std::vector<double>& weights) {
  for (auto& [m, segs] : v.segments) {
    const size_t rows = v.segment_rows.at(m);
    const size_t dim = rows ? segs.size() / rows : 0;
    pool_segments(segs, rows, dim, weights, v.pooled[m]);
  }
}

EmbeddingFile pooled_embedding(const SyntheticVideo& v) {
  EmbeddingFile f;
  for (Modality m : kAllModalities) {
    auto it = v.pooled.find(m);
    if (it == v.pooled.end()) continue;
    EmbeddingFile::Block b;
    b.name = modality_name(m);
    b.rows = 1;
    b.dim = static_cast<uint32_t>(it->second.size());
    b.values.reserve(it->second.size());
    for (double x : it->second) b.values.push_back(static_cast<float>(x));
    f.blocks.push_back(std::move(b));
  }
  return f;
}

}  // namespace

std::vector<double> position_weights(int k) {
  std::vector<double> w(k);
  double sum = 0.0;
  for (int i = 0; i < k; ++i) {
    w[i] = std::exp(-double(i) / double(k));
    sum += w[i];
  }
  for (double& x : w) x /= sum;
  return w;
}

CreatorProfile gen_creator(uint64_t global_seed, size_t creator_index,
                           const GeneratorConfig& config) {
  if (config.segments_per_video < 2)
    fail(ErrorCode::BadConfig, "segments_per_video must be >= 2");
  for (const auto& [m, d] : config.dims)
    if (d < 2)
      fail(ErrorCode::BadConfig,
           std::string(modality_name(m)) + " dim must be >= 2");

  CreatorProfile p;
  p.creator_id = format_id("c%03zu", creator_index);
  p.seed = derive_seed(global_seed, {kTagCreator, creator_index});
  p.segments_per_video = config.segments_per_video;
  p.position_weights = position_weights(config.segments_per_video);

  Rng rng(p.seed);
  for (Modality m : kAllModalities) {
    auto it = config.dims.find(m);
    if (it == config.dims.end()) continue;
    const size_t dim = it->second;
    auto& mean = p.mean[m];
    mean.resize(dim);
    for (double& x : mean) x = config.mean_prior_scale * rng.gaussian();
    auto& trend = p.trend[m];
    trend.resize(dim);
    for (double& x : trend) x = config.trend_scale * rng.gaussian();
    p.sigma[m] = config.sigma;
  }
  return p;
}

SyntheticVideo sample_video(const CreatorProfile& profile, int index) {
  const int k = profile.segments_per_video;
  const auto tpos = centered_trend_positions(profile.position_weights);

  SyntheticVideo v;
  v.creator_id = profile.creator_id;
  v.video_id = profile.creator_id + format_id("_v%02zu", size_t(index));
  v.index = index;
  v.label = Label::normal;

  Rng rng(derive_seed(profile.seed, {kTagVideo, uint64_t(index)}));
  for (Modality m : kAllModalities) {
    auto it = profile.mean.find(m);
    if (it == profile.mean.end()) continue;
    const auto& mean = it->second;
    const auto& trend = profile.trend.at(m);
    const double sigma = profile.sigma.at(m);
    const size_t dim = mean.size();
    auto& segs = v.segments[m];
    segs.resize(size_t(k) * dim);
    for (int s = 0; s < k; ++s)
      for (size_t d = 0; d < dim; ++d)
        segs[size_t(s) * dim + d] =
            mean[d] + tpos[s] * trend[d] + sigma * rng.gaussian();
    v.segment_rows[m] = size_t(k);
  }
  repool(v, profile.position_weights);
  return v;
}

std::vector<double> sensational_direction(uint64_t axis_seed, size_t text_dim) {
  Rng rng(derive_seed(axis_seed, {kTagAxis}));
  std::vector<double> w(text_dim);
  double norm2 = 0.0;
  for (double& x : w) {
    x = rng.gaussian();
    norm2 += x * x;
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& x : w) x *= inv;
  return w;
}

SyntheticVideo mutate_splice(const SyntheticVideo& video,
                             const MutationSpec& spec,
                             const CreatorProfile& profile) {
  if (spec.kind != MutationSpec::Kind::splice)
    fail(ErrorCode::BadConfig, "mutation spec is not a splice");
  const double delta = spec.splice.delete_fraction;
  if (delta < 0.0 || delta > 0.5)
    fail(ErrorCode::BadConfig, "delete_fraction outside [0, 0.5]");

  const size_t k = video.segment_rows.begin()->second;
  std::vector<size_t> order(k);
  std::iota(order.begin(), order.end(), size_t{0});
  Rng rng(spec.seed);
  if (spec.splice.permute) rng.shuffle(order);
  const size_t keep = k - size_t(std::ceil(delta * double(k)));

  SyntheticVideo out;
  out.creator_id = video.creator_id;
  out.video_id = video.video_id;
  out.index = video.index;
  out.label = Label::splice;
  for (const auto& [m, segs] : video.segments) {
    const size_t dim = segs.size() / video.segment_rows.at(m);
    auto& dst = out.segments[m];
    dst.resize(keep * dim);
    for (size_t s = 0; s < keep; ++s)
      std::copy_n(segs.data() + order[s] * dim, dim, dst.data() + s * dim);
    out.segment_rows[m] = keep;
  }
  repool(out, profile.position_weights);
  return out;
}

SyntheticVideo mutate_inject(const SyntheticVideo& video,
                             const MutationSpec& spec,
                             const CreatorProfile& profile) {
  if (spec.kind != MutationSpec::Kind::inject)
    fail(ErrorCode::BadConfig, "mutation spec is not an inject");
  if (spec.inject.strength < 0.0)
    fail(ErrorCode::BadConfig, "inject strength must be >= 0");

  SyntheticVideo out = video;
  out.label = Label::inject;

  const auto& mean = profile.mean.at(Modality::text);
  const auto& trend = profile.trend.at(Modality::text);
  const double sigma = profile.sigma.at(Modality::text);
  const size_t dim = mean.size();
  const size_t k = video.segment_rows.at(Modality::text);
  const size_t replace = size_t(std::ceil(double(k) / 4.0));
  const auto tpos = centered_trend_positions(profile.position_weights);
  const auto w_true = sensational_direction(spec.inject.axis_seed, dim);

  Rng rng(spec.seed);
  // partial Fisher-Yates picks `replace` distinct positions
  std::vector<size_t> pos(k);
  std::iota(pos.begin(), pos.end(), size_t{0});
  for (size_t i = 0; i < replace; ++i) {
    const size_t j = i + size_t(rng.below(k - i));
    std::swap(pos[i], pos[j]);
  }
  pos.resize(replace);
  std::sort(pos.begin(), pos.end());

  auto& segs = out.segments[Modality::text];
  const double s = spec.inject.strength;
  for (size_t p : pos)
    for (size_t d = 0; d < dim; ++d)
      segs[p * dim + d] = mean[d] + tpos[p] * trend[d] +
                          s * sigma * w_true[d] + sigma * rng.gaussian();
  repool(out, profile.position_weights);
  return out;
}

std::pair<DatasetManifest, GenSummary> gen_dataset(
    const std::filesystem::path& out_dir, uint64_t global_seed,
    const DatasetPreset& preset) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir / "emb", ec);
  if (ec)
    fail(ErrorCode::IoFailure,
         "cannot create " + (out_dir / "emb").string() + ": " + ec.message());

  const size_t n = preset.normals_per_creator;
  const size_t train_n = n * 70 / 100;
  const size_t val_n = n * 10 / 100;
  const size_t test_n = n - train_n - val_n;
  if (train_n == 0 || val_n == 0 || test_n == 0)
    fail(ErrorCode::BadConfig, "normals_per_creator too small for a 70/10/20 split");

  const uint64_t axis_seed = derive_seed(global_seed, {kTagAxis});

  DatasetManifest manifest;
  manifest.base_dir = out_dir;
  for (Modality m : kAllModalities) {
    auto it = preset.gen.dims.find(m);
    if (it != preset.gen.dims.end())
      manifest.modalities.emplace_back(modality_name(m), it->second);
  }

  GenSummary summary;
  summary.creators = preset.creators;

  auto emit = [&](const SyntheticVideo& v, const std::string& id, Split split,
                  const std::string& rel_path) {
    VideoEntry e;
    e.id = id;
    e.creator_id = v.creator_id;
    e.index = v.index;
    e.label = v.label;
    e.split = split;
    e.path = rel_path;
    manifest.videos.push_back(e);
    const auto bytes = encode_embedding(pooled_embedding(v));
    if (write_file_if_changed(out_dir / rel_path, bytes))
      ++summary.files_unchanged;
    else
      ++summary.files_written;
  };

  for (size_t ci = 0; ci < preset.creators; ++ci) {
    CreatorProfile profile = gen_creator(global_seed, ci, preset.gen);
    manifest.creators.push_back({profile.creator_id, profile.seed});

    std::vector<SyntheticVideo> normals;
    normals.reserve(n);
    for (size_t vi = 0; vi < n; ++vi)
      normals.push_back(sample_video(profile, int(vi)));

    for (size_t vi = 0; vi < n; ++vi) {
      const Split split = vi < train_n             ? Split::train
                          : vi < train_n + val_n   ? Split::validation
                                                   : Split::test;
      emit(normals[vi], normals[vi].video_id, split,
           "emb/" + normals[vi].video_id + ".qemb");
      switch (split) {
        case Split::train: ++summary.train_normals; break;
        case Split::validation: ++summary.validation_normals; break;
        case Split::test: ++summary.test_normals; break;
      }
    }

    auto make_spec = [&](MutationSpec::Kind kind, size_t source_index,
                         size_t ordinal) {
      MutationSpec spec;
      spec.kind = kind;
      spec.splice = preset.splice;
      spec.inject.strength = preset.inject_strength;
      spec.inject.axis_seed = axis_seed;
      spec.seed = derive_seed(profile.seed,
                              {kTagMutation, uint64_t(kind), source_index, ordinal});
      return spec;
    };

    // validation mutants, one per validation normal, alternating kinds
    for (size_t vi = 0; vi < val_n; ++vi) {
      const SyntheticVideo& src = normals[train_n + vi];
      const auto kind = (vi % 2 == 0) ? MutationSpec::Kind::splice
                                      : MutationSpec::Kind::inject;
      const auto spec = make_spec(kind, size_t(src.index), vi);
      SyntheticVideo mut = (kind == MutationSpec::Kind::splice)
                               ? mutate_splice(src, spec, profile)
                               : mutate_inject(src, spec, profile);
      const std::string id = src.video_id + "_m" + label_name(mut.label);
      emit(mut, id, Split::validation, "emb/" + id + ".qemb");
      ++summary.validation_mutants;
    }

    // test mutants cycle over the test normals
    for (size_t i = 0; i < preset.test_splice_per_creator; ++i) {
      const SyntheticVideo& src = normals[train_n + val_n + (i % test_n)];
      const auto spec = make_spec(MutationSpec::Kind::splice, size_t(src.index), i);
      SyntheticVideo mut = mutate_splice(src, spec, profile);
      const std::string id = src.video_id + format_id("_msplice%zu", i);
      emit(mut, id, Split::test, "emb/" + id + ".qemb");
      ++summary.test_mutants;
    }
    for (size_t i = 0; i < preset.test_inject_per_creator; ++i) {
      const SyntheticVideo& src = normals[train_n + val_n + (i % test_n)];
      const auto spec = make_spec(MutationSpec::Kind::inject, size_t(src.index), i);
      SyntheticVideo mut = mutate_inject(src, spec, profile);
      const std::string id = src.video_id + format_id("_minject%zu", i);
      emit(mut, id, Split::test, "emb/" + id + ".qemb");
      ++summary.test_mutants;
    }
  }

  // Sensational corpus: creator-agnostic samples whose text segments are all
  // shifted along the ground-truth direction.
  const auto weights = position_weights(preset.gen.segments_per_video);
  size_t text_dim = 0;
  for (const auto& [name, dim] : manifest.modalities)
    if (name == std::string(modality_name(Modality::text))) text_dim = dim;
  const auto w_true = sensational_direction(axis_seed, text_dim);
  for (size_t j = 0; j < preset.corpus_size; ++j) {
    Rng rng(derive_seed(global_seed, {kTagCorpus, j}));
    SyntheticVideo v;
    v.creator_id = "corpus";
    v.index = int(j);
    for (const auto& [name, dim] : manifest.modalities) {
      const Modality m = *modality_from_name(name);
      auto& segs = v.segments[m];
      const size_t k = size_t(preset.gen.segments_per_video);
      segs.resize(k * dim);
      for (size_t s = 0; s < k; ++s)
        for (size_t d = 0; d < dim; ++d) {
          double base = (m == Modality::text)
                            ? preset.corpus_strength * preset.gen.sigma * w_true[d]
                            : 0.0;
          segs[s * dim + d] = base + preset.gen.sigma * rng.gaussian();
        }
      v.segment_rows[m] = k;
    }
    repool(v, weights);
    const std::string rel = format_id("emb/corpus_%03zu.qemb", j);
    const auto bytes = encode_embedding(pooled_embedding(v));
    if (write_file_if_changed(out_dir / rel, bytes))
      ++summary.files_unchanged;
    else
      ++summary.files_written;
    manifest.sensational_corpus.push_back(rel);
    ++summary.corpus_files;
  }

  const std::string text = encode_manifest(manifest);
  const auto* p = reinterpret_cast<const std::byte*>(text.data());
  if (write_file_if_changed(out_dir / "manifest.json", {p, p + text.size()}))
    ++summary.files_unchanged;
  else
    ++summary.files_written;

  return {std::move(manifest), summary};
}

}  // namespace qbar
