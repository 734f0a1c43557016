// qbar: generate synthetic creator datasets, train and calibrate per-creator
// detectors, score videos, and evaluate detection metrics.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "qbar/cli_config.hpp"
#include "qbar/eval.hpp"
#include "qbar/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalArgs {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::string out_dir;
  std::string creator;
  bool quiet = false;
};

qbar::RunConfig resolve_config(const GlobalArgs& args) {
  qbar::RunConfig cfg;
  if (!args.config_path.empty()) cfg = qbar::load_run_config(args.config_path);
  return cfg;
}

void emit(const json& record) { std::cout << record.dump() << "\n"; }

json decision_json(const std::optional<qbar::DecisionConfig>& d) {
  if (!d) return nullptr;
  json j;
  j["gamma"] = d->gamma;
  if (std::isfinite(d->tau))
    j["tau"] = d->tau;
  else
    j["tau"] = d->tau > 0 ? "inf" : "-inf";
  return j;
}

int cmd_gen(const GlobalArgs& args) {
  qbar::RunConfig cfg = resolve_config(args);
  if (args.seed) cfg.dataset_seed = *args.seed;
  if (args.out_dir.empty())
    qbar::fail(qbar::ErrorCode::BadConfig, "gen requires --out");

  auto [manifest, summary] =
      qbar::gen_dataset(args.out_dir, cfg.dataset_seed, cfg.preset);

  json rec;
  rec["command"] = "gen";
  rec["seed"] = cfg.dataset_seed;
  rec["manifest"] = (fs::path(args.out_dir) / "manifest.json").string();
  rec["creators"] = summary.creators;
  rec["per_creator"] = {
      {"train_normals", summary.train_normals / summary.creators},
      {"validation_normals", summary.validation_normals / summary.creators},
      {"validation_mutants", summary.validation_mutants / summary.creators},
      {"test_normals", summary.test_normals / summary.creators},
      {"test_mutants", summary.test_mutants / summary.creators}};
  rec["corpus_files"] = summary.corpus_files;
  rec["files_written"] = summary.files_written;
  rec["unchanged"] = summary.files_written == 0;
  emit(rec);
  return 0;
}

int cmd_train(const GlobalArgs& args, const std::string& manifest_path) {
  qbar::RunConfig cfg = resolve_config(args);
  if (args.seed) cfg.train.seed = *args.seed;
  if (args.creator.empty())
    qbar::fail(qbar::ErrorCode::BadConfig, "train requires --creator");
  if (args.out_dir.empty())
    qbar::fail(qbar::ErrorCode::BadConfig, "train requires --out");

  const auto manifest = qbar::load_manifest(manifest_path);
  auto outcome = qbar::train_creator(manifest, args.creator, cfg.train,
                                     cfg.ansatz, cfg.shrinkage, args.quiet);

  std::error_code ec;
  fs::create_directories(args.out_dir, ec);
  if (ec)
    qbar::fail(qbar::ErrorCode::IoFailure,
               "cannot create " + args.out_dir + ": " + ec.message());
  const fs::path ckpt_path = fs::path(args.out_dir) / (args.creator + ".qbck");
  const auto bytes = qbar::encode_model(outcome.checkpoint);
  const bool unchanged = qbar::write_file_if_changed(ckpt_path, bytes);

  json rec;
  rec["command"] = "train";
  rec["creator"] = args.creator;
  rec["parameter_count"] = outcome.checkpoint.ansatz.parameter_count();
  rec["epochs"] = cfg.train.epochs;
  rec["seed"] = cfg.train.seed;
  rec["initial_loss"] = outcome.report.initial_loss;
  rec["final_loss"] = outcome.report.final_loss;
  rec["loss_ratio"] = outcome.report.initial_loss > 0
                          ? outcome.report.final_loss / outcome.report.initial_loss
                          : 0.0;
  rec["wall_seconds"] = outcome.report.wall_seconds;
  rec["checkpoint"] = ckpt_path.string();
  rec["unchanged"] = unchanged;
  emit(rec);
  return 0;
}

int cmd_calibrate(const GlobalArgs& args, const std::string& checkpoint_path,
                  const std::string& manifest_path) {
  const auto manifest = qbar::load_manifest(manifest_path);
  const auto ckpt = qbar::load_model(checkpoint_path);
  auto [updated, result] = qbar::calibrate_creator(ckpt, manifest);
  qbar::save_model(checkpoint_path, updated);

  json rec;
  rec["command"] = "calibrate";
  rec["creator"] = updated.creator_id;
  rec["gamma"] = result.config.gamma;
  if (std::isfinite(result.config.tau))
    rec["tau"] = result.config.tau;
  else
    rec["tau"] = result.config.tau > 0 ? "inf" : "-inf";
  rec["validation_f1"] = result.f1;
  rec["checkpoint"] = checkpoint_path;
  emit(rec);
  return 0;
}

int cmd_score(const GlobalArgs&, const std::string& checkpoint_path,
              const std::string& embedding_path) {
  const auto ckpt = qbar::load_model(checkpoint_path);
  const auto emb = qbar::read_embedding(embedding_path);
  // reconstruct the modality declaration from the checkpoint-free embedding
  qbar::DatasetManifest decl;
  for (const auto& b : emb.blocks) decl.modalities.emplace_back(b.name, b.dim);
  const auto fused = qbar::fuse_embedding(emb, decl);
  const auto r = qbar::score_fused(ckpt, fused);

  json rec;
  rec["command"] = "score";
  rec["creator"] = ckpt.creator_id;
  rec["embedding"] = embedding_path;
  rec["s_quant"] = r.s_quant;
  rec["s_dir"] = r.s_dir;
  rec["z_quant"] = r.z_quant;
  rec["z_dir"] = r.z_dir;
  rec["s_final"] = r.s_final;
  rec["decision"] = r.decision == qbar::Decision::anomaly ? "anomaly" : "normal";
  rec["decision_config"] = decision_json(ckpt.decision);
  emit(rec);
  return 0;
}

json summary_json(const qbar::MetricSummary& m) {
  return {{"mean", m.mean}, {"std", m.std_dev}, {"ci95_half", m.ci95_half}};
}

int cmd_eval(const GlobalArgs& args, const std::string& manifest_path,
             const std::string& models_dir, const std::string& seeds_csv,
             bool gamma_ablation, bool robustness) {
  qbar::RunConfig cfg = resolve_config(args);
  if (args.out_dir.empty())
    qbar::fail(qbar::ErrorCode::BadConfig, "eval requires --out");
  if (!seeds_csv.empty()) {
    cfg.eval_seeds.clear();
    std::string tok;
    for (char c : seeds_csv + ",") {
      if (c == ',') {
        if (!tok.empty()) cfg.eval_seeds.push_back(std::stoull(tok));
        tok.clear();
      } else {
        tok += c;
      }
    }
  }
  if (gamma_ablation) cfg.gamma_ablation = true;

  const auto manifest = qbar::load_manifest(manifest_path);
  std::error_code ec;
  fs::create_directories(args.out_dir, ec);

  std::vector<qbar::SeedEval> evals;
  std::vector<qbar::SeedMetrics> pooled_per_seed;
  std::vector<std::pair<uint64_t, std::vector<qbar::RobustnessRow>>> rob;

  for (uint64_t seed : cfg.eval_seeds) {
    std::map<std::string, qbar::ModelCheckpoint> models;
    for (const auto& c : manifest.creators) {
      const fs::path p =
          fs::path(models_dir) / ("seed_" + std::to_string(seed)) /
          (c.id + ".qbck");
      if (!fs::exists(p))
        qbar::fail(qbar::ErrorCode::MissingCheckpoint,
                   "creator " + c.id + " seed " + std::to_string(seed) +
                       " (" + p.string() + ")");
      models.emplace(c.id, qbar::load_model(p));
    }
    qbar::SeedEval ev = qbar::evaluate_seed(manifest, models, seed);
    pooled_per_seed.push_back({seed, ev.pooled, ev.pooled_aupr});

    json rec;
    rec["command"] = "eval";
    rec["seed"] = seed;
    rec["pooled"] = {{"precision", ev.pooled.precision},
                     {"recall", ev.pooled.recall},
                     {"f1", ev.pooled.f1},
                     {"aupr", ev.pooled_aupr}};
    emit(rec);

    evals.push_back(std::move(ev));
    if (cfg.gamma_ablation) {
      evals.push_back(qbar::evaluate_seed(manifest, models, seed, "gamma0", 0.0));
      evals.push_back(qbar::evaluate_seed(manifest, models, seed, "gamma1", 1.0));
    }
    if (robustness)
      rob.emplace_back(seed, qbar::robustness_sweep(manifest, models,
                                                    cfg.noise_sigmas, seed));
  }

  const std::string results = qbar::results_csv(evals);
  const std::string pr = qbar::pr_curve_csv(evals);
  const auto* rp = reinterpret_cast<const std::byte*>(results.data());
  const auto* pp = reinterpret_cast<const std::byte*>(pr.data());
  qbar::write_file_if_changed(fs::path(args.out_dir) / "results.csv",
                              {rp, rp + results.size()});
  qbar::write_file_if_changed(fs::path(args.out_dir) / "pr_curve.csv",
                              {pp, pp + pr.size()});
  if (robustness) {
    const std::string rc = qbar::robustness_csv(rob);
    const auto* rcp = reinterpret_cast<const std::byte*>(rc.data());
    qbar::write_file_if_changed(fs::path(args.out_dir) / "robustness.csv",
                                {rcp, rcp + rc.size()});
  }

  json rec;
  rec["command"] = "eval_summary";
  rec["seeds"] = cfg.eval_seeds;
  rec["results_csv"] = (fs::path(args.out_dir) / "results.csv").string();
  rec["pr_curve_csv"] = (fs::path(args.out_dir) / "pr_curve.csv").string();
  if (pooled_per_seed.size() >= 2) {
    const auto agg = qbar::aggregate_seeds(pooled_per_seed);
    rec["aggregate"] = {{"n_seeds", agg.n_seeds},
                        {"precision", summary_json(agg.precision)},
                        {"recall", summary_json(agg.recall)},
                        {"f1", summary_json(agg.f1)},
                        {"aupr", summary_json(agg.aupr)}};
  }
  emit(rec);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Q-BAR: per-creator semantic-mutation detection pipeline"};
  app.require_subcommand(1);

  GlobalArgs g;

  auto add_globals = [&](CLI::App* sub) {
    sub->add_option("--config", g.config_path, "JSON config file");
    sub->add_option("--seed", g.seed, "seed override");
    sub->add_option("--out", g.out_dir, "output directory");
    sub->add_option("--creator", g.creator, "creator id");
    sub->add_flag("--quiet", g.quiet, "suppress diagnostics");
  };

  std::string manifest_path, checkpoint_path, embedding_path, models_dir,
      seeds_csv;
  bool gamma_ablation = false, robustness = false;

  CLI::App* gen = app.add_subcommand("gen", "generate a synthetic dataset");
  add_globals(gen);

  CLI::App* train = app.add_subcommand("train", "train one creator's model");
  add_globals(train);
  train->add_option("--manifest", manifest_path, "dataset manifest")->required();

  CLI::App* calibrate =
      app.add_subcommand("calibrate", "pick (gamma, tau) on validation");
  add_globals(calibrate);
  calibrate->add_option("--checkpoint", checkpoint_path)->required();
  calibrate->add_option("--manifest", manifest_path)->required();

  CLI::App* score = app.add_subcommand("score", "score one embedding file");
  add_globals(score);
  score->add_option("--checkpoint", checkpoint_path)->required();
  score->add_option("--embedding", embedding_path)->required();

  CLI::App* eval = app.add_subcommand("eval", "evaluate the test split");
  add_globals(eval);
  eval->add_option("--manifest", manifest_path)->required();
  eval->add_option("--models", models_dir, "directory with seed_<s>/<id>.qbck")
      ->required();
  eval->add_option("--seeds", seeds_csv, "comma-separated seed list");
  eval->add_flag("--gamma-ablation", gamma_ablation,
                 "add gamma=0 and gamma=1 rows");
  eval->add_flag("--robustness", robustness, "run the noise sweep");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(g);
    if (train->parsed()) return cmd_train(g, manifest_path);
    if (calibrate->parsed()) return cmd_calibrate(g, checkpoint_path, manifest_path);
    if (score->parsed()) return cmd_score(g, checkpoint_path, embedding_path);
    if (eval->parsed())
      return cmd_eval(g, manifest_path, models_dir, seeds_csv, gamma_ablation,
                      robustness);
  } catch (const qbar::QbarError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
