#include "qbar/cli_config.hpp"

#include <fstream>
#include <set>

#include "json.hpp"

namespace qbar {
namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!j.is_object())
    fail(ErrorCode::BadConfig, where + " must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!allowed.contains(key))
      fail(ErrorCode::BadConfig, "unknown key '" + key + "' in " + where);
}

template <typename T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(ErrorCode::BadConfig, std::string("config parse: ") + e.what());
  }

  RunConfig cfg;
  try {
    check_keys(j, {"seed", "gen", "ansatz", "train", "scoring", "eval"},
               "config");
    get_if(j, "seed", cfg.dataset_seed);

    if (j.contains("gen")) {
      const json& g = j.at("gen");
      check_keys(g,
                 {"creators", "normals_per_creator", "test_splice_per_creator",
                  "test_inject_per_creator", "inject_strength", "splice",
                  "corpus_size", "corpus_strength", "dims",
                  "segments_per_video", "sigma", "mean_prior_scale",
                  "trend_scale"},
                 "gen");
      get_if(g, "creators", cfg.preset.creators);
      get_if(g, "normals_per_creator", cfg.preset.normals_per_creator);
      get_if(g, "test_splice_per_creator", cfg.preset.test_splice_per_creator);
      get_if(g, "test_inject_per_creator", cfg.preset.test_inject_per_creator);
      get_if(g, "inject_strength", cfg.preset.inject_strength);
      get_if(g, "corpus_size", cfg.preset.corpus_size);
      get_if(g, "corpus_strength", cfg.preset.corpus_strength);
      get_if(g, "segments_per_video", cfg.preset.gen.segments_per_video);
      get_if(g, "sigma", cfg.preset.gen.sigma);
      get_if(g, "mean_prior_scale", cfg.preset.gen.mean_prior_scale);
      get_if(g, "trend_scale", cfg.preset.gen.trend_scale);
      if (g.contains("splice")) {
        check_keys(g.at("splice"), {"permute", "delete_fraction"}, "gen.splice");
        get_if(g.at("splice"), "permute", cfg.preset.splice.permute);
        get_if(g.at("splice"), "delete_fraction",
               cfg.preset.splice.delete_fraction);
      }
      if (g.contains("dims")) {
        check_keys(g.at("dims"), {"text", "audio", "visual", "meta"},
                   "gen.dims");
        for (Modality m : kAllModalities) {
          size_t d = cfg.preset.gen.dims[m];
          get_if(g.at("dims"), modality_name(m), d);
          cfg.preset.gen.dims[m] = d;
        }
      }
    }

    if (j.contains("ansatz")) {
      check_keys(j.at("ansatz"), {"n_qubits", "n_layers"}, "ansatz");
      get_if(j.at("ansatz"), "n_qubits", cfg.ansatz.n_qubits);
      get_if(j.at("ansatz"), "n_layers", cfg.ansatz.n_layers);
    }

    if (j.contains("train")) {
      const json& t = j.at("train");
      check_keys(t,
                 {"lambda", "learning_rate", "epochs", "batch_size", "seed",
                  "optimizer"},
                 "train");
      get_if(t, "lambda", cfg.train.lambda);
      get_if(t, "learning_rate", cfg.train.learning_rate);
      get_if(t, "epochs", cfg.train.epochs);
      get_if(t, "batch_size", cfg.train.batch_size);
      get_if(t, "seed", cfg.train.seed);
      if (t.contains("optimizer")) {
        const auto opt = optimizer_from_name(t.at("optimizer").get<std::string>());
        if (!opt) fail(ErrorCode::BadConfig, "unknown optimizer in config");
        cfg.train.optimizer = *opt;
      }
    }

    if (j.contains("scoring")) {
      check_keys(j.at("scoring"), {"shrinkage"}, "scoring");
      get_if(j.at("scoring"), "shrinkage", cfg.shrinkage);
    }

    if (j.contains("eval")) {
      check_keys(j.at("eval"), {"seeds", "gamma_ablation", "noise_sigmas"},
                 "eval");
      get_if(j.at("eval"), "seeds", cfg.eval_seeds);
      get_if(j.at("eval"), "gamma_ablation", cfg.gamma_ablation);
      get_if(j.at("eval"), "noise_sigmas", cfg.noise_sigmas);
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::BadConfig, std::string("config schema: ") + e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoFailure, "cannot open config " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_run_config(text);
}

}  // namespace qbar
