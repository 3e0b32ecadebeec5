#include "desip/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

namespace desip {

namespace {

using nlohmann::json;

json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  return j;
}

void reject_unknown(const json& j, const std::set<std::string>& known,
                    const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) {
      throw ValidationError("unknown config key '" + where + key + "'");
    }
  }
}

void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) {
    throw ValidationError("config: missing required path for " + what);
  }
  if (!std::filesystem::exists(path)) {
    throw ValidationError("config: " + what + " file not found: " + path);
  }
}

std::vector<std::string> string_list(const json& j, const std::string& where) {
  if (!j.is_array()) throw ValidationError(where + " must be a list");
  std::vector<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string()) throw ValidationError(where + " must hold strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

RunConfig load_config(const std::string& path) {
  const json j = parse_file(path);
  RunConfig cfg;
  try {
    reject_unknown(j, {"embedding", "limit", "seed", "method", "debias",
                       "wordlists", "datasets", "eval", "output"},
                   "");

    cfg.embedding_path = j.value("embedding", "");
    cfg.limit = j.value("limit", std::size_t{0});
    cfg.seed = j.value("seed", std::uint64_t{42});
    cfg.debias.rng_seed = cfg.seed;

    if (j.contains("method")) {
      cfg.debias.method = debias::parse_method(j["method"].get<std::string>());
    }
    if (cfg.debias.method == debias::Method::UDesip && !j.contains("debias")) {
      cfg.debias.gamma = 0.80;
    }

    if (j.contains("debias")) {
      const auto& d = j["debias"];
      reject_unknown(d,
                     {"n_components", "gamma", "z_size", "screening",
                      "pls_scale", "y_top"},
                     "debias.");
      cfg.debias.n_components = d.value("n_components", 20);
      // Screening default follows the method unless pinned explicitly.
      const double default_gamma =
          cfg.debias.method == debias::Method::PDesip ? 0.92 : 0.80;
      cfg.debias.gamma = d.value("gamma", default_gamma);
      cfg.debias.z_size = d.value("z_size", std::size_t{500});
      cfg.debias.apply_screening = d.value("screening", true);
      cfg.debias.pls_scale = d.value("pls_scale", false);
      cfg.y_top = d.value("y_top", std::size_t{50000});
    }

    if (j.contains("wordlists")) {
      const auto& w = j["wordlists"];
      reject_unknown(
          w, {"d_pairs", "p_pairs", "p_words", "z_lexicon", "professions"},
          "wordlists.");
      cfg.d_pairs_path = w.value("d_pairs", "");
      cfg.p_pairs_path = w.value("p_pairs", "");
      cfg.p_words_path = w.value("p_words", "");
      cfg.z_lexicon_path = w.value("z_lexicon", "");
      cfg.professions_path = w.value("professions", "");
    }

    if (j.contains("datasets")) {
      const auto& d = j["datasets"];
      reject_unknown(d, {"sembias", "sembias_subset_tail", "weat_sets",
                         "similarity"},
                     "datasets.");
      cfg.sembias_path = d.value("sembias", "");
      cfg.sembias_subset_tail =
          d.value("sembias_subset_tail", std::size_t{40});
      cfg.weat_sets_path = d.value("weat_sets", "");
      if (d.contains("similarity")) {
        for (const auto& [name, p] : d["similarity"].items()) {
          cfg.similarity_paths[name] = p.get<std::string>();
        }
      }
    }

    if (j.contains("eval")) {
      const auto& e = j["eval"];
      reject_unknown(
          e, {"projection_bias", "sembias", "clustering",
              "neighbor_correlation", "profession_correlation",
              "classification", "weat", "similarity", "semantic_preservation",
              "pca_payload", "projection_top", "top_biased", "classify_pool",
              "classify_train", "neighbor_k", "weat_max_permutations",
              "preservation_n", "preservation_anchors"},
          "eval.");
      auto& ev = cfg.eval;
      ev.projection_bias = e.value("projection_bias", true);
      ev.sembias = e.value("sembias", true);
      ev.clustering = e.value("clustering", true);
      ev.neighbor_correlation = e.value("neighbor_correlation", true);
      ev.profession_correlation = e.value("profession_correlation", true);
      ev.classification = e.value("classification", true);
      ev.weat = e.value("weat", true);
      ev.similarity = e.value("similarity", true);
      ev.semantic_preservation = e.value("semantic_preservation", true);
      ev.pca_payload = e.value("pca_payload", true);
      ev.projection_top = e.value("projection_top", std::size_t{50000});
      ev.top_biased = e.value("top_biased", std::size_t{500});
      ev.classify_pool = e.value("classify_pool", std::size_t{2500});
      ev.classify_train = e.value("classify_train", std::size_t{500});
      ev.neighbor_k = e.value("neighbor_k", std::size_t{100});
      ev.weat_max_permutations =
          e.value("weat_max_permutations", std::uint64_t{100000});
      ev.preservation_n = e.value("preservation_n", std::size_t{200});
      if (e.contains("preservation_anchors")) {
        ev.preservation_anchors =
            string_list(e["preservation_anchors"], "eval.preservation_anchors");
      }
    }

    if (j.contains("output")) {
      const auto& o = j["output"];
      reject_unknown(o, {"embedding", "diagnostics", "report"}, "output.");
      cfg.out_embedding = o.value("embedding", "");
      cfg.out_diagnostics = o.value("diagnostics", "");
      cfg.out_report = o.value("report", "");
    }
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }

  if (cfg.debias.gamma < 0.0 || cfg.debias.gamma > 1.0) {
    throw ValidationError("config: debias.gamma must lie in [0, 1]");
  }
  if (cfg.debias.n_components < 1) {
    throw ValidationError("config: debias.n_components must be positive");
  }
  return cfg;
}

void validate_for_debias(const RunConfig& cfg) {
  require_file(cfg.embedding_path, "embedding");
  require_file(cfg.d_pairs_path, "wordlists.d_pairs");
  if (cfg.debias.method == debias::Method::PDesip) {
    if (cfg.p_pairs_path.empty() && cfg.p_words_path.empty()) {
      throw ValidationError(
          "config: p-desip needs wordlists.p_pairs or wordlists.p_words");
    }
    if (!cfg.p_pairs_path.empty()) require_file(cfg.p_pairs_path, "p_pairs");
    if (!cfg.p_words_path.empty()) require_file(cfg.p_words_path, "p_words");
  } else {
    require_file(cfg.z_lexicon_path, "wordlists.z_lexicon");
  }
  if (cfg.out_embedding.empty()) {
    throw ValidationError("config: output.embedding is required for debias");
  }
}

void validate_for_eval(const RunConfig& cfg) {
  require_file(cfg.embedding_path, "embedding");
  require_file(cfg.d_pairs_path, "wordlists.d_pairs");
  const auto& e = cfg.eval;
  if (e.sembias) require_file(cfg.sembias_path, "datasets.sembias");
  if (e.weat) require_file(cfg.weat_sets_path, "datasets.weat_sets");
  if (e.profession_correlation) {
    require_file(cfg.professions_path, "wordlists.professions");
  }
  if (e.similarity) {
    if (cfg.similarity_paths.empty()) {
      throw ValidationError(
          "config: eval.similarity enabled but datasets.similarity is empty");
    }
    for (const auto& [name, p] : cfg.similarity_paths) {
      require_file(p, "similarity dataset " + name);
    }
  }
  if (cfg.out_report.empty()) {
    throw ValidationError("config: output.report is required for eval");
  }
}

std::vector<WeatTask> load_weat_sets(const std::string& path) {
  const json j = parse_file(path);
  if (!j.is_object() || j.empty()) {
    throw ValidationError(path + ": expected an object of named WEAT tasks");
  }
  std::vector<WeatTask> out;
  try {
    for (const auto& [name, spec] : j.items()) {
      reject_unknown(spec, {"targets_x", "targets_y", "attributes_a",
                            "attributes_b"},
                     name + ".");
      WeatTask task;
      task.name = name;
      task.targets_x = string_list(spec.at("targets_x"), name + ".targets_x");
      task.targets_y = string_list(spec.at("targets_y"), name + ".targets_y");
      task.attrs_a = string_list(spec.at("attributes_a"), name + ".attributes_a");
      task.attrs_b = string_list(spec.at("attributes_b"), name + ".attributes_b");
      out.push_back(std::move(task));
    }
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  return out;
}

}  // namespace desip
