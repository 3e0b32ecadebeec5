#include "desip/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "desip/version.hpp"

namespace desip {

namespace {

using ordered_json = nlohmann::ordered_json;

void put_optional(ordered_json& j, const char* key,
                  const std::optional<double>& v) {
  if (v) {
    j[key] = *v;
  } else {
    j[key] = nullptr;
  }
}

std::optional<double> get_optional(const ordered_json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<double>();
}

}  // namespace

std::string serialize_report(const BiasReport& report) {
  ordered_json j;
  j["schema_version"] = report.schema_version;
  j["toolkit_version"] = report.toolkit_version;
  j["embedding"] = report.embedding_label;

  ordered_json prov;
  prov["seed"] = report.seed;
  prov["config_digest"] = report.config_digest;
  prov["embedding_digest"] = report.embedding_digest;
  ordered_json datasets;
  for (const auto& [name, digest] : report.dataset_digests) {
    datasets[name] = digest;
  }
  prov["dataset_digests"] = datasets;
  j["provenance"] = prov;

  ordered_json metrics;
  put_optional(metrics, "projection_bias", report.projection_bias);
  put_optional(metrics, "sembias_full", report.sembias_full);
  put_optional(metrics, "sembias_subset", report.sembias_subset);
  put_optional(metrics, "cluster_accuracy", report.cluster_accuracy);
  put_optional(metrics, "neighbor_correlation", report.neighbor_correlation);
  put_optional(metrics, "profession_correlation",
               report.profession_correlation);
  put_optional(metrics, "classifier_accuracy", report.classifier_accuracy);

  ordered_json weat = ordered_json::array();
  for (const auto& entry : report.weat) {
    ordered_json w;
    w["name"] = entry.name;
    w["effect_size"] = entry.result.effect_size;
    w["p_value"] = entry.result.p_value;
    w["n_permutations"] = entry.result.n_permutations;
    w["exact"] = entry.result.exact;
    w["degenerate"] = entry.result.degenerate;
    w["skipped_oov"] = entry.result.skipped_oov;
    w["truncated"] = entry.result.truncated;
    weat.push_back(w);
  }
  metrics["weat"] = weat;

  ordered_json sim = ordered_json::array();
  for (const auto& entry : report.similarity) {
    ordered_json s;
    s["name"] = entry.name;
    s["rho"] = entry.rho;
    s["coverage"] = entry.coverage;
    s["used"] = entry.used;
    sim.push_back(s);
  }
  metrics["similarity"] = sim;

  ordered_json pres = ordered_json::array();
  for (const auto& entry : report.preservation) {
    ordered_json p;
    p["anchor"] = entry.anchor;
    p["mean"] = entry.mean;
    p["standard_error"] = entry.standard_error;
    p["n"] = entry.n;
    pres.push_back(p);
  }
  metrics["semantic_preservation"] = pres;
  j["metrics"] = metrics;

  if (report.pca) {
    ordered_json p;
    p["words"] = report.pca->words;
    p["x"] = report.pca->x;
    p["y"] = report.pca->y;
    p["label"] = report.pca->label;
    j["pca2d"] = p;
  } else {
    j["pca2d"] = nullptr;
  }

  j["skipped"] = report.skipped;
  ordered_json errors;
  for (const auto& [metric, message] : report.errors) {
    errors[metric] = message;
  }
  j["errors"] = errors;

  return j.dump(2) + "\n";
}

BiasReport parse_report(const std::string& text, const std::string& origin) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::exception& e) {
    throw std::runtime_error(origin + ": " + e.what());
  }
  BiasReport r;
  try {
    r.schema_version = j.at("schema_version").get<int>();
    if (r.schema_version != kReportSchemaVersion) {
      throw std::runtime_error(
          origin + ": report schema version " +
          std::to_string(r.schema_version) + " does not match toolkit schema " +
          std::to_string(kReportSchemaVersion));
    }
    r.toolkit_version = j.value("toolkit_version", "");
    r.embedding_label = j.value("embedding", "");
    const auto& prov = j.at("provenance");
    r.seed = prov.value("seed", std::uint64_t{0});
    r.config_digest = prov.value("config_digest", "");
    r.embedding_digest = prov.value("embedding_digest", "");
    if (prov.contains("dataset_digests")) {
      for (const auto& [name, digest] : prov["dataset_digests"].items()) {
        r.dataset_digests[name] = digest.get<std::string>();
      }
    }
    const auto& m = j.at("metrics");
    r.projection_bias = get_optional(m, "projection_bias");
    r.sembias_full = get_optional(m, "sembias_full");
    r.sembias_subset = get_optional(m, "sembias_subset");
    r.cluster_accuracy = get_optional(m, "cluster_accuracy");
    r.neighbor_correlation = get_optional(m, "neighbor_correlation");
    r.profession_correlation = get_optional(m, "profession_correlation");
    r.classifier_accuracy = get_optional(m, "classifier_accuracy");
    for (const auto& w : m.at("weat")) {
      WeatReportEntry entry;
      entry.name = w.at("name").get<std::string>();
      entry.result.effect_size = w.at("effect_size").get<double>();
      entry.result.p_value = w.at("p_value").get<double>();
      entry.result.n_permutations = w.at("n_permutations").get<std::uint64_t>();
      entry.result.exact = w.at("exact").get<bool>();
      entry.result.degenerate = w.value("degenerate", false);
      entry.result.skipped_oov = w.value("skipped_oov", std::size_t{0});
      entry.result.truncated = w.value("truncated", std::size_t{0});
      r.weat.push_back(std::move(entry));
    }
    for (const auto& s : m.at("similarity")) {
      SimilarityReportEntry entry;
      entry.name = s.at("name").get<std::string>();
      entry.rho = s.at("rho").get<double>();
      entry.coverage = s.at("coverage").get<double>();
      entry.used = s.value("used", std::size_t{0});
      r.similarity.push_back(std::move(entry));
    }
    for (const auto& p : m.at("semantic_preservation")) {
      PreservationReportEntry entry;
      entry.anchor = p.at("anchor").get<std::string>();
      entry.mean = p.at("mean").get<double>();
      entry.standard_error = p.at("standard_error").get<double>();
      entry.n = p.value("n", std::size_t{0});
      r.preservation.push_back(std::move(entry));
    }
    if (j.contains("pca2d") && !j["pca2d"].is_null()) {
      bias_eval::Pca2d pca;
      const auto& p = j["pca2d"];
      pca.words = p.at("words").get<std::vector<std::string>>();
      pca.x = p.at("x").get<std::vector<double>>();
      pca.y = p.at("y").get<std::vector<double>>();
      pca.label = p.at("label").get<std::vector<int>>();
      r.pca = std::move(pca);
    }
    r.skipped = j.value("skipped", std::vector<std::string>{});
    if (j.contains("errors")) {
      for (const auto& [metric, message] : j["errors"].items()) {
        r.errors[metric] = message.get<std::string>();
      }
    }
  } catch (const ordered_json::exception& e) {
    throw std::runtime_error(origin + ": malformed report: " + e.what());
  }
  return r;
}

void write_report(const BiasReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write report: " + path);
  out << serialize_report(report);
  if (!out) throw std::runtime_error("write failed: " + path);
}

BiasReport read_report(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open report: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_report(buf.str(), path);
}

std::string digest_bytes(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

std::string digest_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for digest: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return digest_bytes(buf.str());
}

}  // namespace desip
