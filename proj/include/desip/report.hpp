#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "desip/bias_eval.hpp"

// The structured evaluation report. Serialized as JSON with a fixed key
// order so identical runs produce identical bytes.

namespace desip {

struct WeatReportEntry {
  std::string name;
  bias_eval::WeatResult result;
};

struct SimilarityReportEntry {
  std::string name;
  double rho = 0.0;
  double coverage = 0.0;
  std::size_t used = 0;
};

struct PreservationReportEntry {
  std::string anchor;
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t n = 0;
};

struct BiasReport {
  int schema_version = 0;
  std::string toolkit_version;
  std::string embedding_label;

  // provenance
  std::uint64_t seed = 0;
  std::string config_digest;
  std::string embedding_digest;
  std::map<std::string, std::string> dataset_digests;

  std::optional<double> projection_bias;
  std::optional<double> sembias_full;
  std::optional<double> sembias_subset;
  std::optional<double> cluster_accuracy;
  std::optional<double> neighbor_correlation;
  std::optional<double> profession_correlation;
  std::optional<double> classifier_accuracy;
  std::vector<WeatReportEntry> weat;
  std::vector<SimilarityReportEntry> similarity;
  std::vector<PreservationReportEntry> preservation;
  std::optional<bias_eval::Pca2d> pca;

  std::vector<std::string> skipped;            // metrics disabled by config
  std::map<std::string, std::string> errors;   // metric -> failure message
};

std::string serialize_report(const BiasReport& report);
BiasReport parse_report(const std::string& text, const std::string& origin);

void write_report(const BiasReport& report, const std::string& path);
BiasReport read_report(const std::string& path);

// FNV-1a 64-bit over raw bytes, hex-encoded; provenance fingerprints.
std::string digest_bytes(const std::string& bytes);
std::string digest_file(const std::string& path);

}  // namespace desip
