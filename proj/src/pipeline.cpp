#include "desip/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "desip/bias_eval.hpp"
#include "desip/partition.hpp"
#include "desip/rng.hpp"
#include "desip/semantic_eval.hpp"
#include "desip/version.hpp"

namespace desip {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since)
      .count();
}

std::vector<std::string> p_word_list(const RunConfig& cfg) {
  std::vector<std::string> words;
  if (!cfg.p_pairs_path.empty()) {
    const auto pairs = partition::load_pair_list(cfg.p_pairs_path);
    for (const auto& [m, f] : pairs.pairs) {
      words.push_back(m);
      words.push_back(f);
    }
  }
  if (!cfg.p_words_path.empty()) {
    for (auto& w : partition::load_token_list(cfg.p_words_path)) {
      words.push_back(std::move(w));
    }
  }
  return words;
}

// Shortest exact decimal representation; keeps emitted tables bit-stable.
std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Seed tags for per-metric generators, so disabling one metric never
// shifts another metric's stream.
enum SeedTag : std::uint64_t {
  kSeedCluster = 0x11,
  kSeedClassify = 0x12,
  kSeedWeatBase = 0x1000,
};

}  // namespace

void run_debias(const RunConfig& cfg, std::ostream& log) {
  validate_for_debias(cfg);
  const auto t0 = Clock::now();
  nlohmann::ordered_json timings;

  auto stage = Clock::now();
  const EmbeddingTable table = load_embeddings(cfg.embedding_path, cfg.limit);
  timings["load_ms"] = elapsed_ms(stage);
  log << "loaded " << table.size() << " words, dim " << table.dim();
  if (table.duplicate_count() > 0) {
    log << " (" << table.duplicate_count() << " duplicate tokens dropped)";
  }
  log << "\n";

  stage = Clock::now();
  const auto d_pairs = partition::load_pair_list(cfg.d_pairs_path);
  partition::PartitionOptions opts;
  opts.y_top = std::min(cfg.y_top, table.size());
  opts.z_size = cfg.debias.z_size;
  opts.want_p = cfg.debias.method == debias::Method::PDesip;
  opts.want_z = cfg.debias.method == debias::Method::UDesip;

  std::vector<std::string> p_words, z_lexicon;
  if (opts.want_p) p_words = p_word_list(cfg);
  if (opts.want_z) z_lexicon = partition::load_token_list(cfg.z_lexicon_path);

  const auto part =
      partition::build_partition(table, d_pairs, p_words, z_lexicon, opts);
  timings["partition_ms"] = elapsed_ms(stage);
  log << "partition: s1=" << part.d.cols() << " s2=" << part.p.tokens.size()
      << " m=" << part.z.tokens.size() << " d=" << part.y.tokens.size()
      << " p=" << part.x.tokens.size();
  if (part.stats.skipped_oov > 0) {
    log << " (skipped " << part.stats.skipped_oov << " OOV list entries)";
  }
  log << "\n";

  stage = Clock::now();
  debias::DebiasResult result;
  if (cfg.debias.method == debias::Method::PDesip) {
    result = debias::p_desip(part.d, part.p.m, part.x.m, part.y.m,
                             part.y.tokens, cfg.debias);
  } else {
    result = debias::u_desip(part.d, part.z.m, part.x.m, part.y.m,
                             part.y.tokens, cfg.debias);
  }
  timings["debias_ms"] = elapsed_ms(stage);
  log << "debias: kept " << result.diagnostics.x_columns_kept << "/"
      << result.diagnostics.x_columns_in
      << " X columns, orthogonality residual "
      << result.diagnostics.orthogonality_residual << "\n";

  stage = Clock::now();
  const EmbeddingTable debiased = debias::assemble_table(result, table);
  save_embeddings(debiased, cfg.out_embedding);
  timings["save_ms"] = elapsed_ms(stage);
  log << "wrote " << cfg.out_embedding << "\n";

  if (!cfg.out_diagnostics.empty()) {
    nlohmann::ordered_json diag;
    diag["toolkit_version"] = kVersion;
    diag["method"] = debias::method_name(cfg.debias.method);
    diag["seed"] = cfg.seed;
    diag["config"] = {{"n_components", cfg.debias.n_components},
                      {"gamma", cfg.debias.gamma},
                      {"z_size", cfg.debias.z_size},
                      {"screening", cfg.debias.apply_screening},
                      {"pls_scale", cfg.debias.pls_scale}};
    diag["counts"] = {{"vocabulary", table.size()},
                      {"s1", part.d.cols()},
                      {"s2", part.p.tokens.size()},
                      {"m", part.z.tokens.size()},
                      {"d", part.y.tokens.size()},
                      {"p", part.x.tokens.size()},
                      {"x_kept", result.diagnostics.x_columns_kept},
                      {"oov_list_entries", part.stats.skipped_oov}};
    diag["residuals"] = {
        {"step1_fit", result.diagnostics.step1_residual},
        {"step2_fit", result.diagnostics.step2_residual},
        {"orthogonality", result.diagnostics.orthogonality_residual}};
    timings["total_ms"] = elapsed_ms(t0);
    diag["timings"] = timings;
    std::ofstream out(cfg.out_diagnostics, std::ios::binary);
    if (!out) {
      throw std::runtime_error("cannot write diagnostics: " +
                               cfg.out_diagnostics);
    }
    out << diag.dump(2) << "\n";
  }
}

namespace {

struct EvalContext {
  const RunConfig& cfg;
  const EmbeddingTable& original;
  const EmbeddingTable& evaluated;
  std::vector<std::string> frequent_words;  // original order, capped
  bias_eval::BiasedWords cluster_pool;      // top_biased per side
  bool cluster_pool_ready = false;
};

const bias_eval::BiasedWords& cluster_pool(EvalContext& ctx) {
  if (!ctx.cluster_pool_ready) {
    ctx.cluster_pool = bias_eval::top_biased_words(
        ctx.original, ctx.cfg.eval.top_biased, ctx.frequent_words);
    ctx.cluster_pool_ready = true;
  }
  return ctx.cluster_pool;
}

template <typename Fn>
void run_metric(BiasReport& report, std::ostream& log, bool enabled,
                const std::string& name, Fn&& fn) {
  if (!enabled) {
    report.skipped.push_back(name);
    log << name << ": skipped\n";
    return;
  }
  try {
    fn();
  } catch (const std::exception& e) {
    report.errors[name] = e.what();
    log << name << ": ERROR " << e.what() << "\n";
  }
}

}  // namespace

BiasReport run_eval(const RunConfig& cfg, const std::string& embedding_path,
                    std::ostream& log) {
  validate_for_eval(cfg);
  if (!std::filesystem::exists(embedding_path)) {
    throw ValidationError("eval: embedding not found: " + embedding_path);
  }

  const EmbeddingTable original = load_embeddings(cfg.embedding_path, cfg.limit);
  const bool same_file = embedding_path == cfg.embedding_path;
  const EmbeddingTable evaluated_storage =
      same_file ? EmbeddingTable()
                : load_embeddings(embedding_path, cfg.limit);
  const EmbeddingTable& evaluated = same_file ? original : evaluated_storage;
  log << "evaluating " << embedding_path << " (" << evaluated.size()
      << " words) against original " << cfg.embedding_path << "\n";

  BiasReport report;
  report.schema_version = kReportSchemaVersion;
  report.toolkit_version = kVersion;
  report.embedding_label = embedding_path;
  report.seed = cfg.seed;
  report.embedding_digest = digest_file(embedding_path);
  {
    // The config digest covers the parsed, normalized document rather than
    // the file bytes so formatting differences do not split provenance.
    std::ostringstream canon;
    canon << cfg.embedding_path << '|' << cfg.limit << '|' << cfg.seed << '|'
          << debias::method_name(cfg.debias.method) << '|'
          << cfg.debias.n_components << '|' << format_double(cfg.debias.gamma)
          << '|' << cfg.debias.z_size << '|' << cfg.debias.apply_screening
          << '|' << cfg.debias.pls_scale << '|' << cfg.eval.projection_top
          << '|' << cfg.eval.top_biased << '|' << cfg.eval.classify_pool
          << '|' << cfg.eval.classify_train << '|' << cfg.eval.neighbor_k
          << '|' << cfg.eval.weat_max_permutations << '|'
          << cfg.eval.preservation_n;
    report.config_digest = digest_bytes(canon.str());
  }
  if (!cfg.sembias_path.empty() && cfg.eval.sembias) {
    report.dataset_digests["sembias"] = digest_file(cfg.sembias_path);
  }
  if (!cfg.weat_sets_path.empty() && cfg.eval.weat) {
    report.dataset_digests["weat_sets"] = digest_file(cfg.weat_sets_path);
  }
  if (cfg.eval.similarity) {
    for (const auto& [name, path] : cfg.similarity_paths) {
      report.dataset_digests["similarity:" + name] = digest_file(path);
    }
  }
  if (cfg.eval.profession_correlation && !cfg.professions_path.empty()) {
    report.dataset_digests["professions"] = digest_file(cfg.professions_path);
  }

  EvalContext ctx{cfg, original, evaluated, {}, {}, false};
  const std::size_t n_frequent =
      std::min(cfg.eval.projection_top, original.size());
  ctx.frequent_words.assign(original.words().begin(),
                            original.words().begin() +
                                static_cast<long>(n_frequent));

  const auto& e = cfg.eval;

  run_metric(report, log, e.projection_bias, "projection_bias", [&] {
    std::vector<std::string> words(
        evaluated.words().begin(),
        evaluated.words().begin() +
            static_cast<long>(std::min(e.projection_top, evaluated.size())));
    report.projection_bias = bias_eval::bias_by_projection(evaluated, words);
    log << "projection_bias: " << *report.projection_bias << "\n";
  });

  run_metric(report, log, e.sembias, "sembias", [&] {
    const auto instances =
        bias_eval::load_sembias(cfg.sembias_path, cfg.sembias_subset_tail);
    const auto acc = bias_eval::sembias(evaluated, instances);
    report.sembias_full = acc.full;
    report.sembias_subset = acc.subset;
    log << "sembias: full " << acc.full << " subset " << acc.subset << " ("
        << acc.skipped << " skipped)\n";
  });

  run_metric(report, log, e.clustering, "cluster_accuracy", [&] {
    const auto& pool = cluster_pool(ctx);
    report.cluster_accuracy = bias_eval::cluster_accuracy(
        evaluated, pool.male, pool.female, derive_seed(cfg.seed, kSeedCluster));
    log << "cluster_accuracy: " << *report.cluster_accuracy << "\n";
  });

  run_metric(report, log, e.neighbor_correlation, "neighbor_correlation", [&] {
    report.neighbor_correlation = bias_eval::bias_correlation(
        original, evaluated, ctx.frequent_words, cluster_pool(ctx),
        e.neighbor_k);
    log << "neighbor_correlation: " << *report.neighbor_correlation << "\n";
  });

  run_metric(report, log, e.profession_correlation, "profession_correlation",
             [&] {
               const auto professions =
                   partition::load_token_list(cfg.professions_path);
               report.profession_correlation =
                   bias_eval::profession_correlation(original, evaluated,
                                                     professions,
                                                     cluster_pool(ctx),
                                                     e.neighbor_k);
               log << "profession_correlation: "
                   << *report.profession_correlation << "\n";
             });

  run_metric(report, log, e.classification, "classifier_accuracy", [&] {
    const auto pool = bias_eval::top_biased_words(original, e.classify_pool,
                                                  ctx.frequent_words);
    report.classifier_accuracy =
        bias_eval::classify_bias(evaluated, pool.male, pool.female,
                                 e.classify_train,
                                 derive_seed(cfg.seed, kSeedClassify));
    log << "classifier_accuracy: " << *report.classifier_accuracy << "\n";
  });

  run_metric(report, log, e.weat, "weat", [&] {
    const auto tasks = load_weat_sets(cfg.weat_sets_path);
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      const auto& task = tasks[i];
      WeatReportEntry entry;
      entry.name = task.name;
      entry.result =
          bias_eval::weat(evaluated, task.targets_x, task.targets_y,
                          task.attrs_a, task.attrs_b,
                          e.weat_max_permutations,
                          derive_seed(cfg.seed, kSeedWeatBase + i));
      log << "weat " << task.name << ": d=" << entry.result.effect_size
          << " p=" << entry.result.p_value
          << (entry.result.exact ? " (exact)" : " (sampled)") << "\n";
      report.weat.push_back(std::move(entry));
    }
  });

  run_metric(report, log, e.similarity, "similarity", [&] {
    for (const auto& [name, path] : cfg.similarity_paths) {
      const auto ds = semantic_eval::load_similarity_dataset(path, name);
      const auto score = semantic_eval::evaluate_similarity(evaluated, ds);
      report.similarity.push_back({name, score.rho, score.coverage,
                                   score.used});
      log << "similarity " << name << ": rho=" << score.rho
          << " coverage=" << score.coverage << "\n";
    }
  });

  run_metric(report, log, e.semantic_preservation, "semantic_preservation",
             [&] {
               for (const auto& anchor : e.preservation_anchors) {
                 const auto res = semantic_eval::semantic_preservation(
                     original, evaluated, anchor, e.preservation_n);
                 report.preservation.push_back({anchor, res.mean,
                                                res.standard_error,
                                                res.values.size()});
                 log << "semantic_preservation " << anchor << ": "
                     << res.mean << " (" << res.standard_error << ")\n";
               }
             });

  run_metric(report, log, e.pca_payload, "pca2d", [&] {
    report.pca = bias_eval::pca_payload(evaluated, cluster_pool(ctx));
    log << "pca2d: " << report.pca->words.size() << " points\n";
  });

  write_report(report, cfg.out_report);
  log << "wrote " << cfg.out_report << "\n";
  return report;
}

namespace {

struct Column {
  std::string header;
  std::vector<std::string> cells;
};

std::string cell_or_blank(const std::optional<double>& v) {
  return v ? format_double(*v) : "";
}

}  // namespace

void run_report(const std::vector<std::string>& report_paths,
                const std::string& out_prefix, std::ostream& log) {
  if (report_paths.empty()) {
    throw ValidationError("report: need at least one report file");
  }
  std::vector<BiasReport> reports;
  for (const auto& p : report_paths) reports.push_back(read_report(p));

  // Union of dynamic metric names, in stable sorted order.
  std::vector<std::string> weat_names, sim_names, pres_names;
  {
    std::set<std::string> w, s, p;
    for (const auto& r : reports) {
      for (const auto& entry : r.weat) w.insert(entry.name);
      for (const auto& entry : r.similarity) s.insert(entry.name);
      for (const auto& entry : r.preservation) p.insert(entry.anchor);
    }
    weat_names.assign(w.begin(), w.end());
    sim_names.assign(s.begin(), s.end());
    pres_names.assign(p.begin(), p.end());
  }

  std::vector<Column> columns;
  auto add_column = [&](std::string header,
                        const std::function<std::string(const BiasReport&)>&
                            cell) {
    Column col{std::move(header), {}};
    for (const auto& r : reports) col.cells.push_back(cell(r));
    columns.push_back(std::move(col));
  };

  add_column("embedding",
             [](const BiasReport& r) { return r.embedding_label; });

  const std::vector<
      std::pair<std::string, std::optional<double> BiasReport::*>>
      scalars = {
          {"projection_bias", &BiasReport::projection_bias},
          {"sembias_full", &BiasReport::sembias_full},
          {"sembias_subset", &BiasReport::sembias_subset},
          {"cluster_accuracy", &BiasReport::cluster_accuracy},
          {"neighbor_correlation", &BiasReport::neighbor_correlation},
          {"profession_correlation", &BiasReport::profession_correlation},
          {"classifier_accuracy", &BiasReport::classifier_accuracy},
      };
  for (const auto& [header, member] : scalars) {
    const auto m = member;
    add_column(header,
               [m](const BiasReport& r) { return cell_or_blank(r.*m); });
  }
  for (const auto& name : weat_names) {
    add_column("weat:" + name + ":d", [&name](const BiasReport& r) {
      for (const auto& entry : r.weat) {
        if (entry.name == name) return format_double(entry.result.effect_size);
      }
      return std::string();
    });
    add_column("weat:" + name + ":p", [&name](const BiasReport& r) {
      for (const auto& entry : r.weat) {
        if (entry.name == name) return format_double(entry.result.p_value);
      }
      return std::string();
    });
  }
  for (const auto& name : sim_names) {
    add_column("similarity:" + name, [&name](const BiasReport& r) {
      for (const auto& entry : r.similarity) {
        if (entry.name == name) return format_double(entry.rho);
      }
      return std::string();
    });
  }
  for (const auto& name : pres_names) {
    add_column("preservation:" + name + ":mean", [&name](const BiasReport& r) {
      for (const auto& entry : r.preservation) {
        if (entry.anchor == name) return format_double(entry.mean);
      }
      return std::string();
    });
    add_column("preservation:" + name + ":se", [&name](const BiasReport& r) {
      for (const auto& entry : r.preservation) {
        if (entry.anchor == name) return format_double(entry.standard_error);
      }
      return std::string();
    });
  }

  // CSV
  {
    const std::string path = out_prefix + ".csv";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (std::size_t c = 0; c < columns.size(); ++c) {
      out << (c ? "," : "") << columns[c].header;
    }
    out << "\n";
    for (std::size_t r = 0; r < reports.size(); ++r) {
      for (std::size_t c = 0; c < columns.size(); ++c) {
        out << (c ? "," : "") << columns[c].cells[r];
      }
      out << "\n";
    }
    log << "wrote " << path << "\n";
  }

  // Aligned text
  {
    const std::string path = out_prefix + ".txt";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    std::vector<std::size_t> widths(columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
      widths[c] = columns[c].header.size();
      for (const auto& cell : columns[c].cells) {
        widths[c] = std::max(widths[c], cell.size());
      }
    }
    auto emit_row = [&](auto&& get) {
      for (std::size_t c = 0; c < columns.size(); ++c) {
        const std::string& s = get(c);
        out << s << std::string(widths[c] - s.size(), ' ');
        out << (c + 1 < columns.size() ? "  " : "");
      }
      out << "\n";
    };
    emit_row([&](std::size_t c) -> const std::string& {
      return columns[c].header;
    });
    for (std::size_t r = 0; r < reports.size(); ++r) {
      emit_row([&](std::size_t c) -> const std::string& {
        return columns[c].cells[r];
      });
    }
    log << "wrote " << path << "\n";
  }

  // Per-report 2-D coordinates payloads.
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (!reports[i].pca) continue;
    const auto& pca = *reports[i].pca;
    const std::string path = out_prefix + "_pca_" + std::to_string(i) + ".csv";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "word,pc1,pc2,label\n";
    for (std::size_t r = 0; r < pca.words.size(); ++r) {
      out << pca.words[r] << "," << format_double(pca.x[r]) << ","
          << format_double(pca.y[r]) << "," << pca.label[r] << "\n";
    }
    log << "wrote " << path << "\n";
  }
}

}  // namespace desip
