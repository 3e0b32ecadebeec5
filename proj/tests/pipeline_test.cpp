#include "desip/pipeline.hpp"

#include <doctest.h>

#include <filesystem>
#include <iostream>
#include <sstream>

#include "desip/bias_eval.hpp"
#include "fixture.hpp"
#include "test_util.hpp"

using namespace desip;

namespace {

RunConfig fixture_config(const testutil::TempDir& dir,
                         const testutil::FixturePaths& paths,
                         const std::string& method, const std::string& tag,
                         double gamma) {
  const auto config_path = dir.path("config_" + tag + ".json");
  testutil::write_file(
      config_path,
      testutil::fixture_config_json(
          paths, method, dir.path("debiased_" + tag + ".txt"),
          dir.path("diag_" + tag + ".json"), dir.path("report_" + tag + ".json"),
          gamma));
  return load_config(config_path);
}

}  // namespace

TEST_CASE("config: parsing, defaults, unknown keys") {
  testutil::TempDir dir("cfg");
  const auto paths = testutil::write_fixture(dir);

  const auto cfg = fixture_config(dir, paths, "p-desip", "a", 0.30);
  CHECK(cfg.seed == 42);
  CHECK(cfg.debias.method == debias::Method::PDesip);
  CHECK(cfg.debias.gamma == doctest::Approx(0.30));
  CHECK(cfg.y_top == 50);
  CHECK(cfg.eval.top_biased == 15);

  const auto bad_path = dir.path("bad.json");
  testutil::write_file(bad_path, "{\"embeddign\": \"x\"}");
  CHECK_THROWS_AS(load_config(bad_path), ValidationError);

  // u-desip picks up its own default screening threshold
  const auto u_path = dir.path("u.json");
  testutil::write_file(u_path, "{\"embedding\": \"" + paths.embedding +
                                   "\", \"method\": \"u-desip\"}");
  CHECK(load_config(u_path).debias.gamma == doctest::Approx(0.80));
}

TEST_CASE("run_debias: p-desip smoke run with diagnostics") {
  testutil::TempDir dir("debias_p");
  const auto paths = testutil::write_fixture(dir);
  const auto cfg = fixture_config(dir, paths, "p-desip", "p", 0.30);

  std::ostringstream log;
  run_debias(cfg, log);

  const auto out = load_embeddings(cfg.out_embedding);
  const auto original = load_embeddings(cfg.embedding_path);
  REQUIRE(out.size() == original.size());
  CHECK(out.words() == original.words());

  // exactly the Y words changed
  int differing = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if ((out.vector(i) - original.vector(i)).cwiseAbs().maxCoeff() > 0.0) {
      ++differing;
    }
  }
  CHECK(differing == 50);

  CHECK(std::filesystem::exists(cfg.out_diagnostics));
  const auto diag = testutil::read_file(cfg.out_diagnostics);
  CHECK(diag.find("\"d\": 50") != std::string::npos);
  CHECK(diag.find("orthogonality") != std::string::npos);
}

TEST_CASE("run_debias: u-desip smoke run") {
  testutil::TempDir dir("debias_u");
  const auto paths = testutil::write_fixture(dir);
  const auto cfg = fixture_config(dir, paths, "u-desip", "u", 0.10);
  std::ostringstream log;
  run_debias(cfg, log);
  const auto out = load_embeddings(cfg.out_embedding);
  CHECK(out.size() == 186);
  CHECK(log.str().find("m=10") != std::string::npos);
}

TEST_CASE("run_debias: validation failures precede compute") {
  testutil::TempDir dir("debias_bad");
  const auto paths = testutil::write_fixture(dir);
  auto cfg = fixture_config(dir, paths, "p-desip", "bad", 0.30);
  cfg.p_pairs_path = dir.path("missing.tsv");
  cfg.p_words_path.clear();
  CHECK_THROWS_AS(run_debias(cfg, std::cout), ValidationError);

  auto no_out = fixture_config(dir, paths, "p-desip", "noout", 0.30);
  no_out.out_embedding.clear();
  CHECK_THROWS_AS(run_debias(no_out, std::cout), ValidationError);
}

TEST_CASE("run_eval: full battery on the original fixture") {
  testutil::TempDir dir("eval");
  const auto paths = testutil::write_fixture(dir);
  const auto cfg = fixture_config(dir, paths, "p-desip", "e", 0.30);

  std::ostringstream log;
  const auto report = run_eval(cfg, cfg.embedding_path, log);

  REQUIRE(report.projection_bias.has_value());
  CHECK(*report.projection_bias > 0.1);  // planted gender axis
  REQUIRE(report.sembias_full.has_value());
  CHECK(*report.sembias_full >= 0.75);  // definitional diffs aligned
  REQUIRE(report.cluster_accuracy.has_value());
  CHECK(*report.cluster_accuracy >= 0.5);
  REQUIRE(report.classifier_accuracy.has_value());
  CHECK(*report.classifier_accuracy > 0.75);  // gender axis mostly separable
  REQUIRE(report.neighbor_correlation.has_value());
  CHECK(*report.neighbor_correlation > 0.3);
  REQUIRE(report.profession_correlation.has_value());
  CHECK(*report.profession_correlation == doctest::Approx(1.0).epsilon(1e-9));
  REQUIRE(report.weat.size() == 2);
  for (const auto& w : report.weat) {
    CHECK(w.result.exact);
    CHECK(w.result.effect_size > 0.8);  // planted association
    CHECK(w.result.p_value <= 0.05);
  }
  REQUIRE(report.similarity.size() == 1);
  CHECK(report.similarity[0].rho > 0.8);
  REQUIRE(report.preservation.size() == 2);
  CHECK(report.preservation[0].n == 10);
  REQUIRE(report.pca.has_value());
  CHECK(report.pca->words.size() == 30);
  CHECK(report.errors.empty());
  CHECK(std::filesystem::exists(cfg.out_report));
}

TEST_CASE("run_eval: determinism and input immutability") {
  testutil::TempDir dir("eval_det");
  const auto paths = testutil::write_fixture(dir);
  auto cfg = fixture_config(dir, paths, "p-desip", "d1", 0.30);

  const auto digest_before = digest_file(cfg.embedding_path);
  std::ostringstream log;
  run_eval(cfg, cfg.embedding_path, log);
  const auto first = testutil::read_file(cfg.out_report);

  auto cfg2 = fixture_config(dir, paths, "p-desip", "d1", 0.30);
  cfg2.out_report = dir.path("report_second.json");
  run_eval(cfg2, cfg2.embedding_path, log);
  const auto second = testutil::read_file(cfg2.out_report);

  CHECK(first == second);  // byte-identical
  CHECK(digest_file(cfg.embedding_path) == digest_before);
}

TEST_CASE("run_eval: disabled metrics are recorded as skipped") {
  testutil::TempDir dir("eval_skip");
  const auto paths = testutil::write_fixture(dir);
  auto cfg = fixture_config(dir, paths, "p-desip", "s", 0.30);
  cfg.eval.projection_bias = false;
  cfg.eval.weat = false;
  cfg.eval.similarity = false;
  cfg.eval.sembias = false;
  cfg.eval.clustering = false;
  cfg.eval.neighbor_correlation = false;
  cfg.eval.profession_correlation = false;
  cfg.eval.classification = false;
  cfg.eval.semantic_preservation = false;
  cfg.eval.pca_payload = false;

  std::ostringstream log;
  const auto report = run_eval(cfg, cfg.embedding_path, log);
  CHECK(!report.projection_bias.has_value());
  CHECK(report.weat.empty());
  CHECK(report.skipped.size() == 10);
  CHECK(report.errors.empty());
}

TEST_CASE("run_eval: per-metric failures do not abort the run") {
  testutil::TempDir dir("eval_err");
  const auto paths = testutil::write_fixture(dir);
  auto cfg = fixture_config(dir, paths, "p-desip", "err", 0.30);
  // sabotage one dataset after validation-time existence checks
  testutil::write_file(paths.sembias, "broken line without tabs\n");

  std::ostringstream log;
  const auto report = run_eval(cfg, cfg.embedding_path, log);
  CHECK(report.errors.count("sembias") == 1);
  REQUIRE(report.projection_bias.has_value());  // the rest still ran
  CHECK(report.weat.size() == 2);
}

TEST_CASE("pipeline: debias then eval lowers projection bias") {
  testutil::TempDir dir("endtoend");
  const auto paths = testutil::write_fixture(dir);
  const auto cfg = fixture_config(dir, paths, "p-desip", "e2e", 0.30);

  std::ostringstream log;
  run_debias(cfg, log);
  const auto report_orig = run_eval(cfg, cfg.embedding_path, log);

  auto cfg_debiased = cfg;
  cfg_debiased.out_report = dir.path("report_debiased.json");
  const auto report_debiased = run_eval(cfg_debiased, cfg.out_embedding, log);

  // the reported metric (which also averages the untouched D/P words)
  // must drop, and the debiased band itself must drop hard
  REQUIRE(report_orig.projection_bias.has_value());
  REQUIRE(report_debiased.projection_bias.has_value());
  CHECK(*report_debiased.projection_bias < *report_orig.projection_bias);

  const auto original = load_embeddings(cfg.embedding_path);
  const auto debiased = load_embeddings(cfg.out_embedding);
  std::vector<std::string> band;
  for (int i = 0; i < 25; ++i) {
    band.push_back("tm" + std::to_string(i));
    band.push_back("tf" + std::to_string(i));
  }
  const double before = bias_eval::bias_by_projection(original, band);
  const double after = bias_eval::bias_by_projection(debiased, band);
  CHECK(after < 0.25 * before);

  // u-desip also reduces the band, through the resolving words instead
  auto ucfg = fixture_config(dir, paths, "u-desip", "e2eu", 0.10);
  run_debias(ucfg, log);
  const auto udebiased = load_embeddings(ucfg.out_embedding);
  const double uafter = bias_eval::bias_by_projection(udebiased, band);
  CHECK(uafter < 0.6 * before);
}

TEST_CASE("run_report: comparison tables across reports") {
  testutil::TempDir dir("report");
  const auto paths = testutil::write_fixture(dir);
  const auto cfg = fixture_config(dir, paths, "p-desip", "r1", 0.30);
  std::ostringstream log;
  run_eval(cfg, cfg.embedding_path, log);

  // second report with some metrics disabled: union columns get blanks
  auto cfg2 = fixture_config(dir, paths, "p-desip", "r2", 0.30);
  cfg2.eval.similarity = false;
  cfg2.eval.classification = false;
  run_eval(cfg2, cfg2.embedding_path, log);

  const auto prefix = dir.path("cmp");
  run_report({cfg.out_report, cfg2.out_report}, prefix, log);

  const auto csv = testutil::read_file(prefix + ".csv");
  CHECK(csv.find("projection_bias") != std::string::npos);
  CHECK(csv.find("similarity:synthetic") != std::string::npos);
  const auto lines = [&] {
    std::vector<std::string> out;
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line)) out.push_back(line);
    return out;
  }();
  REQUIRE(lines.size() == 3);  // header + two rows
  // the disabled similarity cell of row 2 is blank: trailing comma pair
  CHECK(lines[2].find(",,") != std::string::npos);

  CHECK(std::filesystem::exists(prefix + ".txt"));
  CHECK(std::filesystem::exists(prefix + "_pca_0.csv"));
  const auto pca_csv = testutil::read_file(prefix + "_pca_0.csv");
  CHECK(pca_csv.rfind("word,pc1,pc2,label", 0) == 0);

  // schema version mismatch is fatal and names both versions
  auto tampered = testutil::read_file(cfg.out_report);
  const auto pos = tampered.find("\"schema_version\": 1");
  REQUIRE(pos != std::string::npos);
  tampered.replace(pos, std::string("\"schema_version\": 1").size(),
                   "\"schema_version\": 99");
  const auto tampered_path = dir.path("tampered.json");
  testutil::write_file(tampered_path, tampered);
  CHECK_THROWS_WITH_AS(run_report({tampered_path}, dir.path("x"), log),
                       doctest::Contains("99"), std::runtime_error);

  CHECK_THROWS_AS(run_report({}, dir.path("y"), log), ValidationError);
}

TEST_CASE("config: vocabulary limit trims both loads") {
  testutil::TempDir dir("limit");
  const auto paths = testutil::write_fixture(dir);
  auto cfg = fixture_config(dir, paths, "p-desip", "lim", 0.30);
  cfg.limit = 120;
  cfg.eval.sembias = false;  // fixture words beyond the limit go OOV
  cfg.eval.similarity = false;
  cfg.eval.semantic_preservation = false;
  cfg.eval.classification = false;
  std::ostringstream log;
  run_debias(cfg, log);
  const auto out = load_embeddings(cfg.out_embedding);
  CHECK(out.size() == 120);
  const auto report = run_eval(cfg, cfg.out_embedding, log);
  CHECK(report.projection_bias.has_value());
}

TEST_CASE("load_weat_sets: malformed documents rejected") {
  testutil::TempDir dir("weatcfg");
  const auto bad_json = dir.path("bad.json");
  testutil::write_file(bad_json, "{ not json");
  CHECK_THROWS_AS(load_weat_sets(bad_json), ValidationError);
  const auto missing_key = dir.path("missing.json");
  testutil::write_file(missing_key,
                       "{\"t\": {\"targets_x\": [\"a\"], \"targets_y\": "
                       "[\"b\"], \"attributes_a\": [\"c\"]}}");
  CHECK_THROWS_AS(load_weat_sets(missing_key), ValidationError);
  const auto empty_doc = dir.path("empty.json");
  testutil::write_file(empty_doc, "{}");
  CHECK_THROWS_AS(load_weat_sets(empty_doc), ValidationError);
}

TEST_CASE("run_report: single report produces a single data row") {
  testutil::TempDir dir("report_one");
  const auto paths = testutil::write_fixture(dir);
  const auto cfg = fixture_config(dir, paths, "p-desip", "solo", 0.30);
  std::ostringstream log;
  run_eval(cfg, cfg.embedding_path, log);
  const auto prefix = dir.path("solo");
  run_report({cfg.out_report}, prefix, log);
  const auto csv = testutil::read_file(prefix + ".csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
}
