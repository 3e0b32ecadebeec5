#pragma once

// Synthetic desk-scale fixture: a ~200-word embedding whose content words
// are generated from the linear structural equations the debiasing
// algorithms assume (gender reaches them only through the gendered proxy
// words), plus the word lists and datasets every pipeline command needs.
// Deterministic for a given seed.

#include <array>
#include <string>
#include <vector>

#include "desip/embedding.hpp"
#include "desip/rng.hpp"
#include "test_util.hpp"

namespace testutil {

struct FixturePaths {
  std::string embedding;
  std::string d_pairs;
  std::string p_pairs;
  std::string z_lexicon;
  std::string professions;
  std::string sembias;
  std::string weat_sets;
  std::string similarity;
};

// Dir is anything with a path(name) -> std::string member (TempDir, or a
// plain directory holder for the CLI fixture tool).
template <typename Dir>
FixturePaths write_fixture(const Dir& dir, std::uint64_t seed = 4242) {
  auto rng = desip::make_rng(seed);
  const int dim = 32;  // axis 0 carries gender, the rest semantics

  std::vector<std::string> words;
  std::vector<Eigen::VectorXd> vecs;
  auto semantic = [&](double scale) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
    for (int i = 1; i < dim; ++i) v(i) = scale * desip::normal_unit(rng);
    return v;
  };
  auto add = [&](const std::string& w, const Eigen::VectorXd& v) {
    words.push_back(w);
    vecs.push_back(v);
  };
  auto gendered = [&](double gender, double sem_scale) {
    Eigen::VectorXd v = semantic(sem_scale);
    v(0) = gender;
    return v;
  };

  // D: pure gender pairs, tiny semantic content
  add("he", gendered(1.0, 0.05));
  add("she", gendered(-1.0, 0.05));
  add("man", gendered(0.9, 0.1));
  add("woman", gendered(-0.9, 0.1));
  add("his", gendered(0.85, 0.1));
  add("hers", gendered(-0.85, 0.1));
  add("king", gendered(0.8, 0.15));
  add("queen", gendered(-0.8, 0.15));

  // P: gendered proxies with real semantic mass
  const std::vector<std::pair<std::string, std::string>> p_pairs = {
      {"bridegroom", "bride"},
      {"waiter", "waitress"},
      {"actor", "actress"},
      {"father", "mother"}};
  std::vector<Eigen::VectorXd> p_vecs;
  for (const auto& [m, f] : p_pairs) {
    const double c = 0.55 + 0.2 * desip::uniform_unit(rng);
    Eigen::VectorXd vm = gendered(c, 0.8);
    Eigen::VectorXd vf = gendered(-c, 0.8);
    add(m, vm);
    add(f, vf);
    p_vecs.push_back(vm);
    p_vecs.push_back(vf);
  }

  // Exogenous-noise sampler: the structural equations assume residuals
  // uncorrelated with D and P, so draw them orthogonal to
  // span([D-diffs | P | 1]).
  Eigen::MatrixXd exo_basis(dim, 4 + 8 + 1);
  for (int i = 0; i < 4; ++i) {
    exo_basis.col(i) = vecs[2 * i] - vecs[2 * i + 1];  // D differences
  }
  for (int i = 0; i < 8; ++i) exo_basis.col(4 + i) = p_vecs[i];
  exo_basis.col(12) = Eigen::VectorXd::Ones(dim);
  const Eigen::MatrixXd exo_gram = exo_basis.transpose() * exo_basis;
  auto exogenous = [&](double scale) {
    Eigen::VectorXd raw = semantic(scale);
    return Eigen::VectorXd(
        raw - exo_basis * exo_gram.ldlt().solve(exo_basis.transpose() * raw));
  };

  // X: remainder words, X = P a2 + e2 (no direct D -> X path)
  const int n_fill = 80;
  std::vector<Eigen::VectorXd> x_vecs;
  std::vector<std::string> x_names;
  for (int k = 0; k < n_fill; ++k) {
    Eigen::VectorXd v = exogenous(1.0);
    for (int pick = 0; pick < 2; ++pick) {
      const auto pi = desip::uniform_index(rng, p_vecs.size());
      v += (0.1 + 0.1 * desip::uniform_unit(rng)) * p_vecs[pi];
    }
    x_names.push_back("fill" + std::to_string(k));
    x_vecs.push_back(v);
  }

  // Y band: content words generated as Y = P b1 + X b2; the male/female
  // lean comes from which proxy words b1 loads on. Exactly y_top = 50
  // words so the whole band is debiased.
  auto structural = [&](bool male_lean) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
    for (int pick = 0; pick < 2; ++pick) {
      // proxies are stored male, female, male, ... in p_vecs
      const auto base = 2 * desip::uniform_index(rng, p_pairs.size());
      const auto pi = base + (male_lean ? 0 : 1);
      v += (0.4 + 0.3 * desip::uniform_unit(rng)) * p_vecs[pi];
    }
    for (int pick = 0; pick < 4; ++pick) {
      const auto xi = desip::uniform_index(rng, x_vecs.size());
      v += (0.3 + 0.4 * desip::uniform_unit(rng)) * x_vecs[xi];
    }
    return v;
  };
  for (int i = 0; i < 25; ++i) {
    add("tm" + std::to_string(i), structural(true));
  }
  for (int i = 0; i < 25; ++i) {
    add("tf" + std::to_string(i), structural(false));
  }

  const std::vector<std::pair<std::string, bool>> professions = {
      {"doctor", true},    {"engineer", true},   {"nurse", false},
      {"teacher", false},  {"lawyer", true},     {"librarian", false},
      {"mechanic", true},  {"secretary", false}, {"pilot", true},
      {"dancer", false},   {"chef", true},       {"clerk", false}};
  for (const auto& [w, male] : professions) add(w, structural(male));

  // first names: direct gender anchors used as WEAT attributes
  for (int i = 0; i < 4; ++i) {
    Eigen::VectorXd v = exogenous(0.3);
    v(0) += 0.8 + 0.1 * desip::uniform_unit(rng);
    add("jm" + std::to_string(i), v);
  }
  for (int i = 0; i < 4; ++i) {
    Eigen::VectorXd v = exogenous(0.3);
    v(0) += -0.8 - 0.1 * desip::uniform_unit(rng);
    add("jf" + std::to_string(i), v);
  }

  // adjective/noun lexicon candidates for Z: correlated with D
  for (int i = 0; i < 20; ++i) {
    const double lean =
        (i % 2 ? -1.0 : 1.0) * (0.1 + 0.5 * desip::uniform_unit(rng));
    Eigen::VectorXd v = exogenous(0.9);
    v(0) += lean;
    add("adj" + std::to_string(i), v);
  }

  // the X remainder goes in last (lowest frequency rank)
  for (int k = 0; k < n_fill; ++k) add(x_names[k], x_vecs[k]);

  Eigen::MatrixXd cols(dim, int(words.size()));
  for (std::size_t i = 0; i < vecs.size(); ++i) {
    cols.col(Eigen::Index(i)) = vecs[i];
  }
  const desip::EmbeddingTable table(words, cols);

  FixturePaths paths;
  paths.embedding = dir.path("embedding.txt");
  desip::save_embeddings(table, paths.embedding);

  paths.d_pairs = dir.path("d_pairs.tsv");
  write_file(paths.d_pairs,
             "he\tshe\nman\twoman\nhis\thers\nking\tqueen\n");

  paths.p_pairs = dir.path("p_pairs.tsv");
  write_file(paths.p_pairs,
             "bridegroom\tbride\nwaiter\twaitress\nactor\tactress\n"
             "father\tmother\n");

  paths.z_lexicon = dir.path("z_lexicon.txt");
  {
    std::string text = "# adjective/noun candidates\n";
    for (int i = 0; i < 20; ++i) text += "adj" + std::to_string(i) + "\n";
    for (int i = 0; i < 10; ++i) text += "fill" + std::to_string(i) + "\n";
    write_file(paths.z_lexicon, text);
  }

  paths.professions = dir.path("professions.txt");
  {
    std::string text;
    for (const auto& [w, male] : professions) text += w + "\n";
    write_file(paths.professions, text);
  }

  paths.sembias = dir.path("sembias.tsv");
  {
    // definitional pair + a stereotype pair + unrelated pairs per line
    const std::vector<std::array<std::string, 4>> rows = {
        {"bridegroom:bride", "doctor:nurse", "fill0:fill1", "fill2:fill3"},
        {"doctor:nurse", "waiter:waitress", "fill4:fill5", "fill6:fill7"},
        {"fill8:fill9", "fill10:fill11", "actor:actress", "engineer:teacher"},
        {"father:mother", "mechanic:secretary", "fill12:fill13",
         "fill14:fill15"},
        {"lawyer:librarian", "fill16:fill17", "waiter:waitress",
         "fill18:fill19"},
        {"fill20:fill21", "bridegroom:bride", "pilot:dancer", "fill22:fill23"},
        {"actor:actress", "fill24:fill25", "fill26:fill27", "chef:clerk"},
        {"fill28:fill29", "engineer:nurse", "father:mother", "fill30:fill31"},
        {"waiter:waitress", "doctor:teacher", "fill32:fill33",
         "fill34:fill35"},
        {"fill36:fill37", "fill38:fill39", "bridegroom:bride",
         "mechanic:clerk"},
        // final two rows form the held-out subset
        {"father:mother", "doctor:nurse", "fill40:fill41", "fill42:fill43"},
        {"fill44:fill45", "actor:actress", "lawyer:secretary",
         "fill46:fill47"},
    };
    const std::vector<int> definitional = {0, 1, 2, 0, 2, 1, 0, 2, 0, 2, 0, 1};
    std::string text;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      text += rows[i][0] + "\t" + rows[i][1] + "\t" + rows[i][2] + "\t" +
              rows[i][3] + "\t" + std::to_string(definitional[i]) + "\n";
    }
    write_file(paths.sembias, text);
  }

  paths.weat_sets = dir.path("weat_sets.json");
  {
    auto list = [](const std::string& prefix, int from, int to) {
      std::string out = "[";
      for (int i = from; i < to; ++i) {
        out += (i > from ? ", " : "") + std::string("\"") + prefix +
               std::to_string(i) + "\"";
      }
      return out + "]";
    };
    const std::string text = std::string("{\n") +
        "  \"task1_content\": {\n" +
        "    \"targets_x\": " + list("tm", 0, 6) + ",\n" +
        "    \"targets_y\": " + list("tf", 0, 6) + ",\n" +
        "    \"attributes_a\": " + list("jm", 0, 4) + ",\n" +
        "    \"attributes_b\": " + list("jf", 0, 4) + "\n" +
        "  },\n" +
        "  \"task2_professions\": {\n" +
        "    \"targets_x\": [\"engineer\", \"mechanic\", \"doctor\", "
        "\"lawyer\"],\n" +
        "    \"targets_y\": [\"nurse\", \"librarian\", \"secretary\", "
        "\"dancer\"],\n" +
        "    \"attributes_a\": " + list("jm", 0, 4) + ",\n" +
        "    \"attributes_b\": " + list("jf", 0, 4) + "\n" +
        "  }\n" +
        "}\n";
    write_file(paths.weat_sets, text);
  }

  paths.similarity = dir.path("similarity.txt");
  {
    // human scores follow the original cosine ordering with mild noise
    std::string text;
    for (int i = 0; i < 20; ++i) {
      const std::string w1 = "tm" + std::to_string(i);
      const std::string w2 = "tf" + std::to_string(i);
      const double cos = testutil::cosine_plain(
          *table.lookup(w1), *table.lookup(w2));
      const double human =
          5.0 + 4.0 * cos + 0.05 * desip::normal_unit(rng);
      text += w1 + "\t" + w2 + "\t" + std::to_string(human) + "\n";
    }
    write_file(paths.similarity, text);
  }

  return paths;
}

// A ready-to-serialize config document for the fixture.
inline std::string fixture_config_json(const FixturePaths& p,
                                       const std::string& method,
                                       const std::string& out_embedding,
                                       const std::string& out_diag,
                                       const std::string& out_report,
                                       double gamma, int n_components = 12) {
  std::string j = "{\n";
  j += "  \"embedding\": \"" + p.embedding + "\",\n";
  j += "  \"seed\": 42,\n";
  j += "  \"method\": \"" + method + "\",\n";
  j += "  \"debias\": {\"n_components\": " + std::to_string(n_components) +
       ", \"gamma\": " + std::to_string(gamma) +
       ", \"z_size\": 10, \"y_top\": 50},\n";
  j += "  \"wordlists\": {\"d_pairs\": \"" + p.d_pairs + "\", \"p_pairs\": \"" +
       p.p_pairs + "\", \"z_lexicon\": \"" + p.z_lexicon +
       "\", \"professions\": \"" + p.professions + "\"},\n";
  j += "  \"datasets\": {\"sembias\": \"" + p.sembias +
       "\", \"sembias_subset_tail\": 2, \"weat_sets\": \"" + p.weat_sets +
       "\", \"similarity\": {\"synthetic\": \"" + p.similarity + "\"}},\n";
  j += "  \"eval\": {\"projection_top\": 60, \"top_biased\": 15, "
       "\"classify_pool\": 25, \"classify_train\": 8, \"neighbor_k\": 10, "
       "\"weat_max_permutations\": 2000, \"preservation_n\": 10, "
       "\"preservation_anchors\": [\"tm0\", \"tf0\"]},\n";
  j += "  \"output\": {\"embedding\": \"" + out_embedding +
       "\", \"diagnostics\": \"" + out_diag + "\", \"report\": \"" +
       out_report + "\"}\n";
  j += "}\n";
  return j;
}

}  // namespace testutil
