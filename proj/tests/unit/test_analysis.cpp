#include <doctest.h>

#include <fstream>
#include <map>
#include <set>

#include "corpora.hpp"
#include "oracles.hpp"
#include "pca_check.hpp"
#include "test_support.hpp"
#include "vicorpus/analysis.hpp"
#include "vicorpus/error.hpp"

namespace fs = std::filesystem;
using namespace vicorpus;
using namespace vicorpus::analysis;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("tokenizer") {
  CHECK(tokenize("Hello, World! 42x") == std::vector<std::string>{"hello", "world", "42x"});
  CHECK(tokenize("don't stop") == std::vector<std::string>{"don", "t", "stop"});
  CHECK(tokenize("") .empty());
  CHECK(tokenize("Ünïcode café") == std::vector<std::string>{"Ünïcode", "café"});
  CHECK(tokenize("日本語、テスト。") == std::vector<std::string>{"日本語", "テスト"});
  CHECK(tokenize("a\u2014b") == std::vector<std::string>{"a", "b"});
}

TEST_CASE("stop words") {
  CHECK(default_stopwords().count("the") == 1);
  CHECK(default_stopwords().count("and") == 1);
  CHECK(default_stopwords().count("corpus") == 0);
  const auto custom = parse_stopwords("# comment\nfoo\r\nbar \n\n");
  CHECK(custom == std::unordered_set<std::string>{"foo", "bar"});
}

TEST_CASE("vocabulary ranks by count, ties lexicographic, stop words removed") {
  const auto v = build_vocab({"bb aa cc the", "aa bb the", "aa dd dd ee"}, 3, default_stopwords());
  CHECK(v.terms == std::vector<std::string>{"aa", "bb", "dd"});
  CHECK(v.find("bb") == 1);
  CHECK(v.find("the") == -1);
  CHECK(build_vocab({"x y"}, 10, {}).size() == 2);
  CHECK_THROWS_AS(build_vocab({"", "  ,"}, 10, {}), InputError);
}

TEST_CASE("vectorize agrees with a direct count") {
  test::Rng rng(4);
  const auto vocab = build_vocab({"alpha beta gamma delta epsilon zeta eta theta"}, 100, {});
  const std::vector<std::string> pool{"alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta", "omega", "the"};
  for (int trial = 0; trial < 200; ++trial) {
    std::string text;
    std::map<int, double> expected;
    for (int i = 0, n = rng.integer(0, 40); i < n; ++i) {
      const std::string& w = pool[static_cast<std::size_t>(rng.integer(0, 9))];
      text += (rng.chance(0.5) ? " " : ", ") + (rng.chance(0.3) ? std::string(1, static_cast<char>(std::toupper(w[0]))) + w.substr(1) : w);
      for (std::size_t t = 0; t < vocab.terms.size(); ++t)
        if (vocab.terms[t] == w) expected[static_cast<int>(t)] += 1;
    }
    const auto v = vectorize(text, vocab, "d", "tag");
    CHECK(v.doc_id == "d");
    CHECK(v.tag == "tag");
    std::vector<std::pair<int, double>> want(expected.begin(), expected.end());
    CHECK(v.entries == want);
  }
}

TEST_CASE("the Jacobi oracle solves its own equations") {
  test::Rng rng(1);
  const auto inst = pcacheck::random_instance(rng, 40, 12);
  const auto c = oracle::covariance(inst.dense);
  const auto e = oracle::jacobi(c);
  for (std::size_t k = 0; k < 12; ++k) {
    for (std::size_t i = 0; i < 12; ++i) {
      double av = 0;
      for (std::size_t j = 0; j < 12; ++j) av += c[i][j] * e.vectors[k][j];
      CHECK(av == doctest::Approx(e.values[k] * e.vectors[k][i]).epsilon(1e-9).scale(1));
    }
  }
  for (std::size_t k = 1; k < 12; ++k) CHECK(e.values[k - 1] >= e.values[k]);
}

TEST_CASE("PCA matches the dense oracle on random 30-dim data") {
  test::Rng rng(2024);
  for (int trial = 0; trial < 10; ++trial) {
    const auto inst = pcacheck::random_instance(rng, 90, 30);
    const auto err = pcacheck::compare(inst, 6);
    CAPTURE(trial);
    CHECK(err.value <= 1e-8);
    CHECK(err.vector <= 1e-8);
    CHECK(err.orthonormal <= 1e-8);
  }
}

TEST_CASE("PCA model properties") {
  test::Rng rng(17);
  const auto inst = pcacheck::random_instance(rng, 60, 20);
  const auto m = fit_pca(inst.sparse, 20, 5);
  CHECK(m.components.rows() == 5);
  CHECK(m.components.cols() == 20);
  CHECK(m.rank >= 5);
  for (int c = 1; c < 5; ++c) CHECK(m.explained_variance(c - 1) >= m.explained_variance(c));
  for (int c = 0; c < 5; ++c) {
    Eigen::Index arg;
    m.components.row(c).cwiseAbs().maxCoeff(&arg);
    CHECK(m.components(c, arg) > 0);
  }
  // Projections of the data are centered.
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(5);
  for (const auto& v : inst.sparse) sum += m.project(v);
  CHECK(sum.cwiseAbs().maxCoeff() / 60 < 1e-9);

  const json j = m.to_json();
  CHECK(j["k"] == 5);
  CHECK(j["dim"] == 20);
  CHECK(j["components"].size() == 5);
  CHECK(j["explained_variance"].size() == 5);
}

TEST_CASE("PCA is invariant to a constant shift of the data") {
  test::Rng rng(5);
  auto inst = pcacheck::random_instance(rng, 50, 15);
  const auto base = fit_pca(inst.sparse, 15, 4);
  for (auto& v : inst.sparse) {
    std::map<int, double> dense;
    for (int j = 0; j < 15; ++j) dense[j] = 7.5;
    for (const auto& [i, x] : v.entries) dense[i] += x;
    v.entries.assign(dense.begin(), dense.end());
  }
  const auto shifted = fit_pca(inst.sparse, 15, 4);
  CHECK((base.components - shifted.components).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((base.explained_variance - shifted.explained_variance).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("line in 3D is rank one") {
  const auto pts = pcacheck::line_in_3d();
  CHECK_THROWS_AS(fit_pca(pts, 3, 2), InputError);
  PcaOptions o;
  o.allow_rank_deficient = true;
  const auto m = fit_pca(pts, 3, 2, o);
  CHECK(m.rank == 1);
  CHECK(m.explained_variance(1) < 1e-10);
  CHECK(m.explained_variance(1) >= 0);
  const Eigen::Vector3d dir = Eigen::Vector3d(1, 2, 3).normalized();
  CHECK(std::abs(m.components.row(0).dot(dir)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(m.components.row(0).dot(m.components.row(1))) < 1e-10);
}

TEST_CASE("PCA argument checks") {
  const auto pts = pcacheck::line_in_3d();
  CHECK_THROWS_AS(fit_pca(pts, 3, 0), UsageError);
  CHECK_THROWS_AS(fit_pca(pts, 3, 4), InputError);
  CHECK_THROWS_AS(fit_pca({pts[0], pts[1]}, 3, 2), InputError);
  auto bad = pts;
  bad[0].entries = {{1, 1}, {0, 1}};
  CHECK_THROWS_AS(fit_pca(bad, 3, 1), InputError);
  bad[0].entries = {{3, 1}};
  CHECK_THROWS_AS(fit_pca(bad, 3, 1), InputError);
}

TEST_CASE("scatter tables and CSV files") {
  test::Rng rng(8);
  auto inst = pcacheck::random_instance(rng, 20, 8);
  for (std::size_t i = 0; i < inst.sparse.size(); ++i) inst.sparse[i].tag = i % 2 ? "odd" : "even";
  inst.sparse[0].doc_id = "needs,\"quoting\"";
  const auto m = fit_pca(inst.sparse, 8, 4);
  CHECK(consecutive_pairs(4) == std::vector<std::pair<int, int>>{{0, 1}, {1, 2}, {2, 3}});
  CHECK(consecutive_pairs(1).empty());
  const auto tables = project_pairs(m, inst.sparse, consecutive_pairs(4));
  CHECK(tables.size() == 3);
  CHECK(tables.at({1, 2}).at("odd").size() == 10);
  const auto& row = tables.at({1, 2}).at("even")[1];
  const auto y = m.project(inst.sparse[2]);
  CHECK(row.doc_id == "r2");
  CHECK(row.x == y(1));
  CHECK(row.y == y(2));
  CHECK_THROWS_AS(project_pairs(m, inst.sparse, {{0, 4}}), UsageError);
  CHECK(project_pairs(m, inst.sparse, {}).empty());

  test::TempDir dir;
  const auto files = write_scatter_csvs(tables, dir.path());
  CHECK(files.size() == 6);
  const std::string text = slurp(dir.path() / "pc1_pc2__even.csv");
  CHECK(text.rfind("doc_id,x,y\n\"needs,\"\"quoting\"\"\",", 0) == 0);
  std::size_t lines = 0;
  for (char c : text) lines += c == '\n';
  CHECK(lines == 11);
  const auto svgs = write_scatter_svgs(tables, dir.path());
  CHECK(svgs.size() == 3);
  CHECK(slurp(svgs[0]).find("<svg") != std::string::npos);
}

TEST_CASE("sampling is seeded and order-preserving") {
  std::vector<CorpusDocument> docs;
  for (int i = 0; i < 50; ++i) docs.push_back({"d" + std::to_string(i), "t"});
  const auto a = sample_documents(docs, 10, 3);
  const auto b = sample_documents(docs, 10, 3);
  const auto c = sample_documents(docs, 10, 4);
  REQUIRE(a.size() == 10);
  std::vector<std::string> ia, ib, ic;
  for (const auto& d : a) ia.push_back(d.doc_id);
  for (const auto& d : b) ib.push_back(d.doc_id);
  for (const auto& d : c) ic.push_back(d.doc_id);
  CHECK(ia == ib);
  CHECK(ia != ic);
  CHECK(std::set<std::string>(ia.begin(), ia.end()).size() == 10);
  std::vector<int> pos;
  for (const auto& id : ia) pos.push_back(std::stoi(id.substr(1)));
  CHECK(std::is_sorted(pos.begin(), pos.end()));
  CHECK(sample_documents(docs, 0, 1).size() == 50);
  CHECK(sample_documents(docs, 80, 1).size() == 50);
}

TEST_CASE("corpus loaders") {
  test::TempDir dir;
  fs::create_directories(dir.path() / "txt" / "sub");
  std::ofstream(dir.path() / "txt" / "b.txt") << "bee";
  std::ofstream(dir.path() / "txt" / "sub" / "a.txt") << "ay";
  std::ofstream(dir.path() / "txt" / "skip.md") << "no";
  const auto txt = load_corpus(dir.path() / "txt");
  REQUIRE(txt.size() == 2);
  CHECK(txt[0].doc_id == "b.txt");
  CHECK(txt[1].doc_id == "sub/a.txt");
  CHECK(txt[1].text == "ay");

  std::ofstream(dir.path() / "c.jsonl") << "{\"doc_id\":\"x\",\"text\":\"hi\"}\nbroken\n{\"text\":\"anon\"}\n";
  const auto jl = load_corpus(dir.path() / "c.jsonl");
  REQUIRE(jl.size() == 2);
  CHECK(jl[0].doc_id == "x");
  CHECK(jl[1].doc_id == "3");
  CHECK_THROWS_AS(load_corpus(dir.path() / "missing.jsonl"), InputError);
}

TEST_CASE("run_analysis end to end on small corpora") {
  test::TempDir dir;
  AnalyzeConfig c;
  for (int i = 0; i < 3; ++i) {
    const auto p = dir.path() / ("c" + std::to_string(i) + ".jsonl");
    corpora::write_jsonl(p, i, 40, 9);
    c.corpora.emplace_back("t" + std::to_string(i), p);
  }
  c.vocab_cap = 300;
  c.components = 4;
  c.samples_per_corpus = 30;
  c.seed = 5;
  c.out = dir.path() / "out";
  c.svg = true;
  const auto r = run_analysis(c);
  CHECK(r.documents == 90);
  CHECK(r.vocab_size == 300);
  CHECK(r.csv_files.size() == 3 * 3);
  CHECK(r.svg_files.size() == 3);
  CHECK(fs::exists(c.out / "pc3_pc4__t2.csv"));
  const json model = json::parse(slurp(c.out / "model.json"));
  CHECK(model["corpora"].size() == 3);
  CHECK(model["terms"].size() == 300);
  CHECK(model["k"] == 4);

  // Same inputs, same bytes.
  c.out = dir.path() / "again";
  run_analysis(c);
  CHECK(slurp(dir.path() / "out" / "pc1_pc2__t0.csv") == slurp(dir.path() / "again" / "pc1_pc2__t0.csv"));
  CHECK(slurp(dir.path() / "out" / "model.json") == slurp(dir.path() / "again" / "model.json"));

  AnalyzeConfig bad = c;
  bad.corpora.push_back(bad.corpora.front());
  CHECK_THROWS_AS(run_analysis(bad), UsageError);
  bad.corpora.clear();
  CHECK_THROWS_AS(run_analysis(bad), UsageError);
}
