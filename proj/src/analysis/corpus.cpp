#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "vicorpus/analysis.hpp"
#include "vicorpus/dataset.hpp"
#include "vicorpus/error.hpp"
#include "vicorpus/seed.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace vicorpus::analysis {

namespace {

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<CorpusDocument> load_built(const fs::path& root) {
  std::vector<CorpusDocument> out;
  std::ifstream in(root / "manifest.jsonl");
  std::string line;
  while (std::getline(in, line)) {
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || j.value("type", "") != "record") continue;
    const json rec = json::parse(read_text(root / j.at("annotation").get<std::string>()));
    std::string text;
    for (const auto& w : rec.at("words")) {
      if (!text.empty()) text += ' ';
      text += w.at("text").get<std::string>();
    }
    out.push_back({rec.at("doc_id").get<std::string>(), std::move(text)});
  }
  return out;
}

}  // namespace

std::vector<CorpusDocument> load_corpus(const fs::path& path) {
  if (fs::is_directory(path)) {
    if (fs::exists(path / "manifest.jsonl")) return load_built(path);
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(path)) {
      if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<CorpusDocument> out;
    for (const auto& f : files) out.push_back({fs::relative(f, path).generic_string(), read_text(f)});
    return out;
  }
  if (!fs::exists(path)) throw InputError("corpus not found: " + path.string());
  std::vector<CorpusDocument> out;
  std::ifstream in(path);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("text")) {
      spdlog::warn("{}:{}: skipped, expected an object with a text field", path.string(), n);
      continue;
    }
    std::string id = j.contains("doc_id") ? j["doc_id"].get<std::string>() : std::to_string(n);
    out.push_back({std::move(id), j["text"].get<std::string>()});
  }
  return out;
}

std::vector<CorpusDocument> sample_documents(std::vector<CorpusDocument> docs, std::size_t n, std::uint64_t seed) {
  if (n == 0 || n >= docs.size()) return docs;
  std::vector<std::size_t> idx(docs.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  SplitMix64 rng(seed);
  // Partial Fisher-Yates; written out so the sample is the same on every platform.
  for (std::size_t i = 0; i < n; ++i) std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  std::vector<CorpusDocument> out;
  out.reserve(n);
  for (auto i : idx) out.push_back(std::move(docs[i]));
  return out;
}

AnalyzeResult run_analysis(const AnalyzeConfig& c) {
  if (c.corpora.empty()) throw UsageError("at least one --corpus tag=path is required");
  if (c.components == 0) throw UsageError("--components must be positive");
  std::set<std::string> tags;
  for (const auto& [tag, path] : c.corpora) {
    if (tag.empty()) throw UsageError("corpus tags must not be empty");
    if (!tags.insert(tag).second) throw UsageError("duplicate corpus tag '" + tag + "'");
  }
  const auto stopwords = c.stopwords ? parse_stopwords(read_text(*c.stopwords)) : default_stopwords();

  std::vector<std::pair<std::string, std::vector<CorpusDocument>>> corpora;
  VocabBuilder vocab_builder;
  for (const auto& [tag, path] : c.corpora) {
    auto docs = sample_documents(load_corpus(path), c.samples_per_corpus, derive_seed(c.seed, tag));
    spdlog::info("corpus {}: {} documents from {}", tag, docs.size(), path.string());
    for (const auto& d : docs) vocab_builder.add_text(d.text);
    corpora.emplace_back(tag, std::move(docs));
  }
  const Vocabulary vocab = vocab_builder.build(c.vocab_cap, stopwords);

  std::vector<BowVector> vectors;
  for (const auto& [tag, docs] : corpora) {
    for (const auto& d : docs) vectors.push_back(vectorize(d.text, vocab, d.doc_id, tag));
  }
  AnalyzeResult r;
  r.documents = vectors.size();
  r.vocab_size = vocab.size();
  r.model = fit_pca(vectors, vocab.size(), c.components, c.pca);

  fs::create_directories(c.out);
  json model = r.model.to_json(&vocab);
  model["corpora"] = json::array();
  for (const auto& [tag, docs] : corpora) model["corpora"].push_back({{"tag", tag}, {"documents", docs.size()}});
  dataset::write_file_atomic(c.out / "model.json", model.dump() + "\n");
  std::string vocab_text;
  for (const auto& t : vocab.terms) vocab_text += t + "\n";
  dataset::write_file_atomic(c.out / "vocab.txt", vocab_text);

  const auto tables = project_pairs(r.model, vectors, consecutive_pairs(c.components));
  r.csv_files = write_scatter_csvs(tables, c.out);
  if (c.svg) r.svg_files = write_scatter_svgs(tables, c.out);
  return r;
}

}  // namespace vicorpus::analysis
