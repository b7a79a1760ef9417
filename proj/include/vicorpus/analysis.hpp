#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"

namespace vicorpus::analysis {

/// Lowercased runs of letters and digits. ASCII is folded; other scripts
/// pass through unchanged, with Unicode punctuation and spaces as breaks.
std::vector<std::string> tokenize(std::string_view text);

/// Bundled English list.
const std::unordered_set<std::string>& default_stopwords();
std::unordered_set<std::string> parse_stopwords(std::string_view text);

struct Vocabulary {
  std::vector<std::string> terms;
  std::unordered_map<std::string, int> index;

  std::size_t size() const { return terms.size(); }
  int find(const std::string& term) const {
    auto it = index.find(term);
    return it == index.end() ? -1 : it->second;
  }
};

/// Streaming term counter for build_vocab.
class VocabBuilder {
 public:
  void add_tokens(const std::vector<std::string>& tokens);
  void add_text(std::string_view text) { add_tokens(tokenize(text)); }
  std::uint64_t total_tokens() const { return total_; }

  /// Top `cap` non-stop-word terms by count; ties go to the
  /// lexicographically smaller term. Throws when nothing was added.
  Vocabulary build(std::size_t cap, const std::unordered_set<std::string>& stopwords) const;

 private:
  std::unordered_map<std::string, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

Vocabulary build_vocab(const std::vector<std::string>& texts, std::size_t cap,
                       const std::unordered_set<std::string>& stopwords);

struct BowVector {
  std::string doc_id;
  std::string tag;
  /// (term index, count), indices strictly increasing, counts > 0.
  std::vector<std::pair<int, double>> entries;
};

BowVector vectorize(std::string_view text, const Vocabulary& vocab, std::string doc_id = {}, std::string tag = {});

struct PcaOptions {
  /// Return a model even when k exceeds the numerical rank; the surplus
  /// components then span an arbitrary orthonormal completion.
  bool allow_rank_deficient = false;
  std::uint64_t seed = 0x5EED;
  int max_iterations = 20000;
  /// Stop when every Ritz residual is below tol * largest eigenvalue.
  double tolerance = 1e-13;
};

struct PcaModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd components;  // k x dim, rows orthonormal
  Eigen::VectorXd explained_variance;  // non-increasing
  int iterations = 0;
  int rank = 0;

  Eigen::VectorXd project(const BowVector& v) const;
  nlohmann::json to_json(const Vocabulary* vocab = nullptr) const;
};

/// Principal components of the sample covariance (1 / (n - 1)) by block
/// subspace iteration with Rayleigh-Ritz on the sparse data; the dense
/// covariance is never formed. Component signs make the entry of largest
/// magnitude positive.
PcaModel fit_pca(const std::vector<BowVector>& vectors, std::size_t dim, std::size_t k, const PcaOptions& options = {});

struct ScatterRow {
  std::string doc_id;
  double x = 0;
  double y = 0;
};

/// pair -> tag -> rows, rows in input order.
using ScatterTables = std::map<std::pair<int, int>, std::map<std::string, std::vector<ScatterRow>>>;

ScatterTables project_pairs(const PcaModel& model, const std::vector<BowVector>& vectors,
                            const std::vector<std::pair<int, int>>& pairs);

/// `pc{i+1}_pc{j+1}__{tag}.csv` with header `doc_id,x,y`; component numbers
/// in file names are 1-based. Returns the written paths.
std::vector<std::filesystem::path> write_scatter_csvs(const ScatterTables& tables, const std::filesystem::path& dir);
/// One SVG per pair with every tag overlaid.
std::vector<std::filesystem::path> write_scatter_svgs(const ScatterTables& tables, const std::filesystem::path& dir);

/// (0,1), (1,2), ... (k-2,k-1)
std::vector<std::pair<int, int>> consecutive_pairs(std::size_t k);

struct CorpusDocument {
  std::string doc_id;
  std::string text;
};

/// Reads one corpus: a built corpus root (manifest.jsonl; the text of a
/// record is its word texts joined by spaces), a directory of *.txt files,
/// or a JSONL file of {"doc_id", "text"} objects.
std::vector<CorpusDocument> load_corpus(const std::filesystem::path& path);

/// Seeded sample of n documents in their original order; all when n is 0
/// or at least the corpus size.
std::vector<CorpusDocument> sample_documents(std::vector<CorpusDocument> docs, std::size_t n, std::uint64_t seed);

struct AnalyzeConfig {
  std::vector<std::pair<std::string, std::filesystem::path>> corpora;  // tag, path
  std::size_t vocab_cap = 10000;
  std::size_t components = 10;
  std::size_t samples_per_corpus = 0;
  std::uint64_t seed = 0;
  std::filesystem::path out;
  bool svg = false;
  std::optional<std::filesystem::path> stopwords;  // replaces the bundled list
  PcaOptions pca;
};

struct AnalyzeResult {
  std::size_t documents = 0;
  std::size_t vocab_size = 0;
  std::vector<std::filesystem::path> csv_files;
  std::vector<std::filesystem::path> svg_files;
  PcaModel model;
};

/// Vocabulary over all sampled documents, PCA, consecutive-pair scatter
/// tables; writes model.json, vocab.txt and the tables under `out`.
AnalyzeResult run_analysis(const AnalyzeConfig& config);

}  // namespace vicorpus::analysis
