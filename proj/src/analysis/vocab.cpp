#include <algorithm>
#include <sstream>

#include "vicorpus/analysis.hpp"
#include "vicorpus/error.hpp"
#include "vicorpus/resources.hpp"
#include "vicorpus/utf8.hpp"

namespace vicorpus::analysis {

namespace {

bool is_word_char(char32_t cp) {
  if (cp < 0x80) return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
  if (utf8::is_space_or_control(cp)) return false;
  // Latin-1 punctuation and symbols, general punctuation, CJK symbols and
  // fullwidth ASCII punctuation.
  if ((cp >= 0xA1 && cp <= 0xBF) || cp == 0xD7 || cp == 0xF7) return false;
  if (cp >= 0x2000 && cp <= 0x2BFF) return false;
  if (cp >= 0x3000 && cp <= 0x303F) return false;
  if ((cp >= 0xFF01 && cp <= 0xFF0F) || (cp >= 0xFF1A && cp <= 0xFF20) || (cp >= 0xFF3B && cp <= 0xFF40) ||
      (cp >= 0xFF5B && cp <= 0xFF65)) {
    return false;
  }
  return cp != 0xFFFD;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char32_t cp : utf8::decode(text)) {
    if (is_word_char(cp)) {
      if (cp >= 'A' && cp <= 'Z') cp += 'a' - 'A';
      utf8::append(cur, cp);
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::unordered_set<std::string> parse_stopwords(std::string_view text) {
  std::unordered_set<std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    out.insert(line);
  }
  return out;
}

const std::unordered_set<std::string>& default_stopwords() {
  static const auto words = parse_stopwords(resources::stopwords_en());
  return words;
}

void VocabBuilder::add_tokens(const std::vector<std::string>& tokens) {
  for (const auto& t : tokens) ++counts_[t];
  total_ += tokens.size();
}

Vocabulary VocabBuilder::build(std::size_t cap, const std::unordered_set<std::string>& stopwords) const {
  if (total_ == 0) throw InputError("cannot build a vocabulary from an empty token stream");
  std::vector<std::pair<const std::string*, std::uint64_t>> ranked;
  ranked.reserve(counts_.size());
  for (const auto& [term, n] : counts_) {
    if (!stopwords.count(term)) ranked.emplace_back(&term, n);
  }
  const auto better = [](const auto& a, const auto& b) { return a.second != b.second ? a.second > b.second : *a.first < *b.first; };
  const std::size_t keep = std::min(cap, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end(), better);
  Vocabulary v;
  v.terms.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    v.index.emplace(*ranked[i].first, static_cast<int>(i));
    v.terms.push_back(*ranked[i].first);
  }
  return v;
}

Vocabulary build_vocab(const std::vector<std::string>& texts, std::size_t cap,
                       const std::unordered_set<std::string>& stopwords) {
  VocabBuilder b;
  for (const auto& t : texts) b.add_text(t);
  return b.build(cap, stopwords);
}

BowVector vectorize(std::string_view text, const Vocabulary& vocab, std::string doc_id, std::string tag) {
  std::map<int, double> counts;
  for (const auto& tok : tokenize(text)) {
    const int i = vocab.find(tok);
    if (i >= 0) counts[i] += 1;
  }
  BowVector v{std::move(doc_id), std::move(tag), {counts.begin(), counts.end()}};
  return v;
}

std::vector<std::pair<int, int>> consecutive_pairs(std::size_t k) {
  std::vector<std::pair<int, int>> out;
  for (std::size_t i = 0; i + 1 < k; ++i) out.emplace_back(static_cast<int>(i), static_cast<int>(i + 1));
  return out;
}

}  // namespace vicorpus::analysis
