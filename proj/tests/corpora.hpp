#pragma once

// Synthetic text corpora with distinct topic mixtures, written as JSONL.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "test_support.hpp"

namespace corpora {

/// Pseudo-words "w<id>"; ids below `shared` are common to every corpus.
inline std::string word(int id) { return "w" + std::to_string(id); }

/// Writes `docs` documents for corpus number `which` to `path`. Each corpus
/// favours its own band of 400 topic words on top of a shared Zipf-like core.
inline void write_jsonl(const std::filesystem::path& path, int which, int docs, std::uint64_t seed) {
  test::Rng rng(seed + static_cast<std::uint64_t>(which) * 7919);
  std::ofstream out(path);
  const int shared = 600;
  for (int d = 0; d < docs; ++d) {
    std::string text;
    const int n = rng.integer(60, 160);
    for (int t = 0; t < n; ++t) {
      int id;
      if (rng.chance(0.55)) {
        // Zipf-ish over the shared core
        const double u = rng.uniform(0, 1);
        id = static_cast<int>(std::pow(static_cast<double>(shared), u)) - 1;
      } else {
        id = shared + which * 400 + rng.integer(0, 399);
      }
      if (!text.empty()) text += rng.chance(0.1) ? ". " : " ";
      text += word(id);
    }
    out << nlohmann::json{{"doc_id", "c" + std::to_string(which) + "-" + std::to_string(d)}, {"text", text}}.dump() << "\n";
  }
}

}  // namespace corpora
