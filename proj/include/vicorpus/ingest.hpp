#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace vicorpus::ingest {

struct SourceDocument {
  std::string doc_id;
  std::string title;
  std::string lang;
  std::string html;
  std::string source_uri;
  /// Position in the emitted stream (after sharding and limits).
  std::uint64_t sequence = 0;
};

/// Counters shared by every stage of one ingest chain.
struct IngestStats {
  std::uint64_t read = 0;       // raw items seen by the source
  std::uint64_t errors = 0;     // unreadable files
  std::uint64_t skipped = 0;    // records missing fields or with empty html
  std::uint64_t malformed = 0;  // unparseable NDJSON lines
  std::uint64_t renamed = 0;    // doc_id collisions resolved by suffixing
};

struct ShardSpec {
  std::uint32_t index = 0;
  std::uint32_t count = 1;

  /// Parses "i/n"; throws UsageError unless 0 <= i < n.
  static ShardSpec parse(const std::string& text);
  bool selects(std::uint64_t position) const { return position % count == index; }
};

/// Throws UsageError unless `lang` matches [a-z]{2,3}.
void check_lang(const std::string& lang);

/// Single-producer, pull-based document stream. Not thread-safe; hand the
/// yielded documents to workers instead of sharing the stream.
class DocumentStream {
 public:
  virtual ~DocumentStream() = default;
  virtual std::optional<SourceDocument> next() = 0;
  virtual const IngestStats& stats() const = 0;
};

using StreamPtr = std::unique_ptr<DocumentStream>;

/// One document per `*.html` / `*.htm` file below `root`, in lexicographic
/// order of the relative path, which also becomes the doc_id.
StreamPtr iter_directory(const std::filesystem::path& root, const std::string& lang);

struct NdjsonOptions {
  std::string html_field = "html";
  std::string id_field = "id";
  std::string title_field = "title";
  std::string lang = "en";
  bool strict = false;
  /// Applied to raw line numbers so other shards' lines are never parsed.
  std::optional<ShardSpec> shard;
};

/// Newline-delimited JSON, plain or gzip (detected by magic bytes).
StreamPtr iter_ndjson(const std::filesystem::path& file, const NdjsonOptions& options);

/// Keeps the items whose position in `inner` is congruent to the shard index.
StreamPtr shard(StreamPtr inner, ShardSpec spec);
StreamPtr limit(StreamPtr inner, std::uint64_t max_documents);
/// Resolves doc_id collisions: fatal when strict, `-2`, `-3`, ... otherwise.
/// Also assigns `sequence`.
StreamPtr unique_ids(StreamPtr inner, bool strict);

/// Resolves a dotted key path (`a.b.0.c`) inside a JSON text value.
/// Exposed for tests; returns nullopt when the path is missing or not a
/// string/number.
std::optional<std::string> lookup_dotted(const std::string& json_text, const std::string& path);

}  // namespace vicorpus::ingest
