#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vicorpus/annotation.hpp"
#include "vicorpus/image.hpp"

namespace vicorpus::dataset {

struct DocumentRecord {
  std::string doc_id;
  std::string lang;
  std::string image;  // relative to the corpus root
  int width = 0;
  int height = 0;
  std::uint64_t seed = 0;
  std::string generator_version;
  bool truncated = false;
  std::map<std::string, std::string> font_assignment;
  std::vector<annotate::CharAnn> chars;
  std::vector<annotate::WordAnn> words;
  std::vector<annotate::LineAnn> lines;
  std::vector<annotate::ParaAnn> paragraphs;
  std::vector<annotate::RegionAnn> regions;
};

nlohmann::json to_json(const DocumentRecord& r);
DocumentRecord record_from_json(const nlohmann::json& j);
/// Compact JSON, keys sorted, one trailing LF.
std::string serialize(const DocumentRecord& r);

std::vector<std::string> record_schema_violations(const nlohmann::json& j);

/// Invariants beyond the schema: quads axis-aligned and inside the image,
/// indices in range, every char/word/line in exactly one parent, loose
/// boxes nested in word, line and paragraph boxes.
std::vector<std::string> record_invariant_violations(const DocumentRecord& r);

/// Filename-safe form of a doc_id: bytes outside [A-Za-z0-9._-] become %XX.
std::string encode_doc_id(const std::string& doc_id);

struct WriterOptions {
  std::uint64_t shard_size = 1000;
  image::Format image_format = image::Format::png;
  int jpeg_quality = 90;
};

struct WrittenRecord {
  std::string doc_id;
  std::string lang;
  std::uint64_t sequence = 0;
  std::uint64_t shard = 0;
  std::string image;
  std::string annotation;
  std::string annotation_sha256;
  std::string pixel_sha256;
  int width = 0;
  int height = 0;
  bool truncated = false;
};

struct RunInfo {
  std::uint64_t run_seed = 0;
  std::string generator_version;
  std::string started_at;  // the only wall-clock value in the manifest
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json counters = nlohmann::json::object();
};

/// Writes images and annotations under `root`. write() is safe to call from
/// several threads; finalize() runs once, after every writer has returned.
class DatasetWriter {
 public:
  DatasetWriter(std::filesystem::path root, WriterOptions options);

  std::string shard_name(std::uint64_t sequence) const;
  /// `record.image`, `width` and `height` are filled in here.
  WrittenRecord write(DocumentRecord record, const image::Image& img, std::uint64_t sequence);
  /// Writes manifest.jsonl (run line, record lines by sequence, summary line).
  void finalize(const RunInfo& run);

  const std::filesystem::path& root() const { return root_; }
  std::vector<WrittenRecord> written() const;

 private:
  std::filesystem::path root_;
  WriterOptions options_;
  mutable std::mutex mutex_;
  std::vector<WrittenRecord> written_;
};

/// Writes `data` to `path` through a temporary file and rename, so a failed
/// write leaves nothing behind.
void write_file_atomic(const std::filesystem::path& path, std::string_view data);

struct Violation {
  std::string where;  // file or record the violation was found in
  std::string what;
};

struct ValidationOptions {
  /// Also recompute annotation and pixel hashes against the manifest.
  bool verify_hashes = false;
};

struct ValidationReport {
  std::size_t records_checked = 0;
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

ValidationReport validate_corpus(const std::filesystem::path& root, const ValidationOptions& options = {});

}  // namespace vicorpus::dataset
