#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "vicorpus/dataset.hpp"
#include "vicorpus/error.hpp"
#include "vicorpus/hash.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace vicorpus::dataset {

void write_file_atomic(const fs::path& path, std::string_view data) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".part";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.close();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error("write failed: " + path.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("cannot move " + tmp.string() + " into place: " + ec.message());
  }
}

DatasetWriter::DatasetWriter(fs::path root, WriterOptions options) : root_(std::move(root)), options_(options) {
  if (options_.shard_size == 0) throw UsageError("shard size must be positive");
  if (options_.jpeg_quality < 1 || options_.jpeg_quality > 100) throw UsageError("JPEG quality must be in 1..100");
  fs::create_directories(root_);
}

std::string DatasetWriter::shard_name(std::uint64_t sequence) const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%05llu", static_cast<unsigned long long>(sequence / options_.shard_size));
  return buf;
}

WrittenRecord DatasetWriter::write(DocumentRecord record, const image::Image& img, std::uint64_t sequence) {
  const std::string shard = shard_name(sequence);
  const std::string stem = encode_doc_id(record.doc_id);
  const std::string image_rel = "images/" + shard + "/" + stem + "." + image::extension(options_.image_format);
  const std::string annot_rel = "annots/" + shard + "/" + stem + ".json";
  record.image = image_rel;
  record.width = img.width;
  record.height = img.height;

  const auto encoded = image::encode(img, options_.image_format, options_.jpeg_quality);
  const std::string annotation = serialize(record);
  write_file_atomic(root_ / image_rel, std::string_view(reinterpret_cast<const char*>(encoded.data()), encoded.size()));
  try {
    write_file_atomic(root_ / annot_rel, annotation);
  } catch (...) {
    std::error_code ec;
    fs::remove(root_ / image_rel, ec);
    throw;
  }

  WrittenRecord w;
  w.doc_id = record.doc_id;
  w.lang = record.lang;
  w.sequence = sequence;
  w.shard = sequence / options_.shard_size;
  w.image = image_rel;
  w.annotation = annot_rel;
  w.annotation_sha256 = sha256_hex(annotation);
  w.pixel_sha256 = image::pixel_hash(img);
  w.width = img.width;
  w.height = img.height;
  w.truncated = record.truncated;
  std::lock_guard lock(mutex_);
  written_.push_back(w);
  return w;
}

std::vector<WrittenRecord> DatasetWriter::written() const {
  std::lock_guard lock(mutex_);
  return written_;
}

void DatasetWriter::finalize(const RunInfo& run) {
  auto records = written();
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.sequence < b.sequence; });

  std::string text;
  text += json{{"type", "run"},
               {"run_seed", run.run_seed},
               {"generator_version", run.generator_version},
               {"started_at", run.started_at},
               {"config", run.config}}
              .dump() +
          "\n";

  std::map<std::string, std::uint64_t> per_lang;
  std::map<std::string, json> shards;
  for (const auto& r : records) {
    text += json{{"type", "record"},
                 {"doc_id", r.doc_id},
                 {"lang", r.lang},
                 {"sequence", r.sequence},
                 {"shard", r.shard},
                 {"image", r.image},
                 {"annotation", r.annotation},
                 {"annotation_sha256", r.annotation_sha256},
                 {"pixel_sha256", r.pixel_sha256},
                 {"width", r.width},
                 {"height", r.height},
                 {"truncated", r.truncated}}
                .dump() +
            "\n";
    ++per_lang[r.lang];
    char name[32];
    std::snprintf(name, sizeof name, "%05llu", static_cast<unsigned long long>(r.shard));
    auto& s = shards[name];
    if (s.is_null()) s = {{"records", 0}, {"files", json::array()}};
    s["records"] = s["records"].get<std::uint64_t>() + 1;
    s["files"].push_back(r.annotation);
  }
  text += json{{"type", "summary"},
               {"records", records.size()},
               {"counts_per_language", per_lang},
               {"counters", run.counters},
               {"shards", shards}}
              .dump() +
          "\n";
  write_file_atomic(root_ / "manifest.jsonl", text);
}

}  // namespace vicorpus::dataset
