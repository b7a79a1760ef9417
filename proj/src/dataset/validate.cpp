#include <fstream>
#include <set>
#include <sstream>

#include "vicorpus/dataset.hpp"
#include "vicorpus/error.hpp"
#include "vicorpus/hash.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace vicorpus::dataset {

namespace {

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

ValidationReport validate_corpus(const fs::path& root, const ValidationOptions& options) {
  ValidationReport rep;
  auto violate = [&](std::string where, std::string what) { rep.violations.push_back({std::move(where), std::move(what)}); };

  const fs::path manifest = root / "manifest.jsonl";
  std::ifstream in(manifest);
  if (!in) {
    violate("manifest.jsonl", "missing or unreadable");
    return rep;
  }

  std::vector<json> records;
  std::optional<json> summary;
  bool saw_run = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      violate("manifest.jsonl:" + std::to_string(line_no), std::string("unparseable: ") + e.what());
      continue;
    }
    const std::string type = j.value("type", "");
    if (type == "run") saw_run = true;
    else if (type == "record") records.push_back(std::move(j));
    else if (type == "summary") summary = std::move(j);
    else violate("manifest.jsonl:" + std::to_string(line_no), "unknown line type '" + type + "'");
  }
  if (!saw_run) violate("manifest.jsonl", "no run line");
  if (!summary) {
    violate("manifest.jsonl", "no summary line");
  } else {
    const auto claimed = summary->value("records", std::uint64_t{0});
    if (claimed != records.size()) {
      violate("manifest.jsonl", "summary claims " + std::to_string(claimed) + " records, manifest lists " +
                                    std::to_string(records.size()));
    }
    std::uint64_t shard_total = 0;
    const json shards = summary->value("shards", json::object());
    for (const auto& [name, s] : shards.items()) {
      const auto n = s.value("records", std::uint64_t{0});
      shard_total += n;
      if (s.contains("files") && s["files"].size() != n) {
        violate("manifest.jsonl", "shard " + name + " lists " + std::to_string(s["files"].size()) + " files but counts " +
                                      std::to_string(n));
      }
    }
    if (shard_total != records.size()) {
      violate("manifest.jsonl", "shard counts sum to " + std::to_string(shard_total) + ", expected " +
                                    std::to_string(records.size()));
    }
  }

  std::set<std::string> listed;
  std::set<std::string> ids;
  for (const auto& m : records) {
    const std::string annot_rel = m.value("annotation", "");
    const std::string image_rel = m.value("image", "");
    const std::string doc_id = m.value("doc_id", "");
    listed.insert(annot_rel);
    if (!ids.insert(doc_id).second) violate(annot_rel, "duplicate doc_id '" + doc_id + "'");
    ++rep.records_checked;

    const fs::path annot = root / annot_rel;
    if (annot_rel.empty() || !fs::is_regular_file(annot)) {
      violate(annot_rel, "annotation file missing");
      continue;
    }
    const std::string text = read_text(annot);
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      violate(annot_rel, std::string("unparseable JSON: ") + e.what());
      continue;
    }
    const auto schema_errors = record_schema_violations(j);
    for (const auto& e : schema_errors) violate(annot_rel, "schema: " + e);
    if (!schema_errors.empty()) continue;

    const DocumentRecord r = record_from_json(j);
    for (const auto& e : record_invariant_violations(r)) violate(annot_rel, e);
    if (r.doc_id != doc_id) violate(annot_rel, "doc_id '" + r.doc_id + "' differs from manifest '" + doc_id + "'");
    if (r.image != image_rel) violate(annot_rel, "image path '" + r.image + "' differs from manifest '" + image_rel + "'");

    const fs::path img = root / r.image;
    if (!fs::is_regular_file(img)) {
      violate(r.image, "image file missing");
      continue;
    }
    try {
      const auto [w, h] = image::probe_size(img);
      if (w != r.width || h != r.height) {
        violate(annot_rel, "image is " + std::to_string(w) + "x" + std::to_string(h) + " but record says " +
                               std::to_string(r.width) + "x" + std::to_string(r.height));
      }
      if (options.verify_hashes) {
        if (sha256_hex(text) != m.value("annotation_sha256", "")) violate(annot_rel, "annotation hash differs from manifest");
        if (image::pixel_hash(image::read_file(img)) != m.value("pixel_sha256", "")) {
          violate(r.image, "pixel hash differs from manifest");
        }
      }
    } catch (const Error& e) {
      violate(r.image, std::string("unreadable image: ") + e.what());
    }
  }

  // Annotations on disk that the manifest does not know about.
  std::error_code ec;
  if (fs::is_directory(root / "annots", ec)) {
    for (auto it = fs::recursive_directory_iterator(root / "annots", ec); !ec && it != fs::recursive_directory_iterator();
         it.increment(ec)) {
      if (!it->is_regular_file() || it->path().extension() != ".json") continue;
      const std::string rel = it->path().lexically_relative(root).generic_string();
      if (!listed.count(rel)) violate(rel, "annotation not listed in manifest");
    }
  }
  return rep;
}

}  // namespace vicorpus::dataset
