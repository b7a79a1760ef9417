#include "vicorpus/ingest.hpp"

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <spdlog/spdlog.h>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "vicorpus/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace vicorpus::ingest {

ShardSpec ShardSpec::parse(const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) throw UsageError("shard spec must look like i/n: " + text);
  ShardSpec spec;
  try {
    std::size_t used = 0;
    const long i = std::stol(text.substr(0, slash), &used);
    if (used != slash) throw std::invalid_argument("index");
    const std::string rest = text.substr(slash + 1);
    const long n = std::stol(rest, &used);
    if (used != rest.size()) throw std::invalid_argument("count");
    if (n < 1 || i < 0 || i >= n) throw std::out_of_range("range");
    spec.index = static_cast<std::uint32_t>(i);
    spec.count = static_cast<std::uint32_t>(n);
  } catch (const std::logic_error&) {
    throw UsageError("invalid shard spec '" + text + "': need 0 <= i < n");
  }
  return spec;
}

void check_lang(const std::string& lang) {
  static const std::regex pattern("[a-z]{2,3}");
  if (!std::regex_match(lang, pattern)) throw UsageError("language code must match [a-z]{2,3}: " + lang);
}

namespace {

std::string extract_title(const std::string& html) {
  auto lower_find = [&](const std::string& needle, std::size_t from) {
    auto it = std::search(html.begin() + static_cast<std::ptrdiff_t>(from), html.end(), needle.begin(),
                          needle.end(), [](char a, char b) {
                            return std::tolower(static_cast<unsigned char>(a)) == b;
                          });
    return it == html.end() ? std::string::npos : static_cast<std::size_t>(it - html.begin());
  };
  const auto open = lower_find("<title", 0);
  if (open == std::string::npos) return {};
  const auto gt = html.find('>', open);
  if (gt == std::string::npos) return {};
  const auto close = lower_find("</title", gt);
  if (close == std::string::npos) return {};
  std::string title = html.substr(gt + 1, close - gt - 1);
  const auto b = title.find_first_not_of(" \t\r\n");
  const auto e = title.find_last_not_of(" \t\r\n");
  return b == std::string::npos ? std::string{} : title.substr(b, e - b + 1);
}

bool has_html_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".html" || ext == ".htm";
}

class DirectoryStream final : public DocumentStream {
 public:
  DirectoryStream(const fs::path& root, std::string lang) : root_(root), lang_(std::move(lang)) {
    check_lang(lang_);
    std::error_code ec;
    if (!fs::is_directory(root_, ec)) throw InputError("input directory not readable: " + root_.string());
    fs::recursive_directory_iterator it(root_, fs::directory_options::none, ec);
    if (ec) throw InputError("input directory not readable: " + root_.string() + ": " + ec.message());
    for (const fs::recursive_directory_iterator end; it != end; it.increment(ec)) {
      if (ec) throw InputError("error walking " + root_.string() + ": " + ec.message());
      const auto& entry = *it;
      std::error_code dir_ec;
      if (entry.is_directory(dir_ec)) continue;
      if (has_html_extension(entry.path())) {
        files_.push_back(fs::relative(entry.path(), root_).generic_string());
      }
    }
    std::sort(files_.begin(), files_.end());
  }

  std::optional<SourceDocument> next() override {
    while (pos_ < files_.size()) {
      const std::string& rel = files_[pos_++];
      ++stats_.read;
      const fs::path full = root_ / rel;
      std::ifstream in(full, std::ios::binary);
      std::ostringstream buf;
      if (in) buf << in.rdbuf();
      if (!in || in.bad()) {
        ++stats_.errors;
        spdlog::warn("skipping unreadable file {}", full.string());
        continue;
      }
      std::string html = buf.str();
      if (html.empty()) {
        ++stats_.skipped;
        spdlog::warn("skipping empty file {}", full.string());
        continue;
      }
      SourceDocument doc;
      doc.doc_id = rel;
      doc.title = extract_title(html);
      doc.lang = lang_;
      doc.html = std::move(html);
      doc.source_uri = "file://" + fs::absolute(full).generic_string();
      return doc;
    }
    return std::nullopt;
  }

  const IngestStats& stats() const override { return stats_; }

 private:
  fs::path root_;
  std::string lang_;
  std::vector<std::string> files_;
  std::size_t pos_ = 0;
  IngestStats stats_;
};

/// Line reader over a plain or gzip-compressed file.
class LineReader {
 public:
  explicit LineReader(const fs::path& path) {
    unsigned char magic[2] = {0, 0};
    {
      std::ifstream probe(path, std::ios::binary);
      if (!probe) throw InputError("cannot open " + path.string());
      probe.read(reinterpret_cast<char*>(magic), 2);
    }
    if (magic[0] == 0x1F && magic[1] == 0x8B) {
      gz_ = gzopen(path.c_str(), "rb");
      if (gz_ == nullptr) throw InputError("cannot open gzip stream " + path.string());
      gzbuffer(gz_, 1 << 17);
    } else {
      plain_.open(path, std::ios::binary);
      if (!plain_) throw InputError("cannot open " + path.string());
    }
  }
  ~LineReader() {
    if (gz_ != nullptr) gzclose(gz_);
  }
  LineReader(const LineReader&) = delete;
  LineReader& operator=(const LineReader&) = delete;

  bool getline(std::string& line) {
    line.clear();
    if (gz_ == nullptr) {
      if (!std::getline(plain_, line)) return false;
    } else {
      char chunk[8192];
      bool any = false;
      while (gzgets(gz_, chunk, sizeof chunk) != nullptr) {
        any = true;
        line.append(chunk);
        if (!line.empty() && line.back() == '\n') break;
      }
      if (!any) {
        int err = Z_OK;
        gzerror(gz_, &err);
        if (err != Z_OK && err != Z_STREAM_END) throw InputError("corrupt gzip stream");
        return false;
      }
      if (!line.empty() && line.back() == '\n') line.pop_back();
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }

 private:
  gzFile gz_ = nullptr;
  std::ifstream plain_;
};

const json* resolve_path(const json& root, const std::string& path) {
  const json* cur = &root;
  std::size_t start = 0;
  while (start <= path.size()) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (cur->is_object()) {
      auto it = cur->find(key);
      if (it == cur->end()) return nullptr;
      cur = &*it;
    } else if (cur->is_array()) {
      if (key.empty() || !std::all_of(key.begin(), key.end(), [](unsigned char c) { return std::isdigit(c); }))
        return nullptr;
      const auto idx = std::stoull(key);
      if (idx >= cur->size()) return nullptr;
      cur = &(*cur)[idx];
    } else {
      return nullptr;
    }
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return cur;
}

std::optional<std::string> scalar_string(const json* v) {
  if (v == nullptr) return std::nullopt;
  if (v->is_string()) return v->get<std::string>();
  if (v->is_number_integer()) return std::to_string(v->get<long long>());
  if (v->is_number_unsigned()) return std::to_string(v->get<unsigned long long>());
  return std::nullopt;
}

class NdjsonStream final : public DocumentStream {
 public:
  NdjsonStream(const fs::path& file, NdjsonOptions options)
      : file_(file), options_(std::move(options)), reader_(file) {
    check_lang(options_.lang);
  }

  std::optional<SourceDocument> next() override {
    std::string line;
    while (reader_.getline(line)) {
      const std::uint64_t line_no = line_no_++;
      if (options_.shard && !options_.shard->selects(line_no)) continue;
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      ++stats_.read;
      json record = json::parse(line, nullptr, false);
      if (record.is_discarded() || !record.is_object()) {
        ++stats_.malformed;
        if (options_.strict) {
          throw InputError(file_.string() + ":" + std::to_string(line_no + 1) + ": malformed JSON line");
        }
        spdlog::warn("{}:{}: skipping malformed JSON line", file_.string(), line_no + 1);
        continue;
      }
      auto html = scalar_string(resolve_path(record, options_.html_field));
      auto id = scalar_string(resolve_path(record, options_.id_field));
      if (!html || !id || html->empty() || id->empty()) {
        ++stats_.skipped;
        continue;
      }
      SourceDocument doc;
      doc.doc_id = std::move(*id);
      doc.html = std::move(*html);
      doc.title = scalar_string(resolve_path(record, options_.title_field)).value_or("");
      doc.lang = options_.lang;
      doc.source_uri = file_.generic_string() + "#L" + std::to_string(line_no + 1);
      return doc;
    }
    return std::nullopt;
  }

  const IngestStats& stats() const override { return stats_; }

 private:
  fs::path file_;
  NdjsonOptions options_;
  LineReader reader_;
  std::uint64_t line_no_ = 0;
  IngestStats stats_;
};

class ShardStream final : public DocumentStream {
 public:
  ShardStream(StreamPtr inner, ShardSpec spec) : inner_(std::move(inner)), spec_(spec) {
    if (spec_.count < 1 || spec_.index >= spec_.count) throw UsageError("invalid shard spec");
  }
  std::optional<SourceDocument> next() override {
    while (auto doc = inner_->next()) {
      if (spec_.selects(position_++)) return doc;
    }
    return std::nullopt;
  }
  const IngestStats& stats() const override { return inner_->stats(); }

 private:
  StreamPtr inner_;
  ShardSpec spec_;
  std::uint64_t position_ = 0;
};

class LimitStream final : public DocumentStream {
 public:
  LimitStream(StreamPtr inner, std::uint64_t max) : inner_(std::move(inner)), remaining_(max) {}
  std::optional<SourceDocument> next() override {
    if (remaining_ == 0) return std::nullopt;
    auto doc = inner_->next();
    if (doc) --remaining_;
    return doc;
  }
  const IngestStats& stats() const override { return inner_->stats(); }

 private:
  StreamPtr inner_;
  std::uint64_t remaining_;
};

class UniqueIdStream final : public DocumentStream {
 public:
  UniqueIdStream(StreamPtr inner, bool strict) : inner_(std::move(inner)), strict_(strict) {}
  std::optional<SourceDocument> next() override {
    auto doc = inner_->next();
    if (!doc) return doc;
    if (!seen_.insert(doc->doc_id).second) {
      if (strict_) throw InputError("duplicate doc_id: " + doc->doc_id);
      for (int suffix = 2;; ++suffix) {
        std::string candidate = doc->doc_id + "-" + std::to_string(suffix);
        if (seen_.insert(candidate).second) {
          spdlog::warn("doc_id {} already used; renamed to {}", doc->doc_id, candidate);
          doc->doc_id = std::move(candidate);
          break;
        }
      }
      ++renamed_;
    }
    doc->sequence = sequence_++;
    stats_ = inner_->stats();
    stats_.renamed = renamed_;
    return doc;
  }
  const IngestStats& stats() const override {
    stats_ = inner_->stats();
    stats_.renamed = renamed_;
    return stats_;
  }

 private:
  StreamPtr inner_;
  bool strict_;
  std::unordered_set<std::string> seen_;
  std::uint64_t sequence_ = 0;
  std::uint64_t renamed_ = 0;
  mutable IngestStats stats_;
};

}  // namespace

StreamPtr iter_directory(const fs::path& root, const std::string& lang) {
  return std::make_unique<DirectoryStream>(root, lang);
}

StreamPtr iter_ndjson(const fs::path& file, const NdjsonOptions& options) {
  return std::make_unique<NdjsonStream>(file, options);
}

StreamPtr shard(StreamPtr inner, ShardSpec spec) { return std::make_unique<ShardStream>(std::move(inner), spec); }

StreamPtr limit(StreamPtr inner, std::uint64_t max_documents) {
  return std::make_unique<LimitStream>(std::move(inner), max_documents);
}

StreamPtr unique_ids(StreamPtr inner, bool strict) {
  return std::make_unique<UniqueIdStream>(std::move(inner), strict);
}

std::optional<std::string> lookup_dotted(const std::string& json_text, const std::string& path) {
  const json root = json::parse(json_text, nullptr, false);
  if (root.is_discarded()) return std::nullopt;
  return scalar_string(resolve_path(root, path));
}

}  // namespace vicorpus::ingest
