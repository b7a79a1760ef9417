#include <chrono>
#include <ctime>
#include <mutex>

#include <spdlog/spdlog.h>

#include "vicorpus/error.hpp"
#include "vicorpus/font_catalog.hpp"
#include "vicorpus/image.hpp"
#include "vicorpus/pipeline.hpp"

using nlohmann::json;

namespace vicorpus::pipeline {

std::string generator_version() { return VICORPUS_VERSION; }

ingest::StreamPtr open_input(const BuildConfig& c) {
  ingest::check_lang(c.lang);
  ingest::StreamPtr s;
  if (c.input_format == "dir") {
    s = ingest::iter_directory(c.input, c.lang);
    if (c.shard) s = ingest::shard(std::move(s), *c.shard);
  } else if (c.input_format == "ndjson") {
    ingest::NdjsonOptions o = c.ndjson;
    o.lang = c.lang;
    o.strict = c.strict;
    o.shard = c.shard;
    s = ingest::iter_ndjson(c.input, o);
  } else {
    throw UsageError("unknown input format '" + c.input_format + "' (dir, ndjson)");
  }
  if (c.limit > 0) s = ingest::limit(std::move(s), c.limit);
  return ingest::unique_ids(std::move(s), c.strict);
}

dataset::DocumentRecord make_record(const ingest::SourceDocument& doc, std::uint64_t seed,
                                    report::InstrumentationReport rep, const fonts::FontCatalog* catalog,
                                    const annotate::BuildOptions& options, annotate::BuildStats* stats) {
  report::normalize(rep);
  auto ann = annotate::build(rep, catalog, options);
  if (stats != nullptr) *stats = ann.stats;
  dataset::DocumentRecord r;
  r.doc_id = doc.doc_id;
  r.lang = doc.lang;
  r.width = rep.page_width;
  r.height = rep.page_height;
  r.seed = seed;
  r.generator_version = generator_version();
  r.truncated = rep.truncated;
  r.font_assignment = rep.font_assignment;
  r.chars = std::move(ann.chars);
  r.words = std::move(ann.words);
  r.lines = std::move(ann.lines);
  r.paragraphs = std::move(ann.paragraphs);
  r.regions = std::move(ann.regions);
  const auto problems = dataset::record_invariant_violations(r);
  if (!problems.empty()) throw Error(doc.doc_id + ": built record is invalid: " + problems.front());
  return r;
}

namespace {

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Counters {
  std::mutex mutex;
  std::uint64_t render_failures = 0;
  std::uint64_t write_failures = 0;
  std::uint64_t truncated = 0;
  std::uint64_t chars = 0;
  std::uint64_t loose_fallback = 0;
  std::uint64_t unknown_family = 0;
  std::uint64_t metric_mismatch = 0;
  std::uint64_t latex_words = 0;
  report::RemovalCounts removed;
  json timings = json::array();
};

}  // namespace

BuildSummary run_build(const BuildConfig& config, const fonts::FontCatalog* catalog, browser::RendererFactory factory) {
  config.render.validate();
  if (config.workers < 1) throw UsageError("workers must be at least 1");
  const std::string started = utc_now();
  const auto t0 = std::chrono::steady_clock::now();
  auto stream = open_input(config);

  std::vector<std::string> families = config.families;
  if (families.empty() && catalog != nullptr) families = catalog->families();
  if (!factory) {
    factory = [&](int worker) -> std::unique_ptr<browser::Renderer> {
      browser::SessionOptions o;
      o.config = config.render;
      o.families = families;
      o.default_family = config.default_family;
      o.worker = worker;
      return std::make_unique<browser::BrowserSession>(std::move(o), catalog);
    };
  }

  std::filesystem::create_directories(config.out);
  dataset::DatasetWriter writer(config.out, config.writer);
  Counters counters;

  auto sink = [&](browser::JobOutcome&& outcome) {
    if (!outcome.capture) {
      std::lock_guard lock(counters.mutex);
      ++counters.render_failures;
      return;
    }
    auto& cap = *outcome.capture;
    try {
      annotate::BuildStats stats;
      const image::Image img = image::decode(cap.image);
      auto& rep = cap.report;
      // Reports are in image pixels; beyond rounding a mismatch means the capture is unusable.
      if (std::abs(img.width - rep.page_width) > 1 || std::abs(img.height - rep.page_height) > 1) {
        throw Error(outcome.doc.doc_id + ": screenshot is " + std::to_string(img.width) + "x" +
                    std::to_string(img.height) + " but the page is " + std::to_string(rep.page_width) + "x" +
                    std::to_string(rep.page_height));
      }
      rep.page_width = img.width;
      rep.page_height = img.height;
      const report::RemovalCounts removed = rep.removed;
      auto record = make_record(outcome.doc, outcome.seed, std::move(rep), catalog, config.annotate, &stats);
      const bool truncated = record.truncated;
      const auto n_chars = record.chars.size();
      writer.write(std::move(record), img, outcome.doc.sequence);
      std::lock_guard lock(counters.mutex);
      counters.truncated += truncated ? 1 : 0;
      counters.chars += n_chars;
      counters.loose_fallback += stats.loose_fallback;
      counters.unknown_family += stats.unknown_family;
      counters.metric_mismatch += stats.metric_mismatch;
      counters.latex_words += stats.latex_words;
      counters.removed.pseudo += removed.pseudo;
      counters.removed.oversize += removed.oversize;
      counters.removed.invisible += removed.invisible;
      counters.removed.offscreen += removed.offscreen;
      counters.removed.placeholder += removed.placeholder;
      counters.timings.push_back({{"doc_id", outcome.doc.doc_id},
                                  {"nav_ms", cap.timings.nav_ms},
                                  {"instrument_ms", cap.timings.instrument_ms},
                                  {"capture_ms", cap.timings.capture_ms}});
    } catch (const std::exception& e) {
      spdlog::error("{}", e.what());
      std::lock_guard lock(counters.mutex);
      ++counters.write_failures;
    }
  };

  browser::PoolOptions pool;
  pool.workers = config.workers;
  pool.run_seed = config.run_seed;
  pool.retries = config.retries;
  pool.max_failures = config.failure_quota;
  const auto stats = browser::pool_run(*stream, pool, factory, sink);

  const auto& in = stream->stats();
  BuildSummary summary;
  summary.records = writer.written().size();
  summary.errors = in.errors + in.malformed + counters.render_failures + counters.write_failures;
  summary.counters = {{"ingest_read", in.read},
                      {"ingest_errors", in.errors},
                      {"ingest_skipped", in.skipped},
                      {"ingest_malformed", in.malformed},
                      {"ingest_renamed", in.renamed},
                      {"render_failures", counters.render_failures},
                      {"render_retries", stats.retried},
                      {"write_failures", counters.write_failures},
                      {"errors", summary.errors},
                      {"truncated_pages", counters.truncated},
                      {"chars", counters.chars},
                      {"loose_fallback_chars", counters.loose_fallback},
                      {"unknown_family_chars", counters.unknown_family},
                      {"metric_mismatch_chars", counters.metric_mismatch},
                      {"latex_words", counters.latex_words},
                      {"removed",
                       {{"pseudo", counters.removed.pseudo},
                        {"oversize", counters.removed.oversize},
                        {"invisible", counters.removed.invisible},
                        {"offscreen", counters.removed.offscreen},
                        {"placeholder", counters.removed.placeholder}}}};
  summary.ok = static_cast<long>(summary.errors) <= config.max_errors;

  dataset::RunInfo run;
  run.run_seed = config.run_seed;
  run.generator_version = generator_version();
  run.started_at = started;
  run.config = config.echo;
  run.counters = summary.counters;
  writer.finalize(run);

  // Wall-clock measurements stay out of the manifest so it remains reproducible.
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::sort(counters.timings.begin(), counters.timings.end(),
            [](const json& a, const json& b) { return a["doc_id"] < b["doc_id"]; });
  json timings{{"started_at", started},
               {"wall_seconds", seconds},
               {"workers", config.workers},
               {"docs_per_second", seconds > 0 ? static_cast<double>(summary.records) / seconds : 0.0},
               {"documents", counters.timings}};
  dataset::write_file_atomic(config.out / "timings.json", timings.dump(1) + "\n");
  spdlog::info("wrote {} records ({} errors) in {:.1f}s", summary.records, summary.errors, seconds);
  return summary;
}

}  // namespace vicorpus::pipeline
