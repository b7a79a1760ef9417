#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vicorpus/annotation.hpp"
#include "vicorpus/browser.hpp"
#include "vicorpus/dataset.hpp"
#include "vicorpus/ingest.hpp"

namespace vicorpus::pipeline {

struct BuildConfig {
  std::filesystem::path input;
  std::string input_format = "dir";  // dir | ndjson
  ingest::NdjsonOptions ndjson;      // lang and strict are copied from below
  std::string lang = "en";
  std::optional<ingest::ShardSpec> shard;
  std::uint64_t limit = 0;  // 0: no limit
  bool strict = false;

  std::filesystem::path out;
  dataset::WriterOptions writer;

  browser::RenderConfig render;
  int workers = 1;
  int retries = 1;
  /// Abort the run once more documents than this failed to render; negative: never.
  long failure_quota = -1;
  /// Exit status is success iff the error count is at most this.
  long max_errors = 0;

  /// Empty: every family in the catalog.
  std::vector<std::string> families;
  std::string default_family;

  annotate::BuildOptions annotate;
  std::uint64_t run_seed = 0;
  /// Effective configuration echoed into the manifest.
  nlohmann::json echo = nlohmann::json::object();
};

struct BuildSummary {
  std::uint64_t records = 0;
  std::uint64_t errors = 0;
  nlohmann::json counters = nlohmann::json::object();
  bool ok = false;  // errors <= max_errors
};

std::string generator_version();

/// Opens the configured input chain: source, shard, limit, unique ids.
ingest::StreamPtr open_input(const BuildConfig& config);

/// Turns one capture into a record. Throws Error when the result would
/// violate a record invariant.
dataset::DocumentRecord make_record(const ingest::SourceDocument& doc, std::uint64_t seed,
                                    report::InstrumentationReport report, const fonts::FontCatalog* catalog,
                                    const annotate::BuildOptions& options, annotate::BuildStats* stats = nullptr);

/// ingest -> browser pool -> annotation builder -> dataset writer; the
/// manifest is written last. `factory` defaults to browser sessions.
BuildSummary run_build(const BuildConfig& config, const fonts::FontCatalog* catalog,
                       browser::RendererFactory factory = {});

}  // namespace vicorpus::pipeline
