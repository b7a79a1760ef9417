#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vicorpus/error.hpp"
#include "vicorpus/ingest.hpp"
#include "vicorpus/report.hpp"

namespace vicorpus::fonts {
class FontCatalog;
}

namespace vicorpus::browser {

/// Page can be retried on a fresh browser.
class RetriableError : public Error {
 public:
  using Error::Error;
};
class NavigationTimeout : public RetriableError {
 public:
  using RetriableError::RetriableError;
};
/// The browser process or its connection died.
class BrowserCrashed : public RetriableError {
 public:
  using RetriableError::RetriableError;
};
/// The page itself is unusable (script error, oversized report); not retried.
class PageError : public Error {
 public:
  using Error::Error;
};

struct RenderConfig {
  int viewport_width = 1280;
  /// Layout height before the page grows to its document height.
  int viewport_height = 800;
  double device_scale = 1.0;
  int nav_timeout_ms = 30000;
  int eval_timeout_ms = 30000;
  bool block_remote_resources = true;
  int max_page_height_px = 20000;
  /// Fixed wait after load and after font application.
  int settle_ms = 0;
  std::filesystem::path browser_bin;  // empty: default_browser_bin()
  /// Remote-debugging port of worker i is port_base + i; 0 lets the browser pick.
  int port_base = 0;

  /// Throws UsageError.
  void validate() const;
};

/// $VICORPUS_BROWSER_BIN, else the bundled third_party build.
std::filesystem::path default_browser_bin();

struct Timings {
  double nav_ms = 0;
  double instrument_ms = 0;
  double capture_ms = 0;
};

struct CaptureResult {
  std::string doc_id;
  std::vector<std::uint8_t> image;  // PNG
  int image_width = 0;
  int image_height = 0;
  /// Rects in image pixels (CSS pixels x device_scale), not yet normalized.
  report::InstrumentationReport report;
  Timings timings;
};

/// Scales every rect, the font sizes and the page size by `s`.
void scale_report(report::InstrumentationReport& r, double s);

/// A running browser process with its remote-debugging endpoint.
class BrowserProcess {
 public:
  BrowserProcess(const std::filesystem::path& binary, int port, std::chrono::milliseconds startup_timeout);
  ~BrowserProcess();
  BrowserProcess(const BrowserProcess&) = delete;
  BrowserProcess& operator=(const BrowserProcess&) = delete;

  int port() const { return port_; }
  /// Path part of the browser websocket URL, e.g. /devtools/browser/<id>.
  const std::string& ws_path() const { return ws_path_; }
  bool alive();
  int pid() const { return pid_; }

 private:
  int pid_ = -1;
  int port_ = 0;
  std::string ws_path_;
  std::filesystem::path profile_dir_;

  void shutdown();
};

/// JSON-RPC over one websocket, with flattened target sessions. Single
/// threaded: events are delivered to `on_event` while a call waits.
class CdpClient {
 public:
  using Clock = std::chrono::steady_clock;
  using EventHandler = std::function<void(const std::string& method, const nlohmann::json& params,
                                          const std::string& session_id)>;

  CdpClient(const std::string& host, int port, const std::string& path);
  ~CdpClient();
  CdpClient(const CdpClient&) = delete;
  CdpClient& operator=(const CdpClient&) = delete;

  void on_event(EventHandler handler) { handler_ = std::move(handler); }

  /// Sends a command and waits for its result. Throws PageError on a
  /// protocol error response, NavigationTimeout past the deadline (the
  /// connection is unusable afterwards) and BrowserCrashed on I/O failure.
  nlohmann::json call(const std::string& method, const nlohmann::json& params, const std::string& session_id,
                      Clock::time_point deadline);
  /// Fire and forget; the response is discarded when it arrives.
  void send(const std::string& method, const nlohmann::json& params, const std::string& session_id);
  /// Pumps messages until `done()` holds.
  void wait_until(const std::function<bool()>& done, Clock::time_point deadline, const char* what);

  bool broken() const { return broken_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  EventHandler handler_;
  std::int64_t next_id_ = 1;
  bool broken_ = false;

  void pump_one(Clock::time_point deadline, const char* what);
  std::int64_t write(const std::string& method, const nlohmann::json& params, const std::string& session_id);
};

/// Anything that turns a document into a capture; the pool only sees this.
class Renderer {
 public:
  virtual ~Renderer() = default;
  virtual CaptureResult render(const ingest::SourceDocument& doc, std::uint64_t seed) = 0;
};

struct SessionOptions {
  RenderConfig config;
  /// Candidate families; empty disables font assignment.
  std::vector<std::string> families;
  /// Used when no candidate covers a paragraph; defaults to families[0].
  std::string default_family;
  /// Worker number, for the port offset.
  int worker = 0;
};

/// One browser and one page. Restarts the browser on demand.
class BrowserSession : public Renderer {
 public:
  BrowserSession(SessionOptions options, const fonts::FontCatalog* catalog);
  ~BrowserSession() override;

  CaptureResult render(const ingest::SourceDocument& doc, std::uint64_t seed) override;
  /// Kills the browser; the next render starts a new one.
  void restart();

 private:
  struct State;
  SessionOptions options_;
  const fonts::FontCatalog* catalog_;
  std::unique_ptr<State> state_;

  void start();
};

struct PoolOptions {
  int workers = 1;
  std::uint64_t run_seed = 0;
  /// Attempts after a retriable failure, each on a restarted renderer.
  int retries = 1;
  /// Abort once more than this many documents failed; negative: never.
  long max_failures = -1;
};

struct JobOutcome {
  ingest::SourceDocument doc;
  std::uint64_t seed = 0;
  int worker = 0;
  int attempts = 0;
  std::optional<CaptureResult> capture;
  std::string error;  // set when capture is empty
};

struct PoolStats {
  std::uint64_t completed = 0;
  std::uint64_t failed = 0;
  std::uint64_t retried = 0;
  bool aborted = false;
};

using RendererFactory = std::function<std::unique_ptr<Renderer>(int worker)>;
/// Called from worker threads, in completion order; must be thread-safe.
/// Exceptions escaping the sink count as document failures.
using OutcomeSink = std::function<void(JobOutcome&&)>;

/// Each worker owns one renderer and pulls documents from the shared stream.
/// Seeds come from derive_seed(run_seed, doc_id), so outputs do not depend
/// on scheduling. Throws Error when the failure quota is exceeded.
PoolStats pool_run(ingest::DocumentStream& stream, const PoolOptions& options, const RendererFactory& factory,
                   const OutcomeSink& sink);

}  // namespace vicorpus::browser
