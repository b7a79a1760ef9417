#include <atomic>
#include <mutex>
#include <thread>

#include <spdlog/spdlog.h>

#include "vicorpus/browser.hpp"
#include "vicorpus/seed.hpp"

namespace vicorpus::browser {

PoolStats pool_run(ingest::DocumentStream& stream, const PoolOptions& options, const RendererFactory& factory,
                   const OutcomeSink& sink) {
  if (options.workers < 1) throw UsageError("workers must be at least 1");
  std::mutex stream_mutex;
  std::atomic<std::uint64_t> completed{0}, failed{0}, retried{0};
  std::atomic<bool> abort{false};
  std::mutex error_mutex;
  std::exception_ptr fatal;

  auto next = [&]() -> std::optional<ingest::SourceDocument> {
    std::lock_guard lock(stream_mutex);
    if (abort) return std::nullopt;
    return stream.next();
  };
  auto record_failure = [&]() {
    const auto n = ++failed;
    if (options.max_failures >= 0 && n > static_cast<std::uint64_t>(options.max_failures)) abort = true;
  };

  auto worker = [&](int id) {
    std::unique_ptr<Renderer> renderer;
    try {
      while (auto doc = next()) {
        JobOutcome outcome;
        outcome.seed = derive_seed(options.run_seed, doc->doc_id);
        outcome.worker = id;
        for (int attempt = 0; attempt <= options.retries; ++attempt) {
          outcome.attempts = attempt + 1;
          try {
            if (!renderer) renderer = factory(id);
            outcome.capture = renderer->render(*doc, outcome.seed);
            outcome.error.clear();
            break;
          } catch (const RetriableError& e) {
            outcome.error = e.what();
            renderer.reset();
            if (attempt < options.retries) {
              ++retried;
              spdlog::warn("retrying {} after: {}", doc->doc_id, e.what());
            }
          } catch (const UsageError&) {
            throw;
          } catch (const Error& e) {
            outcome.error = e.what();
            break;
          }
        }
        outcome.doc = std::move(*doc);
        const bool ok = outcome.capture.has_value();
        if (!ok) {
          spdlog::error("{}: {}", outcome.doc.doc_id, outcome.error);
          record_failure();
        }
        try {
          sink(std::move(outcome));
          if (ok) ++completed;
        } catch (const std::exception& e) {
          spdlog::error("{}", e.what());
          if (ok) record_failure();
        }
      }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!fatal) fatal = std::current_exception();
      abort = true;
    }
  };

  std::vector<std::thread> threads;
  for (int i = 0; i < options.workers; ++i) threads.emplace_back(worker, i);
  for (auto& t : threads) t.join();
  if (fatal) std::rethrow_exception(fatal);

  PoolStats stats{completed, failed, retried, abort.load()};
  if (stats.aborted) {
    throw Error("aborting: " + std::to_string(stats.failed) + " documents failed, more than the allowed " +
                std::to_string(options.max_failures));
  }
  return stats;
}

}  // namespace vicorpus::browser
