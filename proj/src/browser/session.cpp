#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <spdlog/spdlog.h>

#include "vicorpus/browser.hpp"
#include "vicorpus/font_catalog.hpp"
#include "vicorpus/hash.hpp"
#include "vicorpus/resources.hpp"
#include "vicorpus/seed.hpp"

using nlohmann::json;

namespace vicorpus::browser {

namespace {

constexpr const char* kOrigin = "http://vicorpus.invalid";
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t).count();
}

// Font files as base64, shared by every session in the process.
const std::string& font_body(const fonts::FontCatalog& catalog, std::size_t index) {
  static std::mutex mutex;
  static std::map<std::pair<const fonts::FontCatalog*, std::size_t>, std::string> cache;
  std::lock_guard lock(mutex);
  auto key = std::make_pair(&catalog, index);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::ifstream in(catalog.absolute_path(catalog.entries().at(index)), std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return cache.emplace(key, base64::encode(bytes)).first->second;
}

std::pair<int, int> png_size(const std::vector<std::uint8_t>& png) {
  if (png.size() < 24 || png[1] != 'P' || png[2] != 'N' || png[3] != 'G') throw PageError("screenshot is not a PNG");
  auto be32 = [&](std::size_t o) {
    return static_cast<int>((png[o] << 24) | (png[o + 1] << 16) | (png[o + 2] << 8) | png[o + 3]);
  };
  return {be32(16), be32(20)};
}

}  // namespace

void RenderConfig::validate() const {
  if (viewport_width < 320) throw UsageError("viewport width must be at least 320 px");
  if (viewport_height < 1) throw UsageError("viewport height must be positive");
  if (!(device_scale > 0) || !std::isfinite(device_scale)) throw UsageError("device scale must be positive");
  if (nav_timeout_ms <= 0 || eval_timeout_ms <= 0) throw UsageError("timeouts must be positive");
  if (max_page_height_px < viewport_height) throw UsageError("max page height must be at least the viewport height");
  if (settle_ms < 0) throw UsageError("settle delay must not be negative");
}

void scale_report(report::InstrumentationReport& r, double s) {
  if (s == 1.0) return;
  auto scale = [s](Rect& rect) { rect = {rect.x * s, rect.y * s, rect.w * s, rect.h * s}; };
  for (auto& c : r.chars) {
    scale(c.rect);
    c.font_size_px *= s;
  }
  for (auto& g : r.regions) scale(g.rect);
  r.page_width = static_cast<int>(std::lround(r.page_width * s));
  r.page_height = static_cast<int>(std::lround(r.page_height * s));
}

struct BrowserSession::State {
  std::unique_ptr<BrowserProcess> process;
  std::unique_ptr<CdpClient> cdp;
  std::string session_id;
  std::string html;  // document being served
  std::uint64_t navigations = 0;
  bool loaded = false;
  bool crashed = false;
};

BrowserSession::BrowserSession(SessionOptions options, const fonts::FontCatalog* catalog)
    : options_(std::move(options)), catalog_(catalog) {
  options_.config.validate();
  if (options_.config.browser_bin.empty()) options_.config.browser_bin = default_browser_bin();
  if (catalog_ == nullptr) options_.families.clear();
  std::vector<std::string> usable;
  for (const auto& f : options_.families) {
    const fonts::FontEntry* e = catalog_->primary(f);
    if (e == nullptr) {
      spdlog::warn("family '{}' is not in the font catalog; skipped", f);
    } else if (e->face_index != 0) {
      // @font-face cannot address a face inside a collection.
      spdlog::warn("family '{}' lives in a font collection; skipped", f);
    } else {
      usable.push_back(f);
    }
  }
  options_.families = std::move(usable);
  if (options_.default_family.empty() && !options_.families.empty()) options_.default_family = options_.families.front();
}

BrowserSession::~BrowserSession() = default;

void BrowserSession::restart() { state_.reset(); }

void BrowserSession::start() {
  state_.reset();
  auto st = std::make_unique<State>();
  const auto& cfg = options_.config;
  const int port = cfg.port_base > 0 ? cfg.port_base + options_.worker : 0;
  st->process = std::make_unique<BrowserProcess>(cfg.browser_bin, port, std::chrono::seconds(30));
  st->cdp = std::make_unique<CdpClient>("127.0.0.1", st->process->port(), st->process->ws_path());
  State* s = st.get();
  const bool block = cfg.block_remote_resources;
  const fonts::FontCatalog* catalog = catalog_;

  st->cdp->on_event([s, block, catalog](const std::string& method, const json& params, const std::string& sid) {
    if (method == "Fetch.requestPaused") {
      const std::string id = params.at("requestId").get<std::string>();
      const std::string url = params.at("request").value("url", "");
      if (url.rfind(kOrigin, 0) == 0) {
        const std::string path = url.substr(std::string(kOrigin).size());
        if (path.rfind("/doc/", 0) == 0) {
          s->cdp->send("Fetch.fulfillRequest",
                       {{"requestId", id},
                        {"responseCode", 200},
                        {"responseHeaders", json::array({{{"name", "Content-Type"}, {"value", "text/html; charset=utf-8"}}})},
                        {"body", base64::encode(s->html)}},
                       sid);
          return;
        }
        if (path.rfind("/fonts/", 0) == 0 && catalog != nullptr) {
          std::size_t index = 0;
          try {
            index = std::stoul(path.substr(7));
          } catch (const std::exception&) {
            index = catalog->entries().size();
          }
          if (index < catalog->entries().size()) {
            s->cdp->send("Fetch.fulfillRequest",
                         {{"requestId", id},
                          {"responseCode", 200},
                          {"responseHeaders", json::array({{{"name", "Content-Type"}, {"value", "font/sfnt"}}})},
                          {"body", font_body(*catalog, index)}},
                         sid);
            return;
          }
        }
        s->cdp->send("Fetch.fulfillRequest", {{"requestId", id}, {"responseCode", 404}, {"body", ""}}, sid);
        return;
      }
      if (block) {
        s->cdp->send("Fetch.failRequest", {{"requestId", id}, {"errorReason", "BlockedByClient"}}, sid);
      } else {
        s->cdp->send("Fetch.continueRequest", {{"requestId", id}}, sid);
      }
    } else if (method == "Page.loadEventFired") {
      s->loaded = true;
    } else if (method == "Inspector.targetCrashed" || method == "Target.targetCrashed" ||
               method == "Target.detachedFromTarget") {
      s->crashed = true;
    }
  });

  const auto deadline = Clock::now() + std::chrono::seconds(30);
  auto& cdp = *st->cdp;
  const auto target = cdp.call("Target.createTarget", {{"url", "about:blank"}}, "", deadline);
  const auto attached =
      cdp.call("Target.attachToTarget", {{"targetId", target.at("targetId")}, {"flatten", true}}, "", deadline);
  st->session_id = attached.at("sessionId").get<std::string>();
  const auto& sid = st->session_id;
  cdp.call("Page.enable", json::object(), sid, deadline);
  cdp.call("Inspector.enable", json::object(), sid, deadline);
  cdp.call("Fetch.enable", {{"patterns", json::array({{{"urlPattern", "*"}, {"requestStage", "Request"}}})}}, sid,
           deadline);
  state_ = std::move(st);
}

CaptureResult BrowserSession::render(const ingest::SourceDocument& doc, std::uint64_t seed) {
  if (!state_ || state_->cdp->broken() || state_->crashed || !state_->process->alive()) start();
  State& st = *state_;
  auto& cdp = *st.cdp;
  const auto& cfg = options_.config;
  const auto& sid = st.session_id;
  CaptureResult out;
  out.doc_id = doc.doc_id;

  auto check_crash = [&] {
    if (st.crashed || !st.process->alive()) throw BrowserCrashed("page crashed while rendering " + doc.doc_id);
  };
  auto settle = [&] {
    if (cfg.settle_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(cfg.settle_ms));
  };
  auto eval_deadline = [&] { return Clock::now() + std::chrono::milliseconds(cfg.eval_timeout_ms); };
  auto evaluate = [&](const std::string& expression, bool await) -> json {
    const auto r = cdp.call("Runtime.evaluate",
                            {{"expression", expression},
                             {"returnByValue", true},
                             {"awaitPromise", await},
                             {"timeout", cfg.eval_timeout_ms}},
                            sid, eval_deadline());
    if (r.contains("exceptionDetails")) {
      const auto& ex = r["exceptionDetails"];
      std::string text = ex.value("text", "exception");
      if (ex.contains("exception")) text += ": " + ex["exception"].value("description", "");
      throw PageError("instrumentation failed on " + doc.doc_id + ": " + text);
    }
    check_crash();
    return r.at("result").value("value", json());
  };
  auto set_viewport = [&](int height) {
    cdp.call("Emulation.setDeviceMetricsOverride",
             {{"width", cfg.viewport_width},
              {"height", height},
              {"deviceScaleFactor", cfg.device_scale},
              {"mobile", false}},
             sid, eval_deadline());
  };

  // Navigation.
  const auto t_nav = Clock::now();
  set_viewport(cfg.viewport_height);
  st.html = doc.html;
  st.loaded = false;
  const auto nav_deadline = t_nav + std::chrono::milliseconds(cfg.nav_timeout_ms);
  const auto nav = cdp.call("Page.navigate", {{"url", std::string(kOrigin) + "/doc/" + std::to_string(++st.navigations)}},
                            sid, nav_deadline);
  if (nav.contains("errorText")) throw PageError("navigation failed for " + doc.doc_id + ": " + nav["errorText"].get<std::string>());
  cdp.wait_until([&] { return st.loaded || st.crashed; }, nav_deadline, "page load");
  check_crash();
  settle();
  out.timings.nav_ms = ms_since(t_nav);

  // Instrumentation.
  const auto t_inst = Clock::now();
  evaluate(std::string(resources::instrument_script()) + "\n;true", false);
  const json prepared = json::parse(evaluate("__vicorpus.prepare()", false).get<std::string>());

  json finish = json::object();
  if (!options_.families.empty()) {
    SplitMix64 rng(seed);
    json assignment = json::object();
    std::set<std::string> used;
    for (const auto& p : prepared.at("paragraphs")) {
      const std::string family =
          catalog_->pick_family(p.at("text").get<std::string>(), options_.families, rng, options_.default_family);
      assignment[p.at("key").get<std::string>()] = family;
      used.insert(family);
    }
    json faces = json::array();
    for (const auto& family : used) {
      const fonts::FontEntry* e = catalog_->primary(family);
      if (e == nullptr) continue;
      const auto index = static_cast<std::size_t>(e - catalog_->entries().data());
      faces.push_back({{"family", family}, {"url", "/fonts/" + std::to_string(index)}});
    }
    finish = {{"faces", faces}, {"assignment", assignment}};
  }
  const json size = json::parse(evaluate("__vicorpus.finish(" + finish.dump() + ")", true).get<std::string>());
  const int doc_height = std::max(1, size.at("height").get<int>());
  const int height = std::max(cfg.viewport_height, std::min(doc_height, cfg.max_page_height_px));
  const bool truncated = doc_height > cfg.max_page_height_px;
  set_viewport(height);
  settle();
  const json collect_opts{{"pageWidth", cfg.viewport_width}, {"pageHeight", height}, {"truncated", truncated}};
  const std::string text = evaluate("__vicorpus.collect(" + collect_opts.dump() + ")", false).get<std::string>();
  json raw = json::parse(text);
  if (raw.contains("error")) throw PageError("instrumentation refused " + doc.doc_id + ": " + raw["error"].get<std::string>());
  out.report = report::parse_report(raw);
  out.timings.instrument_ms = ms_since(t_inst);

  // Capture the exact DOM state just measured.
  const auto t_cap = Clock::now();
  const auto shot = cdp.call("Page.captureScreenshot",
                             {{"format", "png"},
                              {"fromSurface", true},
                              {"captureBeyondViewport", false},
                              {"clip", {{"x", 0}, {"y", 0}, {"width", cfg.viewport_width}, {"height", height}, {"scale", 1}}}},
                             sid, eval_deadline());
  check_crash();
  out.image = base64::decode(shot.at("data").get<std::string>());
  std::tie(out.image_width, out.image_height) = png_size(out.image);
  out.timings.capture_ms = ms_since(t_cap);

  scale_report(out.report, cfg.device_scale);
  return out;
}

}  // namespace vicorpus::browser
