#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "test_support.hpp"
#include "vicorpus/browser.hpp"
#include "vicorpus/font_catalog.hpp"
#include "vicorpus/resources.hpp"
#include "vicorpus/seed.hpp"
#include "vicorpus/utf8.hpp"

namespace fs = std::filesystem;
using namespace vicorpus;
using nlohmann::json;

namespace {

const fonts::FontCatalog& catalog() {
  static const auto c = fonts::FontCatalog::index(test::fixtures_dir() / "fonts");
  return c;
}

/// One session per family list, kept for the whole test run.
browser::BrowserSession& session(const std::vector<std::string>& families) {
  static std::map<std::vector<std::string>, std::unique_ptr<browser::BrowserSession>> sessions;
  auto& s = sessions[families];
  if (!s) {
    browser::SessionOptions o;
    o.families = families;
    s = std::make_unique<browser::BrowserSession>(o, &catalog());
  }
  return *s;
}

browser::CaptureResult render(const std::string& html, std::uint64_t seed = 1,
                              const std::vector<std::string>& families = {"Vicorpus Block"}) {
  return session(families).render({"t", "", "en", html, "", 0}, seed);
}

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string char_text(const report::InstrumentationReport& r) {
  std::string out;
  for (const auto& c : r.chars) out += c.text;
  return out;
}

std::string page(const std::string& body) {
  return "<!doctype html><html><head><meta charset=utf-8></head><body style=\"margin:0\">" + body + "</body></html>";
}

}  // namespace

TEST_SUITE("browser") {

TEST_CASE("each character gets its own exact span") {
  const auto cap = render(page("<p style=\"margin:0;font-size:32px\">ab</p>"));
  const auto& c = cap.report.chars;
  REQUIRE(c.size() == 2);
  CHECK(c[0].text == "a");
  CHECK(c[1].text == "b");
  // Block font advances: 'a' 500 and 'b' 625 units of 1000, at 32 px.
  const double layout_unit = 1.0 / 32;
  CHECK(c[0].rect.x == 0);
  CHECK(std::abs(c[0].rect.w - 16) <= layout_unit);
  CHECK(std::abs(c[1].rect.x - c[0].rect.right()) <= layout_unit);
  CHECK(std::abs(c[1].rect.w - 20) <= layout_unit);
  // The paragraph keeps its own font, so its strut can push the baseline down.
  CHECK(c[0].rect.y >= 0);
  CHECK(c[1].rect.y == c[0].rect.y);
  CHECK(c[0].rect.h == 32);
  CHECK(c[0].font_family == "Vicorpus Block");
  CHECK(c[0].font_size_px == 32);
  CHECK(c[0].para_path == report::NodePath{0, 1, 0});
  CHECK(c[0].node_path.size() == 4);
  CHECK(c[0].seq < c[1].seq);
  CHECK(cap.image_width == 1280);
  CHECK(cap.image_height == 800);
}

TEST_CASE("whitespace characters are flagged") {
  const auto cap = render(page("<p>a b\tc</p><p>d</p>"));
  std::string flags;
  for (const auto& c : cap.report.chars) flags += c.is_whitespace ? '_' : c.text[0];
  CHECK(flags == "a_b_cd");
  for (const auto& c : cap.report.chars) {
    CHECK(c.is_whitespace == utf8::is_space_or_control(utf8::first_scalar(c.text)));
  }
}

TEST_CASE("wrapping leaves the page text unchanged") {
  browser::BrowserProcess proc(browser::default_browser_bin(), 0, std::chrono::seconds(30));
  browser::CdpClient cdp("127.0.0.1", proc.port(), proc.ws_path());
  const auto deadline = [] { return browser::CdpClient::Clock::now() + std::chrono::seconds(30); };
  const auto target = cdp.call("Target.createTarget", {{"url", "about:blank"}}, "", deadline());
  const auto sid = cdp.call("Target.attachToTarget", {{"targetId", target.at("targetId")}, {"flatten", true}}, "",
                            deadline())
                       .at("sessionId")
                       .get<std::string>();
  auto eval = [&](const std::string& expr, bool await = false) {
    const auto r = cdp.call("Runtime.evaluate", {{"expression", expr}, {"returnByValue", true}, {"awaitPromise", await}},
                            sid, deadline());
    REQUIRE_FALSE(r.contains("exceptionDetails"));
    return r.at("result").value("value", json());
  };
  for (const char* name : {"01_plain_text.html", "02_nested_blocks.html", "08_multi_paragraph.html", "09_cjk.html"}) {
    CAPTURE(name);
    const std::string html = read(test::fixtures_dir() / "html" / name);
    eval("document.open(); document.write(" + json(html).dump() + "); document.close(); true");
    const auto before = eval("document.body.textContent").get<std::string>();
    eval(std::string(resources::instrument_script()) + "\n;true");
    const auto prepared = json::parse(eval("__vicorpus.prepare()").get<std::string>());
    eval("__vicorpus.finish({})", true);
    const auto collected = json::parse(eval("__vicorpus.collect({pageWidth: 1280, pageHeight: 800, truncated: false})").get<std::string>());
    CHECK(eval("document.body.textContent").get<std::string>() == before);
    CHECK(report::schema_violations(collected).empty());
    // every non-whitespace character of the text appears in the report, in order
    std::string visible, reported;
    for (char32_t cp : utf8::decode(before))
      if (!utf8::is_space_or_control(cp)) utf8::append(visible, cp);
    for (const auto& c : collected["chars"])
      if (!c["is_whitespace"].get<bool>()) reported += c["text"].get<std::string>();
    CHECK(reported == visible);
    CHECK(prepared["paragraphs"].size() > 0);
  }
}

TEST_CASE("math images and embedded media become regions") {
  const std::string svg =
      "data:image/svg+xml;utf8,%3Csvg xmlns='http://www.w3.org/2000/svg' width='40' height='20'/%3E";
  const auto cap = render(page("<p>x <img class=\"mwe-math-fallback-image-inline\" alt=\"a^2\" style=\"width:40px;height:20px\" src=\"" +
                               svg + "\"> y</p>"
                               "<img style=\"display:block;width:50px;height:30px\" src=\"" + svg + "\">"
                               "<canvas width=\"60\" height=\"40\" style=\"display:block\"></canvas>"
                               "<svg width=\"70\" height=\"30\" style=\"display:block\"><text x=\"1\" y=\"20\">NOTTEXT</text></svg>"
                               "<video width=\"80\" height=\"45\" style=\"display:block\"></video>"));
  const auto& g = cap.report.regions;
  REQUIRE(g.size() == 5);
  CHECK(g[0].kind == report::RegionKind::latex);
  CHECK(g[0].alt == "a^2");
  CHECK(g[0].rect.w == 40);
  CHECK(g[0].para_path == cap.report.chars.front().para_path);
  for (std::size_t i = 1; i < 5; ++i) CHECK(g[i].kind == report::RegionKind::image);
  CHECK(g[1].rect.w == 50);
  CHECK(g[2].rect.w == 60);
  CHECK(g[3].rect.w == 70);
  CHECK(g[4].rect.w == 80);
  CHECK(char_text(cap.report) == "x  y");  // svg text is not page text
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i - 1].seq < g[i].seq);
}

TEST_CASE("font assignment is a function of the seed") {
  std::string body;
  for (int i = 0; i < 12; ++i) body += "<p>Paragraph number " + std::to_string(i) + " text.</p>";
  const std::vector<std::string> fams{"Vicorpus Block", "Vicorpus Cff", "Vicorpus Slant"};
  const auto a = render(page(body), 7, fams);
  const auto b = render(page(body), 7, fams);
  const auto c = render(page(body), 8, fams);
  CHECK(a.report.font_assignment.size() == 12);
  CHECK(a.report.font_assignment == b.report.font_assignment);
  CHECK(a.report.font_assignment != c.report.font_assignment);
  CHECK(a.image == b.image);
  std::set<std::string> used;
  for (const auto& [k, f] : a.report.font_assignment) used.insert(f);
  CHECK(used.size() > 1);
  for (const auto& ch : a.report.chars) CHECK(ch.font_family == a.report.font_assignment.at(report::path_key(ch.para_path)));

  // The host draws families exactly as pick_family does with a seeded SplitMix64.
  SplitMix64 rng(7);
  std::map<std::string, std::string> want;
  std::vector<std::string> keys;
  for (int i = 0; i < 12; ++i) keys.push_back("0/1/" + std::to_string(i));
  for (int i = 0; i < 12; ++i)
    want[keys[static_cast<std::size_t>(i)]] =
        catalog().pick_family("Paragraph number " + std::to_string(i) + " text.", fams, rng, fams.front());
  CHECK(want == a.report.font_assignment);
}

TEST_CASE("rendered fixture reports conform to the schema") {
  for (const auto& e : fs::directory_iterator(test::fixtures_dir() / "html")) {
    CAPTURE(e.path().filename().string());
    const auto cap = render(read(e.path()), derive_seed(42, e.path().filename().string()),
                            {"Vicorpus Block", "Vicorpus Cff", "Vicorpus Slant", "Vicorpus CJK"});
    const auto problems = report::schema_violations(report::to_json(cap.report));
    INFO((problems.empty() ? std::string() : problems.front()));
    CHECK(problems.empty());
    CHECK(cap.report.script_version == "1.0.0");
  }
}

TEST_CASE("invisible text is excluded by category") {
  struct Case {
    const char* file;
    const char* marker;
    int report::RemovalCounts::*counter;
  };
  const std::vector<Case> cases{
      {"02_nested_blocks.html", "PPP", &report::RemovalCounts::pseudo},
      {"04_hidden_elements.html", "ZZZ", &report::RemovalCounts::invisible},
      {"05_offscreen.html", "QQQ", &report::RemovalCounts::offscreen},
      {"06_oversize_child.html", "XXX", &report::RemovalCounts::oversize},
      {"07_placeholder_input.html", "JJJ", &report::RemovalCounts::placeholder},
  };
  for (const auto& c : cases) {
    CAPTURE(c.file);
    const auto cap = render(read(test::fixtures_dir() / "html" / c.file));
    const std::string text = char_text(cap.report);
    CHECK(text.find(c.marker) == std::string::npos);
    CHECK(text.find(c.marker[0]) == std::string::npos);
    CHECK(cap.report.removed.*c.counter > 0);
    CHECK_FALSE(text.empty());
  }
  // a visible child of a hidden parent still counts
  const auto hidden = render(read(test::fixtures_dir() / "html/04_hidden_elements.html"));
  CHECK(char_text(hidden.report).find("but shown child") != std::string::npos);
}

}  // TEST_SUITE
