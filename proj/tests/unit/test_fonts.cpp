#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <atomic>
#include <set>
#include <thread>

#include "json.hpp"
#include "test_support.hpp"
#include "vicorpus/font_catalog.hpp"
#include "vicorpus/sfnt.hpp"

namespace fs = std::filesystem;
using namespace vicorpus;
using namespace vicorpus::fonts;
using nlohmann::json;

namespace {

FontFace load(const std::string& name) {
  std::ifstream in(test::fixtures_dir() / "fonts" / name, std::ios::binary);
  auto bytes = std::make_shared<const std::vector<std::uint8_t>>(std::istreambuf_iterator<char>(in),
                                                                 std::istreambuf_iterator<char>());
  return FontFace::parse(bytes);
}

json expected() {
  std::ifstream in(test::fixtures_dir() / "fonts" / "expected_boxes.json");
  return json::parse(in);
}

}  // namespace

TEST_CASE("outline bounds agree with the fontTools dump for every fixture glyph") {
  const json exp = expected();
  for (const auto& [file, font] : exp.items()) {
    CAPTURE(file);
    const FontFace face = load(file);
    CHECK(face.family() == font["family"].get<std::string>());
    CHECK(face.units_per_em() == font["units_per_em"].get<int>());
    CHECK(face.ascender() == font["ascender"].get<int>());
    CHECK(face.descender() == font["descender"].get<int>());
    for (const auto& [cp_text, g] : font["glyphs"].items()) {
      const auto cp = static_cast<char32_t>(std::stoul(cp_text));
      CAPTURE(cp_text);
      const auto gid = face.glyph_for(cp);
      REQUIRE(gid.has_value());
      CHECK(face.advance_width(*gid) == g["advance"].get<int>());
      const auto bounds = face.glyph_bounds(*gid);
      if (g["bounds"].is_null()) {
        CHECK_FALSE(bounds.has_value());
        continue;
      }
      REQUIRE(bounds.has_value());
      const auto& b = g["bounds"];
      CHECK(bounds->x_min == doctest::Approx(b[0].get<double>()).epsilon(1e-9));
      CHECK(bounds->y_min == doctest::Approx(b[1].get<double>()).epsilon(1e-9));
      CHECK(bounds->x_max == doctest::Approx(b[2].get<double>()).epsilon(1e-9));
      CHECK(bounds->y_max == doctest::Approx(b[3].get<double>()).epsilon(1e-9));
    }
  }
}

TEST_CASE("curve extrema are used, not control points") {
  const FontFace block = load("VicorpusBlock-Regular.ttf");
  const auto o = block.glyph_bounds(*block.glyph_for(U'o'));
  REQUIRE(o);
  CHECK(o->x_min == doctest::Approx(175));
  CHECK(o->x_max == doctest::Approx(575));

  const FontFace cff = load("VicorpusCff-Regular.otf");
  CHECK(cff.is_cff());
  const auto s = cff.glyph_bounds(*cff.glyph_for(U'S'));
  REQUIRE(s);
  CHECK(s->x_min == doctest::Approx(60));
  CHECK(s->x_max == doctest::Approx(690));
  CHECK(s->y_max == doctest::Approx(700));
}

TEST_CASE("composite glyphs are resolved through component transforms") {
  const FontFace slant = load("VicorpusSlant-Italic.ttf");
  const json exp = expected()["VicorpusSlant-Italic.ttf"]["glyphs"];
  for (char32_t cp : {U'é', U'Ä'}) {
    const auto b = slant.glyph_bounds(*slant.glyph_for(cp));
    REQUIRE(b);
    const auto& e = exp[std::to_string(static_cast<std::uint32_t>(cp))]["bounds"];
    CHECK(b->x_min == doctest::Approx(e[0].get<double>()));
    CHECK(b->y_max == doctest::Approx(e[3].get<double>()));
  }
}

TEST_CASE("garbage input is rejected") {
  std::vector<std::uint8_t> junk(64, 0x41);
  CHECK_THROWS_AS(FontFace::face_count(junk), FontParseError);
  auto truncated = std::make_shared<const std::vector<std::uint8_t>>(std::vector<std::uint8_t>{0, 1, 0, 0, 0, 9});
  CHECK_THROWS_AS(FontFace::parse(truncated), FontParseError);
}

TEST_CASE("glyph_ratio formula and statuses") {
  const FontCatalog cat = FontCatalog::index(test::fixtures_dir() / "fonts");
  const FontEntry* block = cat.primary("Vicorpus Block");
  REQUIRE(block);

  SUBCASE("full-box glyph is the unit ratio") {
    const auto r = cat.glyph_ratio(*block, U'A');
    REQUIRE(r.status == RatioStatus::ok);
    CHECK(r.ratio == GlyphBoxRatio{0, 1, 0, 1});
  }
  SUBCASE("narrow stem") {
    const auto r = cat.glyph_ratio(*block, U'I');
    REQUIRE(r.status == RatioStatus::ok);
    CHECK(r.ratio.rx0 == doctest::Approx(0.4));
    CHECK(r.ratio.rx1 == doctest::Approx(0.6));
    CHECK(r.ratio.ry0 == doctest::Approx(0.0));
    CHECK(r.ratio.ry1 == doctest::Approx(0.75));
  }
  SUBCASE("space has no outline") { CHECK(cat.glyph_ratio(*block, U' ').status == RatioStatus::empty_outline); }
  SUBCASE("uncovered codepoint") { CHECK(cat.glyph_ratio(*block, U'漢').status == RatioStatus::not_covered); }
  SUBCASE("italic overhang") {
    const auto r = cat.glyph_ratio(*cat.primary("Vicorpus Slant"), U'f');
    REQUIRE(r.status == RatioStatus::ok);
    CHECK(r.ratio.rx0 == doctest::Approx(-0.05));
    const auto t = tighten(Rect{100, 0, 10, 20}, r.ratio);
    CHECK(t.tight);
    CHECK(t.rect.x == doctest::Approx(99.5));
  }
}

TEST_CASE("tighten arithmetic") {
  const auto t = tighten(Rect{0, 0, 10, 20}, GlyphBoxRatio{0.4, 0.6, 0, 0.8});
  CHECK(t.tight);
  CHECK(t.rect.x == doctest::Approx(4));
  CHECK(t.rect.y == doctest::Approx(0));
  CHECK(t.rect.w == doctest::Approx(2));
  CHECK(t.rect.h == doctest::Approx(16));

  const auto degenerate = tighten(Rect{1, 2, 3, 4}, GlyphBoxRatio{0.5, 0.5, 0, 1});
  CHECK_FALSE(degenerate.tight);
  CHECK(degenerate.rect == Rect{1, 2, 3, 4});
}

TEST_CASE("property: unit ratio is the exact identity") {
  test::Rng rng(11);
  for (int i = 0; i < 5000; ++i) {
    const Rect r{rng.uniform(-1e4, 1e4), rng.uniform(-1e4, 1e4), rng.uniform(1e-6, 1e3), rng.uniform(1e-6, 1e3)};
    const auto t = tighten(r, GlyphBoxRatio{0, 1, 0, 1});
    REQUIRE(t.tight);
    REQUIRE(t.rect == r);
  }
}

TEST_CASE("property: every covered glyph has a finite ordered ratio and bounded area") {
  const FontCatalog cat = FontCatalog::index(test::fixtures_dir() / "fonts");
  for (const auto& e : cat.entries()) {
    for (const auto& range : e.coverage) {
      for (char32_t cp = range.first; cp <= range.last; ++cp) {
        const auto r = cat.glyph_ratio(e, cp);
        if (r.status != RatioStatus::ok) continue;
        CAPTURE(e.family);
        CAPTURE(static_cast<std::uint32_t>(cp));
        REQUIRE(std::isfinite(r.ratio.rx0));
        REQUIRE(std::isfinite(r.ratio.ry1));
        REQUIRE(r.ratio.rx0 < r.ratio.rx1);
        REQUIRE(r.ratio.ry0 < r.ratio.ry1);
        const Rect loose{0, 0, 32, 32};
        REQUIRE(tighten(loose, r.ratio).rect.area() <= loose.area() * 1.5);
      }
    }
  }
}

TEST_CASE("index_fonts skips junk and caches by content") {
  test::TempDir dir;
  const fs::path fonts = dir.path() / "fonts";
  fs::create_directories(fonts);
  fs::copy_file(test::fixtures_dir() / "fonts" / "VicorpusBlock-Regular.ttf", fonts / "a.ttf");
  fs::copy_file(test::fixtures_dir() / "fonts" / "VicorpusCJK-Regular.ttf", fonts / "b.ttf");
  { std::ofstream(fonts / "notes.ttf") << "not a font"; }
  { std::ofstream(fonts / "readme.txt") << "hello"; }

  IndexOptions opt{dir.path() / "cache"};
  const FontCatalog first = FontCatalog::index(fonts, opt);
  CHECK(first.entries().size() == 2);
  CHECK_FALSE(first.from_cache());
  const FontCatalog second = FontCatalog::index(fonts, opt);
  CHECK(second.from_cache());
  CHECK(first.to_json().dump() == second.to_json().dump());

  { std::ofstream(fonts / "c.otf") << "still not a font"; }
  CHECK_FALSE(FontCatalog::index(fonts, opt).from_cache());

  const fs::path empty = dir.path() / "empty";
  fs::create_directories(empty);
  CHECK_THROWS_AS(FontCatalog::index(empty), InputError);
}

TEST_CASE("cached and uncached ratios agree, also under concurrency") {
  const fs::path root = test::fixtures_dir() / "fonts";
  const FontCatalog cold = FontCatalog::index(root);
  const FontCatalog warm = FontCatalog::index(root);
  const FontEntry* a = warm.primary("Vicorpus Cff");
  REQUIRE(a);
  for (char32_t cp = 0x21; cp < 0x7F; ++cp) (void)warm.glyph_ratio(*a, cp);

  std::vector<std::thread> threads;
  std::atomic<int> mismatches{0};
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&] {
      for (char32_t cp = 0x21; cp < 0x7F; ++cp) {
        const auto x = cold.glyph_ratio(*cold.primary("Vicorpus Cff"), cp);
        const auto y = warm.glyph_ratio(*a, cp);
        if (x.status != y.status || !(x.ratio == y.ratio)) ++mismatches;
      }
    });
  }
  for (auto& th : threads) th.join();
  CHECK(mismatches == 0);
}

TEST_CASE("pick_family respects coverage and seeds") {
  const FontCatalog cat = FontCatalog::index(test::fixtures_dir() / "fonts");
  const auto families = cat.families();
  REQUIRE(families.size() == 4);

  SplitMix64 a(7), b(7);
  for (int i = 0; i < 20; ++i) CHECK(cat.pick_family("ab", families, a, "X") == cat.pick_family("ab", families, b, "X"));

  SplitMix64 rng(3);
  for (int i = 0; i < 50; ++i) CHECK(cat.pick_family("漢字 test", families, rng, "X") == "Vicorpus CJK");
  CHECK(cat.pick_family("", families, rng, "Fallback") == "Fallback");
  CHECK(cat.pick_family(" \n\t", families, rng, "Fallback") == "Fallback");
  CHECK(cat.pick_family("\U0001F600", families, rng, "Fallback") == "Fallback");
  CHECK(cat.pick_family("ab", {"Vicorpus Block"}, rng, "Fallback") == "Vicorpus Block");

  // Every covering family is reachable.
  std::set<std::string> seen;
  for (int i = 0; i < 200; ++i) seen.insert(cat.pick_family("Hello", families, rng, "X"));
  CHECK(seen.size() == 4);
}
