#include <doctest.h>

#include <fstream>
#include <set>

#include "test_support.hpp"
#include "vicorpus/error.hpp"
#include "vicorpus/hash.hpp"
#include "vicorpus/seed.hpp"
#include "vicorpus/utf8.hpp"

using namespace vicorpus;

TEST_CASE("sha256 known answers") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
        "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
  const std::string million(1000000, 'a');
  CHECK(sha256_hex(million) == "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0");

  test::TempDir dir;
  std::ofstream(dir.path() / "f", std::ios::binary) << "abc";
  CHECK(sha256_file(dir.path() / "f") == sha256_hex("abc"));
  CHECK_THROWS(sha256_file(dir.path() / "missing"));
}

TEST_CASE("base64 round trip and padding") {
  CHECK(base64::encode("") == "");
  CHECK(base64::encode("f") == "Zg==");
  CHECK(base64::encode("fo") == "Zm8=");
  CHECK(base64::encode("foo") == "Zm9v");
  CHECK(base64::encode("foobar") == "Zm9vYmFy");
  test::Rng rng(5);
  for (int n = 0; n < 200; ++n) {
    std::vector<std::uint8_t> data(static_cast<std::size_t>(rng.integer(0, 64)));
    for (auto& b : data) b = static_cast<std::uint8_t>(rng.integer(0, 255));
    CHECK(base64::decode(base64::encode(data)) == data);
  }
  CHECK_THROWS_AS(base64::decode("Zm9v!"), Error);
  CHECK_THROWS_AS(base64::decode("Zm9"), Error);
}

TEST_CASE("splitmix64 reference outputs") {
  // Reference sequence for seed 1234567.
  SplitMix64 g(1234567);
  CHECK(g.next() == 6457827717110365317ULL);
  CHECK(g.next() == 3203168211198807973ULL);
  CHECK(g.next() == 9817491932198370423ULL);
  static_assert(SplitMix64(0).next() == 0xE220A8397B1DCDAFULL);
}

TEST_CASE("derived seeds depend only on run seed and key") {
  CHECK(derive_seed(42, "a") == derive_seed(42, "a"));
  CHECK(derive_seed(42, "a") != derive_seed(43, "a"));
  CHECK(derive_seed(42, "a") != derive_seed(42, "b"));
  CHECK(fnv1a64("") == 0xCBF29CE484222325ULL);
  CHECK(fnv1a64("a") == 0xAF63DC4C8601EC8CULL);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 5000; ++i) seen.insert(derive_seed(7, "doc" + std::to_string(i)));
  CHECK(seen.size() == 5000);
  SplitMix64 g(9);
  for (int i = 0; i < 1000; ++i) CHECK(g.below(13) < 13);
  CHECK(g.below(0) == 0);
}

TEST_CASE("utf8 decode and encode") {
  const std::string s = "a\xC3\xA9\xE4\xB8\xAD\xF0\x9F\x98\x80";
  const auto cps = utf8::decode(s);
  REQUIRE(cps.size() == 4);
  CHECK(cps[1] == U'é');
  CHECK(cps[2] == U'中');
  CHECK(cps[3] == U'\U0001F600');
  CHECK(utf8::encode(cps) == s);
  CHECK(utf8::decode("\xC3") == std::vector<char32_t>{0xFFFD});
  CHECK(utf8::decode("\xC0\xAF").front() == 0xFFFD);  // overlong
  CHECK(utf8::decode("\xED\xA0\x80").front() == 0xFFFD);  // surrogate
  CHECK(utf8::first_scalar("") == 0xFFFD);
  CHECK(utf8::first_scalar("xy") == U'x');
  CHECK(utf8::is_space_or_control(U' '));
  CHECK(utf8::is_space_or_control(U' '));
  CHECK(utf8::is_space_or_control(U'　'));
  CHECK(utf8::is_space_or_control(U'\x85'));
  CHECK_FALSE(utf8::is_space_or_control(U'a'));
  CHECK(utf8::is_space_or_control(U'​'));
  CHECK_FALSE(utf8::is_space_or_control(U'‌'));
  CHECK(utf8::decode("\xF4\x90\x80\x80").front() == 0xFFFD);  // past U+10FFFF
  CHECK(utf8::decode("\xE4\xB8x") == std::vector<char32_t>{0xFFFD, 0xFFFD, U'x'});
}
