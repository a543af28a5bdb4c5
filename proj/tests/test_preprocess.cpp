#include <doctest.h>

#include <string>

#include "spamlens/errors.hpp"
#include "spamlens/preprocess.hpp"
#include "spamlens/rng.hpp"

using namespace spamlens;

namespace {

bool in_clean_alphabet(const std::string& text) {
  if (!text.empty() && (text.front() == ' ' || text.back() == ' ')) {
    return false;
  }
  for (std::size_t i = 0; i < text.size(); ++i) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    const bool alnum = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                       (c >= '0' && c <= '9');
    if (!alnum && c != ' ') return false;
    if (c == ' ' && i + 1 < text.size() && text[i + 1] == ' ') return false;
  }
  return true;
}

std::string random_input(Rng& rng) {
  const auto len = rng.bounded(40);
  std::string out;
  for (std::uint64_t i = 0; i < len; ++i) {
    switch (rng.bounded(6)) {
      case 0: out.push_back(static_cast<char>('a' + rng.bounded(26))); break;
      case 1: out.push_back(static_cast<char>('A' + rng.bounded(26))); break;
      case 2: out.push_back(static_cast<char>('0' + rng.bounded(10))); break;
      case 3: out.push_back(" \t\r\n"[rng.bounded(4)]); break;
      case 4: out.push_back("!@#$%^&*().,:;'\"-_"[rng.bounded(18)]); break;
      default:
        // arbitrary bytes, including invalid UTF-8
        out.push_back(static_cast<char>(rng.bounded(256)));
    }
  }
  return out;
}

}  // namespace

TEST_CASE("clean_text replaces specials and collapses whitespace") {
  CHECK(clean_text("Hello!!!   world\r\n") == "Hello world");
  CHECK(clean_text("abc") == "abc");
  CHECK(clean_text("a@b#c") == "a b c");
  CHECK(clean_text("") == "");
  CHECK(clean_text("  \t\r\n ") == "");
  CHECK(clean_text("win \xc2\xa3 500") == "win 500");  // pound sign
  CHECK(clean_text("3.5million") == "3 5million");
}

TEST_CASE("remove_repeat keeps the first `repeat` occurrences") {
  CHECK(remove_repeat("go go go", 1) == "go");
  CHECK(remove_repeat("a b a b", 1) == "a b");
  CHECK(remove_repeat("go go go", 2) == "go go");
  CHECK(remove_repeat("", 1) == "");
  CHECK_THROWS_AS(remove_repeat("x", 0), UsageError);
}

TEST_CASE("preprocess composes cleaning and repeat removal") {
  CHECK(preprocess("Win!! win WIN cash cash") == "Win win WIN cash");
  CHECK(preprocess("") == "");
  CHECK(preprocess("  \t\r\n ") == "");
}

TEST_CASE("preprocess properties hold under fuzzing") {
  Rng rng(12345);
  for (int i = 0; i < 2000; ++i) {
    const std::string input = random_input(rng);
    const std::string once = preprocess(input);
    CHECK(in_clean_alphabet(once));
    CHECK(preprocess(once) == once);  // idempotence
  }
}

TEST_CASE("remove_repeat with a large budget is the identity on clean text") {
  Rng rng(777);
  for (int i = 0; i < 500; ++i) {
    const std::string text = preprocess(random_input(rng));
    CHECK(remove_repeat(text, 1000000) == text);
  }
}
