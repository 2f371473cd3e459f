#include <doctest.h>

#include "culture_probe/error.hpp"
#include "culture_probe/text.hpp"

using namespace cprobe;

TEST_CASE("trim removes ASCII and Unicode whitespace") {
  CHECK(text::trim("  dog\t\n") == "dog");
  CHECK(text::trim("　狗 ") == "狗");
  CHECK(text::trim("   ").empty());
  CHECK(text::trim("a b") == "a b");
}

TEST_CASE("case folding is Unicode aware") {
  CHECK(text::caseFold("DOG") == "dog");
  CHECK(text::caseFold("ÄPFEL") == "äpfel");
  CHECK(text::caseFold("Straße") == "strasse");
  CHECK(text::caseFold("狗") == "狗");
  CHECK(text::normalizeWord("  Heaven ") == "heaven");
}

TEST_CASE("punctuation stripping") {
  CHECK(text::stripEdgePunctuation("\"word!\"") == "word");
  CHECK(text::stripEdgePunctuation("«mot»") == "mot");
  CHECK(text::stripEdgePunctuation("re-use") == "re-use");
  CHECK(text::stripCjkPunctuation("你好。") == "你好");
  CHECK(text::stripCjkPunctuation("「龙」，") == "龙");
}

TEST_CASE("word lists split on ASCII and CJK separators") {
  const auto parts = text::splitWordList("a, b，c、d;e\n f ,, ");
  REQUIRE(parts.size() == 6);
  CHECK(parts[0] == "a");
  CHECK(parts[2] == "c");
  CHECK(parts[5] == "f");
  CHECK(text::splitWordList("").empty());
}

TEST_CASE("tab splitting keeps empty cells") {
  const auto cells = text::splitTabs("a\t\tc");
  REQUIRE(cells.size() == 3);
  CHECK(cells[1].empty());
}

TEST_CASE("CSV fields are quoted only when needed") {
  CHECK(text::csvField("plain") == "plain");
  CHECK(text::csvField("a,b") == "\"a,b\"");
  CHECK(text::csvField("say \"hi\"") == "\"say \"\"hi\"\"\"");
}

TEST_CASE("numbers print in shortest round-trip form") {
  CHECK(text::formatNumber(0.0) == "0");
  CHECK(text::formatNumber(-0.0) == "0");
  CHECK(text::formatNumber(0.1) == "0.1");
  CHECK(text::formatNumber(0.6) == "0.6");
  CHECK(text::formatNumber(5) == "5");
  CHECK(std::stod(text::formatNumber(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("language tags") {
  CHECK(text::parseLanguage("en") == text::Language::En);
  CHECK(text::parseLanguage("ZH") == text::Language::Zh);
  CHECK(text::languageTag(text::Language::Zh) == "zh");
  CHECK_THROWS_AS(text::parseLanguage("fr"), ValidationError);
}
