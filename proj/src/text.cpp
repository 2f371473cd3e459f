#include "culture_probe/text.hpp"

#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <cctype>
#include <charconv>
#include <cmath>

#include "culture_probe/error.hpp"

namespace cprobe::text {

namespace {

// Decodes one code point starting at byte offset i; advances i. Invalid
// sequences decode to U+FFFD.
UChar32 nextCodePoint(std::string_view s, std::size_t& i) {
  UChar32 c;
  auto idx = static_cast<int32_t>(i);
  U8_NEXT_OR_FFFD(reinterpret_cast<const uint8_t*>(s.data()), idx,
                  static_cast<int32_t>(s.size()), c);
  i = static_cast<std::size_t>(idx);
  return c;
}

UChar32 prevCodePoint(std::string_view s, std::size_t& end) {
  UChar32 c;
  auto idx = static_cast<int32_t>(end);
  U8_PREV_OR_FFFD(reinterpret_cast<const uint8_t*>(s.data()), 0, idx, c);
  end = static_cast<std::size_t>(idx);
  return c;
}

template <typename Pred>
std::string stripEdges(std::string_view s, Pred drop) {
  std::size_t begin = 0;
  while (begin < s.size()) {
    std::size_t next = begin;
    if (!drop(nextCodePoint(s, next))) break;
    begin = next;
  }
  std::size_t end = s.size();
  while (end > begin) {
    std::size_t prev = end;
    if (!drop(prevCodePoint(s, prev))) break;
    end = prev;
  }
  return std::string(s.substr(begin, end - begin));
}

bool isSpace(UChar32 c) { return u_isUWhiteSpace(c) || c == 0xFEFF; }

bool isCjkPunct(UChar32 c) {
  const bool cjkBlock = (c >= 0x3000 && c <= 0x303F) || (c >= 0xFF00 && c <= 0xFFEF) ||
                        (c >= 0xFE30 && c <= 0xFE4F) || (c >= 0xFE10 && c <= 0xFE1F);
  return cjkBlock && (u_ispunct(c) || c == 0x3000);
}

}  // namespace

Language parseLanguage(std::string_view tag) {
  if (iequals(tag, "en")) return Language::En;
  if (iequals(tag, "zh")) return Language::Zh;
  throw ValidationError("unsupported language tag '" + std::string(tag) + "' (expected en or zh)");
}

std::string_view languageTag(Language lang) { return lang == Language::En ? "en" : "zh"; }

std::string trim(std::string_view s) { return stripEdges(s, isSpace); }

std::string caseFold(std::string_view s) {
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  u.foldCase(U_FOLD_CASE_DEFAULT);
  std::string out;
  u.toUTF8String(out);
  return out;
}

std::string stripEdgePunctuation(std::string_view s) {
  return stripEdges(s, [](UChar32 c) { return u_ispunct(c) != 0; });
}

std::string stripCjkPunctuation(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const std::size_t start = i;
    const UChar32 c = nextCodePoint(s, i);
    if (!isCjkPunct(c)) out.append(s.substr(start, i - start));
  }
  return out;
}

std::vector<std::string> splitTabs(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      cells.emplace_back(line.substr(start));
      break;
    }
    cells.emplace_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return cells;
}

std::vector<std::string> splitWordList(std::string_view s) {
  std::vector<std::string> words;
  std::string current;
  auto flush = [&] {
    std::string w = trim(current);
    if (!w.empty()) words.push_back(std::move(w));
    current.clear();
  };
  std::size_t i = 0;
  while (i < s.size()) {
    const std::size_t start = i;
    const UChar32 c = nextCodePoint(s, i);
    if (c == ',' || c == ';' || c == '\n' || c == 0xFF0C || c == 0x3001 || c == 0xFF1B) {
      flush();
    } else {
      current.append(s.substr(start, i - start));
    }
  }
  flush();
  return words;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

std::string csvField(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto x = static_cast<unsigned char>(a[i]);
    const auto y = static_cast<unsigned char>(b[i]);
    if (std::tolower(x) != std::tolower(y)) return false;
  }
  return true;
}

std::string formatNumber(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace cprobe::text
