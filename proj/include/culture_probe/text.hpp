#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cprobe::text {

enum class Language { En, Zh };

Language parseLanguage(std::string_view tag);
std::string_view languageTag(Language lang);

/// Strip ASCII and Unicode whitespace from both ends.
std::string trim(std::string_view s);

/// Unicode full case folding (UTF-8 in, UTF-8 out).
std::string caseFold(std::string_view s);

/// trim + caseFold, the normalization used for every word comparison.
inline std::string normalizeWord(std::string_view s) { return caseFold(trim(s)); }

/// Remove Unicode punctuation code points from both ends.
std::string stripEdgePunctuation(std::string_view s);

/// Remove every CJK / full-width punctuation code point, wherever it occurs.
std::string stripCjkPunctuation(std::string_view s);

std::vector<std::string> splitTabs(std::string_view line);

/// Split a generated association list on ASCII/full-width commas, ideographic
/// commas, semicolons and newlines; drops empty pieces.
std::vector<std::string> splitWordList(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Quotes a CSV cell when it contains a comma, quote or newline.
std::string csvField(std::string_view s);

bool iequals(std::string_view a, std::string_view b);

/// Shortest round-trip decimal representation; used for every numeric cell
/// written to CSV so outputs are byte-stable.
std::string formatNumber(double v);

}  // namespace cprobe::text
