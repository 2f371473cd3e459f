#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "culture_probe/corpus.hpp"
#include "culture_probe/text.hpp"

namespace cprobe::psychnorms {

/// Declared source range of a lexicon and the span it is mapped onto.
struct ScaleSpec {
  double sourceMin = 1.0;
  double sourceMax = 9.0;
  double targetMin = 1.0;
  double targetMax = 9.0;
  /// Source 1 = high / sourceMax = low (e.g. 1 = "very concrete").
  bool inverted = false;

  void validate() const;
  /// Affine map onto the target span, reflected first when inverted.
  double rescale(double s) const;
  double targetMidpoint() const { return 0.5 * (targetMin + targetMax); }
};

/// Reads {sourceMin, sourceMax, targetMin, targetMax, inverted}.
ScaleSpec loadScaleSpec(const std::filesystem::path& path);

using LemmaTable = std::unordered_map<std::string, std::string>;

/// TSV surface<TAB>lemma, header row optional ("surface" / "lemma").
LemmaTable loadLemmaTable(const std::filesystem::path& path);

/// Case fold and strip edge punctuation. English tokens are replaced by their
/// lemma when lemmas has one; Mandarin tokens keep their surface form with
/// Chinese punctuation removed.
std::string normalizeToken(std::string_view token, text::Language language, const LemmaTable* lemmas = nullptr);

struct NormLexicon {
  std::unordered_map<std::string, double> scores;
  ScaleSpec scale;
  text::Language language = text::Language::En;

  std::optional<double> lookup(const std::string& normalizedWord) const;
};

struct LexiconLoadResult {
  NormLexicon lexicon;
  std::vector<corpus::RowError> errors;
  std::vector<std::string> warnings;
};

/// Two-column TSV word<TAB>score with a header row. Scores outside the source
/// range are row errors; repeated words keep the first score.
LexiconLoadResult loadLexicon(const std::filesystem::path& path, const ScaleSpec& scale, text::Language language);

struct Lexicons {
  NormLexicon valence;
  NormLexicon arousal;
  NormLexicon concreteness;
  LemmaTable lemmas;
  text::Language language = text::Language::En;
};

struct ProfileThresholds {
  /// Concreteness at or above this counts as concrete (target span units).
  double concBoundary = 4.0;
  /// |valence - midpoint| at or above this counts as emotional.
  double emotionalDelta = 1.0;
};

struct CueProfile {
  std::string cue;
  std::optional<double> medianValence;
  std::optional<double> medianArousal;
  std::optional<double> medianConcreteness;
  double emotionalPct = 0.0;
  double concPct = 0.0;
  double absPct = 0.0;
  double unkPct = 1.0;
  std::size_t matchedValence = 0;
  std::size_t matchedArousal = 0;
  std::size_t matchedConcreteness = 0;
  std::size_t words = 0;
};

template <typename T>
std::optional<double> median(std::vector<T> values) {
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return static_cast<double>(values[n / 2]);
  return 0.5 * (static_cast<double>(values[n / 2 - 1]) + static_cast<double>(values[n / 2]));
}

/// Scores one cue's association list. Tokens absent from a lexicon are
/// ignored for that lexicon's metric.
CueProfile cueProfile(const std::string& cue, const std::vector<std::string>& words, const Lexicons& lexicons,
                      const ProfileThresholds& thresholds = {});

enum class TestMethod { Exact, NormalApprox };
enum class Alternative { TwoSided, Less, Greater };

struct WilcoxonResult {
  /// min(W+, W-).
  double statistic = 0.0;
  double wPlus = 0.0;
  double wMinus = 0.0;
  std::size_t nEffective = 0;
  double pValue = 1.0;
  TestMethod method = TestMethod::Exact;
};

struct WilcoxonOptions {
  /// Exact distribution when nEffective <= exactCutoff, normal approximation
  /// (tie and continuity corrected) above.
  std::size_t exactCutoff = 12;
  /// Less: the first member of each pair tends to be smaller.
  Alternative alternative = Alternative::TwoSided;
};

/// Paired signed-rank test on (first, second) pairs; differences are
/// first - second, zeros dropped, |d| ranked with fractional ties.
WilcoxonResult wilcoxonSignedRank(const std::vector<std::pair<double, double>>& pairs,
                                  const WilcoxonOptions& options = {});

enum class PsychMetric { Valence, Arousal, Concreteness };
std::string_view metricName(PsychMetric m);

struct ProfileComparison {
  PsychMetric metric = PsychMetric::Valence;
  double modelMedian = 0.0;
  double humanMedian = 0.0;
  std::size_t pairedCues = 0;
  WilcoxonResult wilcoxon;
  /// p >= 0.05: the test fails to reject equality.
  bool indistinguishable = true;
};

/// Pairs per-cue medians on cues both sides define; throws ValidationError
/// when no cue can be paired.
ProfileComparison compareProfiles(const std::map<std::string, CueProfile>& model,
                                  const std::map<std::string, CueProfile>& human, PsychMetric metric);

/// Means of the coverage rows over a set of profiles.
struct CoverageSummary {
  double emotionalPct = 0.0;
  double concPct = 0.0;
  double absPct = 0.0;
  double unkPct = 0.0;
};
CoverageSummary summarizeCoverage(const std::map<std::string, CueProfile>& profiles);

std::string profilesToCsv(const std::map<std::string, CueProfile>& profiles);

}  // namespace cprobe::psychnorms
