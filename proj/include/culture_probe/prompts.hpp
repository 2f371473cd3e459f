#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "culture_probe/corpus.hpp"
#include "culture_probe/random.hpp"
#include "culture_probe/text.hpp"

namespace cprobe::prompts {

/// Instruction bodies for the two training tasks. Placeholders:
///   [LOWER BOUND SIZE], [UPPER BOUND SIZE]  association-list bounds (SFT)
///   [RANK COUNT]                            number of candidates (ranking)
///   [CUE WORD]                              the cue, if a body wants it inline
/// The section frame ([CONTEXT] / [CUE WORD] / [ASSOCIATED WORDS]) is added by
/// the renderers and is not part of the template text.
struct PromptTemplates {
  std::string sftBody;
  std::string rankBody;
  text::Language language = text::Language::En;

  static PromptTemplates defaults(text::Language lang);
  /// Reads sft.<lang>.txt and rank.<lang>.txt from dir; a missing file falls
  /// back to the built-in default.
  static PromptTemplates load(const std::filesystem::path& dir, text::Language lang);
};

/// Separator between words of a rendered association list.
std::string_view listSeparator(text::Language lang);

std::string replaceAll(std::string s, std::string_view from, std::string_view to);

struct BoundsPolicy {
  int minLo = 10;
  int maxLo = 20;
  int minHi = 40;
  int maxHi = 80;
  int minGap = 10;

  /// Throws ValidationError unless every lower bound in [minLo, maxLo] admits
  /// an upper bound in [max(minHi, lo + minGap), maxHi].
  void validate() const;
};

struct SftExample {
  std::string cue;
  std::vector<std::string> orderedResponses;
  int lowerBound = 0;
  int upperBound = 0;
  std::string renderedPrompt;
  std::string target;
};

struct RankExample {
  std::string cue;
  std::vector<std::string> candidates;
  std::vector<std::string> groundTruthRanking;
  std::string renderedPrompt;
};

enum class McqCategory { HighFreqDirect, LowFreqDirect, Indirect, Random };

std::string_view categoryName(McqCategory c);

struct McqConfig {
  std::size_t kHigh = 4;
  std::size_t kLow = 4;
  std::size_t kIndirect = 3;
  std::size_t kRandom = 4;
  /// Number of the cue's top associates whose own associates feed the
  /// indirect category.
  std::size_t fanout = 3;
};

struct McqItem {
  std::string cue;
  std::map<McqCategory, std::vector<std::string>> options;
  /// Associate each indirect word was reached through, aligned with
  /// options[Indirect].
  std::vector<std::string> indirectSources;
  McqCategory correctCategory = McqCategory::HighFreqDirect;
  /// Order the categories are shown in (A, B, C, D); shuffled per item.
  std::vector<McqCategory> presentation;
};

std::string renderSftPrompt(const PromptTemplates& t, const std::string& cue, int lower, int upper);
std::string renderRankPrompt(const PromptTemplates& t, const std::string& cue,
                             const std::vector<std::string>& candidates);
/// "Final Ranking:\nRank 1: w1\n..." as expected from the model.
std::string renderRankingAnswer(const std::vector<std::string>& ranking);

SftExample makeSftExample(const std::string& cue, const corpus::AssociationTable& table,
                          const BoundsPolicy& bounds, Rng& rng,
                          const PromptTemplates& templates = PromptTemplates::defaults(text::Language::En));

RankExample makeRankExample(const std::string& cue, const corpus::AssociationTable& table, std::size_t n,
                            Rng& rng,
                            const PromptTemplates& templates = PromptTemplates::defaults(text::Language::En));

/// Builds a four-category distractor item. Throws ValidationError naming the
/// category that cannot be filled.
McqItem makeMcqItem(const std::string& cue, const corpus::AssociationTable& table, const McqConfig& config,
                    Rng& rng);

using CorpusExample = std::variant<SftExample, RankExample, McqItem>;

enum class CorpusKind { Sft, Rank, Mcq };
std::string_view corpusKindName(CorpusKind k);

struct ExportSummary {
  std::size_t lines = 0;
  std::vector<std::string> warnings;
};

/// One JSON object per line: {kind, cue, prompt, target | groundTruth | options}.
/// Examples whose type does not match kind are rejected.
ExportSummary exportCorpus(const std::vector<CorpusExample>& examples, const std::filesystem::path& path,
                           CorpusKind kind);

/// Reads a file written by exportCorpus back into examples.
std::vector<CorpusExample> readCorpus(const std::filesystem::path& path);

}  // namespace cprobe::prompts
