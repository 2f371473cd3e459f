#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "culture_probe/corpus.hpp"
#include "culture_probe/ranks.hpp"

namespace cprobe::metrics {

struct ParsedRanking {
  std::vector<std::string> orderedWords;
  std::vector<std::string> parseWarnings;
};

/// Extracts "Rank <n>: <word>" lines, after the last "Final Ranking:" marker
/// when one is present. Words are trimmed and case-folded; repeated words keep
/// their first position.
ParsedRanking parseRankedResponse(const std::string& text);

using cprobe::spearman;

/// PPO ranking reward: predicted words restricted to the ground truth, both
/// sides mapped to rank indices, Spearman between them. Any undefined
/// correlation scores -1.0.
double rankingReward(const std::string& responseText, const std::vector<std::string>& groundTruth);

/// Same as rankingReward, on an already-parsed prediction.
double rankingReward(const std::vector<std::string>& predicted, const std::vector<std::string>& groundTruth);

/// |first min(k, |generated|) distinct generated words ∩ humanTopK| / k.
double precisionAtK(const std::vector<std::string>& generated, const std::vector<std::string>& humanTopK,
                    std::size_t k);

/// Spearman between generated order and human order over the words both lists
/// share. Undefined when fewer than two words are shared.
std::optional<double> generationSpearman(const std::vector<std::string>& generated,
                                         const std::vector<std::string>& humanOrder);

struct CueMetrics {
  std::map<std::size_t, double> precisionAtK;
  std::optional<double> spearman;
};

struct GenerationEvalReport {
  std::vector<std::size_t> ks;
  std::map<std::string, CueMetrics> perCue;
  std::map<std::size_t, double> meanPrecision;
  std::optional<double> meanSpearman;
  /// Number of cues contributing to meanSpearman.
  std::size_t spearmanCount = 0;
  std::vector<std::string> errors;
};

GenerationEvalReport evaluateGenerationRun(const std::map<std::string, std::vector<std::string>>& generations,
                                           const corpus::AssociationTable& table,
                                           const std::vector<std::size_t>& ks = {5, 10, 20, 30, 40});

struct RankingEvalReport {
  std::map<std::string, double> perCue;
  double meanReward = 0.0;
  std::vector<std::string> errors;
};

/// Scores ranking outputs (cue -> raw response text) against topK(table, cue, n).
RankingEvalReport evaluateRankingRun(const std::map<std::string, std::string>& responses,
                                     const corpus::AssociationTable& table, std::size_t n = 10);

std::string reportToJson(const GenerationEvalReport& report);
/// One row per cue: cue, p_at_<K>..., spearman (empty when undefined).
std::string reportToCsv(const GenerationEvalReport& report);

}  // namespace cprobe::metrics
