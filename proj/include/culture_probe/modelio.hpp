#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "culture_probe/text.hpp"
#include "culture_probe/values.hpp"

namespace cprobe::modelio {

struct RetryPolicy {
  int retries = 2;
  std::chrono::milliseconds backoff{500};
};

/// Chat-completion endpoint. The API key is read from the environment
/// variable named by apiKeyEnv and never stored.
struct EndpointConfig {
  /// e.g. "http://127.0.0.1:8000/v1"; requests go to baseUrl + "/chat/completions".
  std::string baseUrl;
  std::string apiKeyEnv;
  std::string modelName;
  std::size_t maxConcurrentRequests = 1;
  double timeoutSeconds = 60.0;
  RetryPolicy retry;
  double temperature = 0.0;
  int maxTokens = 512;
  int topLogprobs = 20;

  void validate() const;
};

struct GenerationRecord {
  std::string cue;
  std::string rawText;
  std::vector<std::string> words;
  std::string modelName;
  std::string promptHash;

  friend bool operator==(const GenerationRecord&, const GenerationRecord&) = default;
};

struct OptionScoreRecord {
  std::string questionId;
  std::vector<std::string> optionSymbols;
  /// Aligned with optionSymbols; -inf for symbols the endpoint did not score.
  std::vector<double> logScores;
  /// Set when the source file carried probabilities instead of log-scores.
  std::optional<std::vector<double>> probs;
  std::string modelName;
  std::vector<std::string> flags;

  values::AnswerDistribution distribution() const;

  friend bool operator==(const OptionScoreRecord&, const OptionScoreRecord&) = default;
};

enum class OutputKind { Generation, Ranking, OptionScores };
OutputKind parseOutputKind(const std::string& name);
std::string_view outputKindName(OutputKind k);

struct LineError {
  std::size_t line = 0;
  std::string message;
};

struct OutputFile {
  std::vector<GenerationRecord> generations;
  std::vector<OptionScoreRecord> optionScores;
  std::vector<LineError> errors;
};

/// Reads JSON-lines model outputs, either plain records or collection
/// journal entries (only status "ok" entries are taken). Invalid lines are
/// reported in OutputFile::errors and skipped.
///   generation:   {cue, words[]} | {cue, rawText}  (rawText split on commas)
///   ranking:      {cue, rawText} | {cue, words[]}  (rawText parsed as "Rank n: w")
///   optionScores: {questionId, optionSymbols[]?, logScores[] (null = -inf) | probs[]}
OutputFile readOutputs(const std::filesystem::path& path, OutputKind kind);

std::string generationToJson(const GenerationRecord& r);
std::string optionScoresToJson(const OptionScoreRecord& r);

/// Hex SHA-256 of the rendered prompt.
std::string promptHash(std::string_view prompt);

struct PromptRequest {
  /// Cue for generation/ranking, question id for option scores.
  std::string key;
  std::string prompt;
};

struct CollectResult {
  std::vector<GenerationRecord> records;
  std::vector<std::string> failedKeys;
  std::size_t requested = 0;
  std::size_t skipped = 0;
};

/// One chat request per prompt. Each answer is appended to a JSON-lines
/// journal {promptHash, kind, payload, status, attempt, timestamp} in prompt
/// order; prompts already journaled with status "ok" are not requested again.
/// Failures are retried per the policy, then journaled with status "failed".
CollectResult collectGenerations(const EndpointConfig& config, const std::vector<PromptRequest>& prompts,
                                 const std::filesystem::path& journal, OutputKind kind = OutputKind::Generation);

/// Requests a one-token completion with top log-probabilities and reads the
/// score of each option symbol at the first position. Throws CapabilityError
/// when the endpoint returns no log-probabilities.
OptionScoreRecord collectOptionScores(const EndpointConfig& config, const values::SurveyQuestion& question,
                                      const std::string& renderedPrompt);

struct OptionScoreCollectResult {
  std::vector<OptionScoreRecord> records;
  std::vector<std::string> failedKeys;
  std::size_t requested = 0;
  std::size_t skipped = 0;
};

/// Journaled batch form of collectOptionScores.
OptionScoreCollectResult collectOptionScoresBatch(const EndpointConfig& config,
                                                  const std::vector<values::SurveyQuestion>& questions,
                                                  const std::filesystem::path& journal, text::Language language);

/// Question text followed by "symbol: label" lines and an answer instruction.
std::string renderSurveyPrompt(const values::SurveyQuestion& question, text::Language language);

}  // namespace cprobe::modelio
