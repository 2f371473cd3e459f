#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cprobe::corpus {

enum class ResponsePosition { R1, R2, R3, Unknown };

struct AssociationRecord {
  std::string cue;
  std::string response;
  std::optional<std::string> participantId;
  std::optional<std::string> country;
  std::optional<std::string> nativeLanguage;
  ResponsePosition position = ResponsePosition::Unknown;
  /// Number of logical occurrences; > 1 only for aggregated input rows.
  std::uint64_t count = 1;
};

enum class CorpusFormat { LongTsv, AggregatedTsv };

CorpusFormat parseCorpusFormat(const std::string& name);

struct RowError {
  std::size_t line = 0;
  std::string message;
};

struct IngestResult {
  std::vector<AssociationRecord> records;
  std::vector<RowError> errors;
  /// Rows dropped because the cue or response was empty after trimming, or
  /// the response was a missing-answer placeholder ("NA", "No more responses").
  std::vector<std::size_t> skippedEmptyLines;
};

/// Reads a SWOW-style TSV. Column positions come from the header row.
/// Malformed rows are collected in IngestResult::errors, never thrown;
/// an empty file (no header) throws ValidationError.
IngestResult ingest(std::istream& in, CorpusFormat format);
IngestResult ingest(const std::filesystem::path& path, CorpusFormat format);

struct FilterSpec {
  std::optional<std::string> country;
  std::optional<std::string> nativeLanguage;

  bool empty() const { return !country && !nativeLanguage; }
};

struct FilterResult {
  std::vector<AssociationRecord> records;
  /// Records dropped because a required metadata field was absent.
  std::size_t missingMetadata = 0;
};

/// Keeps records whose every non-empty criterion matches (trimmed,
/// case-insensitive). An empty spec is the identity.
FilterResult filterRecords(const std::vector<AssociationRecord>& records, const FilterSpec& spec);

struct ResponseCount {
  std::string response;
  std::uint64_t count = 0;

  friend bool operator==(const ResponseCount&, const ResponseCount&) = default;
};

/// Cue -> responses ordered by count descending, ties by response ascending.
/// Immutable after construction.
class AssociationTable {
 public:
  using Entries = std::map<std::string, std::vector<ResponseCount>>;

  AssociationTable() = default;
  /// Sorts each cue's list into canonical order; throws ValidationError on
  /// duplicate responses, zero counts or empty cues.
  explicit AssociationTable(Entries entries);

  bool contains(const std::string& cue) const { return entries_.count(cue) != 0; }
  /// Throws UnknownCueError.
  const std::vector<ResponseCount>& responses(const std::string& cue) const;
  std::uint64_t total(const std::string& cue) const;
  /// Count of response for cue, 0 if absent.
  std::uint64_t countOf(const std::string& cue, const std::string& response) const;

  std::vector<std::string> cues() const;
  std::size_t size() const { return entries_.size(); }
  const Entries& entries() const { return entries_; }
  const std::map<std::string, std::uint64_t>& totals() const { return totals_; }

  friend bool operator==(const AssociationTable& a, const AssociationTable& b) {
    return a.entries_ == b.entries_;
  }

 private:
  Entries entries_;
  std::map<std::string, std::uint64_t> totals_;
};

/// Counts (cue, response) occurrences. Responses are normalized with
/// trim + Unicode case folding before counting; cues are trimmed.
AssociationTable aggregate(const std::vector<AssociationRecord>& records);

void writeAggregatedTsv(const AssociationTable& table, std::ostream& out);
void writeAggregatedTsv(const AssociationTable& table, const std::filesystem::path& path);

/// Table saved by writeAggregatedTsv, re-ingested and re-aggregated.
AssociationTable readAggregatedTable(const std::filesystem::path& path);

/// First min(k, available) responses in table order.
std::vector<std::string> topK(const AssociationTable& table, const std::string& cue, std::size_t k);

struct CorpusSplit {
  std::vector<std::string> train;
  std::vector<std::string> valid;
  std::vector<std::string> test;
  std::uint64_t seed = 0;
  std::array<double, 3> ratios{0.8, 0.1, 0.1};
};

/// Deterministic by-cue partition. The sorted cue list is shuffled with the
/// seeded generator; train takes round(r0*N) cues, valid round(r1*N), test the
/// rest, with every non-zero ratio guaranteed at least one cue. Output sets
/// are sorted.
CorpusSplit splitByCue(const AssociationTable& table, std::array<double, 3> ratios = {0.8, 0.1, 0.1},
                       std::uint64_t seed = 0);

std::string splitToJson(const CorpusSplit& split);
CorpusSplit splitFromJson(const std::string& json);

}  // namespace cprobe::corpus
