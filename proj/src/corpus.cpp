#include "culture_probe/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "culture_probe/error.hpp"
#include "culture_probe/random.hpp"
#include "culture_probe/text.hpp"

namespace cprobe::corpus {

namespace {

ResponsePosition parsePosition(const std::string& raw, bool& ok) {
  ok = true;
  const std::string s = text::trim(raw);
  if (s.empty() || text::iequals(s, "unknown")) return ResponsePosition::Unknown;
  if (text::iequals(s, "R1") || s == "1") return ResponsePosition::R1;
  if (text::iequals(s, "R2") || s == "2") return ResponsePosition::R2;
  if (text::iequals(s, "R3") || s == "3") return ResponsePosition::R3;
  ok = false;
  return ResponsePosition::Unknown;
}

std::optional<std::string> optionalCell(const std::vector<std::string>& cells, int column) {
  if (column < 0) return std::nullopt;
  std::string v = text::trim(cells[static_cast<std::size_t>(column)]);
  if (v.empty()) return std::nullopt;
  return v;
}

int findColumn(const std::vector<std::string>& header, std::initializer_list<const char*> names) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string h = text::trim(header[i]);
    for (const char* n : names) {
      if (text::iequals(h, n)) return static_cast<int>(i);
    }
  }
  return -1;
}

bool orderedBefore(const ResponseCount& a, const ResponseCount& b) {
  if (a.count != b.count) return a.count > b.count;
  return a.response < b.response;
}

}  // namespace

CorpusFormat parseCorpusFormat(const std::string& name) {
  if (text::iequals(name, "long") || text::iequals(name, "longTSV")) return CorpusFormat::LongTsv;
  if (text::iequals(name, "aggregated") || text::iequals(name, "aggregatedTSV"))
    return CorpusFormat::AggregatedTsv;
  throw ValidationError("unknown corpus format '" + name + "' (expected long or aggregated)");
}

IngestResult ingest(std::istream& in, CorpusFormat format) {
  IngestResult result;
  std::string line;
  std::size_t lineNo = 0;

  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!text::trim(line).empty()) {
      header = text::splitTabs(line);
      break;
    }
  }
  if (header.empty()) throw ValidationError("corpus file is empty (no header row)");

  const int cueCol = findColumn(header, {"cue"});
  const int responseCol = findColumn(header, {"response"});
  if (cueCol < 0 || responseCol < 0)
    throw ValidationError("header must name 'cue' and 'response' columns");

  int participantCol = -1, countryCol = -1, nativeCol = -1, positionCol = -1, countCol = -1;
  if (format == CorpusFormat::LongTsv) {
    participantCol = findColumn(header, {"participantId", "participant", "participantID"});
    countryCol = findColumn(header, {"country"});
    nativeCol = findColumn(header, {"nativeLanguage", "native_language"});
    positionCol = findColumn(header, {"responsePosition", "position"});
    if (participantCol < 0) throw ValidationError("long format header must name a 'participantId' column");
  } else {
    countCol = findColumn(header, {"count"});
    if (countCol < 0) throw ValidationError("aggregated format header must name a 'count' column");
  }

  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = text::splitTabs(line);
    if (cells.size() != header.size()) {
      result.errors.push_back({lineNo, "expected " + std::to_string(header.size()) + " columns, found " +
                                           std::to_string(cells.size())});
      continue;
    }
    AssociationRecord rec;
    rec.cue = text::trim(cells[static_cast<std::size_t>(cueCol)]);
    rec.response = text::trim(cells[static_cast<std::size_t>(responseCol)]);
    // SWOW marks unanswered slots with these placeholders.
    if (rec.response == "NA" || text::iequals(rec.response, "No more responses")) rec.response.clear();
    if (rec.cue.empty() || rec.response.empty()) {
      result.skippedEmptyLines.push_back(lineNo);
      continue;
    }
    if (format == CorpusFormat::LongTsv) {
      rec.participantId = optionalCell(cells, participantCol);
      rec.country = optionalCell(cells, countryCol);
      rec.nativeLanguage = optionalCell(cells, nativeCol);
      if (positionCol >= 0) {
        bool ok = true;
        rec.position = parsePosition(cells[static_cast<std::size_t>(positionCol)], ok);
        if (!ok) {
          result.errors.push_back({lineNo, "invalid responsePosition '" +
                                               cells[static_cast<std::size_t>(positionCol)] + "'"});
          continue;
        }
      }
    } else {
      const std::string raw = text::trim(cells[static_cast<std::size_t>(countCol)]);
      std::uint64_t count = 0;
      std::size_t used = 0;
      try {
        count = std::stoull(raw, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != raw.size() || raw.empty() || raw[0] == '-' || count == 0) {
        result.errors.push_back({lineNo, "count must be a positive integer, got '" + raw + "'"});
        continue;
      }
      rec.count = count;
    }
    result.records.push_back(std::move(rec));
  }
  return result;
}

IngestResult ingest(const std::filesystem::path& path, CorpusFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus file " + path.string());
  return ingest(in, format);
}

FilterResult filterRecords(const std::vector<AssociationRecord>& records, const FilterSpec& spec) {
  FilterResult out;
  if (spec.empty()) {
    out.records = records;
    return out;
  }
  const auto wantCountry = spec.country ? std::optional(text::normalizeWord(*spec.country)) : std::nullopt;
  const auto wantNative =
      spec.nativeLanguage ? std::optional(text::normalizeWord(*spec.nativeLanguage)) : std::nullopt;
  for (const auto& r : records) {
    if ((wantCountry && !r.country) || (wantNative && !r.nativeLanguage)) {
      ++out.missingMetadata;
      continue;
    }
    if (wantCountry && text::normalizeWord(*r.country) != *wantCountry) continue;
    if (wantNative && text::normalizeWord(*r.nativeLanguage) != *wantNative) continue;
    out.records.push_back(r);
  }
  return out;
}

AssociationTable::AssociationTable(Entries entries) : entries_(std::move(entries)) {
  for (auto& [cue, list] : entries_) {
    if (cue.empty()) throw ValidationError("association table contains an empty cue");
    std::sort(list.begin(), list.end(), orderedBefore);
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (list[i].count == 0) throw ValidationError("zero count for response '" + list[i].response + "'");
      total += list[i].count;
    }
    std::set<std::string> seen;
    for (const auto& rc : list) {
      if (!seen.insert(rc.response).second)
        throw ValidationError("duplicate response '" + rc.response + "' for cue '" + cue + "'");
    }
    totals_[cue] = total;
  }
}

const std::vector<ResponseCount>& AssociationTable::responses(const std::string& cue) const {
  auto it = entries_.find(cue);
  if (it == entries_.end()) throw UnknownCueError(cue);
  return it->second;
}

std::uint64_t AssociationTable::total(const std::string& cue) const {
  auto it = totals_.find(cue);
  if (it == totals_.end()) throw UnknownCueError(cue);
  return it->second;
}

std::uint64_t AssociationTable::countOf(const std::string& cue, const std::string& response) const {
  for (const auto& rc : responses(cue)) {
    if (rc.response == response) return rc.count;
  }
  return 0;
}

std::vector<std::string> AssociationTable::cues() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [cue, _] : entries_) out.push_back(cue);
  return out;
}

AssociationTable aggregate(const std::vector<AssociationRecord>& records) {
  if (records.empty()) throw ValidationError("cannot aggregate an empty record list");
  std::map<std::string, std::map<std::string, std::uint64_t>> counts;
  for (const auto& r : records) {
    const std::string cue = text::trim(r.cue);
    const std::string response = text::normalizeWord(r.response);
    if (cue.empty() || response.empty()) continue;
    counts[cue][response] += r.count;
  }
  AssociationTable::Entries entries;
  for (auto& [cue, responses] : counts) {
    auto& list = entries[cue];
    list.reserve(responses.size());
    for (auto& [response, count] : responses) list.push_back({response, count});
  }
  return AssociationTable(std::move(entries));
}

void writeAggregatedTsv(const AssociationTable& table, std::ostream& out) {
  out << "cue\tresponse\tcount\n";
  for (const auto& [cue, list] : table.entries()) {
    for (const auto& rc : list) out << cue << '\t' << rc.response << '\t' << rc.count << '\n';
  }
}

void writeAggregatedTsv(const AssociationTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  writeAggregatedTsv(table, out);
  if (!out) throw IoError("write failed for " + path.string());
}

AssociationTable readAggregatedTable(const std::filesystem::path& path) {
  auto result = ingest(path, CorpusFormat::AggregatedTsv);
  if (!result.errors.empty()) {
    const auto& e = result.errors.front();
    throw ValidationError(path.string() + ":" + std::to_string(e.line) + ": " + e.message);
  }
  return aggregate(result.records);
}

std::vector<std::string> topK(const AssociationTable& table, const std::string& cue, std::size_t k) {
  const auto& list = table.responses(cue);
  std::vector<std::string> out;
  const std::size_t n = std::min(k, list.size());
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(list[i].response);
  return out;
}

CorpusSplit splitByCue(const AssociationTable& table, std::array<double, 3> ratios, std::uint64_t seed) {
  double sum = 0;
  for (double r : ratios) {
    if (!(r >= 0.0)) throw ValidationError("split ratios must be non-negative");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("split ratios must sum to 1");

  std::vector<std::string> cues = table.cues();
  const std::size_t partitions =
      static_cast<std::size_t>(std::count_if(ratios.begin(), ratios.end(), [](double r) { return r > 0; }));
  if (cues.size() < 3 || cues.size() < partitions)
    throw ValidationError("need at least 3 cues to split, have " + std::to_string(cues.size()));

  const auto n = static_cast<double>(cues.size());
  std::array<std::size_t, 3> sizes{};
  sizes[0] = static_cast<std::size_t>(std::llround(ratios[0] * n));
  sizes[1] = std::min(static_cast<std::size_t>(std::llround(ratios[1] * n)), cues.size() - sizes[0]);
  sizes[2] = cues.size() - sizes[0] - sizes[1];
  if (ratios[2] == 0.0) {
    sizes[1] += sizes[2];
    sizes[2] = 0;
  }
  // Every partition with a non-zero ratio gets at least one cue; take it from
  // the largest partition.
  for (std::size_t p = 0; p < 3; ++p) {
    if (ratios[p] > 0 && sizes[p] == 0) {
      auto largest = std::max_element(sizes.begin(), sizes.end());
      --*largest;
      ++sizes[p];
    }
  }

  Rng rng(seed);
  rng.shuffle(cues);

  CorpusSplit split;
  split.seed = seed;
  split.ratios = ratios;
  auto it = cues.begin();
  split.train.assign(it, it + static_cast<std::ptrdiff_t>(sizes[0]));
  it += static_cast<std::ptrdiff_t>(sizes[0]);
  split.valid.assign(it, it + static_cast<std::ptrdiff_t>(sizes[1]));
  it += static_cast<std::ptrdiff_t>(sizes[1]);
  split.test.assign(it, cues.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.valid.begin(), split.valid.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::string splitToJson(const CorpusSplit& split) {
  nlohmann::ordered_json j;
  j["seed"] = split.seed;
  j["ratios"] = split.ratios;
  j["train"] = split.train;
  j["valid"] = split.valid;
  j["test"] = split.test;
  return j.dump(2) + "\n";
}

CorpusSplit splitFromJson(const std::string& json) {
  try {
    const auto j = nlohmann::json::parse(json);
    CorpusSplit s;
    s.seed = j.at("seed").get<std::uint64_t>();
    s.ratios = j.at("ratios").get<std::array<double, 3>>();
    s.train = j.at("train").get<std::vector<std::string>>();
    s.valid = j.at("valid").get<std::vector<std::string>>();
    s.test = j.at("test").get<std::vector<std::string>>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed split manifest: ") + e.what());
  }
}

}  // namespace cprobe::corpus
