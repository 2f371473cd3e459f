#include "culture_probe/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "culture_probe/error.hpp"
#include "culture_probe/text.hpp"

namespace cprobe::metrics {

namespace {

std::vector<std::string> normalizedDistinct(const std::vector<std::string>& words) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& w : words) {
    std::string n = text::normalizeWord(w);
    if (n.empty() || !seen.insert(n).second) continue;
    out.push_back(std::move(n));
  }
  return out;
}

// Leading list markers a model may put before "Rank": "-", "*", "•", "+", ">".
std::string_view stripBullets(std::string_view line) {
  while (true) {
    const auto before = line.size();
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
    if (!line.empty() && (line.front() == '-' || line.front() == '*' || line.front() == '+' || line.front() == '>'))
      line.remove_prefix(1);
    if (line.substr(0, 3) == "\xE2\x80\xA2") line.remove_prefix(3);
    if (line.size() == before) return line;
  }
}

// Parses "rank <digits> <sep> <word>", returns the word or empty.
std::string parseRankLine(std::string_view line) {
  line = stripBullets(line);
  if (line.size() < 4 || !text::iequals(line.substr(0, 4), "rank")) return {};
  line.remove_prefix(4);
  while (!line.empty() && (line.front() == ' ' || line.front() == '#')) line.remove_prefix(1);
  std::size_t digits = 0;
  while (digits < line.size() && std::isdigit(static_cast<unsigned char>(line[digits]))) ++digits;
  if (digits == 0) return {};
  line.remove_prefix(digits);
  while (!line.empty() && (line.front() == ' ' || line.front() == '*')) line.remove_prefix(1);
  if (line.empty() || (line.front() != ':' && line.front() != '.' && line.front() != ')' && line.front() != '-'))
    return {};
  line.remove_prefix(1);
  std::string word = text::trim(line);
  // Markdown emphasis around the word, e.g. "**cat**".
  while (!word.empty() && (word.front() == '*' || word.front() == '_')) word.erase(word.begin());
  while (!word.empty() && (word.back() == '*' || word.back() == '_')) word.pop_back();
  return text::normalizeWord(word);
}

}  // namespace

ParsedRanking parseRankedResponse(const std::string& response) {
  ParsedRanking out;
  std::string_view body = response;
  // ASCII case-insensitive scan for the last marker.
  std::size_t marker = std::string::npos;
  for (std::size_t pos = 0; pos + 14 <= response.size(); ++pos) {
    if (text::iequals(std::string_view(response).substr(pos, 14), "final ranking:")) marker = pos;
  }
  if (marker != std::string::npos) body = body.substr(marker + 14);

  std::set<std::string> seen;
  std::size_t start = 0;
  while (start <= body.size()) {
    std::size_t end = body.find('\n', start);
    if (end == std::string_view::npos) end = body.size();
    std::string_view line = body.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::string word = parseRankLine(line);
    if (!word.empty()) {
      if (seen.insert(word).second) {
        out.orderedWords.push_back(std::move(word));
      } else {
        out.parseWarnings.push_back("duplicate word '" + word + "' ignored");
      }
    }
    start = end + 1;
  }
  if (out.orderedWords.empty()) out.parseWarnings.push_back("no 'Rank <n>: <word>' lines found");
  return out;
}

double rankingReward(const std::vector<std::string>& predicted, const std::vector<std::string>& groundTruth) {
  std::unordered_map<std::string, std::size_t> truthIndex;
  for (std::size_t i = 0; i < groundTruth.size(); ++i) truthIndex.emplace(text::normalizeWord(groundTruth[i]), i);

  std::vector<double> predRanks, truthRanks;
  for (const auto& w : normalizedDistinct(predicted)) {
    auto it = truthIndex.find(w);
    if (it == truthIndex.end()) continue;
    predRanks.push_back(static_cast<double>(predRanks.size()));
    truthRanks.push_back(static_cast<double>(it->second));
  }
  const auto rho = spearman(predRanks, truthRanks);
  return rho ? *rho : -1.0;
}

double rankingReward(const std::string& responseText, const std::vector<std::string>& groundTruth) {
  return rankingReward(parseRankedResponse(responseText).orderedWords, groundTruth);
}

double precisionAtK(const std::vector<std::string>& generated, const std::vector<std::string>& humanTopK,
                    std::size_t k) {
  if (k == 0) throw ValidationError("precisionAtK requires k >= 1");
  std::set<std::string> human;
  for (const auto& w : humanTopK) human.insert(text::normalizeWord(w));
  const auto gen = normalizedDistinct(generated);
  const std::size_t n = std::min(k, gen.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) hits += human.count(gen[i]);
  return static_cast<double>(hits) / static_cast<double>(k);
}

std::optional<double> generationSpearman(const std::vector<std::string>& generated,
                                         const std::vector<std::string>& humanOrder) {
  std::unordered_map<std::string, std::size_t> humanIndex;
  for (std::size_t i = 0; i < humanOrder.size(); ++i) humanIndex.emplace(text::normalizeWord(humanOrder[i]), i);
  std::vector<double> genRanks, humanRanks;
  for (const auto& w : normalizedDistinct(generated)) {
    auto it = humanIndex.find(w);
    if (it == humanIndex.end()) continue;
    genRanks.push_back(static_cast<double>(genRanks.size()));
    humanRanks.push_back(static_cast<double>(it->second));
  }
  if (genRanks.size() < 2) return std::nullopt;
  return spearman(genRanks, humanRanks);
}

GenerationEvalReport evaluateGenerationRun(const std::map<std::string, std::vector<std::string>>& generations,
                                           const corpus::AssociationTable& table,
                                           const std::vector<std::size_t>& ks) {
  GenerationEvalReport report;
  report.ks = ks;
  for (auto k : ks) {
    if (k == 0) throw ValidationError("K values must be >= 1");
  }
  for (const auto& [cue, words] : generations) {
    if (!table.contains(cue)) {
      report.errors.push_back("unknown cue '" + cue + "'");
      continue;
    }
    CueMetrics m;
    for (auto k : ks) m.precisionAtK[k] = precisionAtK(words, corpus::topK(table, cue, k), k);
    m.spearman = generationSpearman(words, corpus::topK(table, cue, table.responses(cue).size()));
    report.perCue.emplace(cue, std::move(m));
  }
  if (!report.perCue.empty()) {
    for (auto k : ks) {
      double sum = 0;
      for (const auto& [_, m] : report.perCue) sum += m.precisionAtK.at(k);
      report.meanPrecision[k] = sum / static_cast<double>(report.perCue.size());
    }
    double sum = 0;
    for (const auto& [_, m] : report.perCue) {
      if (m.spearman) {
        sum += *m.spearman;
        ++report.spearmanCount;
      }
    }
    if (report.spearmanCount) report.meanSpearman = sum / static_cast<double>(report.spearmanCount);
  }
  return report;
}

RankingEvalReport evaluateRankingRun(const std::map<std::string, std::string>& responses,
                                     const corpus::AssociationTable& table, std::size_t n) {
  RankingEvalReport report;
  double sum = 0;
  for (const auto& [cue, raw] : responses) {
    if (!table.contains(cue)) {
      report.errors.push_back("unknown cue '" + cue + "'");
      continue;
    }
    const double r = rankingReward(raw, corpus::topK(table, cue, n));
    report.perCue.emplace(cue, r);
    sum += r;
  }
  if (!report.perCue.empty()) report.meanReward = sum / static_cast<double>(report.perCue.size());
  return report;
}

std::string reportToJson(const GenerationEvalReport& report) {
  nlohmann::ordered_json j;
  j["ks"] = report.ks;
  nlohmann::ordered_json means;
  for (const auto& [k, v] : report.meanPrecision) means["p_at_" + std::to_string(k)] = v;
  means["spearman"] = report.meanSpearman ? nlohmann::ordered_json(*report.meanSpearman) : nullptr;
  means["spearman_cues"] = report.spearmanCount;
  means["cues"] = report.perCue.size();
  j["means"] = means;
  nlohmann::ordered_json per = nlohmann::ordered_json::object();
  for (const auto& [cue, m] : report.perCue) {
    nlohmann::ordered_json row;
    for (const auto& [k, v] : m.precisionAtK) row["p_at_" + std::to_string(k)] = v;
    row["spearman"] = m.spearman ? nlohmann::ordered_json(*m.spearman) : nullptr;
    per[cue] = row;
  }
  j["perCue"] = per;
  j["errors"] = report.errors;
  return j.dump(2) + "\n";
}

std::string reportToCsv(const GenerationEvalReport& report) {
  std::ostringstream out;
  out << "cue";
  for (auto k : report.ks) out << ",p_at_" << k;
  out << ",spearman\n";
  for (const auto& [cue, m] : report.perCue) {
    out << text::csvField(cue);
    for (auto k : report.ks) out << ',' << text::formatNumber(m.precisionAtK.at(k));
    out << ',' << (m.spearman ? text::formatNumber(*m.spearman) : "") << '\n';
  }
  return out.str();
}

}  // namespace cprobe::metrics
