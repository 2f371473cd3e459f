#include "culture_probe/psychnorms.hpp"

#include <Eigen/Core>

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "culture_probe/error.hpp"
#include "culture_probe/ranks.hpp"

namespace cprobe::psychnorms {

void ScaleSpec::validate() const {
  if (!(sourceMin < sourceMax)) throw ValidationError("scale: sourceMin must be < sourceMax");
  if (!(targetMin < targetMax)) throw ValidationError("scale: targetMin must be < targetMax");
}

double ScaleSpec::rescale(double s) const {
  const double reflected = inverted ? sourceMax + sourceMin - s : s;
  return targetMin + (reflected - sourceMin) / (sourceMax - sourceMin) * (targetMax - targetMin);
}

ScaleSpec loadScaleSpec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open scale file " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    ScaleSpec s;
    s.sourceMin = j.at("sourceMin").get<double>();
    s.sourceMax = j.at("sourceMax").get<double>();
    s.targetMin = j.at("targetMin").get<double>();
    s.targetMax = j.at("targetMax").get<double>();
    s.inverted = j.value("inverted", false);
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed scale file " + path.string() + ": " + e.what());
  }
}

LemmaTable loadLemmaTable(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open lemma table " + path.string());
  LemmaTable table;
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    const auto cells = text::splitTabs(line);
    if (cells.size() != 2)
      throw ValidationError(path.string() + ":" + std::to_string(lineNo) + ": expected surface<TAB>lemma");
    const std::string surface = text::normalizeWord(cells[0]);
    if (lineNo == 1 && surface == "surface") continue;
    table.emplace(surface, text::normalizeWord(cells[1]));
  }
  return table;
}

std::string normalizeToken(std::string_view token, text::Language language, const LemmaTable* lemmas) {
  std::string t = text::stripEdgePunctuation(text::normalizeWord(token));
  t = text::trim(t);
  if (language == text::Language::Zh) return text::trim(text::stripCjkPunctuation(t));
  if (lemmas) {
    auto it = lemmas->find(t);
    if (it != lemmas->end()) return it->second;
  }
  return t;
}

std::optional<double> NormLexicon::lookup(const std::string& normalizedWord) const {
  auto it = scores.find(normalizedWord);
  if (it == scores.end()) return std::nullopt;
  return it->second;
}

LexiconLoadResult loadLexicon(const std::filesystem::path& path, const ScaleSpec& scale, text::Language language) {
  scale.validate();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open lexicon " + path.string());
  LexiconLoadResult result;
  result.lexicon.scale = scale;
  result.lexicon.language = language;
  std::string line;
  std::size_t lineNo = 0;
  bool headerSeen = false;
  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    if (!headerSeen) {
      headerSeen = true;
      continue;
    }
    const auto cells = text::splitTabs(line);
    if (cells.size() != 2) {
      result.errors.push_back({lineNo, "expected word<TAB>score"});
      continue;
    }
    const std::string raw = text::trim(cells[1]);
    double score = 0;
    std::size_t used = 0;
    try {
      score = std::stod(raw, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != raw.size() || !std::isfinite(score)) {
      result.errors.push_back({lineNo, "score is not a number: '" + raw + "'"});
      continue;
    }
    if (score < scale.sourceMin || score > scale.sourceMax) {
      result.errors.push_back({lineNo, "score " + raw + " outside source range [" +
                                           text::formatNumber(scale.sourceMin) + ", " +
                                           text::formatNumber(scale.sourceMax) + "]"});
      continue;
    }
    const std::string word = normalizeToken(cells[0], language);
    if (word.empty()) {
      result.errors.push_back({lineNo, "empty word"});
      continue;
    }
    if (!result.lexicon.scores.emplace(word, scale.rescale(score)).second) {
      result.warnings.push_back("line " + std::to_string(lineNo) + ": duplicate word '" + word + "', keeping first");
    }
  }
  if (!headerSeen) throw ValidationError("lexicon " + path.string() + " is empty");
  return result;
}

CueProfile cueProfile(const std::string& cue, const std::vector<std::string>& words, const Lexicons& lexicons,
                      const ProfileThresholds& thresholds) {
  CueProfile p;
  p.cue = cue;
  p.words = words.size();
  if (words.empty()) return p;

  std::vector<double> valence, arousal, concreteness;
  std::size_t emotional = 0, concrete = 0, abstract = 0;
  const double mid = lexicons.valence.scale.targetMidpoint();
  for (const auto& w : words) {
    const std::string token = normalizeToken(w, lexicons.language, &lexicons.lemmas);
    if (auto v = lexicons.valence.lookup(token)) {
      valence.push_back(*v);
      if (std::abs(*v - mid) >= thresholds.emotionalDelta) ++emotional;
    }
    if (auto a = lexicons.arousal.lookup(token)) arousal.push_back(*a);
    if (auto c = lexicons.concreteness.lookup(token)) {
      concreteness.push_back(*c);
      if (*c >= thresholds.concBoundary) {
        ++concrete;
      } else {
        ++abstract;
      }
    }
  }
  p.matchedValence = valence.size();
  p.matchedArousal = arousal.size();
  p.matchedConcreteness = concreteness.size();
  p.medianValence = median(valence);
  p.medianArousal = median(arousal);
  p.medianConcreteness = median(concreteness);
  const auto n = static_cast<double>(words.size());
  p.concPct = static_cast<double>(concrete) / n;
  p.absPct = static_cast<double>(abstract) / n;
  p.unkPct = static_cast<double>(words.size() - concrete - abstract) / n;
  p.emotionalPct = valence.empty() ? 0.0 : static_cast<double>(emotional) / static_cast<double>(valence.size());
  return p;
}

namespace {

double normalCdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

WilcoxonResult wilcoxonSignedRank(const std::vector<std::pair<double, double>>& pairs,
                                  const WilcoxonOptions& options) {
  if (pairs.empty()) throw ValidationError("wilcoxon test needs at least one pair");
  std::vector<double> diffs;
  for (const auto& [a, b] : pairs) {
    if (!std::isfinite(a) || !std::isfinite(b)) throw ValidationError("wilcoxon test inputs must be finite");
    const double d = a - b;
    if (d != 0.0) diffs.push_back(d);
  }

  WilcoxonResult r;
  r.nEffective = diffs.size();
  if (diffs.empty()) {
    r.pValue = 1.0;
    r.method = TestMethod::Exact;
    return r;
  }

  const auto n = static_cast<Eigen::Index>(diffs.size());
  const Eigen::Map<const Eigen::VectorXd> d(diffs.data(), n);
  const Eigen::VectorXd ranks = fractionalRanks(d.cwiseAbs());
  for (Eigen::Index i = 0; i < n; ++i) (d(i) > 0 ? r.wPlus : r.wMinus) += ranks(i);
  r.statistic = std::min(r.wPlus, r.wMinus);

  if (diffs.size() <= options.exactCutoff) {
    r.method = TestMethod::Exact;
    // Null distribution of 2*W+ by subset-sum counting; doubling makes the
    // half-integer tie ranks integral.
    std::vector<long> doubled(diffs.size());
    long total = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      doubled[static_cast<std::size_t>(i)] = std::lround(2.0 * ranks(i));
      total += doubled[static_cast<std::size_t>(i)];
    }
    std::vector<double> ways(static_cast<std::size_t>(total) + 1, 0.0);
    ways[0] = 1.0;
    long reach = 0;
    for (long w : doubled) {
      reach += w;
      for (long s = reach; s >= w; --s) ways[static_cast<std::size_t>(s)] += ways[static_cast<std::size_t>(s - w)];
    }
    const double assignments = std::ldexp(1.0, static_cast<int>(diffs.size()));
    const long observedPlus = std::lround(2.0 * r.wPlus);
    const long observedMin = std::lround(2.0 * r.statistic);
    double hits = 0;
    for (long s = 0; s <= total; ++s) {
      const double c = ways[static_cast<std::size_t>(s)];
      if (c == 0) continue;
      bool extreme = false;
      switch (options.alternative) {
        case Alternative::TwoSided: extreme = std::min(s, total - s) <= observedMin; break;
        case Alternative::Less: extreme = s <= observedPlus; break;
        case Alternative::Greater: extreme = s >= observedPlus; break;
      }
      if (extreme) hits += c;
    }
    r.pValue = std::min(1.0, hits / assignments);
    return r;
  }

  r.method = TestMethod::NormalApprox;
  const double nn = static_cast<double>(diffs.size());
  const double mean = nn * (nn + 1.0) / 4.0;
  double tieTerm = 0.0;
  {
    std::vector<double> sorted(ranks.data(), ranks.data() + n);
    std::sort(sorted.begin(), sorted.end());
    std::size_t i = 0;
    while (i < sorted.size()) {
      std::size_t j = i;
      while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
      const double t = static_cast<double>(j - i + 1);
      tieTerm += t * t * t - t;
      i = j + 1;
    }
  }
  const double variance = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tieTerm / 48.0;
  if (variance <= 0.0) {
    r.pValue = 1.0;
    return r;
  }
  const double sd = std::sqrt(variance);
  switch (options.alternative) {
    case Alternative::TwoSided: {
      const double z = std::max(0.0, std::abs(r.wPlus - mean) - 0.5) / sd;
      r.pValue = std::min(1.0, 2.0 * (1.0 - normalCdf(z)));
      break;
    }
    case Alternative::Less: r.pValue = normalCdf((r.wPlus - mean + 0.5) / sd); break;
    case Alternative::Greater: r.pValue = 1.0 - normalCdf((r.wPlus - mean - 0.5) / sd); break;
  }
  r.pValue = std::clamp(r.pValue, 0.0, 1.0);
  return r;
}

std::string_view metricName(PsychMetric m) {
  switch (m) {
    case PsychMetric::Valence: return "valence";
    case PsychMetric::Arousal: return "arousal";
    case PsychMetric::Concreteness: return "concreteness";
  }
  return "?";
}

namespace {

const std::optional<double>& metricOf(const CueProfile& p, PsychMetric m) {
  switch (m) {
    case PsychMetric::Valence: return p.medianValence;
    case PsychMetric::Arousal: return p.medianArousal;
    case PsychMetric::Concreteness: break;
  }
  return p.medianConcreteness;
}

}  // namespace

ProfileComparison compareProfiles(const std::map<std::string, CueProfile>& model,
                                  const std::map<std::string, CueProfile>& human, PsychMetric metric) {
  std::vector<std::pair<double, double>> pairs;
  std::vector<double> modelValues, humanValues;
  bool overlap = false;
  for (const auto& [cue, mp] : model) {
    auto it = human.find(cue);
    if (it == human.end()) continue;
    overlap = true;
    const auto& mv = metricOf(mp, metric);
    const auto& hv = metricOf(it->second, metric);
    if (!mv || !hv) continue;
    pairs.emplace_back(*mv, *hv);
    modelValues.push_back(*mv);
    humanValues.push_back(*hv);
  }
  if (!overlap) throw ValidationError("model and human profiles share no cues");
  if (pairs.empty())
    throw ValidationError("no shared cue has a defined " + std::string(metricName(metric)) + " median on both sides");

  ProfileComparison c;
  c.metric = metric;
  c.pairedCues = pairs.size();
  c.modelMedian = *median(modelValues);
  c.humanMedian = *median(humanValues);
  c.wilcoxon = wilcoxonSignedRank(pairs);
  c.indistinguishable = c.wilcoxon.pValue >= 0.05;
  return c;
}

CoverageSummary summarizeCoverage(const std::map<std::string, CueProfile>& profiles) {
  CoverageSummary s;
  if (profiles.empty()) return s;
  for (const auto& [_, p] : profiles) {
    s.emotionalPct += p.emotionalPct;
    s.concPct += p.concPct;
    s.absPct += p.absPct;
    s.unkPct += p.unkPct;
  }
  const auto n = static_cast<double>(profiles.size());
  s.emotionalPct /= n;
  s.concPct /= n;
  s.absPct /= n;
  s.unkPct /= n;
  return s;
}

std::string profilesToCsv(const std::map<std::string, CueProfile>& profiles) {
  std::ostringstream out;
  out << "cue,words,median_valence,median_arousal,median_concreteness,emotional_pct,conc_pct,abs_pct,unk_pct,"
         "matched_valence,matched_arousal,matched_concreteness\n";
  auto opt = [](const std::optional<double>& v) { return v ? text::formatNumber(*v) : std::string(); };
  for (const auto& [cue, p] : profiles) {
    out << text::csvField(cue) << ',' << p.words << ',' << opt(p.medianValence) << ',' << opt(p.medianArousal) << ','
        << opt(p.medianConcreteness) << ',' << text::formatNumber(p.emotionalPct) << ','
        << text::formatNumber(p.concPct) << ',' << text::formatNumber(p.absPct) << ','
        << text::formatNumber(p.unkPct) << ',' << p.matchedValence << ',' << p.matchedArousal << ','
        << p.matchedConcreteness << '\n';
  }
  return out.str();
}

}  // namespace cprobe::psychnorms
