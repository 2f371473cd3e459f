#include "culture_probe/values.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "culture_probe/text.hpp"

namespace cprobe::values {

AnswerDistribution AnswerDistribution::fromProbabilities(Eigen::VectorXd probs) {
  if (probs.size() < 1) throw ValidationError("empty distribution");
  if (!probs.allFinite() || (probs.array() < 0.0).any())
    throw ValidationError("probabilities must be finite and non-negative");
  if (std::abs(probs.sum() - 1.0) > 1e-9)
    throw ValidationError("probabilities sum to " + text::formatNumber(probs.sum()) + ", expected 1");
  return AnswerDistribution(std::move(probs));
}

AnswerDistribution AnswerDistribution::fromCounts(const Eigen::VectorXd& counts) {
  if (counts.size() < 1) throw ValidationError("empty count vector");
  if (!counts.allFinite() || (counts.array() < 0.0).any())
    throw ValidationError("counts must be finite and non-negative");
  const double total = counts.sum();
  if (total <= 0.0) throw ValidationError("counts sum to zero; distribution cannot be normalized");
  return AnswerDistribution(counts / total);
}

DivergenceScore comboDivergence(const AnswerDistribution& p, const AnswerDistribution& q) {
  DivergenceScore s;
  s.js = jsDistance(p, q);
  s.emd = emdNormalized(p, q);
  s.combo = 0.5 * s.js + 0.5 * s.emd;
  return s;
}

DistanceMetric parseMetric(const std::string& name) {
  if (text::iequals(name, "combo") || text::iequals(name, "hybrid")) return DistanceMetric::Combo;
  if (text::iequals(name, "js")) return DistanceMetric::Js;
  if (text::iequals(name, "emd")) return DistanceMetric::Emd;
  throw ValidationError("unknown metric '" + name + "' (expected combo, js or emd)");
}

std::string_view metricName(DistanceMetric m) {
  switch (m) {
    case DistanceMetric::Combo: return "combo";
    case DistanceMetric::Js: return "js";
    case DistanceMetric::Emd: return "emd";
  }
  return "?";
}

double distance(const DivergenceScore& s, DistanceMetric m) {
  switch (m) {
    case DistanceMetric::Combo: return s.combo;
    case DistanceMetric::Js: return s.js;
    case DistanceMetric::Emd: return s.emd;
  }
  return s.combo;
}

AnswerDistribution renormalizeLogScores(const std::vector<double>& logScores) {
  if (logScores.size() < 2) throw ValidationError("need log-scores for at least 2 options");
  double maxLog = -std::numeric_limits<double>::infinity();
  for (double l : logScores) {
    if (std::isnan(l) || l == std::numeric_limits<double>::infinity())
      throw ValidationError("log-scores must be finite or -inf");
    maxLog = std::max(maxLog, l);
  }
  if (!std::isfinite(maxLog)) throw ValidationError("every option log-score is -inf");
  Eigen::VectorXd p(static_cast<Eigen::Index>(logScores.size()));
  for (std::size_t i = 0; i < logScores.size(); ++i)
    p(static_cast<Eigen::Index>(i)) = std::exp(logScores[i] - maxLog);
  p /= p.sum();
  return AnswerDistribution::fromProbabilities(std::move(p));
}

const AnswerDistribution& SurveyQuestion::population(const std::string& name) const {
  auto it = populations.find(name);
  if (it == populations.end())
    throw ValidationError("question " + id + " has no distribution for population '" + name + "'");
  return it->second;
}

namespace {

Eigen::VectorXd toVector(const nlohmann::json& arr) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
  return v;
}

Eigen::VectorXd keepIndices(const Eigen::VectorXd& v, const std::vector<std::size_t>& keep) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = v(static_cast<Eigen::Index>(keep[i]));
  return out;
}

}  // namespace

std::vector<SurveyQuestion> parseSurvey(const std::string& json, const SurveyLoadOptions& options) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(json);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("survey is not valid JSON: ") + e.what());
  }
  if (!root.is_array()) throw ValidationError("survey must be a JSON array of questions");

  std::vector<SurveyQuestion> out;
  std::set<std::string> ids;
  for (const auto& jq : root) {
    SurveyQuestion q;
    try {
      q.id = jq.at("id").get<std::string>();
      q.text = jq.value("text", "");
      q.topic = jq.value("topic", "");
      const auto symbols = jq.at("options").get<std::vector<std::string>>();
      const auto labels = jq.value("labels", std::vector<std::string>{});
      const auto nonOrdinal = jq.value("nonOrdinal", std::vector<std::string>{});
      if (!labels.empty() && labels.size() != symbols.size())
        throw ValidationError("question " + q.id + ": labels and options differ in length");

      std::vector<std::size_t> keep;
      for (std::size_t i = 0; i < symbols.size(); ++i) {
        const bool drop = options.dropNonOrdinal &&
                          std::find(nonOrdinal.begin(), nonOrdinal.end(), symbols[i]) != nonOrdinal.end();
        if (drop) continue;
        keep.push_back(i);
        q.options.push_back(symbols[i]);
        if (!labels.empty()) q.labels.push_back(labels[i]);
      }
      if (q.options.size() < 2)
        throw ValidationError("question " + q.id + " has " + std::to_string(q.options.size()) +
                              " ordinal options; at least 2 required");

      for (const auto& [pop, spec] : jq.at("populations").items()) {
        Eigen::VectorXd raw;
        bool isProbs = false;
        if (spec.is_array()) {
          raw = toVector(spec);
        } else if (spec.contains("probs")) {
          raw = toVector(spec.at("probs"));
          isProbs = true;
        } else {
          raw = toVector(spec.at("counts"));
        }
        if (static_cast<std::size_t>(raw.size()) != symbols.size())
          throw ValidationError("question " + q.id + ", population " + pop + ": " + std::to_string(raw.size()) +
                                " values for " + std::to_string(symbols.size()) + " options");
        Eigen::VectorXd kept = keepIndices(raw, keep);
        // Probabilities left over after dropping non-ordinal options are
        // renormalized like counts.
        const bool dropped = keep.size() != symbols.size();
        q.populations.emplace(pop, isProbs && !dropped ? AnswerDistribution::fromProbabilities(std::move(kept))
                                                       : AnswerDistribution::fromCounts(kept));
      }
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("malformed survey question '" + q.id + "': " + e.what());
    }
    if (!ids.insert(q.id).second) throw ValidationError("duplicate question id " + q.id);
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<SurveyQuestion> loadSurvey(const std::filesystem::path& path, const SurveyLoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open survey file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parseSurvey(ss.str(), options);
}

std::vector<CurvePoint> thresholdCurve(const std::map<std::string, double>& distances,
                                       const std::vector<double>& grid) {
  if (!std::is_sorted(grid.begin(), grid.end())) throw ValidationError("threshold grid must be sorted ascending");
  std::vector<double> sorted;
  sorted.reserve(distances.size());
  for (const auto& [_, d] : distances) sorted.push_back(d);
  std::sort(sorted.begin(), sorted.end());
  std::vector<CurvePoint> curve;
  curve.reserve(grid.size());
  for (double t : grid) {
    const auto below = std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
    const double frac = sorted.empty() ? 0.0 : static_cast<double>(below) / static_cast<double>(sorted.size());
    curve.push_back({t, frac});
  }
  return curve;
}

TensionSet selectTensionSet(const std::vector<SurveyQuestion>& questions, const std::string& popA,
                            const std::string& popB, std::size_t n) {
  TensionSet set;
  set.entries.reserve(questions.size());
  for (const auto& q : questions) set.entries.push_back({q.id, comboDivergence(q.population(popA), q.population(popB))});
  std::sort(set.entries.begin(), set.entries.end(), [](const TensionEntry& a, const TensionEntry& b) {
    if (a.score.combo != b.score.combo) return a.score.combo > b.score.combo;
    return a.questionId < b.questionId;
  });
  if (n > set.entries.size()) {
    set.warnings.push_back("requested " + std::to_string(n) + " tension questions but only " +
                           std::to_string(set.entries.size()) + " available; returning all");
  } else {
    set.entries.resize(n);
  }
  return set;
}

std::string tensionSetToJson(const TensionSet& set, const std::string& popA, const std::string& popB) {
  nlohmann::ordered_json j;
  j["populations"] = {popA, popB};
  j["n"] = set.entries.size();
  auto arr = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < set.entries.size(); ++i) {
    const auto& e = set.entries[i];
    arr.push_back({{"rank", i + 1}, {"id", e.questionId}, {"js", e.score.js}, {"emd", e.score.emd},
                   {"combo", e.score.combo}});
  }
  j["questions"] = arr;
  return j.dump(2) + "\n";
}

std::vector<std::string> tensionSetIdsFromJson(const std::string& json) {
  try {
    const auto j = nlohmann::json::parse(json);
    std::vector<std::string> ids;
    for (const auto& q : j.at("questions")) ids.push_back(q.at("id").get<std::string>());
    return ids;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed tension set: ") + e.what());
  }
}

std::string_view leaningName(Leaning l) {
  switch (l) {
    case Leaning::Reference: return "reference";
    case Leaning::Target: return "target";
    case Leaning::Tie: return "tie";
  }
  return "?";
}

ShiftResult shiftAnalysis(const std::map<std::string, AnswerDistribution>& modelDists,
                          const std::vector<SurveyQuestion>& questions, const std::string& referencePop,
                          const std::string& targetPop, DistanceMetric metric) {
  ShiftResult result;
  for (const auto& q : questions) {
    auto it = modelDists.find(q.id);
    if (it == modelDists.end()) {
      result.missing.push_back(q.id);
      continue;
    }
    const auto& model = it->second;
    if (model.size() != static_cast<Eigen::Index>(q.options.size()))
      throw ValidationError("model distribution for " + q.id + " has " + std::to_string(model.size()) +
                            " options, question has " + std::to_string(q.options.size()));
    ShiftPoint pt;
    pt.questionId = q.id;
    pt.dReference = distance(comboDivergence(model, q.population(referencePop)), metric);
    pt.dTarget = distance(comboDivergence(model, q.population(targetPop)), metric);
    if (std::abs(pt.dTarget - pt.dReference) <= 1e-12) {
      pt.leaning = Leaning::Tie;
      ++result.tieCount;
    } else if (pt.dTarget < pt.dReference) {
      pt.leaning = Leaning::Target;
      ++result.targetCount;
    } else {
      pt.leaning = Leaning::Reference;
      ++result.referenceCount;
    }
    result.points.push_back(std::move(pt));
  }
  return result;
}

ImprovementResult pairedImprovement(const std::map<std::string, double>& baselineDistances,
                                    const std::map<std::string, double>& treatedDistances) {
  if (baselineDistances.size() != treatedDistances.size())
    throw ValidationError("baseline and treated runs cover different questions");
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(baselineDistances.size());
  for (const auto& [id, base] : baselineDistances) {
    auto it = treatedDistances.find(id);
    if (it == treatedDistances.end()) throw ValidationError("treated run is missing question " + id);
    pairs.emplace_back(it->second, base);
  }
  if (pairs.empty()) throw ValidationError("no questions to compare");
  ImprovementResult r;
  r.questions = pairs.size();
  r.twoSided = psychnorms::wilcoxonSignedRank(pairs);
  r.oneSidedP = psychnorms::wilcoxonSignedRank(pairs, {12, psychnorms::Alternative::Less}).pValue;
  return r;
}

}  // namespace cprobe::values
