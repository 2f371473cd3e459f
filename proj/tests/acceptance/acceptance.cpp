// Prints one PASS/FAIL line per acceptance criterion; exits non-zero on any FAIL.

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>

#include "../unit/support.hpp"
#include "culture_probe/corpus.hpp"
#include "culture_probe/metrics.hpp"
#include "culture_probe/modelio.hpp"
#include "culture_probe/psychnorms.hpp"
#include "culture_probe/random.hpp"
#include "culture_probe/values.hpp"

using namespace cprobe;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

double seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

// --- 1 -------------------------------------------------------------------

Outcome spearmanParity() {
  Outcome o;
  const auto start = Clock::now();
  for (int n = 2; n <= 6; ++n) {
    std::vector<int> base(n);
    std::iota(base.begin(), base.end(), 1);
    auto perm = base;
    do {
      double d2 = 0;
      for (int i = 0; i < n; ++i) d2 += (base[i] - perm[i]) * (base[i] - perm[i]);
      const double oracle = 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
      const auto rho = spearman(std::vector<double>(base.begin(), base.end()), std::vector<double>(perm.begin(), perm.end()));
      o.require(rho && std::abs(*rho - oracle) <= 1e-12, "permutation mismatch at n=" + std::to_string(n));
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  struct Tie {
    std::vector<double> a, b;
    double expected;
  };
  // Pearson on mid-ranks, evaluated independently in exact arithmetic.
  const std::vector<Tie> ties = {
      {{1, 2, 2, 3}, {1, 2, 3, 4}, 0.9486832980505139},
      {{1, 1, 2, 2}, {1, 2, 3, 4}, 0.8944271909999159},
      {{3, 1, 4, 1, 5, 9, 2, 6}, {2, 7, 1, 8, 2, 8, 1, 8}, 0.19885368120992467},
      {{10, 20, 20, 20, 30}, {5, 5, 1, 2, 3}, -0.34412360080584264},
      {{1, 2, 3, 4, 5, 6}, {6, 5, 4, 4, 2, 1}, -0.9856107606091623},
  };
  for (const auto& t : ties) {
    const auto rho = spearman(t.a, t.b);
    o.require(rho && std::abs(*rho - t.expected) <= 1e-9, "tie case mismatch");
  }
  const double elapsed = seconds(start);
  o.require(elapsed < 5.0, "took " + std::to_string(elapsed) + " s");
  return o;
}

// --- 2 -------------------------------------------------------------------

std::string rankText(const std::vector<std::string>& words) {
  std::string out = "Final Ranking:\n";
  for (std::size_t i = 0; i < words.size(); ++i) out += "Rank " + std::to_string(i + 1) + ": " + words[i] + "\n";
  return out;
}

Outcome rewardConformance() {
  Outcome o;
  const std::vector<std::string> t5 = {"a", "b", "c", "d", "e"};
  const std::vector<std::string> t4 = {"a", "b", "c", "d"};
  const std::vector<std::string> t3 = {"a", "b", "c"};
  const std::vector<std::string> t10 = {"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"};
  struct Case {
    std::string text;
    std::vector<std::string> truth;
    double expected;
  };
  // Expected values by hand from 1 - 6Σd²/(n(n²-1)) on the overlapping words.
  const std::vector<Case> cases = {
      {rankText(t5), t5, 1.0},
      {rankText({"e", "d", "c", "b", "a"}), t5, -1.0},
      {"", t5, -1.0},
      {rankText({"a"}), t5, -1.0},
      {rankText({"x", "y", "z"}), t5, -1.0},
      {rankText({"b", "a", "c", "d", "e"}), t5, 0.9},
      {rankText({"a", "zz", "b", "c", "qq", "d", "e"}), t5, 1.0},
      {rankText({"a", "c", "e"}), t5, 1.0},
      {rankText({"c", "a"}), t5, -1.0},
      {rankText({"a", "b"}), t5, 1.0},
      {"Final Ranking:\nRank 1: a\nRank 2: a\nRank 3: b\n", t3, 1.0},
      {"Final Ranking:\nRank 1: A\nRank 2: B\nRank 3: C\n", t3, 1.0},
      {"Rank 1: c\nRank 2: b\nRank 3: a\nFinal Ranking:\nRank 1: a\nRank 2: b\nRank 3: c\n", t3, 1.0},
      {rankText({"b", "a", "d", "c"}), t4, 0.6},
      {rankText({"d", "c", "b", "a"}), t4, -1.0},
      {rankText({"b", "c", "a"}), t3, -0.5},
      {rankText(t10), t10, 1.0},
      {"Rank 1: a\nRank 2: b\nRank 3: c\n", t3, 1.0},
      {"Rank 1: a", t3, -1.0},
      {rankText({"a", "c", "b", "d", "e"}), t5, 0.9},
  };
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const double got = metrics::rankingReward(cases[i].text, cases[i].truth);
    o.require(got == cases[i].expected, "case " + std::to_string(i + 1) + " gave " +
                                                              std::to_string(got));
  }
  return o;
}

// --- 3 -------------------------------------------------------------------

Outcome precisionFixture() {
  Outcome o;
  o.require(metrics::precisionAtK({"a", "b", "c", "x", "y"}, {"a", "b", "c", "d", "e"}, 5) == 0.6, "P@5 != 0.6");
  Rng rng(11);
  for (int trial = 0; trial < 10000 && o.pass; ++trial) {
    std::vector<std::string> human, gen;
    for (auto i : rng.sampleIndices(40, 20)) human.push_back("v" + std::to_string(i));
    for (auto i : rng.sampleIndices(40, 1 + rng.below(30))) gen.push_back("v" + std::to_string(i));
    const std::size_t k = 1 + rng.below(19);
    const std::vector<std::string> topK(human.begin(), human.begin() + static_cast<long>(k));
    const std::vector<std::string> topK1(human.begin(), human.begin() + static_cast<long>(k + 1));
    const double hits = metrics::precisionAtK(gen, topK, k) * static_cast<double>(k);
    const double hits1 = metrics::precisionAtK(gen, topK1, k + 1) * static_cast<double>(k + 1);
    o.require(std::abs(hits - std::round(hits)) < 1e-9, "non-integral hit count");
    o.require(hits1 >= hits - 1e-9, "hits decreased with K");
  }
  return o;
}

// --- 4 -------------------------------------------------------------------

values::AnswerDistribution randomDist(Rng& rng, int n) {
  Eigen::VectorXd c(n);
  for (int i = 0; i < n; ++i) c(i) = static_cast<double>(rng.below(10));
  if (c.sum() == 0) c(0) = 1;
  return values::AnswerDistribution::fromCounts(c);
}

Outcome divergenceCorrectness() {
  Outcome o;
  auto d = [](std::vector<double> p) {
    return values::AnswerDistribution::fromProbabilities(Eigen::Map<Eigen::VectorXd>(p.data(), static_cast<long>(p.size())));
  };
  o.require(values::jsDistance(d({1, 0}), d({0, 1})) == 1.0, "disjoint JS != 1");
  o.require(values::jsDistance(d({0.3, 0.7}), d({0.3, 0.7})) == 0.0, "identical JS != 0");
  o.require(values::emdNormalized(d({1, 0, 0}), d({0, 1, 0})) == 0.5, "EMD([1,0,0],[0,1,0]) != 0.5");
  Rng rng(4);
  for (int trial = 0; trial < 10000 && o.pass; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(5));
    const auto p = randomDist(rng, n), q = randomDist(rng, n), r = randomDist(rng, n);
    const double pq = values::jsDistance(p, q);
    o.require(pq >= 0.0 && pq <= 1.0, "JS out of range");
    o.require(pq == values::jsDistance(q, p), "JS not symmetric");
    o.require(values::jsDistance(p, r) <= pq + values::jsDistance(q, r) + 1e-9, "triangle inequality violated");
  }
  return o;
}

// --- 5 -------------------------------------------------------------------

Outcome q149Fixture() {
  Outcome o;
  const auto toy = testing::sourceDir() / "data" / "toy";
  const auto survey = values::loadSurvey(toy / "survey.json");
  const auto q149 = std::find_if(survey.begin(), survey.end(), [](const auto& q) { return q.id == "Q149"; });
  o.require(q149 != survey.end(), "Q149 missing from toy survey");
  if (!o.pass) return o;
  o.require(q149->population("US")[0] == 0.77 && q149->population("CN")[0] == 0.34, "Q149 human distributions");

  auto modelDist = [&](const char* file) {
    for (const auto& r : modelio::readOutputs(toy / file, modelio::OutputKind::OptionScores).optionScores)
      if (r.questionId == "Q149") return r.distribution();
    throw ValidationError(std::string("Q149 missing from ") + file);
  };
  const auto vanilla = modelDist("vanilla_option_scores.jsonl");
  const auto sft = modelDist("sft_option_scores.jsonl");
  o.require(vanilla[0] == 0.83 && sft[0] == 0.33, "model distributions");

  const std::vector<values::SurveyQuestion> only = {*q149};
  const auto v = values::shiftAnalysis({{"Q149", vanilla}}, only, "US", "CN", values::DistanceMetric::Combo);
  const auto s = values::shiftAnalysis({{"Q149", sft}}, only, "US", "CN", values::DistanceMetric::Combo);
  o.require(v.points.at(0).leaning == values::Leaning::Reference, "vanilla not US-leaning");
  o.require(s.points.at(0).leaning == values::Leaning::Target, "SFT not CN-leaning");
  return o;
}

// --- 6 -------------------------------------------------------------------

double enumerateP(const std::vector<double>& diffs) {
  std::vector<double> nz;
  for (double x : diffs)
    if (x != 0) nz.push_back(x);
  const std::size_t n = nz.size();
  if (n == 0) return 1.0;
  std::vector<double> absd;
  for (double x : nz) absd.push_back(std::abs(x));
  // Mid-ranks by counting, independent of the library's ranking helper.
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    double less = 0, equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      less += absd[j] < absd[i];
      equal += absd[j] == absd[i];
    }
    rank[i] = less + (equal + 1) / 2;
  }
  double observed = 0, total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total += rank[i];
    if (nz[i] > 0) observed += rank[i];
  }
  std::size_t hits = 0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    double w = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) w += rank[i];
    hits += std::abs(w - total / 2) >= std::abs(observed - total / 2) - 1e-9;
  }
  return static_cast<double>(hits) / static_cast<double>(std::size_t{1} << n);
}

Outcome wilcoxonExactness() {
  Outcome o;
  Rng rng(2);
  for (int fixture = 0; fixture < 100; ++fixture) {
    const std::size_t n = 1 + rng.below(12);
    std::vector<std::pair<double, double>> pairs;
    std::vector<double> diffs;
    for (std::size_t i = 0; i < n; ++i) {
      pairs.emplace_back(static_cast<double>(rng.below(9)), static_cast<double>(rng.below(9)));
      diffs.push_back(pairs.back().first - pairs.back().second);
    }
    const auto r = psychnorms::wilcoxonSignedRank(pairs);
    o.require(r.method == psychnorms::TestMethod::Exact, "exact method not used at n <= 12");
    o.require(std::abs(r.pValue - enumerateP(diffs)) <= 1e-12, "fixture " + std::to_string(fixture));
  }
  std::vector<std::pair<double, double>> allPositive;
  for (int i = 1; i <= 5; ++i) allPositive.emplace_back(i, 0);
  o.require(psychnorms::wilcoxonSignedRank(allPositive).pValue == 0.0625, "n=5 all-positive p != 0.0625");

  for (int fixture = 0; fixture < 50; ++fixture) {
    std::vector<std::pair<double, double>> pairs;
    for (int i = 0; i < 12; ++i) pairs.emplace_back(static_cast<double>(rng.below(1000)) + 0.5, 500.25 * (i % 2));
    const double exact = psychnorms::wilcoxonSignedRank(pairs, {12}).pValue;
    const double approx = psychnorms::wilcoxonSignedRank(pairs, {0}).pValue;
    o.require(std::abs(exact - approx) < 0.02, "normal approximation off by " + std::to_string(std::abs(exact - approx)));
  }
  return o;
}

// --- 7 -------------------------------------------------------------------

Outcome rescaling() {
  Outcome o;
  const psychnorms::ScaleSpec valence{-3, 3, 1, 9, false};
  o.require(valence.rescale(-3) == 1 && valence.rescale(0) == 5 && valence.rescale(3) == 9, "valence endpoints");
  const psychnorms::ScaleSpec concreteness{1, 5, 1, 5, true};
  o.require(concreteness.rescale(1) == 5 && concreteness.rescale(5) == 1, "concreteness inversion");
  return o;
}

// --- 8 -------------------------------------------------------------------

Outcome splitContract() {
  Outcome o;
  corpus::AssociationTable::Entries e;
  for (int i = 0; i < 100; ++i) e["cue" + std::to_string(i)] = {{"x", 1}};
  const corpus::AssociationTable table(std::move(e));
  const auto first = corpus::splitByCue(table, {0.8, 0.1, 0.1}, 123);
  o.require(first.train.size() == 80 && first.valid.size() == 10 && first.test.size() == 10, "sizes");
  std::set<std::string> all(first.train.begin(), first.train.end());
  all.insert(first.valid.begin(), first.valid.end());
  all.insert(first.test.begin(), first.test.end());
  o.require(all.size() == 100, "partitions overlap");
  for (int rerun = 0; rerun < 5; ++rerun) {
    const auto again = corpus::splitByCue(table, {0.8, 0.1, 0.1}, 123);
    o.require(again.train == first.train && again.valid == first.valid && again.test == first.test, "unstable split");
  }
  return o;
}

// --- 9 -------------------------------------------------------------------

std::vector<double> normalizedRow(const nlohmann::json& spec, const std::vector<std::size_t>& keep) {
  const auto& arr = spec.is_array() ? spec : spec.contains("probs") ? spec["probs"] : spec["counts"];
  std::vector<double> v;
  for (auto i : keep) v.push_back(arr[i].get<double>());
  const double total = std::accumulate(v.begin(), v.end(), 0.0);
  for (double& x : v) x /= total;
  return v;
}

std::vector<std::string> tensionOracle(const std::filesystem::path& surveyPath, std::size_t n) {
  const auto survey = nlohmann::json::parse(testing::readFile(surveyPath));
  std::vector<std::pair<double, std::string>> scored;
  for (const auto& q : survey) {
    const auto options = q["options"].get<std::vector<std::string>>();
    const auto nonOrdinal = q.value("nonOrdinal", std::vector<std::string>{});
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < options.size(); ++i)
      if (std::find(nonOrdinal.begin(), nonOrdinal.end(), options[i]) == nonOrdinal.end()) keep.push_back(i);
    const auto p = normalizedRow(q["populations"]["US"], keep);
    const auto c = normalizedRow(q["populations"]["CN"], keep);
    double kl = 0, cdf = 0, emd = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double m = (p[i] + c[i]) / 2;
      if (p[i] > 0) kl += p[i] * std::log(p[i] / m);
      if (c[i] > 0) kl += c[i] * std::log(c[i] / m);
      if (i + 1 < p.size()) {
        cdf += p[i] - c[i];
        emd += std::abs(cdf);
      }
    }
    const double js = std::sqrt(kl / 2 / std::log(2.0));
    scored.emplace_back(0.5 * js + 0.5 * emd / static_cast<double>(p.size() - 1), q["id"].get<std::string>());
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (std::abs(a.first - b.first) > 1e-12) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n && i < scored.size(); ++i) ids.push_back(scored[i].second);
  return ids;
}

std::map<std::string, std::string> reportFiles(const std::filesystem::path& runDir) {
  std::map<std::string, std::string> files;
  for (const auto* sub : {"report", "tension", "shift", "values", "assoc", "rank", "psych"}) {
    if (!std::filesystem::exists(runDir / sub)) continue;
    for (const auto& entry : std::filesystem::directory_iterator(runDir / sub))
      files[std::string(sub) + "/" + entry.path().filename().string()] = testing::readFile(entry.path());
  }
  return files;
}

Outcome endToEnd() {
  Outcome o;
  testing::TempDir first, second;
  for (const auto* dir : {&first, &second}) {
    const auto start = Clock::now();
    const auto r = testing::runToyPipeline(dir->path());
    const double elapsed = seconds(start);
    o.require(r.code == 0, "pipeline failed: " + r.err);
    o.require(elapsed < 10.0, "pipeline took " + std::to_string(elapsed) + " s");
  }
  if (!o.pass) return o;
  const auto a = reportFiles(first.path()), b = reportFiles(second.path());
  o.require(a.count("report/per_question.csv") && a.count("report/shift_summary.csv"), "reports missing");
  o.require(a == b, "reports differ between runs");

  const auto tension = nlohmann::json::parse(testing::readFile(first / "tension/tension_set.json"));
  std::vector<std::string> ids;
  for (const auto& q : tension["questions"]) ids.push_back(q["id"].get<std::string>());
  o.require(ids.size() == 5, "tension set size " + std::to_string(ids.size()));
  o.require(ids == tensionOracle(testing::sourceDir() / "data" / "toy" / "survey.json", 5), "tension set != oracle");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"metric oracle parity", spearmanParity},
      {"reward conformance", rewardConformance},
      {"precision fixture", precisionFixture},
      {"divergence correctness", divergenceCorrectness},
      {"Q149 fixture reproduction", q149Fixture},
      {"wilcoxon exactness", wilcoxonExactness},
      {"rescaling endpoints", rescaling},
      {"split contract", splitContract},
      {"end-to-end toy pipeline", endToEnd},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << ' ' << (i + 1) << ' ' << criteria[i].first;
    if (!o.pass) std::cout << " (" << o.detail << ')';
    std::cout << '\n';
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
