#include <doctest.h>

#include <cmath>

#include "culture_probe/error.hpp"
#include "culture_probe/psychnorms.hpp"
#include "culture_probe/random.hpp"
#include "culture_probe/ranks.hpp"
#include "support.hpp"

using namespace cprobe;
using namespace cprobe::psychnorms;

namespace {

// Enumerates all 2^n sign assignments of the absolute-difference ranks.
double bruteForceP(const std::vector<std::pair<double, double>>& pairs, Alternative alt) {
  std::vector<double> diffs;
  for (const auto& [a, b] : pairs)
    if (a != b) diffs.push_back(a - b);
  const std::size_t n = diffs.size();
  if (n == 0) return 1.0;
  std::vector<double> absd;
  for (double d : diffs) absd.push_back(std::abs(d));
  const Eigen::VectorXd ranks = fractionalRanks(Eigen::Map<Eigen::VectorXd>(absd.data(), static_cast<long>(n)));
  double observed = 0, total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total += ranks(static_cast<long>(i));
    if (diffs[i] > 0) observed += ranks(static_cast<long>(i));
  }
  const double mean = total / 2.0;
  std::size_t hits = 0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    double w = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (std::size_t{1} << i)) w += ranks(static_cast<long>(i));
    bool extreme = false;
    switch (alt) {
      case Alternative::TwoSided: extreme = std::abs(w - mean) >= std::abs(observed - mean) - 1e-9; break;
      case Alternative::Less: extreme = w <= observed + 1e-9; break;
      case Alternative::Greater: extreme = w >= observed - 1e-9; break;
    }
    hits += extreme;
  }
  return static_cast<double>(hits) / static_cast<double>(std::size_t{1} << n);
}

Lexicons handLexicons() {
  Lexicons l;
  l.valence.scale = {1, 9, 1, 9, false};
  l.arousal.scale = {1, 9, 1, 9, false};
  l.concreteness.scale = {1, 5, 1, 5, false};
  l.valence.scores = {{"joy", 8.5}, {"war", 1.5}, {"table", 5.2}, {"run", 6.0}};
  l.arousal.scores = {{"joy", 6.0}, {"war", 8.0}, {"table", 2.0}};
  l.concreteness.scores = {{"joy", 2.0}, {"war", 3.0}, {"table", 5.0}, {"stone", 4.8}};
  l.lemmas = {{"tables", "table"}, {"ran", "run"}};
  return l;
}

}  // namespace

TEST_CASE("rescaling endpoints") {
  const ScaleSpec valence{-3, 3, 1, 9, false};
  CHECK(valence.rescale(-3) == doctest::Approx(1));
  CHECK(valence.rescale(0) == doctest::Approx(5));
  CHECK(valence.rescale(3) == doctest::Approx(9));
  const ScaleSpec conc{1, 5, 1, 5, true};
  CHECK(conc.rescale(1) == doctest::Approx(5));
  CHECK(conc.rescale(5) == doctest::Approx(1));
  CHECK(conc.rescale(3) == doctest::Approx(3));
  CHECK_THROWS_AS((ScaleSpec{5, 1, 1, 9, false}.validate()), ValidationError);
}

TEST_CASE("scale spec file") {
  testing::TempDir dir;
  testing::writeFile(dir / "s.json", R"({"sourceMin": 1, "sourceMax": 7, "targetMin": 1, "targetMax": 9, "inverted": true})");
  const auto s = loadScaleSpec(dir / "s.json");
  CHECK(s.inverted);
  CHECK(s.rescale(7) == doctest::Approx(1));
  testing::writeFile(dir / "bad.json", R"({"sourceMin": 1})");
  CHECK_THROWS_AS(loadScaleSpec(dir / "bad.json"), ValidationError);
  CHECK_THROWS_AS(loadScaleSpec(dir / "missing.json"), IoError);
}

TEST_CASE("token normalization") {
  const LemmaTable lemmas = {{"dogs", "dog"}};
  CHECK(normalizeToken(" Dogs! ", text::Language::En, &lemmas) == "dog");
  CHECK(normalizeToken("Dogs", text::Language::En) == "dogs");
  CHECK(normalizeToken("「快乐」。", text::Language::Zh, &lemmas) == "快乐");
}

TEST_CASE("lemma table loading") {
  testing::TempDir dir;
  testing::writeFile(dir / "l.tsv", "surface\tlemma\nRan\trun\nmice\tmouse\n");
  const auto t = loadLemmaTable(dir / "l.tsv");
  CHECK(t.size() == 2);
  CHECK(t.at("ran") == "run");
  testing::writeFile(dir / "bad.tsv", "a\tb\tc\n");
  CHECK_THROWS_AS(loadLemmaTable(dir / "bad.tsv"), ValidationError);
}

TEST_CASE("lexicon loading reports row errors and rescales") {
  testing::TempDir dir;
  testing::writeFile(dir / "v.tsv", "word\tscore\nJoy\t3\nwar\t-3\nodd\t4\nnan\tabc\nonly-one-cell\nJoy\t0\n\t1\n");
  const auto r = loadLexicon(dir / "v.tsv", {-3, 3, 1, 9, false}, text::Language::En);
  CHECK(r.lexicon.scores.size() == 2);
  CHECK(*r.lexicon.lookup("joy") == doctest::Approx(9));
  CHECK(*r.lexicon.lookup("war") == doctest::Approx(1));
  CHECK(r.errors.size() == 4);
  CHECK(r.errors[0].line == 4);
  CHECK(r.warnings.size() == 1);
  testing::writeFile(dir / "empty.tsv", "");
  CHECK_THROWS_AS(loadLexicon(dir / "empty.tsv", {}, text::Language::En), ValidationError);
}

TEST_CASE("cue profile computed by hand") {
  const auto lex = handLexicons();
  const auto p = cueProfile("x", {"Joy", "war", "tables", "ran", "stone", "zzz"}, lex, {4.0, 1.0});
  // valence: joy 8.5, war 1.5, table 5.2, run 6.0 -> median (5.2+6.0)/2
  CHECK(*p.medianValence == doctest::Approx(5.6));
  CHECK(p.matchedValence == 4);
  // |v-5| >= 1: joy, war, run
  CHECK(p.emotionalPct == doctest::Approx(0.75));
  CHECK(*p.medianArousal == doctest::Approx(6.0));
  // conc: joy 2, war 3, table 5, stone 4.8
  CHECK(*p.medianConcreteness == doctest::Approx(3.9));
  CHECK(p.concPct == doctest::Approx(2.0 / 6.0));
  CHECK(p.absPct == doctest::Approx(2.0 / 6.0));
  CHECK(p.unkPct == doctest::Approx(2.0 / 6.0));
  CHECK(p.concPct + p.absPct + p.unkPct == doctest::Approx(1.0));

  const auto empty = cueProfile("y", {}, lex);
  CHECK(!empty.medianValence);
  CHECK(empty.unkPct == 1.0);
}

TEST_CASE("wilcoxon known values") {
  std::vector<std::pair<double, double>> pairs;
  for (int i = 1; i <= 5; ++i) pairs.emplace_back(i, 0);
  const auto r = wilcoxonSignedRank(pairs);
  CHECK(r.method == TestMethod::Exact);
  CHECK(r.pValue == doctest::Approx(0.0625));
  CHECK(r.wPlus == 15);
  CHECK(r.statistic == 0);
  CHECK(wilcoxonSignedRank(pairs, {12, Alternative::Greater}).pValue == doctest::Approx(1.0 / 32));
  CHECK(wilcoxonSignedRank(pairs, {12, Alternative::Less}).pValue == doctest::Approx(1.0));

  const auto zero = wilcoxonSignedRank({{1, 1}, {2, 2}});
  CHECK(zero.pValue == 1.0);
  CHECK(zero.nEffective == 0);
  CHECK_THROWS_AS(wilcoxonSignedRank({}), ValidationError);
  CHECK_THROWS_AS(wilcoxonSignedRank({{NAN, 1.0}}), ValidationError);
}

TEST_CASE("exact wilcoxon matches full enumeration") {
  Rng rng(17);
  for (int fixture = 0; fixture < 100; ++fixture) {
    const std::size_t n = 1 + rng.below(12);
    std::vector<std::pair<double, double>> pairs;
    for (std::size_t i = 0; i < n; ++i) {
      // Small integer grid so ties and zero differences occur.
      pairs.emplace_back(static_cast<double>(rng.below(7)), static_cast<double>(rng.below(7)));
    }
    for (auto alt : {Alternative::TwoSided, Alternative::Less, Alternative::Greater}) {
      const auto r = wilcoxonSignedRank(pairs, {12, alt});
      REQUIRE(r.method == TestMethod::Exact);
      REQUIRE(r.pValue == doctest::Approx(bruteForceP(pairs, alt)).epsilon(1e-12));
    }
  }
}

TEST_CASE("normal approximation tracks the exact test at n=12") {
  Rng rng(5);
  for (int fixture = 0; fixture < 50; ++fixture) {
    std::vector<std::pair<double, double>> pairs;
    for (int i = 0; i < 12; ++i) pairs.emplace_back(static_cast<double>(rng.below(1000)) + 0.5, 500.25 * (i % 2));
    const auto exact = wilcoxonSignedRank(pairs, {12, Alternative::TwoSided});
    const auto approx = wilcoxonSignedRank(pairs, {0, Alternative::TwoSided});
    REQUIRE(exact.method == TestMethod::Exact);
    REQUIRE(approx.method == TestMethod::NormalApprox);
    REQUIRE(std::abs(exact.pValue - approx.pValue) < 0.02);
  }
}

TEST_CASE("profile comparison pairs shared cues") {
  std::map<std::string, CueProfile> model, human;
  for (int i = 0; i < 6; ++i) {
    const std::string cue = "c" + std::to_string(i);
    model[cue].medianValence = 6.0 + i;
    human[cue].medianValence = 5.0 + i;
  }
  model["only-model"].medianValence = 1.0;
  human["c0"].medianArousal = 3.0;
  const auto c = compareProfiles(model, human, PsychMetric::Valence);
  CHECK(c.pairedCues == 6);
  CHECK(c.modelMedian == doctest::Approx(8.5));
  CHECK(c.humanMedian == doctest::Approx(7.5));
  CHECK(c.wilcoxon.pValue == doctest::Approx(0.03125));
  CHECK(!c.indistinguishable);
  CHECK_THROWS_AS(compareProfiles(model, human, PsychMetric::Arousal), ValidationError);
  CHECK_THROWS_AS(compareProfiles({{"a", {}}}, {{"b", {}}}, PsychMetric::Valence), ValidationError);
}

TEST_CASE("coverage summary and CSV") {
  std::map<std::string, CueProfile> profiles;
  profiles["a"].concPct = 0.5;
  profiles["a"].unkPct = 0.5;
  profiles["b"].absPct = 1.0;
  profiles["b"].unkPct = 0.0;
  const auto s = summarizeCoverage(profiles);
  CHECK(s.concPct == doctest::Approx(0.25));
  CHECK(s.absPct == doctest::Approx(0.5));
  CHECK(s.unkPct == doctest::Approx(0.25));
  const auto csv = profilesToCsv(profiles);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(csv.rfind("b,0,,,,0,0,1,0,0,0,0\n") != std::string::npos);
}
