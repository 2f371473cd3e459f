#include <doctest.h>

#include <algorithm>
#include <set>

#include "culture_probe/error.hpp"
#include "culture_probe/metrics.hpp"
#include "culture_probe/prompts.hpp"
#include "support.hpp"

using namespace cprobe;
using namespace cprobe::prompts;

namespace {

corpus::AssociationTable smallTable() {
  corpus::AssociationTable::Entries e;
  e["dog"] = {{"cat", 9}, {"bark", 8}, {"pet", 7}, {"bone", 6}, {"leash", 5}, {"tail", 4}, {"walk", 3},
              {"fur", 3}, {"loyal", 2}, {"run", 1}, {"house", 1}, {"food", 1}};
  e["cat"] = {{"mouse", 5}, {"dog", 4}, {"meow", 3}, {"milk", 2}, {"purr", 1}};
  e["house"] = {{"home", 6}, {"roof", 4}, {"door", 2}, {"dog", 1}};
  e["bark"] = {{"tree", 3}, {"dog", 2}, {"wood", 1}};
  e["sun"] = {{"moon", 5}, {"hot", 3}, {"sky", 1}};
  return corpus::AssociationTable(std::move(e));
}

/// Random table over a shared vocabulary so two-step neighbourhoods exist.
corpus::AssociationTable randomTable(Rng& rng) {
  std::vector<std::string> vocab;
  for (int i = 0; i < 60; ++i) vocab.push_back("w" + std::to_string(i));
  corpus::AssociationTable::Entries e;
  const std::size_t cues = 8 + rng.below(10);
  for (std::size_t c = 0; c < cues; ++c) {
    const std::string cue = vocab[c];
    auto& list = e[cue];
    const std::size_t n = 6 + rng.below(14);
    for (auto idx : rng.sampleIndices(vocab.size(), n)) {
      if (vocab[idx] == cue) continue;
      list.push_back({vocab[idx], 1 + rng.below(20)});
    }
  }
  return corpus::AssociationTable(std::move(e));
}

}  // namespace

TEST_CASE("bundled template files match the built-in defaults") {
  const auto dir = testing::sourceDir() / "templates";
  for (auto lang : {text::Language::En, text::Language::Zh}) {
    const auto loaded = PromptTemplates::load(dir, lang);
    const auto builtin = PromptTemplates::defaults(lang);
    CHECK(loaded.sftBody == builtin.sftBody);
    CHECK(loaded.rankBody == builtin.rankBody);
  }
}

TEST_CASE("default templates carry their placeholders") {
  for (auto lang : {text::Language::En, text::Language::Zh}) {
    const auto t = PromptTemplates::defaults(lang);
    CHECK(t.sftBody.find("[LOWER BOUND SIZE]") != std::string::npos);
    CHECK(t.sftBody.find("[UPPER BOUND SIZE]") != std::string::npos);
    CHECK(t.rankBody.find("[RANK COUNT]") != std::string::npos);
    CHECK(t.rankBody.find("Final Ranking:") != std::string::npos);
  }
}

TEST_CASE("missing template files fall back to defaults") {
  testing::TempDir dir;
  testing::writeFile(dir / "sft.en.txt", "Custom [LOWER BOUND SIZE]-[UPPER BOUND SIZE] for [CUE WORD]\n");
  const auto t = PromptTemplates::load(dir.path(), text::Language::En);
  CHECK(t.sftBody == "Custom [LOWER BOUND SIZE]-[UPPER BOUND SIZE] for [CUE WORD]");
  CHECK(t.rankBody == PromptTemplates::defaults(text::Language::En).rankBody);
  const auto p = renderSftPrompt(t, "dog", 12, 50);
  CHECK(p == "[CONTEXT]\n\nCustom 12-50 for dog\n\n[CUE WORD]\n\ndog\n\n[ASSOCIATED WORDS]\n\n");
}

TEST_CASE("rendered SFT prompt has no unreplaced placeholders") {
  const auto p = renderSftPrompt(PromptTemplates::defaults(text::Language::En), "dog", 15, 60);
  CHECK(p.find("[LOWER BOUND SIZE]") == std::string::npos);
  CHECK(p.find("15 to 60 words") != std::string::npos);
  CHECK(p.rfind("[ASSOCIATED WORDS]") != std::string::npos);
}

TEST_CASE("rank prompt lists candidates and the count") {
  const auto t = PromptTemplates::defaults(text::Language::En);
  const auto p = renderRankPrompt(t, "dog", {"cat", "bone", "pet"});
  CHECK(p.find("(rank 3)") != std::string::npos);
  CHECK(p.substr(p.size() - 14) == "cat, bone, pet");
  const auto zh = renderRankPrompt(PromptTemplates::defaults(text::Language::Zh), "狗", {"猫", "骨头"});
  CHECK(zh.substr(zh.size() - std::string("猫， 骨头").size()) == "猫， 骨头");
}

TEST_CASE("bounds policy") {
  BoundsPolicy ok;
  CHECK_NOTHROW(ok.validate());
  BoundsPolicy tight{10, 20, 25, 29, 10};
  CHECK_THROWS_AS(tight.validate(), ValidationError);
  BoundsPolicy inverted{20, 10, 40, 80, 10};
  CHECK_THROWS_AS(inverted.validate(), ValidationError);
}

TEST_CASE("SFT bounds stay inside the policy for many seeds") {
  const auto table = smallTable();
  const BoundsPolicy policy;
  Rng rng(3);
  bool sawLow = false, sawHigh = false;
  for (int i = 0; i < 2000; ++i) {
    const auto ex = makeSftExample("dog", table, policy, rng);
    REQUIRE(ex.lowerBound >= policy.minLo);
    REQUIRE(ex.lowerBound <= policy.maxLo);
    REQUIRE(ex.upperBound >= std::max(policy.minHi, ex.lowerBound + policy.minGap));
    REQUIRE(ex.upperBound <= policy.maxHi);
    sawLow |= ex.lowerBound == policy.minLo;
    sawHigh |= ex.upperBound == policy.maxHi;
  }
  CHECK(sawLow);
  CHECK(sawHigh);
}

TEST_CASE("SFT target lists responses in frequency order") {
  Rng rng(1);
  const auto ex = makeSftExample("cat", smallTable(), {}, rng);
  CHECK(ex.target == "mouse, dog, meow, milk, purr");
  CHECK(ex.orderedResponses.front() == "mouse");
}

TEST_CASE("rank example candidates permute the ground truth") {
  const auto table = smallTable();
  Rng rng(5);
  const auto ex = makeRankExample("dog", table, 10, rng);
  CHECK(ex.groundTruthRanking == corpus::topK(table, "dog", 10));
  auto sorted = ex.candidates;
  auto truth = ex.groundTruthRanking;
  std::sort(sorted.begin(), sorted.end());
  std::sort(truth.begin(), truth.end());
  CHECK(sorted == truth);
  CHECK_THROWS_AS(makeRankExample("cat", table, 10, rng), ValidationError);
  CHECK_THROWS_AS(makeRankExample("dog", table, 1, rng), ValidationError);
}

TEST_CASE("the reference answer earns the maximum reward") {
  const auto table = smallTable();
  Rng rng(9);
  const auto ex = makeRankExample("dog", table, 8, rng);
  CHECK(metrics::rankingReward(renderRankingAnswer(ex.groundTruthRanking), ex.groundTruthRanking) == 1.0);
}

TEST_CASE("MCQ item on a hand-built table") {
  const auto table = smallTable();
  Rng rng(11);
  const auto item = makeMcqItem("dog", table, {}, rng);
  CHECK(item.options.at(McqCategory::HighFreqDirect) == std::vector<std::string>{"cat", "bark", "pet", "bone"});
  for (const auto& w : item.options.at(McqCategory::LowFreqDirect)) {
    const auto& list = table.responses("dog");
    const auto pos = std::find_if(list.begin(), list.end(), [&](const auto& rc) { return rc.response == w; });
    CHECK(pos - list.begin() >= 6);
  }
  // cat -> mouse, meow, milk, purr; bark -> tree, wood
  for (const auto& w : item.options.at(McqCategory::Indirect))
    CHECK(std::set<std::string>{"mouse", "meow", "milk", "purr", "tree", "wood"}.count(w) == 1);
  CHECK(item.indirectSources.size() == 3);
  CHECK(item.presentation.size() == 4);
}

TEST_CASE("MCQ failure names the category") {
  Rng rng(1);
  McqConfig cfg;
  try {
    makeMcqItem("sun", smallTable(), cfg, rng);
    FAIL("expected an error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("highFreqDirect") != std::string::npos);
  }
}

TEST_CASE("MCQ categories are disjoint and respect exclusions on random tables") {
  Rng gen(2024);
  int built = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const auto table = randomTable(gen);
    for (const auto& cue : table.cues()) {
      Rng rng(gen.below(1u << 30));
      McqItem item;
      try {
        item = makeMcqItem(cue, table, {}, rng);
      } catch (const ValidationError&) {
        continue;
      }
      ++built;
      std::set<std::string> direct;
      for (const auto& rc : table.responses(cue)) direct.insert(rc.response);
      std::set<std::string> seen;
      for (const auto& [cat, words] : item.options)
        for (const auto& w : words) REQUIRE(seen.insert(w).second);
      for (const auto& w : item.options.at(McqCategory::Indirect)) {
        REQUIRE(direct.count(w) == 0);
        REQUIRE(w != cue);
      }
      for (const auto& w : item.options.at(McqCategory::Random)) {
        REQUIRE(direct.count(w) == 0);
        REQUIRE(w != cue);
      }
      for (const auto& w : item.options.at(McqCategory::LowFreqDirect)) REQUIRE(direct.count(w) == 1);
      for (std::size_t i = 0; i < item.indirectSources.size(); ++i) {
        const auto& src = item.indirectSources[i];
        REQUIRE(direct.count(src) == 1);
        REQUIRE(table.countOf(src, item.options.at(McqCategory::Indirect)[i]) > 0);
      }
    }
  }
  CHECK(built > 100);
}

TEST_CASE("corpus export round trip") {
  testing::TempDir dir;
  const auto table = smallTable();
  Rng rng(4);
  std::vector<CorpusExample> sft = {makeSftExample("dog", table, {}, rng), makeSftExample("cat", table, {}, rng)};
  std::vector<CorpusExample> rank = {makeRankExample("dog", table, 5, rng)};
  std::vector<CorpusExample> mcq = {makeMcqItem("dog", table, {}, rng)};
  CHECK(exportCorpus(sft, dir / "sft.jsonl", CorpusKind::Sft).lines == 2);
  CHECK(exportCorpus(rank, dir / "rank.jsonl", CorpusKind::Rank).lines == 1);
  CHECK(exportCorpus(mcq, dir / "mcq.jsonl", CorpusKind::Mcq).lines == 1);

  const auto back = readCorpus(dir / "sft.jsonl");
  REQUIRE(back.size() == 2);
  const auto& a = std::get<SftExample>(back[0]);
  const auto& b = std::get<SftExample>(sft[0]);
  CHECK(a.renderedPrompt == b.renderedPrompt);
  CHECK(a.target == b.target);
  CHECK(a.lowerBound == b.lowerBound);

  const auto r = std::get<RankExample>(readCorpus(dir / "rank.jsonl")[0]);
  CHECK(r.groundTruthRanking == std::get<RankExample>(rank[0]).groundTruthRanking);

  const auto m = std::get<McqItem>(readCorpus(dir / "mcq.jsonl")[0]);
  const auto& orig = std::get<McqItem>(mcq[0]);
  CHECK(m.options == orig.options);
  CHECK(m.presentation == orig.presentation);
  exportCorpus({m}, dir / "mcq2.jsonl", CorpusKind::Mcq);
  CHECK(testing::readFile(dir / "mcq2.jsonl") == testing::readFile(dir / "mcq.jsonl"));
}

TEST_CASE("empty export writes an empty file with a warning; kind mismatch throws") {
  testing::TempDir dir;
  const auto s = exportCorpus({}, dir / "empty.jsonl", CorpusKind::Sft);
  CHECK(s.lines == 0);
  CHECK(s.warnings.size() == 1);
  CHECK(std::filesystem::exists(dir / "empty.jsonl"));
  Rng rng(1);
  std::vector<CorpusExample> sft = {makeSftExample("dog", smallTable(), {}, rng)};
  CHECK_THROWS_AS(exportCorpus(sft, dir / "x.jsonl", CorpusKind::Rank), ValidationError);
}
