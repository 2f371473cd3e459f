#include "culture_probe/prompts.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "culture_probe/error.hpp"

namespace cprobe::prompts {

namespace {

constexpr const char* kSftBodyEn =
    "You are a sophisticated language model designed to explore word associations comprehensively.\n"
    "\n"
    "Given a cue word, your task is to generate a comprehensive list of words associated with the cue "
    "word. Aim to cover as many relevant contexts, uses, and meanings as possible without repeating "
    "similar concepts. List a target of [LOWER BOUND SIZE] to [UPPER BOUND SIZE] words that together "
    "provide a broad and insightful representation of all significant associations. Focus on revealing "
    "both common and unique aspects related to the cue word to ensure a balanced and thorough "
    "exploration of potential associations. Words should be distinct from each other. Your response "
    "shall only be the list of associated words. Do not generate words conditioned on the presence of "
    "other words but rather focus on the cue word itself.";

constexpr const char* kSftBodyZh =
    "您是一款专为全面探索词语关联而设计的高级语言模型。\n"
    "给定一个提示词，你的任务是生成一个与该提示词相关联的全面词汇列表。目标是尽可能涵盖所有相关的语境、"
    "用法和含义，避免重复相似的概念。列出目标数量为 [LOWER BOUND SIZE] 到 [UPPER BOUND SIZE]"
    "个词，这些词共同提供对所有重要关联的广泛而深刻的表示。专注于揭示与提示词相关的常见和独特的方面，"
    "以确保对潜在关联进行平衡而彻底的探索。词语应彼此不同。你的回答只能是相关联的词语列表。"
    "不要生成受其他词语存在影响的词语，而是专注于提示词本身。";

constexpr const char* kRankBodyEn =
    "You are a sophisticated language model designed to explore word associations comprehensively.\n"
    "\n"
    "Given the cue word, rank the following associated words from the most strongly related (rank 1) "
    "to the least strongly related (rank [RANK COUNT]).\n"
    "\n"
    "Important Notes: 1. Rank ONLY the provided associated words from strongest (1) to weakest "
    "([RANK COUNT]) in relation to the cue word. 2. Do NOT introduce any new words that aren't in the "
    "provided list.\n"
    "\n"
    "Think step by step, comparing each associated word to the others to determine their relative "
    "strength of association with the cue word.\n"
    "\n"
    "**Your final answer should at the end of the response and be in the following format:**\n"
    "\n"
    "Final Ranking:\n"
    "Rank 1: [Associated Word]\n"
    "Rank 2: [Associated Word]\n"
    "...\n"
    "Rank [RANK COUNT]: [Associated Word]";

// Output-format lines stay in English so one parser handles both languages.
constexpr const char* kRankBodyZh =
    "您是一款专为全面探索词语关联而设计的高级语言模型。\n"
    "\n"
    "给定提示词，请将以下关联词按照与提示词的关联强度，从最强（第1名）到最弱（第[RANK COUNT]名）进行排序。\n"
    "\n"
    "注意事项：1. 只对所提供的关联词进行排序，从最强（1）到最弱（[RANK COUNT]）。"
    "2. 不要引入所提供列表之外的任何新词。\n"
    "\n"
    "请逐步思考，将每个关联词与其他词进行比较，以确定它们与提示词关联的相对强度。\n"
    "\n"
    "**你的最终答案应位于回答的末尾，并采用以下格式：**\n"
    "\n"
    "Final Ranking:\n"
    "Rank 1: [Associated Word]\n"
    "Rank 2: [Associated Word]\n"
    "...\n"
    "Rank [RANK COUNT]: [Associated Word]";

std::string readWholeFile(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string s = ss.str();
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

std::string frame(const std::string& body, const std::string& cue) {
  std::string out = "[CONTEXT]\n\n";
  out += replaceAll(body, "[CUE WORD]", cue);
  out += "\n\n[CUE WORD]\n\n";
  out += cue;
  out += "\n\n[ASSOCIATED WORDS]\n\n";
  return out;
}

McqCategory categoryFromName(const std::string& name) {
  for (auto c : {McqCategory::HighFreqDirect, McqCategory::LowFreqDirect, McqCategory::Indirect,
                 McqCategory::Random}) {
    if (categoryName(c) == name) return c;
  }
  throw ValidationError("unknown MCQ category '" + name + "'");
}

}  // namespace

PromptTemplates PromptTemplates::defaults(text::Language lang) {
  PromptTemplates t;
  t.language = lang;
  t.sftBody = lang == text::Language::En ? kSftBodyEn : kSftBodyZh;
  t.rankBody = lang == text::Language::En ? kRankBodyEn : kRankBodyZh;
  return t;
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& dir, text::Language lang) {
  PromptTemplates t = defaults(lang);
  const std::string tag(text::languageTag(lang));
  const auto sft = dir / ("sft." + tag + ".txt");
  const auto rank = dir / ("rank." + tag + ".txt");
  if (std::filesystem::exists(sft)) t.sftBody = readWholeFile(sft);
  if (std::filesystem::exists(rank)) t.rankBody = readWholeFile(rank);
  return t;
}

std::string_view listSeparator(text::Language lang) {
  return lang == text::Language::En ? ", " : "， ";
}

std::string replaceAll(std::string s, std::string_view from, std::string_view to) {
  if (from.empty()) return s;
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

void BoundsPolicy::validate() const {
  if (minLo < 1 || minLo > maxLo) throw ValidationError("bounds policy: need 1 <= minLo <= maxLo");
  if (minHi > maxHi) throw ValidationError("bounds policy: need minHi <= maxHi");
  if (minGap < 0) throw ValidationError("bounds policy: minGap must be >= 0");
  if (std::max(minHi, maxLo + minGap) > maxHi)
    throw ValidationError("bounds policy: maxHi must be >= max(minHi, maxLo + minGap)");
}

std::string_view categoryName(McqCategory c) {
  switch (c) {
    case McqCategory::HighFreqDirect: return "highFreqDirect";
    case McqCategory::LowFreqDirect: return "lowFreqDirect";
    case McqCategory::Indirect: return "indirect";
    case McqCategory::Random: return "random";
  }
  return "?";
}

std::string renderSftPrompt(const PromptTemplates& t, const std::string& cue, int lower, int upper) {
  std::string body = replaceAll(t.sftBody, "[LOWER BOUND SIZE]", std::to_string(lower));
  body = replaceAll(std::move(body), "[UPPER BOUND SIZE]", std::to_string(upper));
  return frame(body, cue);
}

std::string renderRankPrompt(const PromptTemplates& t, const std::string& cue,
                             const std::vector<std::string>& candidates) {
  const std::string body = replaceAll(t.rankBody, "[RANK COUNT]", std::to_string(candidates.size()));
  return frame(body, cue) + text::join(candidates, listSeparator(t.language));
}

std::string renderRankingAnswer(const std::vector<std::string>& ranking) {
  std::string out = "Final Ranking:";
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    out += "\nRank " + std::to_string(i + 1) + ": " + ranking[i];
  }
  return out;
}

SftExample makeSftExample(const std::string& cue, const corpus::AssociationTable& table,
                          const BoundsPolicy& bounds, Rng& rng, const PromptTemplates& templates) {
  bounds.validate();
  const auto& list = table.responses(cue);
  SftExample ex;
  ex.cue = cue;
  ex.orderedResponses.reserve(list.size());
  for (const auto& rc : list) ex.orderedResponses.push_back(rc.response);
  ex.lowerBound = static_cast<int>(rng.between(bounds.minLo, bounds.maxLo));
  ex.upperBound =
      static_cast<int>(rng.between(std::max(bounds.minHi, ex.lowerBound + bounds.minGap), bounds.maxHi));
  ex.renderedPrompt = renderSftPrompt(templates, cue, ex.lowerBound, ex.upperBound);
  ex.target = text::join(ex.orderedResponses, listSeparator(templates.language));
  return ex;
}

RankExample makeRankExample(const std::string& cue, const corpus::AssociationTable& table, std::size_t n,
                            Rng& rng, const PromptTemplates& templates) {
  if (n < 2) throw ValidationError("ranking examples need at least 2 candidates");
  const auto& list = table.responses(cue);
  if (list.size() < n) {
    throw ValidationError("cue '" + cue + "' has " + std::to_string(list.size()) + " responses, ranking needs " +
                          std::to_string(n));
  }
  RankExample ex;
  ex.cue = cue;
  ex.groundTruthRanking = corpus::topK(table, cue, n);
  ex.candidates = ex.groundTruthRanking;
  rng.shuffle(ex.candidates);
  ex.renderedPrompt = renderRankPrompt(templates, cue, ex.candidates);
  return ex;
}

McqItem makeMcqItem(const std::string& cue, const corpus::AssociationTable& table, const McqConfig& config,
                    Rng& rng) {
  const auto& list = table.responses(cue);
  const std::string cueKey = text::normalizeWord(cue);

  std::set<std::string> direct;
  for (const auto& rc : list) direct.insert(rc.response);

  auto fail = [&](McqCategory c, std::size_t have, std::size_t need) {
    throw ValidationError("cue '" + cue + "': not enough candidates for category " +
                          std::string(categoryName(c)) + " (have " + std::to_string(have) + ", need " +
                          std::to_string(need) + ")");
  };

  McqItem item;
  item.cue = cue;

  if (list.size() < config.kHigh) fail(McqCategory::HighFreqDirect, list.size(), config.kHigh);
  auto& high = item.options[McqCategory::HighFreqDirect];
  for (std::size_t i = 0; i < config.kHigh; ++i) high.push_back(list[i].response);

  // Bottom half of the list, never overlapping the high-frequency picks.
  const std::size_t lowStart = std::max(config.kHigh, list.size() / 2);
  const std::size_t lowPool = list.size() > lowStart ? list.size() - lowStart : 0;
  if (lowPool < config.kLow) fail(McqCategory::LowFreqDirect, lowPool, config.kLow);
  auto picks = rng.sampleIndices(lowPool, config.kLow);
  std::sort(picks.begin(), picks.end());
  auto& low = item.options[McqCategory::LowFreqDirect];
  for (auto p : picks) low.push_back(list[lowStart + p].response);

  // Two-step neighbourhood: associates of any direct associate that is itself a cue.
  std::set<std::string> allIndirect;
  for (const auto& rc : list) {
    if (!table.contains(rc.response)) continue;
    for (const auto& second : table.responses(rc.response)) {
      if (!direct.count(second.response) && second.response != cueKey && second.response != cue)
        allIndirect.insert(second.response);
    }
  }

  auto& indirect = item.options[McqCategory::Indirect];
  std::set<std::string> taken;
  std::size_t visited = 0;
  for (const auto& rc : list) {
    if (visited == config.fanout || indirect.size() == config.kIndirect) break;
    if (!table.contains(rc.response)) continue;
    ++visited;
    for (const auto& second : table.responses(rc.response)) {
      if (indirect.size() == config.kIndirect) break;
      if (!allIndirect.count(second.response) || !taken.insert(second.response).second) continue;
      indirect.push_back(second.response);
      item.indirectSources.push_back(rc.response);
    }
  }
  if (indirect.size() < config.kIndirect) fail(McqCategory::Indirect, indirect.size(), config.kIndirect);

  std::set<std::string> vocabulary;
  for (const auto& [c, responses] : table.entries()) {
    vocabulary.insert(text::normalizeWord(c));
    for (const auto& rc : responses) vocabulary.insert(rc.response);
  }
  std::vector<std::string> eligible;
  for (const auto& w : vocabulary) {
    if (w == cueKey || w == cue || direct.count(w) || allIndirect.count(w)) continue;
    eligible.push_back(w);
  }
  if (eligible.size() < config.kRandom) fail(McqCategory::Random, eligible.size(), config.kRandom);
  auto& random = item.options[McqCategory::Random];
  for (auto idx : rng.sampleIndices(eligible.size(), config.kRandom)) random.push_back(eligible[idx]);

  item.presentation = {McqCategory::HighFreqDirect, McqCategory::LowFreqDirect, McqCategory::Indirect,
                       McqCategory::Random};
  rng.shuffle(item.presentation);
  return item;
}

std::string_view corpusKindName(CorpusKind k) {
  switch (k) {
    case CorpusKind::Sft: return "sft";
    case CorpusKind::Rank: return "rank";
    case CorpusKind::Mcq: return "mcq";
  }
  return "?";
}

ExportSummary exportCorpus(const std::vector<CorpusExample>& examples, const std::filesystem::path& path,
                           CorpusKind kind) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  ExportSummary summary;
  if (examples.empty()) summary.warnings.push_back("no examples to export; wrote empty file " + path.string());

  for (const auto& ex : examples) {
    nlohmann::ordered_json j;
    j["kind"] = corpusKindName(kind);
    if (const auto* sft = std::get_if<SftExample>(&ex); sft && kind == CorpusKind::Sft) {
      j["cue"] = sft->cue;
      j["prompt"] = sft->renderedPrompt;
      j["target"] = sft->target;
      j["lowerBound"] = sft->lowerBound;
      j["upperBound"] = sft->upperBound;
      j["orderedResponses"] = sft->orderedResponses;
    } else if (const auto* rank = std::get_if<RankExample>(&ex); rank && kind == CorpusKind::Rank) {
      j["cue"] = rank->cue;
      j["prompt"] = rank->renderedPrompt;
      j["groundTruth"] = rank->groundTruthRanking;
      j["candidates"] = rank->candidates;
    } else if (const auto* mcq = std::get_if<McqItem>(&ex); mcq && kind == CorpusKind::Mcq) {
      j["cue"] = mcq->cue;
      std::string prompt = "Given the cue word, choose the set of words most closely related to it.\n\n"
                           "[CUE WORD]\n\n" + mcq->cue + "\n\n[OPTIONS]\n";
      std::vector<McqCategory> order = mcq->presentation;
      if (order.empty())
        for (const auto& [cat, _] : mcq->options) order.push_back(cat);
      char letter = 'A';
      std::string answer;
      nlohmann::ordered_json options;
      auto shown = nlohmann::ordered_json::array();
      for (auto cat : order) {
        const auto& words = mcq->options.at(cat);
        if (cat == mcq->correctCategory) answer = std::string(1, letter);
        prompt += "\n" + std::string(1, letter++) + ": " + text::join(words, ", ");
        options[std::string(categoryName(cat))] = words;
        shown.push_back(categoryName(cat));
      }
      j["prompt"] = prompt;
      j["options"] = options;
      j["order"] = shown;
      j["indirectSources"] = mcq->indirectSources;
      j["correct"] = categoryName(mcq->correctCategory);
      j["answer"] = answer;
    } else {
      throw ValidationError("example type does not match corpus kind " + std::string(corpusKindName(kind)));
    }
    out << j.dump() << '\n';
    ++summary.lines;
  }
  if (!out) throw IoError("write failed for " + path.string());
  return summary;
}

std::vector<CorpusExample> readCorpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<CorpusExample> out;
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto kind = j.at("kind").get<std::string>();
      if (kind == "sft") {
        SftExample ex;
        ex.cue = j.at("cue").get<std::string>();
        ex.renderedPrompt = j.at("prompt").get<std::string>();
        ex.target = j.at("target").get<std::string>();
        ex.lowerBound = j.value("lowerBound", 0);
        ex.upperBound = j.value("upperBound", 0);
        ex.orderedResponses = j.value("orderedResponses", std::vector<std::string>{});
        out.emplace_back(std::move(ex));
      } else if (kind == "rank") {
        RankExample ex;
        ex.cue = j.at("cue").get<std::string>();
        ex.renderedPrompt = j.at("prompt").get<std::string>();
        ex.groundTruthRanking = j.at("groundTruth").get<std::vector<std::string>>();
        ex.candidates = j.value("candidates", std::vector<std::string>{});
        out.emplace_back(std::move(ex));
      } else if (kind == "mcq") {
        McqItem item;
        item.cue = j.at("cue").get<std::string>();
        for (const auto& [name, words] : j.at("options").items())
          item.options[categoryFromName(name)] = words.get<std::vector<std::string>>();
        item.indirectSources = j.value("indirectSources", std::vector<std::string>{});
        for (const auto& name : j.value("order", std::vector<std::string>{}))
          item.presentation.push_back(categoryFromName(name));
        if (j.contains("correct")) item.correctCategory = categoryFromName(j["correct"].get<std::string>());
        out.emplace_back(std::move(item));
      } else {
        throw ValidationError("unknown kind '" + kind + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path.string() + ":" + std::to_string(lineNo) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace cprobe::prompts
