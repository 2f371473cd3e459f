#include "culture_probe/cli/commands.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "culture_probe/cli/manifest.hpp"
#include "culture_probe/cli/svg.hpp"
#include "culture_probe/corpus.hpp"
#include "culture_probe/error.hpp"
#include "culture_probe/hashing.hpp"
#include "culture_probe/metrics.hpp"
#include "culture_probe/modelio.hpp"
#include "culture_probe/prompts.hpp"
#include "culture_probe/psychnorms.hpp"
#include "culture_probe/text.hpp"
#include "culture_probe/values.hpp"

namespace cprobe::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;
using text::formatNumber;

const std::vector<std::string>& generalKeys() {
  static const std::vector<std::string> keys = {"seed", "language", "ks", "tension-n", "metric"};
  return keys;
}

const std::vector<CommandInfo>& commandTable() {
  static const std::vector<CommandInfo> table = {
      {"ingest", "Read a word-association TSV and write the aggregated cue table",
       {"corpus", "format", "country", "native-language"}},
      {"split", "Partition cues into train/valid/test", {"ratios"}},
      {"gen-prompts", "Build SFT, ranking, multiple-choice and evaluation prompts",
       {"templates", "bounds", "min-gap", "rank-n", "mcq-counts", "mcq-fanout", "mcq-split", "eval-split"}},
      {"eval-assoc", "Score generated association lists (P@K, Spearman)", {"generations", "eval-split"}},
      {"eval-rank", "Score ranking outputs with the ranking reward", {"rankings", "rank-n", "eval-split"}},
      {"eval-psych", "Compare valence, arousal and concreteness profiles with the human norms",
       {"generations", "valence", "arousal", "concreteness", "valence-scale", "arousal-scale", "concreteness-scale",
        "lemmas", "conc-boundary", "emotional-delta", "human-top-k", "eval-split"}},
      {"eval-values", "Distances between model and population survey answer distributions",
       {"survey", "option-scores", "reference-pop", "target-pop", "baseline", "keep-non-ordinal"}},
      {"tension-set", "Select the survey questions on which two populations diverge most",
       {"survey", "reference-pop", "target-pop", "keep-non-ordinal"}},
      {"shift", "Tally which population each model's answers lean toward",
       {"survey", "option-scores", "reference-pop", "target-pop", "shift-questions", "keep-non-ordinal"}},
      {"report", "Summary tables, threshold curves and shift plots", {"curve-metric", "curve-step"}},
      {"collect", "Query a chat-completion endpoint for generations, rankings or option scores",
       {"base-url", "api-key-env", "model-name", "output-name", "collect-kind", "max-concurrent", "timeout",
        "retries", "backoff-ms", "temperature", "max-tokens", "top-logprobs", "survey", "keep-non-ordinal"}},
      {"verify", "Check every artifact in the run directory against its recorded hash", {}},
  };
  return table;
}

namespace {

std::string readFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void warn(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

class Csv {
 public:
  explicit Csv(const std::vector<std::string>& header) { row(header); }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ += ',';
      out_ += text::csvField(cells[i]);
    }
    out_ += '\n';
  }
  const std::string& str() const { return out_; }

 private:
  std::string out_;
};

std::string optNumber(const std::optional<double>& v) { return v ? formatNumber(*v) : ""; }
ordered_json optJson(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

/// One subcommand invocation: resolves settings, tracks inputs and outputs,
/// and records itself in the manifest on success.
class Step {
 public:
  Step(const std::string& command, const Config& config, fs::path runDir)
      : settings(config, command), runDir_(std::move(runDir)), manifest_(RunManifest::loadOrCreate(runDir_)) {
    record_.command = command;
    record_.startedAt = utcNow();
  }

  Settings settings;

  const fs::path& runDir() const { return runDir_; }
  const RunManifest& manifest() const { return manifest_; }

  bool has(const std::string& rel) const { return fs::exists(runDir_ / rel); }

  /// Artifact written by an earlier subcommand; verified against the manifest.
  fs::path upstream(const std::string& rel, const std::string& producer) {
    const auto path = runDir_ / rel;
    if (!fs::exists(path))
      throw ValidationError("missing " + rel + " in " + runDir_.string() + "; run 'culture-probe " + producer +
                            "' first");
    manifest_.verifyArtifact(runDir_, rel);
    addInput(rel, path);
    return path;
  }

  std::string upstreamText(const std::string& rel, const std::string& producer) {
    return readFile(upstream(rel, producer));
  }

  /// File named by a setting, outside the run directory.
  fs::path external(const std::string& key) {
    const auto path = settings.requiredPath(key);
    return externalPath(path, key);
  }

  fs::path externalPath(const fs::path& path, const std::string& key) {
    if (!fs::exists(path)) throw IoError("file given by " + flagName(key) + " does not exist: " + path.string());
    if (fs::is_regular_file(path)) addInput(path.string(), path);
    return path;
  }

  void write(const std::string& rel, const std::string& content) {
    const auto path = prepare(rel);
    {
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      out << content;
      if (!out) throw IoError("cannot write " + path.string());
    }
    adopt(rel);
  }

  void writeJson(const std::string& rel, const ordered_json& j) { write(rel, j.dump(2) + "\n"); }

  /// Creates the parent directory for a file some other routine writes.
  fs::path prepare(const std::string& rel) {
    const auto path = runDir_ / rel;
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
    return path;
  }

  void adopt(const std::string& rel) {
    auto it = std::find_if(record_.outputs.begin(), record_.outputs.end(),
                           [&](const ArtifactRef& r) { return r.path == rel; });
    const auto hash = sha256File(runDir_ / rel);
    if (it != record_.outputs.end()) {
      it->sha256 = hash;
    } else {
      record_.outputs.push_back({rel, hash});
    }
  }

  void finish() {
    // Outputs of the previous run of this command that this run did not
    // produce again would otherwise linger with stale content.
    if (auto prev = manifest_.steps().find(record_.command); prev != manifest_.steps().end()) {
      for (const auto& old : prev->second.outputs) {
        const bool kept = std::any_of(record_.outputs.begin(), record_.outputs.end(),
                                      [&](const ArtifactRef& r) { return r.path == old.path; });
        if (!kept) {
          std::error_code ec;
          fs::remove(runDir_ / old.path, ec);
        }
      }
    }
    record_.configSnapshot = settings.snapshot();
    record_.finishedAt = utcNow();
    manifest_.record(record_);
    manifest_.save(runDir_);
  }

 private:
  void addInput(const std::string& name, const fs::path& path) {
    for (const auto& r : record_.inputs)
      if (r.path == name) return;
    record_.inputs.push_back({name, sha256File(path)});
  }

  fs::path runDir_;
  RunManifest manifest_;
  StepRecord record_;
};

// ---------------------------------------------------------------------------
// Shared loaders

std::string safeName(const std::string& s) {
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.') ? c : '_';
  return out;
}

corpus::AssociationTable loadTable(Step& step) {
  return corpus::readAggregatedTable(step.upstream("corpus/table.tsv", "ingest"));
}

corpus::CorpusSplit loadSplit(Step& step) {
  return corpus::splitFromJson(step.upstreamText("split/split.json", "split"));
}

std::vector<std::string> partitionCues(Step& step, const corpus::AssociationTable& table, const std::string& key,
                                       const std::string& fallback) {
  const auto which = step.settings.string(key, fallback);
  if (which == "all") return table.cues();
  const auto split = loadSplit(step);
  if (which == "train") return split.train;
  if (which == "valid") return split.valid;
  if (which == "test") return split.test;
  throw ValidationError("invalid value '" + which + "' for " + flagName(key) + ": expected train, valid, test or all");
}

text::Language language(const Step& step) { return text::parseLanguage(step.settings.string("language", "en")); }

[[noreturn]] void failOnLineErrors(const fs::path& path, const std::vector<modelio::LineError>& errors) {
  std::string msg = path.string() + ": " + std::to_string(errors.size()) + " invalid line(s)";
  for (std::size_t i = 0; i < errors.size() && i < 5; ++i)
    msg += "\n  line " + std::to_string(errors[i].line) + ": " + errors[i].message;
  throw ValidationError(msg);
}

struct ModelWords {
  std::map<std::string, modelio::GenerationRecord> byCue;
  std::vector<std::string> missing;
  std::size_t outsideEvalSet = 0;
};

ModelWords loadModelWords(Step& step, const fs::path& path, const std::string& key, modelio::OutputKind kind,
                          const std::vector<std::string>& evalCues) {
  step.externalPath(path, key);
  auto out = modelio::readOutputs(path, kind);
  if (!out.errors.empty()) failOnLineErrors(path, out.errors);
  const std::set<std::string> wanted(evalCues.begin(), evalCues.end());
  ModelWords mw;
  for (auto& r : out.generations) {
    if (!wanted.count(r.cue)) {
      ++mw.outsideEvalSet;
      continue;
    }
    if (mw.byCue.count(r.cue)) {
      warn(path.string() + ": repeated cue '" + r.cue + "', keeping the first record");
      continue;
    }
    mw.byCue.emplace(r.cue, std::move(r));
  }
  for (const auto& c : evalCues)
    if (!mw.byCue.count(c)) mw.missing.push_back(c);
  if (mw.byCue.empty())
    throw ValidationError(path.string() + " covers none of the " + std::to_string(evalCues.size()) +
                          " evaluation cues; check " + flagName("eval-split"));
  if (!mw.missing.empty())
    warn(path.string() + ": " + std::to_string(mw.missing.size()) + " evaluation cue(s) have no output");
  return mw;
}

struct SurveyContext {
  std::vector<values::SurveyQuestion> questions;
  std::string reference;
  std::string target;
};

SurveyContext loadSurveyContext(Step& step) {
  SurveyContext s;
  values::SurveyLoadOptions opts;
  opts.dropNonOrdinal = !step.settings.boolean("keep-non-ordinal", false);
  s.questions = values::loadSurvey(step.external("survey"), opts);
  if (s.questions.empty()) throw ValidationError("survey has no questions");
  s.reference = step.settings.string("reference-pop", "US");
  s.target = step.settings.string("target-pop", "CN");
  if (s.reference == s.target) throw ValidationError("reference and target populations must differ");
  for (const auto& q : s.questions) {
    q.population(s.reference);
    q.population(s.target);
  }
  return s;
}

struct ModelDistributions {
  std::map<std::string, values::AnswerDistribution> byQuestion;
  std::vector<std::string> missing;
  std::size_t flagged = 0;
};

ModelDistributions loadModelDistributions(Step& step, const fs::path& path,
                                          const std::vector<values::SurveyQuestion>& questions) {
  step.externalPath(path, "option-scores");
  auto out = modelio::readOutputs(path, modelio::OutputKind::OptionScores);
  if (!out.errors.empty()) failOnLineErrors(path, out.errors);
  std::map<std::string, const values::SurveyQuestion*> byId;
  for (const auto& q : questions) byId[q.id] = &q;
  ModelDistributions md;
  for (const auto& r : out.optionScores) {
    auto it = byId.find(r.questionId);
    if (it == byId.end()) continue;
    if (md.byQuestion.count(r.questionId))
      throw ValidationError(path.string() + ": question " + r.questionId + " appears twice");
    if (r.optionSymbols != it->second->options)
      throw ValidationError(path.string() + ": option symbols for question " + r.questionId +
                            " do not match the survey's options (" + text::join(it->second->options, ",") + ")");
    if (!r.flags.empty()) ++md.flagged;
    md.byQuestion.emplace(r.questionId, r.distribution());
  }
  for (const auto& q : questions)
    if (!md.byQuestion.count(q.id)) md.missing.push_back(q.id);
  if (md.byQuestion.empty()) throw ValidationError(path.string() + " scores none of the survey's questions");
  if (!md.missing.empty())
    warn(path.string() + ": " + std::to_string(md.missing.size()) + " survey question(s) have no scores");
  return md;
}

ordered_json scoreJson(const values::DivergenceScore& s) {
  return {{"js", s.js}, {"emd", s.emd}, {"combo", s.combo}};
}

values::DivergenceScore scoreFromJson(const json& j) {
  return {j.at("js").get<double>(), j.at("emd").get<double>(), j.at("combo").get<double>()};
}

// ---------------------------------------------------------------------------
// Subcommands

void cmdIngest(Step& step) {
  const auto path = step.external("corpus");
  const auto format = corpus::parseCorpusFormat(step.settings.string("format", "long"));
  auto result = corpus::ingest(path, format);

  corpus::FilterSpec spec;
  spec.country = step.settings.optString("country");
  spec.nativeLanguage = step.settings.optString("native-language");
  const std::size_t before = result.records.size();
  auto filtered = corpus::filterRecords(result.records, spec);
  if (filtered.records.empty())
    throw ValidationError("no association records left after filtering " + std::to_string(before) + " rows");
  const auto table = corpus::aggregate(filtered.records);

  std::ostringstream tsv;
  corpus::writeAggregatedTsv(table, tsv);
  step.write("corpus/table.tsv", tsv.str());

  ordered_json report;
  report["rows"] = before;
  report["kept"] = filtered.records.size();
  report["missingMetadata"] = filtered.missingMetadata;
  report["cues"] = table.size();
  report["skippedEmptyLines"] = result.skippedEmptyLines;
  report["errors"] = ordered_json::array();
  for (const auto& e : result.errors) report["errors"].push_back({{"line", e.line}, {"message", e.message}});
  step.writeJson("corpus/ingest_report.json", report);

  if (!result.errors.empty()) warn(std::to_string(result.errors.size()) + " malformed row(s), see corpus/ingest_report.json");
  std::cerr << "ingest: " << filtered.records.size() << " records, " << table.size() << " cues\n";
}

void cmdSplit(Step& step) {
  const auto table = loadTable(step);
  const auto r = step.settings.reals("ratios", {0.8, 0.1, 0.1});
  if (r.size() != 3) throw ValidationError(flagName("ratios") + " needs three values (train,valid,test)");
  const auto seed = step.settings.unsignedInteger("seed", 0);
  const auto split = corpus::splitByCue(table, {r[0], r[1], r[2]}, seed);
  step.write("split/split.json", corpus::splitToJson(split) + "\n");
  std::cerr << "split: " << split.train.size() << "/" << split.valid.size() << "/" << split.test.size() << " cues\n";
}

void cmdGenPrompts(Step& step) {
  const auto table = loadTable(step);
  const auto split = loadSplit(step);
  const auto lang = language(step);
  const auto seed = step.settings.unsignedInteger("seed", 0);

  prompts::PromptTemplates templates = prompts::PromptTemplates::defaults(lang);
  if (auto dir = step.settings.optPath("templates")) {
    if (!fs::is_directory(*dir)) throw IoError("template directory given by --templates does not exist: " + dir->string());
    const auto tag = std::string(text::languageTag(lang));
    for (const auto* name : {"sft.", "rank."}) {
      const auto file = *dir / (name + tag + ".txt");
      if (fs::exists(file)) step.externalPath(file, "templates");
    }
    templates = prompts::PromptTemplates::load(*dir, lang);
  }

  const auto b = step.settings.sizes("bounds", {10, 20, 40, 80});
  if (b.size() != 4) throw ValidationError(flagName("bounds") + " needs four values: minLo,maxLo,minHi,maxHi");
  prompts::BoundsPolicy bounds{static_cast<int>(b[0]), static_cast<int>(b[1]), static_cast<int>(b[2]),
                               static_cast<int>(b[3]), static_cast<int>(step.settings.integer("min-gap", 10))};
  bounds.validate();
  const auto rankN = step.settings.unsignedInteger("rank-n", 10);
  const auto mc = step.settings.sizes("mcq-counts", {4, 4, 3, 4});
  if (mc.size() != 4) throw ValidationError(flagName("mcq-counts") + " needs four values: high,low,indirect,random");
  prompts::McqConfig mcq{mc[0], mc[1], mc[2], mc[3], step.settings.unsignedInteger("mcq-fanout", 3)};
  const auto mcqCues = partitionCues(step, table, "mcq-split", "test");
  const auto evalCues = partitionCues(step, table, "eval-split", "test");

  // Independent streams so one kind's output does not depend on another's count.
  Rng sftRng(seed), rankRng(seed + 1), mcqRng(seed + 2), evalRng(seed + 3);
  std::vector<prompts::CorpusExample> sft, rank, items, evalSft, evalRank;
  std::vector<std::string> shortCues, mcqSkipped;
  for (const auto& cue : split.train) {
    sft.emplace_back(prompts::makeSftExample(cue, table, bounds, sftRng, templates));
    if (table.responses(cue).size() >= rankN) {
      rank.emplace_back(prompts::makeRankExample(cue, table, rankN, rankRng, templates));
    } else {
      shortCues.push_back(cue);
    }
  }
  for (const auto& cue : mcqCues) {
    try {
      items.emplace_back(prompts::makeMcqItem(cue, table, mcq, mcqRng));
    } catch (const ValidationError& e) {
      mcqSkipped.push_back(e.what());
    }
  }
  for (const auto& cue : evalCues) {
    evalSft.emplace_back(prompts::makeSftExample(cue, table, bounds, evalRng, templates));
    if (table.responses(cue).size() >= rankN) evalRank.emplace_back(prompts::makeRankExample(cue, table, rankN, evalRng, templates));
  }

  ordered_json summary;
  auto emit = [&](const std::string& rel, const std::vector<prompts::CorpusExample>& ex, prompts::CorpusKind kind) {
    const auto s = prompts::exportCorpus(ex, step.prepare(rel), kind);
    step.adopt(rel);
    for (const auto& w : s.warnings) warn(rel + ": " + w);
    summary[rel] = s.lines;
  };
  emit("prompts/sft.jsonl", sft, prompts::CorpusKind::Sft);
  emit("prompts/rank.jsonl", rank, prompts::CorpusKind::Rank);
  emit("prompts/mcq.jsonl", items, prompts::CorpusKind::Mcq);
  emit("prompts/eval.jsonl", evalSft, prompts::CorpusKind::Sft);
  emit("prompts/eval_rank.jsonl", evalRank, prompts::CorpusKind::Rank);
  summary["rankSkippedCues"] = shortCues;
  summary["mcqSkipped"] = mcqSkipped;
  step.writeJson("prompts/summary.json", summary);
  if (!mcqSkipped.empty()) warn(std::to_string(mcqSkipped.size()) + " cue(s) could not form a multiple-choice item");
}

void cmdEvalAssoc(Step& step) {
  const auto table = loadTable(step);
  const auto evalCues = partitionCues(step, table, "eval-split", "test");
  const auto ks = step.settings.sizes("ks", {5, 10, 20, 30, 40});
  const auto models = step.settings.namedPaths("generations");

  ordered_json results;
  results["ks"] = ks;
  results["evalCues"] = evalCues.size();
  results["models"] = ordered_json::array();
  std::vector<std::string> header = {"model", "cues"};
  for (auto k : ks) header.push_back("p_at_" + std::to_string(k));
  header.insert(header.end(), {"spearman", "spearman_cues"});
  Csv summary(header);

  for (const auto& [name, path] : models) {
    const auto mw = loadModelWords(step, path, "generations", modelio::OutputKind::Generation, evalCues);
    std::map<std::string, std::vector<std::string>> gens;
    for (const auto& [cue, r] : mw.byCue) gens[cue] = r.words;
    const auto report = metrics::evaluateGenerationRun(gens, table, ks);
    step.write("assoc/" + name + ".csv", metrics::reportToCsv(report));

    ordered_json m;
    m["name"] = name;
    m["cues"] = report.perCue.size();
    m["missing"] = mw.missing;
    m["meanPrecision"] = ordered_json::object();
    for (const auto& [k, v] : report.meanPrecision) m["meanPrecision"][std::to_string(k)] = v;
    m["meanSpearman"] = optJson(report.meanSpearman);
    m["spearmanCues"] = report.spearmanCount;
    results["models"].push_back(m);

    std::vector<std::string> row = {name, std::to_string(report.perCue.size())};
    for (auto k : ks) row.push_back(formatNumber(report.meanPrecision.at(k)));
    row.push_back(optNumber(report.meanSpearman));
    row.push_back(std::to_string(report.spearmanCount));
    summary.row(row);
  }
  step.writeJson("assoc/results.json", results);
  step.write("assoc/summary.csv", summary.str());
}

void cmdEvalRank(Step& step) {
  const auto table = loadTable(step);
  const auto evalCues = partitionCues(step, table, "eval-split", "test");
  const auto n = step.settings.unsignedInteger("rank-n", 10);
  const auto models = step.settings.namedPaths("rankings");

  ordered_json results;
  results["n"] = n;
  results["models"] = ordered_json::array();
  Csv summary({"model", "cues", "mean_reward"});
  for (const auto& [name, path] : models) {
    const auto mw = loadModelWords(step, path, "rankings", modelio::OutputKind::Ranking, evalCues);
    std::map<std::string, std::string> responses;
    for (const auto& [cue, r] : mw.byCue)
      responses[cue] = r.rawText.empty() ? prompts::renderRankingAnswer(r.words) : r.rawText;
    const auto report = metrics::evaluateRankingRun(responses, table, n);
    for (const auto& e : report.errors) warn(name + ": " + e);
    Csv perCue({"cue", "reward"});
    for (const auto& [cue, reward] : report.perCue) perCue.row({cue, formatNumber(reward)});
    step.write("rank/" + name + ".csv", perCue.str());
    results["models"].push_back({{"name", name},
                                 {"cues", report.perCue.size()},
                                 {"missing", mw.missing},
                                 {"meanReward", report.meanReward}});
    summary.row({name, std::to_string(report.perCue.size()), formatNumber(report.meanReward)});
  }
  step.writeJson("rank/results.json", results);
  step.write("rank/summary.csv", summary.str());
}

ordered_json coverageJson(const psychnorms::CoverageSummary& c) {
  return {{"emotional", c.emotionalPct}, {"concrete", c.concPct}, {"abstract", c.absPct}, {"unknown", c.unkPct}};
}

void cmdEvalPsych(Step& step) {
  const auto table = loadTable(step);
  const auto evalCues = partitionCues(step, table, "eval-split", "test");
  const auto lang = language(step);

  psychnorms::Lexicons lex;
  lex.language = lang;
  auto loadOne = [&](const std::string& key, psychnorms::NormLexicon& target) {
    const auto path = step.external(key);
    auto scalePath = step.settings.optPath(key + "-scale");
    if (!scalePath) scalePath = fs::path(path).replace_extension(".scale.json");
    const auto scale = psychnorms::loadScaleSpec(step.externalPath(*scalePath, key + "-scale"));
    auto loaded = psychnorms::loadLexicon(path, scale, lang);
    if (!loaded.errors.empty()) {
      std::string msg = path.string() + ": " + std::to_string(loaded.errors.size()) + " invalid row(s)";
      for (std::size_t i = 0; i < loaded.errors.size() && i < 5; ++i)
        msg += "\n  line " + std::to_string(loaded.errors[i].line) + ": " + loaded.errors[i].message;
      throw ValidationError(msg);
    }
    for (const auto& w : loaded.warnings) warn(path.string() + ": " + w);
    target = std::move(loaded.lexicon);
  };
  loadOne("valence", lex.valence);
  loadOne("arousal", lex.arousal);
  loadOne("concreteness", lex.concreteness);
  if (step.settings.optPath("lemmas")) lex.lemmas = psychnorms::loadLemmaTable(step.external("lemmas"));

  psychnorms::ProfileThresholds th;
  th.concBoundary = step.settings.real("conc-boundary", th.concBoundary);
  th.emotionalDelta = step.settings.real("emotional-delta", th.emotionalDelta);
  const auto humanTopK = step.settings.unsignedInteger("human-top-k", 0);

  std::map<std::string, psychnorms::CueProfile> human;
  for (const auto& cue : evalCues) {
    const auto& list = table.responses(cue);
    human[cue] = psychnorms::cueProfile(cue, corpus::topK(table, cue, humanTopK ? humanTopK : list.size()), lex, th);
  }
  step.write("psych/human_profiles.csv", psychnorms::profilesToCsv(human));

  ordered_json results;
  results["language"] = text::languageTag(lang);
  results["thresholds"] = {{"concBoundary", th.concBoundary}, {"emotionalDelta", th.emotionalDelta}};
  results["human"] = {{"cues", human.size()}, {"coverage", coverageJson(psychnorms::summarizeCoverage(human))}};
  results["models"] = ordered_json::array();

  for (const auto& [name, path] : step.settings.namedPaths("generations")) {
    const auto mw = loadModelWords(step, path, "generations", modelio::OutputKind::Generation, evalCues);
    std::map<std::string, psychnorms::CueProfile> model;
    for (const auto& [cue, r] : mw.byCue) model[cue] = psychnorms::cueProfile(cue, r.words, lex, th);
    step.write("psych/" + name + "_profiles.csv", psychnorms::profilesToCsv(model));

    ordered_json m;
    m["name"] = name;
    m["cues"] = model.size();
    m["coverage"] = coverageJson(psychnorms::summarizeCoverage(model));
    m["tests"] = ordered_json::array();
    for (auto metric : {psychnorms::PsychMetric::Valence, psychnorms::PsychMetric::Arousal,
                        psychnorms::PsychMetric::Concreteness}) {
      ordered_json t;
      t["metric"] = psychnorms::metricName(metric);
      try {
        const auto c = psychnorms::compareProfiles(model, human, metric);
        t["modelMedian"] = c.modelMedian;
        t["humanMedian"] = c.humanMedian;
        t["pairedCues"] = c.pairedCues;
        t["statistic"] = c.wilcoxon.statistic;
        t["nEffective"] = c.wilcoxon.nEffective;
        t["pValue"] = c.wilcoxon.pValue;
        t["method"] = c.wilcoxon.method == psychnorms::TestMethod::Exact ? "exact" : "normal";
        t["indistinguishable"] = c.indistinguishable;
      } catch (const ValidationError& e) {
        warn(name + " " + std::string(psychnorms::metricName(metric)) + ": " + e.what());
        t["error"] = e.what();
      }
      m["tests"].push_back(t);
    }
    results["models"].push_back(m);
  }
  step.writeJson("psych/results.json", results);
}

void cmdEvalValues(Step& step) {
  const auto survey = loadSurveyContext(step);
  const auto models = step.settings.namedPaths("option-scores");
  const auto metric = values::parseMetric(step.settings.string("metric", "combo"));
  const auto baseline = step.settings.string("baseline", models.front().first);
  if (std::none_of(models.begin(), models.end(), [&](const auto& m) { return m.first == baseline; }))
    throw ValidationError("baseline model '" + baseline + "' is not listed in " + flagName("option-scores"));

  ordered_json results;
  results["reference"] = survey.reference;
  results["target"] = survey.target;
  results["metric"] = values::metricName(metric);
  results["baseline"] = baseline;
  results["questions"] = ordered_json::array();
  for (const auto& q : survey.questions) {
    const auto s = values::comboDivergence(q.population(survey.reference), q.population(survey.target));
    results["questions"].push_back({{"id", q.id}, {"topic", q.topic}, {"human", scoreJson(s)}});
  }
  results["models"] = ordered_json::array();

  Csv summary({"model", "population", "questions", "js", "emd", "combo"});
  std::map<std::string, std::map<std::string, double>> targetDistances;
  for (const auto& [name, path] : models) {
    const auto md = loadModelDistributions(step, path, survey.questions);
    Csv perQuestion({"question_id", "js_" + survey.reference, "emd_" + survey.reference, "combo_" + survey.reference,
                     "js_" + survey.target, "emd_" + survey.target, "combo_" + survey.target});
    ordered_json m;
    m["name"] = name;
    m["missing"] = md.missing;
    m["flaggedRecords"] = md.flagged;
    m["questions"] = ordered_json::array();
    values::DivergenceScore sumRef, sumTgt;
    for (const auto& q : survey.questions) {
      auto it = md.byQuestion.find(q.id);
      if (it == md.byQuestion.end()) continue;
      const auto ref = values::comboDivergence(it->second, q.population(survey.reference));
      const auto tgt = values::comboDivergence(it->second, q.population(survey.target));
      for (auto [sum, s] : {std::pair{&sumRef, &ref}, std::pair{&sumTgt, &tgt}}) {
        sum->js += s->js;
        sum->emd += s->emd;
        sum->combo += s->combo;
      }
      targetDistances[name][q.id] = values::distance(tgt, metric);
      perQuestion.row({q.id, formatNumber(ref.js), formatNumber(ref.emd), formatNumber(ref.combo),
                       formatNumber(tgt.js), formatNumber(tgt.emd), formatNumber(tgt.combo)});
      m["questions"].push_back({{"id", q.id}, {"reference", scoreJson(ref)}, {"target", scoreJson(tgt)}});
    }
    const double n = static_cast<double>(md.byQuestion.size());
    ordered_json mean;
    for (auto [label, pop, sum] : {std::tuple{"reference", survey.reference, sumRef},
                                   std::tuple{"target", survey.target, sumTgt}}) {
      const values::DivergenceScore avg{sum.js / n, sum.emd / n, sum.combo / n};
      mean[label] = scoreJson(avg);
      summary.row({name, pop, std::to_string(md.byQuestion.size()), formatNumber(avg.js), formatNumber(avg.emd),
                   formatNumber(avg.combo)});
    }
    m["mean"] = mean;
    results["models"].push_back(m);
    step.write("values/" + name + ".csv", perQuestion.str());
  }

  results["improvement"] = ordered_json::array();
  Csv improvement({"model", "baseline", "questions", "statistic", "p_two_sided", "p_one_sided", "method"});
  for (const auto& [name, _] : models) {
    if (name == baseline) continue;
    std::map<std::string, double> base, treated;
    for (const auto& [id, d] : targetDistances[name]) {
      auto it = targetDistances[baseline].find(id);
      if (it == targetDistances[baseline].end()) continue;
      base[id] = it->second;
      treated[id] = d;
    }
    if (base.empty()) {
      warn(name + " and " + baseline + " share no scored question; skipping the improvement test");
      continue;
    }
    const auto r = values::pairedImprovement(base, treated);
    const std::string method = r.twoSided.method == psychnorms::TestMethod::Exact ? "exact" : "normal";
    results["improvement"].push_back({{"model", name},
                                      {"baseline", baseline},
                                      {"questions", r.questions},
                                      {"statistic", r.twoSided.statistic},
                                      {"pTwoSided", r.twoSided.pValue},
                                      {"pOneSided", r.oneSidedP},
                                      {"method", method}});
    improvement.row({name, baseline, std::to_string(r.questions), formatNumber(r.twoSided.statistic),
                     formatNumber(r.twoSided.pValue), formatNumber(r.oneSidedP), method});
  }
  step.writeJson("values/results.json", results);
  step.write("values/summary.csv", summary.str());
  step.write("values/improvement.csv", improvement.str());
}

void cmdTensionSet(Step& step) {
  const auto survey = loadSurveyContext(step);
  const auto n = step.settings.unsignedInteger("tension-n", 50);
  if (n == 0) throw ValidationError(flagName("tension-n") + " must be >= 1");
  const auto set = values::selectTensionSet(survey.questions, survey.reference, survey.target, n);
  for (const auto& w : set.warnings) warn(w);
  step.write("tension/tension_set.json", values::tensionSetToJson(set, survey.reference, survey.target) + "\n");
  std::cerr << "tension-set: " << set.entries.size() << " questions\n";
}

void cmdShift(Step& step) {
  auto survey = loadSurveyContext(step);
  const auto metric = values::parseMetric(step.settings.string("metric", "combo"));
  std::string scope = step.settings.string("shift-questions", step.has("tension/tension_set.json") ? "tension" : "all");
  if (scope == "tension") {
    const auto ids = values::tensionSetIdsFromJson(step.upstreamText("tension/tension_set.json", "tension-set"));
    const std::set<std::string> keep(ids.begin(), ids.end());
    std::vector<values::SurveyQuestion> kept;
    for (auto& q : survey.questions)
      if (keep.count(q.id)) kept.push_back(std::move(q));
    if (kept.size() != keep.size())
      throw ValidationError("tension set names questions the survey does not contain; rerun 'culture-probe tension-set'");
    survey.questions = std::move(kept);
  } else if (scope != "all") {
    throw ValidationError("invalid value '" + scope + "' for " + flagName("shift-questions") + ": expected tension or all");
  }

  ordered_json results;
  results["reference"] = survey.reference;
  results["target"] = survey.target;
  results["metric"] = values::metricName(metric);
  results["questionSet"] = scope;
  results["questions"] = survey.questions.size();
  results["models"] = ordered_json::array();
  Csv summary({"model", "questions", survey.reference + "_leaning", survey.target + "_leaning", "ties", "missing"});
  for (const auto& [name, path] : step.settings.namedPaths("option-scores")) {
    const auto md = loadModelDistributions(step, path, survey.questions);
    const auto r = values::shiftAnalysis(md.byQuestion, survey.questions, survey.reference, survey.target, metric);
    Csv points({"question_id", "d_" + survey.reference, "d_" + survey.target, "leaning"});
    ordered_json m;
    m["name"] = name;
    m["referenceCount"] = r.referenceCount;
    m["targetCount"] = r.targetCount;
    m["tieCount"] = r.tieCount;
    m["missing"] = r.missing;
    m["points"] = ordered_json::array();
    for (const auto& p : r.points) {
      const std::string leaning = p.leaning == values::Leaning::Reference ? survey.reference
                                  : p.leaning == values::Leaning::Target  ? survey.target
                                                                          : "tie";
      points.row({p.questionId, formatNumber(p.dReference), formatNumber(p.dTarget), leaning});
      m["points"].push_back(
          {{"id", p.questionId}, {"dReference", p.dReference}, {"dTarget", p.dTarget}, {"leaning", leaning}});
    }
    results["models"].push_back(m);
    step.write("shift/" + name + ".csv", points.str());
    summary.row({name, std::to_string(r.points.size()), std::to_string(r.referenceCount), std::to_string(r.targetCount),
                 std::to_string(r.tieCount), std::to_string(r.missing.size())});
  }
  step.writeJson("shift/results.json", results);
  step.write("shift/summary.csv", summary.str());
}

// ---------------------------------------------------------------------------
// Report

void reportAssoc(Step& step) {
  const auto j = json::parse(step.upstreamText("assoc/results.json", "eval-assoc"));
  std::vector<std::string> header = {"model", "cues"};
  for (const auto& k : j.at("ks")) header.push_back("p_at_" + std::to_string(k.get<std::size_t>()));
  header.push_back("spearman");
  Csv csv(header);
  for (const auto& m : j.at("models")) {
    std::vector<std::string> row = {m.at("name").get<std::string>(), std::to_string(m.at("cues").get<std::size_t>())};
    for (const auto& k : j.at("ks"))
      row.push_back(formatNumber(m.at("meanPrecision").at(std::to_string(k.get<std::size_t>())).get<double>()));
    row.push_back(m.at("meanSpearman").is_null() ? "" : formatNumber(m.at("meanSpearman").get<double>()));
    csv.row(row);
  }
  step.write("report/assoc_summary.csv", csv.str());
}

void reportRank(Step& step) {
  const auto j = json::parse(step.upstreamText("rank/results.json", "eval-rank"));
  Csv csv({"model", "cues", "mean_reward"});
  for (const auto& m : j.at("models"))
    csv.row({m.at("name").get<std::string>(), std::to_string(m.at("cues").get<std::size_t>()),
             formatNumber(m.at("meanReward").get<double>())});
  step.write("report/rank_summary.csv", csv.str());
}

void reportPsych(Step& step) {
  const auto j = json::parse(step.upstreamText("psych/results.json", "eval-psych"));
  Csv coverage({"source", "emotional_pct", "concrete_pct", "abstract_pct", "unknown_pct"});
  auto coverageRow = [&](const std::string& source, const json& c) {
    coverage.row({source, formatNumber(c.at("emotional").get<double>()), formatNumber(c.at("concrete").get<double>()),
                  formatNumber(c.at("abstract").get<double>()), formatNumber(c.at("unknown").get<double>())});
  };
  coverageRow("human", j.at("human").at("coverage"));
  Csv tests({"model", "metric", "model_median", "human_median", "paired_cues", "statistic", "p_value", "method",
             "indistinguishable"});
  for (const auto& m : j.at("models")) {
    const auto name = m.at("name").get<std::string>();
    coverageRow(name, m.at("coverage"));
    for (const auto& t : m.at("tests")) {
      if (t.contains("error")) {
        tests.row({name, t.at("metric").get<std::string>(), "", "", "0", "", "", "", ""});
        continue;
      }
      tests.row({name, t.at("metric").get<std::string>(), formatNumber(t.at("modelMedian").get<double>()),
                 formatNumber(t.at("humanMedian").get<double>()), std::to_string(t.at("pairedCues").get<std::size_t>()),
                 formatNumber(t.at("statistic").get<double>()), formatNumber(t.at("pValue").get<double>()),
                 t.at("method").get<std::string>(), t.at("indistinguishable").get<bool>() ? "yes" : "no"});
    }
  }
  step.write("report/psych_coverage.csv", coverage.str());
  step.write("report/psych_tests.csv", tests.str());
}

void reportValues(Step& step) {
  const auto j = json::parse(step.upstreamText("values/results.json", "eval-values"));
  const auto curveMetric = values::parseMetric(step.settings.string("curve-metric", "js"));
  const double stepSize = step.settings.real("curve-step", 0.05);
  if (!(stepSize > 0 && stepSize <= 1)) throw ValidationError(flagName("curve-step") + " must be in (0, 1]");
  std::vector<double> grid;
  const auto points = static_cast<std::size_t>(std::floor(1.0 / stepSize + 1e-9));
  // Rounded so thresholds print as 0.15 rather than 0.15000000000000002.
  for (std::size_t i = 0; i <= points; ++i)
    grid.push_back(std::min(1.0, std::round(static_cast<double>(i) * stepSize * 1e9) / 1e9));

  const auto reference = j.at("reference").get<std::string>();
  const auto target = j.at("target").get<std::string>();

  Csv summary({"model", "population", "js", "emd", "combo"});
  Csv curve({"model", "population", "threshold", "fraction"});
  std::map<std::string, std::vector<Series>> curves;
  for (const auto& m : j.at("models")) {
    const auto name = m.at("name").get<std::string>();
    for (const auto& [label, pop] : {std::pair{"reference", reference}, std::pair{"target", target}}) {
      const auto mean = scoreFromJson(m.at("mean").at(label));
      summary.row({name, pop, formatNumber(mean.js), formatNumber(mean.emd), formatNumber(mean.combo)});
      std::map<std::string, double> distances;
      for (const auto& q : m.at("questions"))
        distances[q.at("id").get<std::string>()] = values::distance(scoreFromJson(q.at(label)), curveMetric);
      Series s{name, {}};
      for (const auto& p : values::thresholdCurve(distances, grid)) {
        curve.row({name, pop, formatNumber(p.threshold), formatNumber(p.fraction)});
        s.points.emplace_back(p.threshold, p.fraction);
      }
      curves[label].push_back(std::move(s));
    }
  }
  step.write("report/values_summary.csv", summary.str());
  step.write("report/threshold_curve.csv", curve.str());
  const auto metricLabel = std::string(values::metricName(curveMetric));
  step.write("report/threshold_curve.svg",
             lineChartSvg({"Agreement with " + target + " answers", metricLabel + " threshold",
                           "fraction of questions within threshold"},
                          curves["target"]));
  step.write("report/threshold_curve_" + safeName(reference) + ".svg",
             lineChartSvg({"Agreement with " + reference + " answers", metricLabel + " threshold",
                           "fraction of questions within threshold"},
                          curves["reference"]));

  Csv improvement({"model", "baseline", "questions", "statistic", "p_two_sided", "p_one_sided", "method"});
  for (const auto& r : j.at("improvement"))
    improvement.row({r.at("model").get<std::string>(), r.at("baseline").get<std::string>(),
                     std::to_string(r.at("questions").get<std::size_t>()), formatNumber(r.at("statistic").get<double>()),
                     formatNumber(r.at("pTwoSided").get<double>()), formatNumber(r.at("pOneSided").get<double>()),
                     r.at("method").get<std::string>()});
  step.write("report/improvement.csv", improvement.str());

  // One row per survey question, one column group per model.
  const auto metric = values::parseMetric(j.at("metric").get<std::string>());
  std::vector<std::string> header = {"question_id", "topic", "human_js", "human_emd", "human_combo"};
  std::vector<std::map<std::string, std::pair<double, double>>> perModel;
  for (const auto& m : j.at("models")) {
    const auto name = m.at("name").get<std::string>();
    header.push_back(name + "_d_" + reference);
    header.push_back(name + "_d_" + target);
    std::map<std::string, std::pair<double, double>> d;
    for (const auto& q : m.at("questions"))
      d[q.at("id").get<std::string>()] = {values::distance(scoreFromJson(q.at("reference")), metric),
                                          values::distance(scoreFromJson(q.at("target")), metric)};
    perModel.push_back(std::move(d));
  }
  Csv perQuestion(header);
  for (const auto& q : j.at("questions")) {
    const auto id = q.at("id").get<std::string>();
    const auto h = scoreFromJson(q.at("human"));
    std::vector<std::string> row = {id, q.at("topic").get<std::string>(), formatNumber(h.js), formatNumber(h.emd),
                                    formatNumber(h.combo)};
    for (const auto& d : perModel) {
      auto it = d.find(id);
      row.push_back(it == d.end() ? "" : formatNumber(it->second.first));
      row.push_back(it == d.end() ? "" : formatNumber(it->second.second));
    }
    perQuestion.row(row);
  }
  step.write("report/per_question.csv", perQuestion.str());
}

void reportShift(Step& step) {
  const auto j = json::parse(step.upstreamText("shift/results.json", "shift"));
  const auto reference = j.at("reference").get<std::string>();
  const auto target = j.at("target").get<std::string>();
  Csv summary({"model", "questions", reference + "_leaning", target + "_leaning", "ties"});
  Csv points({"model", "question_id", "d_" + reference, "d_" + target, "leaning"});
  std::vector<Series> series;
  for (const auto& m : j.at("models")) {
    const auto name = m.at("name").get<std::string>();
    summary.row({name, std::to_string(m.at("points").size()), std::to_string(m.at("referenceCount").get<std::size_t>()),
                 std::to_string(m.at("targetCount").get<std::size_t>()), std::to_string(m.at("tieCount").get<std::size_t>())});
    Series s{name, {}};
    for (const auto& p : m.at("points")) {
      const double dr = p.at("dReference").get<double>(), dt = p.at("dTarget").get<double>();
      points.row({name, p.at("id").get<std::string>(), formatNumber(dr), formatNumber(dt),
                  p.at("leaning").get<std::string>()});
      s.points.emplace_back(dr, dt);
    }
    series.push_back(std::move(s));
  }
  step.write("report/shift_summary.csv", summary.str());
  step.write("report/shift_points.csv", points.str());
  const auto metric = j.at("metric").get<std::string>();
  step.write("report/shift_scatter.svg",
             scatterSvg({"Distance to " + reference + " vs " + target + " (" + metric + ")",
                         metric + " distance to " + reference, metric + " distance to " + target},
                        series, true));
}

void cmdReport(Step& step) {
  struct Section {
    const char* artifact;
    const char* producer;
    void (*render)(Step&);
  };
  const Section sections[] = {{"assoc/results.json", "eval-assoc", reportAssoc},
                              {"rank/results.json", "eval-rank", reportRank},
                              {"psych/results.json", "eval-psych", reportPsych},
                              {"values/results.json", "eval-values", reportValues},
                              {"shift/results.json", "shift", reportShift}};
  std::vector<std::string> absent;
  std::size_t rendered = 0;
  for (const auto& s : sections) {
    if (!step.has(s.artifact)) {
      absent.push_back(s.producer);
      continue;
    }
    s.render(step);
    ++rendered;
  }
  if (rendered == 0)
    throw ValidationError("no evaluation outputs in " + step.runDir().string() + "; run at least one of: " +
                          text::join(absent, ", "));
  if (!absent.empty()) std::cerr << "report: skipped sections for " << text::join(absent, ", ") << " (not run)\n";
}

// ---------------------------------------------------------------------------
// Collection and verification

void cmdCollect(Step& step) {
  modelio::EndpointConfig cfg;
  cfg.baseUrl = step.settings.required("base-url");
  cfg.apiKeyEnv = step.settings.string("api-key-env", "");
  cfg.modelName = step.settings.required("model-name");
  cfg.maxConcurrentRequests = step.settings.unsignedInteger("max-concurrent", 1);
  cfg.timeoutSeconds = step.settings.real("timeout", 60);
  cfg.retry.retries = static_cast<int>(step.settings.integer("retries", 2));
  cfg.retry.backoff = std::chrono::milliseconds(step.settings.integer("backoff-ms", 500));
  cfg.temperature = step.settings.real("temperature", 0);
  cfg.maxTokens = static_cast<int>(step.settings.integer("max-tokens", 512));
  cfg.topLogprobs = static_cast<int>(step.settings.integer("top-logprobs", 20));
  cfg.validate();
  const auto kind = modelio::parseOutputKind(step.settings.string("collect-kind", "generation"));
  const auto label = safeName(step.settings.string("output-name", cfg.modelName));
  const std::string stem = "collect/" + label + "." + std::string(modelio::outputKindName(kind));
  const auto journal = step.prepare(stem + ".journal.jsonl");

  std::string records;
  std::vector<std::string> failed;
  std::size_t requested = 0, total = 0;
  if (kind == modelio::OutputKind::OptionScores) {
    const auto survey = loadSurveyContext(step);
    const auto r = modelio::collectOptionScoresBatch(cfg, survey.questions, journal, language(step));
    for (const auto& rec : r.records) records += modelio::optionScoresToJson(rec) + "\n";
    failed = r.failedKeys;
    requested = r.requested;
    total = survey.questions.size();
  } else {
    const bool ranking = kind == modelio::OutputKind::Ranking;
    const auto examples = prompts::readCorpus(ranking ? step.upstream("prompts/eval_rank.jsonl", "gen-prompts")
                                                      : step.upstream("prompts/eval.jsonl", "gen-prompts"));
    std::vector<modelio::PromptRequest> requests;
    for (const auto& ex : examples) {
      if (const auto* s = std::get_if<prompts::SftExample>(&ex)) requests.push_back({s->cue, s->renderedPrompt});
      if (const auto* r = std::get_if<prompts::RankExample>(&ex)) requests.push_back({r->cue, r->renderedPrompt});
    }
    const auto r = modelio::collectGenerations(cfg, requests, journal, kind);
    for (const auto& rec : r.records) records += modelio::generationToJson(rec) + "\n";
    failed = r.failedKeys;
    requested = r.requested;
    total = requests.size();
  }
  step.adopt(stem + ".journal.jsonl");
  step.write(stem + ".jsonl", records);
  std::cerr << "collect: " << requested << " request(s), " << (total - failed.size()) << "/" << total
            << " prompts answered\n";
  if (!failed.empty()) {
    warn(std::to_string(failed.size()) + " prompt(s) failed after retries; rerun to retry them");
    if (failed.size() == total) throw IoError("every request to " + cfg.baseUrl + " failed");
  }
}

void cmdVerify(const fs::path& runDir) {
  if (!fs::exists(runDir / RunManifest::kFileName))
    throw ValidationError("no " + std::string(RunManifest::kFileName) + " in " + runDir.string());
  const auto manifest = RunManifest::loadOrCreate(runDir);
  const auto problems = manifest.verifyAll(runDir);
  if (!problems.empty()) {
    std::string msg = std::to_string(problems.size()) + " artifact(s) failed verification:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ValidationError(msg);
  }
  std::size_t n = 0;
  for (const auto& [_, s] : manifest.steps()) n += s.outputs.size();
  std::cerr << "verify: " << n << " artifact(s) match the manifest\n";
}

}  // namespace

void runCommand(const std::string& name, const Config& config, const fs::path& runDir) {
  if (name == "verify") return cmdVerify(runDir);
  static const std::map<std::string, void (*)(Step&)> handlers = {
      {"ingest", cmdIngest},         {"split", cmdSplit},           {"gen-prompts", cmdGenPrompts},
      {"eval-assoc", cmdEvalAssoc},  {"eval-rank", cmdEvalRank},    {"eval-psych", cmdEvalPsych},
      {"eval-values", cmdEvalValues}, {"tension-set", cmdTensionSet}, {"shift", cmdShift},
      {"report", cmdReport},         {"collect", cmdCollect}};
  auto it = handlers.find(name);
  if (it == handlers.end()) throw ValidationError("unknown subcommand '" + name + "'");
  if (name == "report" && !fs::is_directory(runDir))
    throw ValidationError("run directory " + runDir.string() + " does not exist");
  Step step(name, config, runDir);
  try {
    it->second(step);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed JSON artifact: ") + e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    throw IoError(e.what());
  }
  step.finish();
}

}  // namespace cprobe::cli
