#include "culture_probe/modelio.hpp"

#include <httplib.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <set>
#include <thread>

#include <json.hpp>

#include "culture_probe/error.hpp"
#include "culture_probe/hashing.hpp"
#include "culture_probe/metrics.hpp"

namespace cprobe::modelio {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string utcTimestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ordered_json scoresToJson(const std::vector<double>& v) {
  auto arr = ordered_json::array();
  for (double x : v) arr.push_back(std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr));
  return arr;
}

ordered_json generationJson(const GenerationRecord& r) {
  ordered_json j;
  j["cue"] = r.cue;
  j["rawText"] = r.rawText;
  j["words"] = r.words;
  j["modelName"] = r.modelName;
  j["promptHash"] = r.promptHash;
  return j;
}

ordered_json optionScoresJson(const OptionScoreRecord& r) {
  ordered_json j;
  j["questionId"] = r.questionId;
  j["optionSymbols"] = r.optionSymbols;
  j["logScores"] = scoresToJson(r.logScores);
  if (r.probs) j["probs"] = *r.probs;
  j["modelName"] = r.modelName;
  j["flags"] = r.flags;
  return j;
}

std::vector<std::string> wordsFor(OutputKind kind, const std::string& raw) {
  if (kind == OutputKind::Ranking) return metrics::parseRankedResponse(raw).orderedWords;
  return text::splitWordList(raw);
}

GenerationRecord parseGeneration(const json& j, OutputKind kind) {
  GenerationRecord r;
  if (!j.contains("cue") || !j["cue"].is_string()) throw ValidationError("missing string field 'cue'");
  r.cue = text::trim(j["cue"].get<std::string>());
  if (r.cue.empty()) throw ValidationError("empty cue");
  r.rawText = j.value("rawText", "");
  if (j.contains("words")) {
    r.words = j["words"].get<std::vector<std::string>>();
  } else if (j.contains("rawText")) {
    r.words = wordsFor(kind, r.rawText);
  } else {
    throw ValidationError("record needs 'words' or 'rawText'");
  }
  r.modelName = j.value("modelName", "");
  r.promptHash = j.value("promptHash", "");
  return r;
}

std::vector<double> parseScores(const json& arr) {
  if (!arr.is_array()) throw ValidationError("scores must be an array");
  std::vector<double> out;
  for (const auto& x : arr) {
    if (x.is_null()) {
      out.push_back(kNegInf);
    } else if (x.is_number()) {
      out.push_back(x.get<double>());
    } else {
      throw ValidationError("scores must be numbers or null");
    }
  }
  return out;
}

OptionScoreRecord parseOptionScores(const json& j) {
  OptionScoreRecord r;
  if (!j.contains("questionId") || !j["questionId"].is_string())
    throw ValidationError("missing string field 'questionId'");
  r.questionId = j["questionId"].get<std::string>();
  r.optionSymbols = j.value("optionSymbols", std::vector<std::string>{});
  if (j.contains("logScores")) {
    r.logScores = parseScores(j["logScores"]);
  } else if (j.contains("probs")) {
    std::vector<double> p = j["probs"].get<std::vector<double>>();
    for (double x : p) {
      if (!(x >= 0.0)) throw ValidationError("probabilities must be non-negative");
      r.logScores.push_back(x > 0 ? std::log(x) : kNegInf);
    }
    r.probs = std::move(p);
  } else {
    throw ValidationError("record needs 'logScores' or 'probs'");
  }
  if (j.contains("probs") && !r.probs) r.probs = j["probs"].get<std::vector<double>>();
  if (r.optionSymbols.empty()) {
    for (std::size_t i = 0; i < r.logScores.size(); ++i) r.optionSymbols.push_back(std::to_string(i + 1));
  }
  if (r.optionSymbols.size() != r.logScores.size())
    throw ValidationError(std::to_string(r.optionSymbols.size()) + " option symbols but " +
                          std::to_string(r.logScores.size()) + " scores");
  if (r.probs && r.probs->size() != r.optionSymbols.size())
    throw ValidationError("probs length does not match option symbols");
  if (r.logScores.size() < 2) throw ValidationError("need scores for at least 2 options");
  r.modelName = j.value("modelName", "");
  r.flags = j.value("flags", std::vector<std::string>{});
  return r;
}

// ---------------------------------------------------------------------------
// HTTP

struct ParsedUrl {
  std::string schemeHostPort;
  std::string pathPrefix;
};

ParsedUrl parseBaseUrl(const std::string& url) {
  const auto scheme = url.find("://");
  const bool supported = url.rfind("http://", 0) == 0 || url.rfind("https://", 0) == 0;
  if (scheme == std::string::npos || !supported) throw ValidationError("baseUrl must start with http:// or https://: " + url);
  const auto slash = url.find('/', scheme + 3);
  ParsedUrl p;
  p.schemeHostPort = url.substr(0, slash);
  p.pathPrefix = slash == std::string::npos ? "" : url.substr(slash);
  while (!p.pathPrefix.empty() && p.pathPrefix.back() == '/') p.pathPrefix.pop_back();
  return p;
}

class ChatClient {
 public:
  explicit ChatClient(const EndpointConfig& config) : config_(config), url_(parseBaseUrl(config.baseUrl)) {
    if (!config.apiKeyEnv.empty()) {
      const char* key = std::getenv(config.apiKeyEnv.c_str());
      if (!key) throw ValidationError("environment variable " + config.apiKeyEnv + " (API key) is not set");
      apiKey_ = key;
    }
  }

  /// POSTs one chat completion; throws IoError on transport/HTTP failure.
  json complete(const std::string& prompt, int maxTokens, bool logprobs) const {
    httplib::Client client(url_.schemeHostPort);
    const auto seconds = static_cast<time_t>(config_.timeoutSeconds);
    const auto micros = static_cast<time_t>((config_.timeoutSeconds - static_cast<double>(seconds)) * 1e6);
    client.set_connection_timeout(seconds, micros);
    client.set_read_timeout(seconds, micros);
    client.set_write_timeout(seconds, micros);

    ordered_json body;
    body["model"] = config_.modelName;
    body["messages"] = ordered_json::array({{{"role", "user"}, {"content", prompt}}});
    body["temperature"] = config_.temperature;
    body["max_tokens"] = maxTokens;
    if (logprobs) {
      body["logprobs"] = true;
      body["top_logprobs"] = config_.topLogprobs;
    }
    httplib::Headers headers;
    if (!apiKey_.empty()) headers.emplace("Authorization", "Bearer " + apiKey_);

    auto res = client.Post(url_.pathPrefix + "/chat/completions", headers, body.dump(), "application/json");
    if (!res) throw IoError("request to " + config_.baseUrl + " failed: " + httplib::to_string(res.error()));
    if (res->status != 200)
      throw IoError("endpoint returned HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
    try {
      return json::parse(res->body);
    } catch (const json::exception& e) {
      throw IoError(std::string("endpoint returned invalid JSON: ") + e.what());
    }
  }

 private:
  const EndpointConfig& config_;
  ParsedUrl url_;
  std::string apiKey_;
};

std::string messageContent(const json& response) {
  try {
    return response.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw IoError(std::string("unexpected completion response shape: ") + e.what());
  }
}

double logAddExp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

OptionScoreRecord extractOptionScores(const json& response, const values::SurveyQuestion& question,
                                      const std::string& modelName) {
  const json* first = nullptr;
  try {
    const auto& choice = response.at("choices").at(0);
    if (choice.contains("logprobs") && !choice["logprobs"].is_null()) {
      const auto& content = choice["logprobs"].at("content");
      if (content.is_array() && !content.empty()) first = &content[0];
    }
  } catch (const json::exception&) {
    first = nullptr;
  }
  if (!first || !first->contains("top_logprobs"))
    throw CapabilityError("endpoint did not return per-token log-probabilities; option scoring needs "
                          "logprobs/top_logprobs support");

  std::vector<std::pair<std::string, double>> alternatives;
  if (first->contains("token") && first->contains("logprob"))
    alternatives.emplace_back((*first)["token"].get<std::string>(), (*first)["logprob"].get<double>());
  for (const auto& alt : (*first)["top_logprobs"])
    alternatives.emplace_back(alt.at("token").get<std::string>(), alt.at("logprob").get<double>());

  OptionScoreRecord r;
  r.questionId = question.id;
  r.optionSymbols = question.options;
  r.modelName = modelName;
  for (const auto& symbol : question.options) {
    double score = kNegInf;
    std::set<std::string> seen;
    for (const auto& [token, lp] : alternatives) {
      const std::string t = text::trim(token);
      // The chosen token usually also appears among the alternatives.
      if (t == symbol && seen.insert(token).second) score = logAddExp(score, lp);
    }
    if (score == kNegInf) {
      r.flags.push_back("option '" + symbol + "' absent from top alternatives");
      if (symbol.size() > 1) r.flags.push_back("option '" + symbol + "' may span multiple tokens");
    }
    r.logScores.push_back(score);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Journaled batch runner

struct JournalEntry {
  std::string hash;
  std::string status;
  json payload;
};

std::vector<JournalEntry> readJournal(const std::filesystem::path& path) {
  std::vector<JournalEntry> entries;
  std::ifstream in(path, std::ios::binary);
  if (!in) return entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const auto j = json::parse(line);
      entries.push_back({j.at("promptHash").get<std::string>(), j.at("status").get<std::string>(), j.at("payload")});
    } catch (const json::exception&) {
      // A torn final line from an interrupted run; the prompt is redone.
    }
  }
  return entries;
}

struct BatchOutcome {
  std::vector<json> okPayloads;
  std::vector<std::string> failedKeys;
  std::size_t requested = 0;
  std::size_t skipped = 0;
};

using RequestFn = std::function<json(const PromptRequest&)>;

BatchOutcome runJournaled(const EndpointConfig& config, const std::vector<PromptRequest>& prompts,
                          const std::filesystem::path& journalPath, OutputKind kind, const RequestFn& request) {
  config.validate();
  BatchOutcome outcome;

  std::map<std::string, json> done;
  for (auto& e : readJournal(journalPath)) {
    if (e.status == "ok") done[e.hash] = std::move(e.payload);
  }

  std::vector<std::size_t> pending;
  std::vector<std::string> hashes(prompts.size());
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    hashes[i] = promptHash(prompts[i].prompt);
    if (done.count(hashes[i])) {
      ++outcome.skipped;
    } else {
      pending.push_back(i);
    }
  }
  outcome.requested = pending.size();

  if (!pending.empty()) {
    if (!journalPath.parent_path().empty()) std::filesystem::create_directories(journalPath.parent_path());
    std::ofstream journal(journalPath, std::ios::binary | std::ios::app);
    if (!journal) throw IoError("cannot open journal " + journalPath.string());

    std::mutex mu;
    std::vector<std::optional<std::string>> lines(pending.size());
    std::size_t nextToWrite = 0;
    std::atomic<std::size_t> nextTask{0};
    std::atomic<bool> abort{false};
    std::exception_ptr fatal;

    auto worker = [&] {
      while (!abort) {
        const std::size_t slot = nextTask.fetch_add(1);
        if (slot >= pending.size()) return;
        const auto& req = prompts[pending[slot]];
        ordered_json entry;
        entry["promptHash"] = hashes[pending[slot]];
        entry["kind"] = outputKindName(kind);
        int attempt = 0;
        for (;; ++attempt) {
          try {
            entry["payload"] = request(req);
            entry["status"] = "ok";
            break;
          } catch (const CapabilityError&) {
            std::lock_guard lock(mu);
            if (!fatal) fatal = std::current_exception();
            abort = true;
            return;
          } catch (const std::exception& e) {
            if (attempt >= config.retry.retries) {
              entry["payload"] = {{"key", req.key}, {"error", e.what()}};
              entry["status"] = "failed";
              break;
            }
            std::this_thread::sleep_for(config.retry.backoff * (1 << std::min(attempt, 10)));
          }
        }
        entry["attempt"] = attempt + 1;
        entry["timestamp"] = utcTimestamp();

        // Appends happen in prompt order, as soon as a contiguous prefix is ready.
        std::lock_guard lock(mu);
        lines[slot] = entry.dump();
        while (nextToWrite < lines.size() && lines[nextToWrite]) {
          journal << *lines[nextToWrite] << '\n';
          journal.flush();
          ++nextToWrite;
        }
      }
    };

    const std::size_t threads = std::min(config.maxConcurrentRequests, pending.size());
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (fatal) std::rethrow_exception(fatal);
    if (!journal) throw IoError("journal write failed: " + journalPath.string());
  }

  // Final state comes from the journal itself so resumed and fresh runs agree.
  std::map<std::string, json> latest;
  std::map<std::string, std::string> status;
  for (auto& e : readJournal(journalPath)) {
    if (e.status == "ok" || !latest.count(e.hash) || status[e.hash] != "ok") {
      status[e.hash] = e.status;
      latest[e.hash] = std::move(e.payload);
    }
  }
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    auto it = status.find(hashes[i]);
    if (it != status.end() && it->second == "ok") {
      outcome.okPayloads.push_back(latest[hashes[i]]);
    } else {
      outcome.failedKeys.push_back(prompts[i].key);
    }
  }
  return outcome;
}

}  // namespace

void EndpointConfig::validate() const {
  if (baseUrl.empty()) throw ValidationError("endpoint baseUrl is empty");
  parseBaseUrl(baseUrl);
  if (maxConcurrentRequests < 1) throw ValidationError("maxConcurrentRequests must be >= 1");
  if (!(timeoutSeconds > 0)) throw ValidationError("timeout must be > 0");
  if (retry.retries < 0) throw ValidationError("retry count must be >= 0");
}

values::AnswerDistribution OptionScoreRecord::distribution() const {
  if (probs) {
    Eigen::VectorXd p(static_cast<Eigen::Index>(probs->size()));
    for (std::size_t i = 0; i < probs->size(); ++i) p(static_cast<Eigen::Index>(i)) = (*probs)[i];
    return values::AnswerDistribution::fromCounts(p);
  }
  return values::renormalizeLogScores(logScores);
}

OutputKind parseOutputKind(const std::string& name) {
  if (text::iequals(name, "generation")) return OutputKind::Generation;
  if (text::iequals(name, "ranking")) return OutputKind::Ranking;
  if (text::iequals(name, "optionScores") || text::iequals(name, "option-scores")) return OutputKind::OptionScores;
  throw ValidationError("unknown output kind '" + name + "'");
}

std::string_view outputKindName(OutputKind k) {
  switch (k) {
    case OutputKind::Generation: return "generation";
    case OutputKind::Ranking: return "ranking";
    case OutputKind::OptionScores: return "optionScores";
  }
  return "?";
}

OutputFile readOutputs(const std::filesystem::path& path, OutputKind kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model output file " + path.string());
  OutputFile out;
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    try {
      json j = json::parse(line);
      if (!j.is_object()) throw ValidationError("line is not a JSON object");
      if (j.contains("payload") && j.contains("status")) {
        if (j["status"] != "ok") continue;
        j = j["payload"];
      }
      if (kind == OutputKind::OptionScores) {
        out.optionScores.push_back(parseOptionScores(j));
      } else {
        out.generations.push_back(parseGeneration(j, kind));
      }
    } catch (const json::exception& e) {
      out.errors.push_back({lineNo, e.what()});
    } catch (const ValidationError& e) {
      out.errors.push_back({lineNo, e.what()});
    }
  }
  return out;
}

std::string generationToJson(const GenerationRecord& r) { return generationJson(r).dump(); }
std::string optionScoresToJson(const OptionScoreRecord& r) { return optionScoresJson(r).dump(); }

std::string promptHash(std::string_view prompt) { return sha256Hex(prompt); }

CollectResult collectGenerations(const EndpointConfig& config, const std::vector<PromptRequest>& prompts,
                                 const std::filesystem::path& journal, OutputKind kind) {
  if (kind == OutputKind::OptionScores) throw ValidationError("use collectOptionScoresBatch for option scores");
  ChatClient client(config);
  const auto outcome = runJournaled(config, prompts, journal, kind, [&](const PromptRequest& req) {
    GenerationRecord r;
    r.cue = req.key;
    r.rawText = messageContent(client.complete(req.prompt, config.maxTokens, false));
    r.words = wordsFor(kind, r.rawText);
    r.modelName = config.modelName;
    r.promptHash = promptHash(req.prompt);
    return json(generationJson(r));
  });
  CollectResult result;
  result.requested = outcome.requested;
  result.skipped = outcome.skipped;
  result.failedKeys = outcome.failedKeys;
  for (const auto& p : outcome.okPayloads) result.records.push_back(parseGeneration(p, kind));
  return result;
}

OptionScoreRecord collectOptionScores(const EndpointConfig& config, const values::SurveyQuestion& question,
                                      const std::string& renderedPrompt) {
  ChatClient client(config);
  return extractOptionScores(client.complete(renderedPrompt, 1, true), question, config.modelName);
}

OptionScoreCollectResult collectOptionScoresBatch(const EndpointConfig& config,
                                                  const std::vector<values::SurveyQuestion>& questions,
                                                  const std::filesystem::path& journal, text::Language language) {
  ChatClient client(config);
  std::vector<PromptRequest> prompts;
  std::map<std::string, const values::SurveyQuestion*> byId;
  for (const auto& q : questions) {
    prompts.push_back({q.id, renderSurveyPrompt(q, language)});
    byId[q.id] = &q;
  }
  const auto outcome =
      runJournaled(config, prompts, journal, OutputKind::OptionScores, [&](const PromptRequest& req) {
        return json(optionScoresJson(extractOptionScores(client.complete(req.prompt, 1, true), *byId.at(req.key),
                                                          config.modelName)));
      });
  OptionScoreCollectResult result;
  result.requested = outcome.requested;
  result.skipped = outcome.skipped;
  result.failedKeys = outcome.failedKeys;
  for (const auto& p : outcome.okPayloads) result.records.push_back(parseOptionScores(p));
  return result;
}

std::string renderSurveyPrompt(const values::SurveyQuestion& question, text::Language language) {
  std::string out = question.text + "\n\n";
  out += language == text::Language::En ? "Options:" : "选项：";
  for (std::size_t i = 0; i < question.options.size(); ++i) {
    out += "\n" + question.options[i];
    if (i < question.labels.size()) out += ": " + question.labels[i];
  }
  out += "\n\n";
  out += language == text::Language::En ? "Answer with the number of the option you choose only."
                                        : "请只回答所选选项的编号。";
  return out;
}

}  // namespace cprobe::modelio
