#include "culture_probe/cli/manifest.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "culture_probe/error.hpp"
#include "culture_probe/hashing.hpp"

namespace cprobe::cli {

using nlohmann::ordered_json;

std::string utcNow() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace {

ordered_json refsToJson(const std::vector<ArtifactRef>& refs) {
  auto arr = ordered_json::array();
  for (const auto& r : refs) arr.push_back({{"path", r.path}, {"sha256", r.sha256}});
  return arr;
}

std::vector<ArtifactRef> refsFromJson(const ordered_json& j) {
  std::vector<ArtifactRef> out;
  for (const auto& r : j) out.push_back({r.at("path").get<std::string>(), r.at("sha256").get<std::string>()});
  return out;
}

}  // namespace

RunManifest RunManifest::loadOrCreate(const std::filesystem::path& runDir) {
  RunManifest m;
  const auto path = runDir / kFileName;
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    m.createdAt_ = utcNow();
    m.toolVersion_ = CULTURE_PROBE_VERSION;
    m.runId_ = "run-" + sha256Hex(std::filesystem::absolute(runDir).string() + m.createdAt_).substr(0, 12);
    return m;
  }
  try {
    const auto j = ordered_json::parse(in);
    m.runId_ = j.at("runId").get<std::string>();
    m.toolVersion_ = j.at("toolVersion").get<std::string>();
    m.createdAt_ = j.at("createdAt").get<std::string>();
    for (const auto& [name, s] : j.at("steps").items()) {
      StepRecord r;
      r.command = name;
      r.configSnapshot = s.at("config").get<std::map<std::string, std::string>>();
      r.inputs = refsFromJson(s.at("inputs"));
      r.outputs = refsFromJson(s.at("outputs"));
      r.startedAt = s.at("startedAt").get<std::string>();
      r.finishedAt = s.at("finishedAt").get<std::string>();
      m.steps_[name] = std::move(r);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("corrupt run manifest " + path.string() + ": " + e.what());
  }
  return m;
}

void RunManifest::save(const std::filesystem::path& runDir) const {
  ordered_json j;
  j["runId"] = runId_;
  j["toolVersion"] = toolVersion_;
  j["createdAt"] = createdAt_;
  j["steps"] = ordered_json::object();
  for (const auto& [name, s] : steps_) {
    ordered_json step;
    step["config"] = s.configSnapshot;
    step["inputs"] = refsToJson(s.inputs);
    step["outputs"] = refsToJson(s.outputs);
    step["startedAt"] = s.startedAt;
    step["finishedAt"] = s.finishedAt;
    j["steps"][name] = std::move(step);
  }
  const auto path = runDir / kFileName;
  const auto tmp = runDir / (std::string(kFileName) + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void RunManifest::record(StepRecord step) {
  toolVersion_ = CULTURE_PROBE_VERSION;
  auto name = step.command;
  steps_[name] = std::move(step);
}

const StepRecord* RunManifest::producerOf(const std::string& relPath) const {
  for (const auto& [_, s] : steps_)
    for (const auto& o : s.outputs)
      if (o.path == relPath) return &s;
  return nullptr;
}

void RunManifest::verifyArtifact(const std::filesystem::path& runDir, const std::string& relPath) const {
  for (const auto& [name, s] : steps_) {
    for (const auto& o : s.outputs) {
      if (o.path != relPath) continue;
      const auto actual = sha256File(runDir / relPath);
      if (actual != o.sha256)
        throw ValidationError(relPath + " was modified after '" + name + "' wrote it (sha256 " + actual +
                              ", recorded " + o.sha256 + "); rerun '" + name + "'");
      return;
    }
  }
}

std::vector<std::string> RunManifest::verifyAll(const std::filesystem::path& runDir) const {
  std::vector<std::string> problems;
  for (const auto& [name, s] : steps_) {
    for (const auto& o : s.outputs) {
      const auto path = runDir / o.path;
      if (!std::filesystem::exists(path)) {
        problems.push_back(o.path + ": missing (written by '" + name + "')");
      } else if (sha256File(path) != o.sha256) {
        problems.push_back(o.path + ": modified since '" + name + "' wrote it");
      }
    }
  }
  return problems;
}

}  // namespace cprobe::cli
