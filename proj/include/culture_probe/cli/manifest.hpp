#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace cprobe::cli {

struct ArtifactRef {
  /// Relative to the run directory for artifacts inside it, absolute otherwise.
  std::string path;
  std::string sha256;
};

struct StepRecord {
  std::string command;
  std::map<std::string, std::string> configSnapshot;
  std::vector<ArtifactRef> inputs;
  std::vector<ArtifactRef> outputs;
  std::string startedAt;
  std::string finishedAt;
};

/// manifest.json at the run directory root. One record per subcommand, the
/// latest run replacing the previous one.
class RunManifest {
 public:
  static constexpr const char* kFileName = "manifest.json";

  /// Reads the manifest, or starts a new one when the run directory has none.
  static RunManifest loadOrCreate(const std::filesystem::path& runDir);
  void save(const std::filesystem::path& runDir) const;

  const std::string& runId() const { return runId_; }
  const std::map<std::string, StepRecord>& steps() const { return steps_; }
  void record(StepRecord step);

  /// Step that last wrote the run-relative path, or nullptr.
  const StepRecord* producerOf(const std::string& relPath) const;

  /// Throws ValidationError when the file no longer hashes to the value its
  /// producing step recorded.
  void verifyArtifact(const std::filesystem::path& runDir, const std::string& relPath) const;

  /// Every recorded output that is missing or modified, as messages.
  std::vector<std::string> verifyAll(const std::filesystem::path& runDir) const;

 private:
  std::string runId_;
  std::string toolVersion_;
  std::string createdAt_;
  std::map<std::string, StepRecord> steps_;
};

std::string utcNow();

}  // namespace cprobe::cli
