#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "culture_probe/cli/app.hpp"

namespace testing {

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("cprobe-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

inline void writeFile(const std::filesystem::path& p, const std::string& content) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << content;
}

inline std::string readFile(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline std::filesystem::path sourceDir() { return CP_SOURCE_DIR; }

struct CliResult {
  int code = 0;
  std::string err;
};

/// Runs the culture-probe entry point in-process, capturing stderr.
inline CliResult runCli(std::vector<std::string> args) {
  args.insert(args.begin(), "culture-probe");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream captured;
  auto* old = std::cerr.rdbuf(captured.rdbuf());
  CliResult r;
  try {
    r.code = cprobe::cli::runApp(static_cast<int>(argv.size()), argv.data());
  } catch (...) {
    std::cerr.rdbuf(old);
    throw;
  }
  std::cerr.rdbuf(old);
  r.err = captured.str();
  return r;
}

inline const std::vector<std::string>& toyPipeline() {
  static const std::vector<std::string> steps = {"ingest",     "split",       "gen-prompts", "eval-assoc",
                                                 "eval-rank",  "eval-psych",  "eval-values", "tension-set",
                                                 "shift",      "report"};
  return steps;
}

inline std::filesystem::path toyConfig() { return sourceDir() / "data" / "toy" / "toy.ini"; }

/// Runs every toy pipeline step into runDir; returns the first failure.
inline CliResult runToyPipeline(const std::filesystem::path& runDir) {
  for (const auto& step : toyPipeline()) {
    auto r = runCli({step, "--config", toyConfig().string(), "--run-dir", runDir.string()});
    if (r.code != 0) {
      r.err = step + ": " + r.err;
      return r;
    }
  }
  return {};
}

}  // namespace testing
