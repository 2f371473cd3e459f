#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cprobe::cli {

/// Lower-case with '_' mapped to '-', so "tension_n" and "tension-n" name the
/// same key.
std::string canonicalKey(std::string key);

struct ConfigValue {
  std::string value;
  /// Directory relative paths resolve against: the config file's directory
  /// for file values, the working directory for flag values.
  std::filesystem::path baseDir;
  std::string source;
};

/// INI-style key/value file with a [general] section and one section per
/// subcommand. Lookup order: flag override, subcommand section, [general].
class Config {
 public:
  Config() = default;

  /// Throws IoError when unreadable, ValidationError on syntax errors.
  static Config load(const std::filesystem::path& path);
  static Config parse(const std::string& text, const std::filesystem::path& baseDir);

  void setOverride(const std::string& key, std::string value);
  std::optional<ConfigValue> find(const std::string& section, const std::string& key) const;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
  std::map<std::string, std::string> overrides_;
  std::filesystem::path path_;
  std::filesystem::path baseDir_;
};

/// Typed accessors over one subcommand's view of a Config. Every key read is
/// remembered so the resolved values can be snapshotted into the manifest.
class Settings {
 public:
  Settings(const Config& config, std::string section) : config_(&config), section_(std::move(section)) {}

  const std::string& section() const { return section_; }

  std::optional<std::string> optString(const std::string& key) const;
  std::string string(const std::string& key, const std::string& fallback) const;
  /// Throws ValidationError naming the flag when the key is unset.
  std::string required(const std::string& key) const;

  std::optional<std::filesystem::path> optPath(const std::string& key) const;
  std::filesystem::path requiredPath(const std::string& key) const;

  std::int64_t integer(const std::string& key, std::int64_t fallback) const;
  std::uint64_t unsignedInteger(const std::string& key, std::uint64_t fallback) const;
  double real(const std::string& key, double fallback) const;
  bool boolean(const std::string& key, bool fallback) const;
  std::vector<double> reals(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<std::size_t> sizes(const std::string& key, const std::vector<std::size_t>& fallback) const;

  /// "name=path,name=path" in declaration order; paths resolved.
  std::vector<std::pair<std::string, std::filesystem::path>> namedPaths(const std::string& key) const;

  const std::map<std::string, std::string>& snapshot() const { return used_; }

 private:
  std::optional<ConfigValue> lookup(const std::string& key) const;
  [[noreturn]] void invalid(const std::string& key, const std::string& value, const std::string& expected) const;

  const Config* config_;
  std::string section_;
  mutable std::map<std::string, std::string> used_;
};

/// "--" + canonical key.
std::string flagName(const std::string& key);

}  // namespace cprobe::cli
