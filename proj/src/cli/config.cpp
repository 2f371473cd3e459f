#include "culture_probe/cli/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "culture_probe/error.hpp"
#include "culture_probe/text.hpp"

namespace cprobe::cli {

namespace pt = boost::property_tree;

std::string canonicalKey(std::string key) {
  key = text::trim(key);
  for (char& c : key) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (c == '_') c = '-';
  }
  return key;
}

std::string flagName(const std::string& key) { return "--" + canonicalKey(key); }

namespace {

std::string unquote(std::string v) {
  v = text::trim(v);
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front())
    return v.substr(1, v.size() - 2);
  return v;
}

}  // namespace

Config Config::parse(const std::string& content, const std::filesystem::path& baseDir) {
  pt::ptree tree;
  std::istringstream in(content);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ValidationError("config line " + std::to_string(e.line()) + ": " + e.message());
  }
  Config c;
  c.baseDir_ = baseDir;
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      c.sections_["general"][canonicalKey(name)] = unquote(node.data());
      continue;
    }
    auto& section = c.sections_[canonicalKey(name)];
    for (const auto& [key, value] : node) {
      if (!value.empty()) throw ValidationError("config section [" + name + "]: nested key '" + key + "'");
      section[canonicalKey(key)] = unquote(value.data());
    }
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  auto dir = std::filesystem::absolute(path).parent_path();
  Config c = parse(buf.str(), dir);
  c.path_ = path;
  return c;
}

void Config::setOverride(const std::string& key, std::string value) { overrides_[canonicalKey(key)] = std::move(value); }

std::optional<ConfigValue> Config::find(const std::string& section, const std::string& key) const {
  const std::string k = canonicalKey(key);
  if (auto it = overrides_.find(k); it != overrides_.end())
    return ConfigValue{it->second, std::filesystem::current_path(), "flag " + flagName(k)};
  for (const std::string& s : {canonicalKey(section), std::string("general")}) {
    auto sec = sections_.find(s);
    if (sec == sections_.end()) continue;
    if (auto it = sec->second.find(k); it != sec->second.end())
      return ConfigValue{it->second, baseDir_, "config [" + s + "] " + k};
  }
  return std::nullopt;
}

std::optional<ConfigValue> Settings::lookup(const std::string& key) const {
  auto v = config_->find(section_, key);
  if (v && !v->value.empty()) {
    used_[canonicalKey(key)] = v->value;
    return v;
  }
  return std::nullopt;
}

void Settings::invalid(const std::string& key, const std::string& value, const std::string& expected) const {
  throw ValidationError("invalid value '" + value + "' for " + flagName(key) + ": expected " + expected);
}

std::optional<std::string> Settings::optString(const std::string& key) const {
  if (auto v = lookup(key)) return v->value;
  return std::nullopt;
}

std::string Settings::string(const std::string& key, const std::string& fallback) const {
  if (auto v = lookup(key)) return v->value;
  used_[canonicalKey(key)] = fallback;
  return fallback;
}

std::string Settings::required(const std::string& key) const {
  if (auto v = lookup(key)) return v->value;
  throw ValidationError("missing required setting: pass " + flagName(key) + " or set '" + canonicalKey(key) +
                        "' in the [" + section_ + "] or [general] config section");
}

std::optional<std::filesystem::path> Settings::optPath(const std::string& key) const {
  auto v = lookup(key);
  if (!v) return std::nullopt;
  std::filesystem::path p(v->value);
  return p.is_absolute() ? p : v->baseDir / p;
}

std::filesystem::path Settings::requiredPath(const std::string& key) const {
  required(key);
  return *optPath(key);
}

std::int64_t Settings::integer(const std::string& key, std::int64_t fallback) const {
  auto v = lookup(key);
  if (!v) {
    used_[canonicalKey(key)] = std::to_string(fallback);
    return fallback;
  }
  std::int64_t out = 0;
  const auto& s = v->value;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size()) invalid(key, s, "an integer");
  return out;
}

std::uint64_t Settings::unsignedInteger(const std::string& key, std::uint64_t fallback) const {
  auto v = lookup(key);
  if (!v) {
    used_[canonicalKey(key)] = std::to_string(fallback);
    return fallback;
  }
  std::uint64_t out = 0;
  const auto& s = v->value;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size()) invalid(key, s, "a non-negative integer");
  return out;
}

double Settings::real(const std::string& key, double fallback) const {
  auto v = lookup(key);
  if (!v) {
    used_[canonicalKey(key)] = text::formatNumber(fallback);
    return fallback;
  }
  double out = 0;
  const auto& s = v->value;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size()) invalid(key, s, "a number");
  return out;
}

bool Settings::boolean(const std::string& key, bool fallback) const {
  auto v = lookup(key);
  if (!v) {
    used_[canonicalKey(key)] = fallback ? "true" : "false";
    return fallback;
  }
  if (text::iequals(v->value, "true") || v->value == "1" || text::iequals(v->value, "yes")) return true;
  if (text::iequals(v->value, "false") || v->value == "0" || text::iequals(v->value, "no")) return false;
  invalid(key, v->value, "true or false");
}

namespace {

std::vector<std::string> splitList(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ',')) {
    cur = text::trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

}  // namespace

std::vector<double> Settings::reals(const std::string& key, const std::vector<double>& fallback) const {
  auto v = lookup(key);
  if (!v) {
    std::vector<std::string> parts;
    for (double d : fallback) parts.push_back(text::formatNumber(d));
    used_[canonicalKey(key)] = text::join(parts, ",");
    return fallback;
  }
  std::vector<double> out;
  for (const auto& part : splitList(v->value)) {
    double d = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), d);
    if (ec != std::errc() || ptr != part.data() + part.size()) invalid(key, v->value, "comma-separated numbers");
    out.push_back(d);
  }
  if (out.empty()) invalid(key, v->value, "comma-separated numbers");
  return out;
}

std::vector<std::size_t> Settings::sizes(const std::string& key, const std::vector<std::size_t>& fallback) const {
  auto v = lookup(key);
  if (!v) {
    std::vector<std::string> parts;
    for (auto d : fallback) parts.push_back(std::to_string(d));
    used_[canonicalKey(key)] = text::join(parts, ",");
    return fallback;
  }
  std::vector<std::size_t> out;
  for (const auto& part : splitList(v->value)) {
    std::size_t d = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), d);
    if (ec != std::errc() || ptr != part.data() + part.size()) invalid(key, v->value, "comma-separated integers");
    out.push_back(d);
  }
  if (out.empty()) invalid(key, v->value, "comma-separated integers");
  return out;
}

std::vector<std::pair<std::string, std::filesystem::path>> Settings::namedPaths(const std::string& key) const {
  auto v = lookup(key);
  if (!v) required(key);
  std::vector<std::pair<std::string, std::filesystem::path>> out;
  for (const auto& part : splitList(v->value)) {
    const auto eq = part.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == part.size())
      invalid(key, v->value, "name=path pairs separated by commas");
    std::string name = text::trim(part.substr(0, eq));
    std::filesystem::path p(text::trim(part.substr(eq + 1)));
    for (const auto& [existing, _] : out)
      if (existing == name) invalid(key, v->value, "distinct names");
    for (char c : name)
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.'))
        invalid(key, v->value, "names made of letters, digits, '-', '_' or '.'");
    out.emplace_back(name, p.is_absolute() ? p : v->baseDir / p);
  }
  return out;
}

}  // namespace cprobe::cli
