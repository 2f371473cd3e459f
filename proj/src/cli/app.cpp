#include "culture_probe/cli/app.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>

#include "culture_probe/cli/commands.hpp"
#include "culture_probe/cli/config.hpp"
#include "culture_probe/error.hpp"

namespace cprobe::cli {

int runApp(int argc, char** argv) {
  CLI::App app{"Word-association and survey-alignment evaluation pipeline", "culture-probe"};
  app.set_version_flag("--version", CULTURE_PROBE_VERSION);
  app.require_subcommand(1, 1);

  std::string configPath;
  std::string runDir;
  std::map<std::string, std::string> overrides;

  for (const auto& cmd : commandTable()) {
    auto* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("--config", configPath, "Config file (INI: [general] plus per-subcommand sections)");
    sub->add_option("--run-dir", runDir, "Run directory holding every artifact");
    if (cmd.name == "verify") continue;
    for (const auto* keys : {&generalKeys(), &cmd.keys}) {
      for (const auto& key : *keys) {
        sub->add_option_function<std::string>(
            flagName(key), [&overrides, key](const std::string& v) { overrides[key] = v; },
            "Overrides config key '" + key + "'");
      }
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  const auto* sub = app.get_subcommands().front();
  try {
    Config config;
    if (!configPath.empty()) config = Config::load(configPath);
    for (const auto& [k, v] : overrides) config.setOverride(k, v);
    if (runDir.empty()) {
      if (auto v = config.find(sub->get_name(), "run-dir")) {
        std::filesystem::path p(v->value);
        runDir = (p.is_absolute() ? p : v->baseDir / p).string();
      }
    }
    if (runDir.empty()) throw ValidationError("missing --run-dir (or 'run-dir' in the config's [general] section)");
    runCommand(sub->get_name(), config, runDir);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace cprobe::cli
