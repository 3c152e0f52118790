#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <map>

namespace afp::cli {
namespace {

std::string dashed(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

std::string flag_names(const std::string& key) {
  const std::string d = dashed(key);
  return d == key ? "--" + key : "--" + d + ",--" + key;
}

struct Flags {
  std::string config;
  std::map<std::string, std::string> values;  // JSON key -> raw flag text
};

void add_common(CLI::App& app, Flags& f) {
  app.add_option("--config", f.config, "JSON config or manifest of an earlier run");
  app.add_option("--output-dir,--output_dir", f.values["output_dir"], "artifact directory");
  app.add_option("--seed", f.values["seed"], "seed for randomized starts");
  app.add_option("--threads", f.values["threads"], "worker threads (default AFP_THREADS or 1)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"afp: almost-fuchsian minimal surface experiments"};
  app.require_subcommand(0, 1);
  Flags root;
  add_common(app, root);

  std::map<std::string, Flags> per_command;
  std::map<std::string, CLI::App*> subs;
  for (const auto& spec : commands()) {
    CLI::App* sub = app.add_subcommand(spec.name, spec.help);
    Flags& f = per_command[spec.name];
    add_common(*sub, f);
    for (const auto& p : spec.params) {
      sub->add_option(flag_names(p.key), f.values[p.key], p.help);
    }
    subs[spec.name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfigError;
  }

  std::string command;
  Flags* chosen = nullptr;
  for (auto& [name, sub] : subs) {
    if (sub->parsed()) {
      command = name;
      chosen = &per_command[name];
    }
  }

  try {
    std::string config_path = root.config;
    if (chosen && !chosen->config.empty()) config_path = chosen->config;
    Json doc;
    if (!config_path.empty()) {
      try {
        doc = read_json_file(config_path);
      } catch (const std::exception& e) {
        throw ConfigError("cannot read config " + config_path + ": " + e.what());
      }
    }
    std::vector<std::pair<std::string, std::string>> overrides;
    auto collect = [&](const Flags& f, const CLI::App& owner) {
      for (const auto& [key, raw] : f.values) {
        const std::string name = key == "output_dir" ? "--output-dir" : "--" + dashed(key);
        if (owner.get_option(name)->count() > 0) overrides.emplace_back(key, raw);
      }
    };
    collect(root, app);
    if (chosen) collect(*chosen, *subs[command]);
    const Config cfg = resolve_config(command, doc, overrides);
    return run(cfg, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
}

}  // namespace afp::cli
