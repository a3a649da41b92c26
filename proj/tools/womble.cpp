// womble: fit, predict, diagnose, simulate.

#include "commands.hpp"
#include "config.hpp"

#include "womble/csv.hpp"
#include "womble/version.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <random>

using namespace womble;
using namespace womble::cli;

namespace {

struct Subcommand {
  CLI::App* app;
  int (*run)(RunConfig&);
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatiotemporal boundary detection for visual-field series"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::map<std::string, std::string> flags;
  std::vector<Subcommand> subs = {
      {app.add_subcommand("fit", "fit the spatiotemporal (or spatial-only) model per patient"), cmd_fit},
      {app.add_subcommand("predict", "posterior predictive draws for future visits"), cmd_predict},
      {app.add_subcommand("diagnose", "progression metrics, logistic models and ROC analysis"), cmd_diagnose},
      {app.add_subcommand("simulate", "coverage study or labeled cohort from the generative model"), cmd_simulate},
  };
  for (auto& s : subs) {
    s.app->add_option("--config", config_path, "JSON file of option values (flags take precedence)");
    for (const auto& k : key_specs()) {
      std::string help = k.help;
      if (!k.fallback.is_null()) help += " [default " + k.fallback.dump() + "]";
      help += " (env " + env_name(k.name) + ")";
      if (k.type == KeyType::boolean) {
        s.app->add_flag_callback(
            flag_name(k.name), [&flags, name = k.name] { flags[name] = "true"; }, help);
      } else {
        s.app->add_option_function<std::string>(
            flag_name(k.name), [&flags, name = k.name](const std::string& v) { flags[name] = v; }, help)
            ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
      }
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    RunConfig config;
    if (!config_path.empty()) config.merge_file(config_path);
    config.merge_environment();
    for (const auto& [k, v] : flags) config.set(k, v);
    if (!config.has("seed")) {
      std::random_device rd;
      const std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
      config.assign("seed", seed);
      std::cerr << "no --seed given; using " << seed << " (recorded in manifest.json)\n";
    }
    for (const auto& s : subs) {
      if (s.app->parsed()) return s.run(config);
    }
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
