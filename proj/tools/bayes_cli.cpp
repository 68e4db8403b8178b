// Scenario runner: one subcommand per experiment, metrics as key=value lines
// on stdout, CSV files in --out.
//
// Exit codes: 0 success, 2 config error, 3 numerical error, 4 I/O error.

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "bayes/error.hpp"
#include "bayes/scenarios.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;
constexpr int kIoError = 4;

struct SubcommandOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> config;
  std::map<std::string, std::string> values;
};

int fail(int code, const bayes::Error& e) {
  std::cerr << "error=" << e.name() << ": " << e.what() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian filtering and Gaussian-process scenario runner"};
  app.require_subcommand(1);

  std::map<std::string, SubcommandOptions> options;
  std::map<std::string, CLI::App*> subcommands;
  for (const auto& name : bayes::scenarios::names()) {
    auto& opts = options[name];
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " scenario");
    sub->add_option("--seed", opts.seed, "random seed");
    sub->add_option("--out", opts.out, "output directory for CSV files");
    sub->add_option("--config", opts.config, "flat key=value config file (flags take precedence)");
    for (const auto& p : bayes::scenarios::params(name)) {
      auto* opt = sub->add_option_function<std::string>(
          "--" + p.key, [&opts, key = p.key](const std::string& v) { opts.values[key] = v; }, p.help);
      if (p.is_path) {
        opt->type_name("PATH");
      } else {
        std::ostringstream def;
        def << p.default_value;
        opt->type_name("NUMBER")->default_str(def.str());
      }
    }
    subcommands[name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  std::string chosen;
  for (const auto& [name, sub] : subcommands) {
    if (sub->parsed()) {
      chosen = name;
    }
  }
  const SubcommandOptions& opts = options[chosen];

  try {
    bayes::scenarios::ScenarioConfig cfg;
    cfg.scenario = chosen;
    if (opts.config) {
      std::ifstream in(*opts.config);
      if (!in) {
        throw bayes::IoError("cannot open config '" + *opts.config + "'");
      }
      bayes::scenarios::apply_config_text(cfg, in);
    }
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.out) cfg.output_dir = *opts.out;
    for (const auto& [key, value] : opts.values) {
      bayes::scenarios::set_value(cfg, key, value);
    }
    bayes::scenarios::run(cfg).print(std::cout);
  } catch (const bayes::ConfigError& e) {
    return fail(kConfigError, e);
  } catch (const bayes::InvalidArgument& e) {
    return fail(kConfigError, e);
  } catch (const bayes::NumericalError& e) {
    return fail(kNumericalError, e);
  } catch (const bayes::IoError& e) {
    return fail(kIoError, e);
  }
  return 0;
}
