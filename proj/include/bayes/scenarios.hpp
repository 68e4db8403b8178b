#ifndef BAYES_SCENARIOS_HPP
#define BAYES_SCENARIOS_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace bayes::scenarios {

inline const std::vector<std::string>& names() {
  static const std::vector<std::string> all{"kalman-ar2", "pf-ungm", "gp-demo", "gp-train", "gp-pf-demo"};
  return all;
}

/// A scenario parameter: numeric unless `is_path`.
struct Param {
  std::string key;
  double default_value;
  std::string help;
  bool is_path = false;
};

/// Parameters accepted by a scenario (excluding seed and out).
const std::vector<Param>& params(const std::string& scenario);

struct ScenarioConfig {
  std::string scenario;
  std::uint64_t seed = 1;
  std::string output_dir = ".";
  std::map<std::string, double> numbers;
  std::map<std::string, std::string> paths;

  /// Override value or the scenario default.
  double number(const std::string& key) const;
  std::string path(const std::string& key) const;
};

/// Applies flat `key=value` lines ('#' comments allowed). Unknown keys and
/// unparsable values throw ConfigError.
void apply_config_text(ScenarioConfig& cfg, std::istream& in);
/// Sets one key (seed, out, or a scenario parameter) from text.
void set_value(ScenarioConfig& cfg, const std::string& key, const std::string& value);

/// Ordered key=value metrics printed to standard output.
struct Metrics {
  std::vector<std::pair<std::string, std::string>> entries;
  /// Free-form block printed before the metrics (gp-train report).
  std::string preamble;

  void add(const std::string& key, double value);
  void add(const std::string& key, const std::string& value);
  double number(const std::string& key) const;
  void print(std::ostream& out) const;
};

Metrics run_kalman_ar2(const ScenarioConfig& cfg);
Metrics run_pf_ungm(const ScenarioConfig& cfg);
Metrics run_gp_demo(const ScenarioConfig& cfg);
Metrics run_gp_train(const ScenarioConfig& cfg);
Metrics run_gp_pf_demo(const ScenarioConfig& cfg);

/// Validates cfg against the scenario's preconditions and dispatches.
Metrics run(const ScenarioConfig& cfg);

}  // namespace bayes::scenarios

#endif  // BAYES_SCENARIOS_HPP
