#include "bayes/scenarios.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "bayes/csv.hpp"
#include "bayes/error.hpp"
#include "bayes/gp.hpp"
#include "bayes/gp_pf.hpp"
#include "bayes/gp_train.hpp"
#include "bayes/kalman.hpp"
#include "bayes/smc.hpp"
#include "bayes/ssm.hpp"

namespace bayes::scenarios {

namespace {

const std::map<std::string, std::vector<Param>>& param_table() {
  static const std::map<std::string, std::vector<Param>> table{
      {"kalman-ar2",
       {{"steps", 300, "number of simulated steps"},
        {"frequency", 0.05, "AR(2) frequency f; F = [[2cos(2πf), -1], [1, 0]]"},
        {"phase", 1.0, "initial phase; x_0 = [sin(phase), 0]"},
        {"q", 0.1, "process noise variance used by the filter (Q = q·I)"},
        {"r", 0.1, "measurement noise variance"},
        {"truth_noise", 0, "1 to add process noise q·I to the simulated state"}}},
      {"pf-ungm",
       {{"n_particles", 500, "number of particles"},
        {"steps", 50, "number of tracked steps"},
        {"resample_frac", 0.25, "resample when ESS < resample_frac·N"},
        {"vr_w", 0.1, "process noise variance"},
        {"vr_v", 0.5, "observation noise variance"},
        {"x0", 0.1, "true initial state"},
        {"p0", 0.1, "initial particle spread variance"}}},
      {"gp-demo",
       {{"variance", 1.0, "kernel variance (code convention)"},
        {"length", 0.5, "length parameter l in exp(-0.5/l·(x-x')²)"},
        {"noise_var", 0.1, "observation noise variance"},
        {"train_lo", -1.0, "first training input"},
        {"train_hi", 1.0, "last training input"},
        {"train_step", 0.2, "training input spacing"},
        {"test_lo", -2.0, "first test input"},
        {"test_hi", 2.0, "last test input"},
        {"test_step", 0.001, "test input spacing"},
        {"latent_variance", 0, "1 to report the latent-function variance (without noise_var)"}}},
      {"gp-train",
       {{"dataset", 0, "CSV with columns x,y; generated from the SE prior when empty", true},
        {"n", 50, "generated dataset size"},
        {"x_lo", -5.0, "generated inputs are uniform on [x_lo, x_hi]"},
        {"x_hi", 5.0, "see x_lo"},
        {"amplitude", 1.0, "generating SE amplitude"},
        {"length", 0.5, "generating SE length"},
        {"noise_var", 0.1, "generating noise variance"},
        {"init_amplitude", 2.0, "initial SE amplitude"},
        {"init_length", 1.0, "initial SE length"},
        {"init_noise_var", 0.5, "initial noise variance"},
        {"max_iters", 2000, "maximum accepted steps per restart"},
        {"grad_tol", 1e-4, "gradient-norm stopping tolerance"},
        {"step_init", 0.01, "initial step length"},
        {"restarts", 3, "number of restarts"}}},
      {"gp-pf-demo",
       {{"pairs", 0, "CSV with columns prev,next[,step]; generated from UNGM when empty", true},
        {"n_particles", 500, "number of particles"},
        {"steps", 50, "number of tracked steps"},
        {"resample_frac", 0.25, "resample when ESS < resample_frac·N"},
        {"vr_w", 0.1, "process noise variance"},
        {"vr_v", 0.5, "observation noise variance"},
        {"x0", 0.1, "true initial state"},
        {"p0", 0.1, "initial particle spread variance"},
        {"n_pairs", 200, "number of generated training pairs"},
        {"time_input", 0, "1 to learn f(x, k) directly instead of removing the known forcing"},
        {"max_iters", 300, "GP training iterations"},
        {"grad_tol", 1e-3, "GP training gradient tolerance"}}},
  };
  return table;
}

void require(bool ok, const std::string& message) {
  if (!ok) {
    throw ConfigError(message);
  }
}

int whole(const ScenarioConfig& cfg, const std::string& key, int min_value) {
  const double v = cfg.number(key);
  require(std::isfinite(v) && v == std::floor(v) && v >= min_value && v <= 1e9,
          key + " must be an integer >= " + std::to_string(min_value));
  return static_cast<int>(v);
}

double positive(const ScenarioConfig& cfg, const std::string& key) {
  const double v = cfg.number(key);
  require(std::isfinite(v) && v > 0.0, key + " must be finite and > 0");
  return v;
}

double finite(const ScenarioConfig& cfg, const std::string& key) {
  const double v = cfg.number(key);
  require(std::isfinite(v), key + " must be finite");
  return v;
}

double fraction(const ScenarioConfig& cfg, const std::string& key) {
  const double v = cfg.number(key);
  require(v >= 0.0 && v <= 1.0, key + " must lie in [0, 1]");
  return v;
}

bool flag(const ScenarioConfig& cfg, const std::string& key) {
  const double v = cfg.number(key);
  require(v == 0.0 || v == 1.0, key + " must be 0 or 1");
  return v == 1.0;
}

std::filesystem::path output_file(const ScenarioConfig& cfg, const std::string& name) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  if (ec) {
    throw IoError("cannot create output directory '" + cfg.output_dir + "': " + ec.message());
  }
  return std::filesystem::path(cfg.output_dir) / name;
}

template <typename Writer>
void write_file(const ScenarioConfig& cfg, const std::string& name, Writer&& writer) {
  const auto path = output_file(cfg, name);
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write '" + path.string() + "'");
  }
  writer(out);
  if (!out) {
    throw IoError("write to '" + path.string() + "' failed");
  }
}

std::vector<double> arange(double lo, double hi, double step) {
  require(step > 0.0 && hi >= lo, "grid needs step > 0 and hi >= lo");
  const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
  require(count <= 10'000'000, "grid is too large");
  std::vector<double> xs;
  xs.reserve(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) {
    xs.push_back(lo + step * static_cast<double>(i));
  }
  return xs;
}

double ungm_drive(int k) { return 8.0 * std::cos(1.2 * (k - 1)); }

struct UngmSetup {
  NonlinearSSM truth_model;
  NonlinearSSM filter_model;
  int steps;
  std::size_t n_particles;
  double resample_frac;
};

UngmSetup ungm_setup(const ScenarioConfig& cfg) {
  const double vr_w = positive(cfg, "vr_w");
  const double vr_v = positive(cfg, "vr_v");
  const double x0 = finite(cfg, "x0");
  const double p0 = positive(cfg, "p0");
  return UngmSetup{ungm_model(vr_w, vr_v, Gaussian::scalar(x0, 0.0)), ungm_model(vr_w, vr_v, Gaussian::scalar(x0, p0)),
                   whole(cfg, "steps", 1), static_cast<std::size_t>(whole(cfg, "n_particles", 2)),
                   fraction(cfg, "resample_frac")};
}

}  // namespace

const std::vector<Param>& params(const std::string& scenario) {
  const auto& table = param_table();
  const auto it = table.find(scenario);
  if (it == table.end()) {
    throw ConfigError("unknown scenario '" + scenario + "'");
  }
  return it->second;
}

double ScenarioConfig::number(const std::string& key) const {
  if (const auto it = numbers.find(key); it != numbers.end()) {
    return it->second;
  }
  for (const auto& p : params(scenario)) {
    if (p.key == key && !p.is_path) {
      return p.default_value;
    }
  }
  throw ConfigError("scenario '" + scenario + "' has no numeric parameter '" + key + "'");
}

std::string ScenarioConfig::path(const std::string& key) const {
  if (const auto it = paths.find(key); it != paths.end()) {
    return it->second;
  }
  return {};
}

void set_value(ScenarioConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "seed") {
    try {
      std::size_t used = 0;
      const unsigned long long seed = std::stoull(value, &used);
      require(used == value.size(), "seed must be a nonnegative integer");
      cfg.seed = seed;
    } catch (const std::logic_error&) {
      throw ConfigError("seed must be a nonnegative integer, got '" + value + "'");
    }
    return;
  }
  if (key == "out") {
    cfg.output_dir = value;
    return;
  }
  for (const auto& p : params(cfg.scenario)) {
    if (p.key != key) {
      continue;
    }
    if (p.is_path) {
      cfg.paths[key] = value;
      return;
    }
    try {
      std::size_t used = 0;
      const double v = std::stod(value, &used);
      require(used == value.size(), "");
      cfg.numbers[key] = v;
    } catch (const std::exception&) {
      throw ConfigError(key + " expects a number, got '" + value + "'");
    }
    return;
  }
  throw ConfigError("unknown key '" + key + "' for scenario '" + cfg.scenario + "'");
}

void apply_config_text(ScenarioConfig& cfg, std::istream& in) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
      continue;
    }
    const auto eq = line.find('=');
    require(eq != std::string::npos, "config line " + std::to_string(line_no) + " is not key=value");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    };
    set_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void Metrics::add(const std::string& key, double value) { entries.emplace_back(key, csv::number(value)); }

void Metrics::add(const std::string& key, const std::string& value) { entries.emplace_back(key, value); }

double Metrics::number(const std::string& key) const {
  for (const auto& [k, v] : entries) {
    if (k == key) {
      return std::stod(v);
    }
  }
  throw InvalidArgument("no metric named '" + key + "'");
}

void Metrics::print(std::ostream& out) const {
  out << preamble;
  for (const auto& [k, v] : entries) {
    out << k << '=' << v << '\n';
  }
}

Metrics run_kalman_ar2(const ScenarioConfig& cfg) {
  const int steps = whole(cfg, "steps", 1);
  const double f = finite(cfg, "frequency");
  const double phase = finite(cfg, "phase");
  const double q = positive(cfg, "q");
  const double r = positive(cfg, "r");
  const bool truth_noise = flag(cfg, "truth_noise");

  Vector x0(2);
  x0 << std::sin(phase), 0.0;
  const LinearGaussianSSM truth_model =
      ar2_model(f, truth_noise ? q : 0.0, r, Gaussian{x0, Matrix::Zero(2, 2)});
  const LinearGaussianSSM filter_model = ar2_model(f, q, r, Gaussian{x0, Matrix::Identity(2, 2)});

  RngStream rng{cfg.seed};
  const Trajectory truth = simulate(truth_model, steps, rng);
  const auto states = kalman::filter_sequence(filter_model, truth.observations);

  std::vector<double> filtered;
  std::vector<double> raw;
  for (std::size_t k = 0; k < states.size(); ++k) {
    filtered.push_back(states[k].posterior.mean()[0]);
    raw.push_back(truth.observations[k][0]);
  }
  write_file(cfg, "kalman_ar2.csv", [&](std::ostream& out) { kalman::write_filter_csv(out, truth, states); });

  Metrics m;
  m.add("scenario", std::string("kalman-ar2"));
  m.add("seed", std::to_string(cfg.seed));
  m.add("steps", steps);
  m.add("rmse_filtered", smc::rmse(truth, filtered));
  m.add("rmse_raw", smc::rmse(truth, raw));
  return m;
}

Metrics run_pf_ungm(const ScenarioConfig& cfg) {
  const UngmSetup setup = ungm_setup(cfg);
  RngStream rng{cfg.seed};
  const Trajectory truth = simulate(setup.truth_model, setup.steps, rng);
  const smc::FilterRun run =
      smc::particle_filter(setup.filter_model, truth.observations, setup.n_particles, setup.resample_frac, rng);
  write_file(cfg, "pf_ungm.csv", [&](std::ostream& out) { smc::write_pf_csv(out, truth, run); });

  Metrics m;
  m.add("scenario", std::string("pf-ungm"));
  m.add("seed", std::to_string(cfg.seed));
  m.add("n_particles", static_cast<double>(setup.n_particles));
  m.add("steps", setup.steps);
  m.add("rmse", smc::rmse(truth, run.means()));
  m.add("resample_count", static_cast<double>(run.resample_count()));
  m.add("final_ess", run.steps.back().ess);
  return m;
}

Metrics run_gp_demo(const ScenarioConfig& cfg) {
  const double variance = positive(cfg, "variance");
  const double length = positive(cfg, "length");
  const double noise_var = cfg.number("noise_var");
  require(std::isfinite(noise_var) && noise_var >= 0.0, "noise_var must be finite and >= 0");
  const bool latent = flag(cfg, "latent_variance");
  const auto train_xs = arange(finite(cfg, "train_lo"), finite(cfg, "train_hi"), positive(cfg, "train_step"));
  const auto test_xs = arange(finite(cfg, "test_lo"), finite(cfg, "test_hi"), positive(cfg, "test_step"));

  // The demo's kernel is var·exp(−0.5/l·r²), i.e. amplitude √var and length √(2l)
  // in the a²·exp(−r²/L²) parameterization.
  const gp::GpPrior prior{gp::MeanFunction::zero(),
                          gp::KernelSpec::squared_exponential(std::sqrt(variance), std::sqrt(2.0 * length)),
                          noise_var};
  RngStream rng{cfg.seed};
  const auto inputs = gp::scalar_inputs(train_xs);
  const Vector ys = gp::prior_sample(prior, inputs, rng);
  const gp::GpPosterior post = gp::condition(prior, inputs, ys);
  const auto kind = latent ? gp::PredictiveVariance::Latent : gp::PredictiveVariance::Observation;
  const gp::Prediction pred = gp::predict(post, gp::scalar_inputs(test_xs), kind);

  const gp::Prediction at_train = gp::predict(post, inputs, gp::PredictiveVariance::Observation);
  int inside = 0;
  for (Eigen::Index i = 0; i < ys.size(); ++i) {
    if (std::abs(ys[i] - at_train.mean[i]) <= 2.0 * std::sqrt(at_train.variance[i])) {
      ++inside;
    }
  }

  gp::Dataset data{train_xs, std::vector<double>(ys.data(), ys.data() + ys.size())};
  write_file(cfg, "gp_demo_training.csv", [&](std::ostream& out) { gp::write_dataset_csv(out, data); });
  write_file(cfg, "gp_demo_prediction.csv", [&](std::ostream& out) { gp::write_prediction_csv(out, test_xs, pred); });

  Metrics m;
  m.add("scenario", std::string("gp-demo"));
  m.add("seed", std::to_string(cfg.seed));
  m.add("n_train", static_cast<double>(train_xs.size()));
  m.add("n_test", static_cast<double>(test_xs.size()));
  m.add("train_inside_band", inside);
  m.add("train_inside_fraction", static_cast<double>(inside) / static_cast<double>(train_xs.size()));
  m.add("edge_band_halfwidth", 2.0 * std::sqrt(pred.variance[pred.variance.size() - 1]));
  m.add("log_marginal_likelihood", post.log_marginal_likelihood());
  return m;
}

Metrics run_gp_train(const ScenarioConfig& cfg) {
  gp::TrainConfig train_cfg;
  train_cfg.max_iters = whole(cfg, "max_iters", 1);
  train_cfg.grad_tol = positive(cfg, "grad_tol");
  train_cfg.step_init = positive(cfg, "step_init");
  train_cfg.restarts = whole(cfg, "restarts", 1);
  train_cfg.seed = cfg.seed;

  gp::Dataset data;
  const std::string dataset = cfg.path("dataset");
  if (!dataset.empty()) {
    data = gp::read_dataset_csv(dataset);
  } else {
    const int n = whole(cfg, "n", 1);
    const double lo = finite(cfg, "x_lo");
    const double hi = finite(cfg, "x_hi");
    require(hi > lo, "x_hi must exceed x_lo");
    const double noise = positive(cfg, "noise_var");
    const gp::GpPrior truth{gp::MeanFunction::zero(),
                            gp::KernelSpec::squared_exponential(positive(cfg, "amplitude"), positive(cfg, "length")),
                            noise};
    RngStream rng{cfg.seed};
    for (int i = 0; i < n; ++i) {
      data.x.push_back(rng.uniform(lo, hi));
    }
    const Vector ys = gp::prior_sample(truth, gp::scalar_inputs(data.x), rng);
    data.y.assign(ys.data(), ys.data() + ys.size());
    write_file(cfg, "gp_train_dataset.csv", [&](std::ostream& out) { gp::write_dataset_csv(out, data); });
  }

  const gp::GpPrior init{
      gp::MeanFunction::zero(),
      gp::KernelSpec::squared_exponential(positive(cfg, "init_amplitude"), positive(cfg, "init_length")),
      positive(cfg, "init_noise_var")};
  const Vector ys = Eigen::Map<const Vector>(data.y.data(), static_cast<Eigen::Index>(data.y.size()));
  const gp::TrainReport report = gp::train(init, gp::scalar_inputs(data.x), ys, train_cfg);
  const std::string block = gp::format_train_report(report);
  write_file(cfg, "gp_train_report.txt", [&](std::ostream& out) { out << block; });

  Metrics m;
  m.preamble = block;
  m.add("scenario", std::string("gp-train"));
  m.add("seed", std::to_string(cfg.seed));
  m.add("n_train", static_cast<double>(data.x.size()));
  m.add("restart_index", report.restart_index);
  m.add("grad_tol", train_cfg.grad_tol);
  m.add("converged", report.grad_norm < train_cfg.grad_tol ? 1.0 : 0.0);
  return m;
}

Metrics run_gp_pf_demo(const ScenarioConfig& cfg) {
  const UngmSetup setup = ungm_setup(cfg);
  const bool time_input = flag(cfg, "time_input");
  gp::TrainConfig train_cfg;
  train_cfg.max_iters = whole(cfg, "max_iters", 1);
  train_cfg.grad_tol = positive(cfg, "grad_tol");
  train_cfg.step_init = 0.01;
  train_cfg.seed = cfg.seed;

  const gp_pf::Drive drive = time_input ? gp_pf::Drive{} : gp_pf::Drive{ungm_drive};
  std::vector<gp_pf::DynamicsPair> pairs;
  const std::string pairs_path = cfg.path("pairs");
  if (!pairs_path.empty()) {
    pairs = gp_pf::read_pairs_csv(pairs_path);
  } else {
    // Offline supervised phase: independent ground-truth runs of the same system.
    const int n_pairs = whole(cfg, "n_pairs", 2);
    const RngStream base{cfg.seed};
    for (std::uint64_t run = 0; static_cast<int>(pairs.size()) < n_pairs; ++run) {
      RngStream rng = base.derive(0x7a11, run);
      const auto traj = simulate(setup.truth_model, setup.steps, rng);
      for (const auto& p : gp_pf::pairs_from_trajectory(traj, drive)) {
        if (static_cast<int>(pairs.size()) < n_pairs) {
          pairs.push_back(p);
        }
      }
    }
    write_file(cfg, "gp_pf_pairs.csv", [&](std::ostream& out) { gp_pf::write_pairs_csv(out, pairs); });
  }

  const gp::KernelSpec kernel = gp::KernelSpec::squared_exponential(10.0, 2.0);
  gp_pf::LearnOptions options;
  options.noise_var_init = 0.1;
  options.time_input = time_input;
  gp::GpPosterior learned = gp_pf::learn_dynamics(pairs, kernel, train_cfg, options);
  const gp_pf::GpDynamicsModel model{std::move(learned),
                                     [](const Vector& x) { return Vector::Constant(1, ungm_observe(x[0])); },
                                     setup.filter_model.obs_noise_var()[0], setup.filter_model.initial(), drive,
                                     time_input};

  RngStream truth_rng{cfg.seed};
  const Trajectory truth = simulate(setup.truth_model, setup.steps, truth_rng);
  // Both filters consume an identical stream so the comparison is paired.
  RngStream known_rng = RngStream{cfg.seed}.derive(0xf117e7);
  RngStream learned_rng = known_rng;
  const smc::FilterRun known =
      smc::particle_filter(setup.filter_model, truth.observations, setup.n_particles, setup.resample_frac, known_rng);
  const smc::FilterRun learned_run =
      gp_pf::gp_particle_filter(model, truth.observations, setup.n_particles, setup.resample_frac, learned_rng);

  write_file(cfg, "gp_pf_known.csv", [&](std::ostream& out) { smc::write_pf_csv(out, truth, known); });
  write_file(cfg, "gp_pf_learned.csv", [&](std::ostream& out) { smc::write_pf_csv(out, truth, learned_run); });

  const double rmse_known = smc::rmse(truth, known.means());
  const double rmse_learned = smc::rmse(truth, learned_run.means());
  Metrics m;
  m.add("scenario", std::string("gp-pf-demo"));
  m.add("seed", std::to_string(cfg.seed));
  m.add("n_pairs", static_cast<double>(pairs.size()));
  m.add("gp_noise_var", model.transition_gp().prior().noise_var());
  m.add("rmse_known", rmse_known);
  m.add("rmse_learned", rmse_learned);
  m.add("rmse_ratio", rmse_learned / rmse_known);
  return m;
}

Metrics run(const ScenarioConfig& cfg) {
  params(cfg.scenario);  // rejects unknown scenarios
  if (cfg.scenario == "kalman-ar2") return run_kalman_ar2(cfg);
  if (cfg.scenario == "pf-ungm") return run_pf_ungm(cfg);
  if (cfg.scenario == "gp-demo") return run_gp_demo(cfg);
  if (cfg.scenario == "gp-train") return run_gp_train(cfg);
  return run_gp_pf_demo(cfg);
}

}  // namespace bayes::scenarios
