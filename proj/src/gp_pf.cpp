#include "bayes/gp_pf.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <tuple>

#include "bayes/csv.hpp"
#include "bayes/error.hpp"

namespace bayes::gp_pf {

GpDynamicsModel::GpDynamicsModel(gp::GpPosterior transition_gp, ObservationFn obs_fn, double obs_noise_var,
                                 Gaussian initial, Drive drive, bool time_input)
    : transition_gp_{std::move(transition_gp)},
      obs_fn_{std::move(obs_fn)},
      obs_noise_var_{obs_noise_var},
      initial_{std::move(initial)},
      drive_{std::move(drive)},
      time_input_{time_input} {
  if (transition_gp_.size() < 2) {
    throw InvalidArgument("transition GP must be trained on at least two pairs");
  }
  if (!(obs_noise_var_ > 0.0) || !std::isfinite(obs_noise_var_)) {
    throw InvalidArgument("observation noise variance must be strictly positive");
  }
  if (!obs_fn_) {
    throw InvalidArgument("observation map is required");
  }
  if (initial_.dim() != 1) {
    throw InvalidArgument("learned dynamics are 1-D");
  }
  const Eigen::Index input_dim = transition_gp_.train_x().front().size();
  if (input_dim != (time_input_ ? 2 : 1)) {
    throw DimensionMismatch("transition GP input dimension does not match the time_input setting");
  }
}

smc::TransitionMoments GpDynamicsModel::transition(const Vector& x_prev, int k) const {
  gp::Input input(time_input_ ? 2 : 1);
  input[0] = x_prev[0];
  if (time_input_) {
    input[1] = static_cast<double>(k);
  }
  double mean = 0.0;
  double var = 0.0;
  transition_gp_.predict_point(input, mean, var);
  if (drive_) {
    mean += drive_(k);
  }
  return smc::TransitionMoments{Vector::Constant(1, mean), Vector::Constant(1, var)};
}

gp::GpPosterior learn_dynamics(const std::vector<DynamicsPair>& pairs, const gp::KernelSpec& kernel,
                               const gp::TrainConfig& cfg, const LearnOptions& options) {
  std::vector<DynamicsPair> unique = pairs;
  const auto key = [&](const DynamicsPair& p) {
    return std::make_tuple(p.prev, options.time_input ? p.step : 0, p.next);
  };
  std::sort(unique.begin(), unique.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
  unique.erase(std::unique(unique.begin(), unique.end(), [&](const auto& a, const auto& b) { return key(a) == key(b); }),
               unique.end());
  if (unique.size() < 2) {
    throw InvalidArgument("learn_dynamics needs at least two distinct pairs");
  }

  std::vector<gp::Input> xs;
  Vector ys(static_cast<Eigen::Index>(unique.size()));
  xs.reserve(unique.size());
  for (std::size_t i = 0; i < unique.size(); ++i) {
    gp::Input x(options.time_input ? 2 : 1);
    x[0] = unique[i].prev;
    if (options.time_input) {
      x[1] = static_cast<double>(unique[i].step);
    }
    if (!x.allFinite() || !std::isfinite(unique[i].next)) {
      throw InvalidArgument("dynamics pairs must be finite");
    }
    xs.push_back(std::move(x));
    ys[static_cast<Eigen::Index>(i)] = unique[i].next;
  }

  const gp::GpPrior init{gp::MeanFunction::zero(), kernel, options.noise_var_init};
  const gp::TrainReport report = gp::train(init, xs, ys, cfg);
  return gp::condition(report.final_prior, xs, ys);
}

std::vector<DynamicsPair> pairs_from_trajectory(const Trajectory& traj, const Drive& drive) {
  std::vector<DynamicsPair> pairs;
  pairs.reserve(traj.steps());
  for (std::size_t k = 1; k < traj.states.size(); ++k) {
    const int step = static_cast<int>(k);
    const double forcing = drive ? drive(step) : 0.0;
    pairs.push_back(DynamicsPair{traj.states[k - 1][0], traj.states[k][0] - forcing, step});
  }
  return pairs;
}

smc::FilterRun gp_particle_filter(const GpDynamicsModel& model, const std::vector<Vector>& observations,
                                  std::size_t n_particles, double resample_frac, RngStream& rng) {
  const double r = model.obs_noise_var();
  const double log_norm = -0.5 * std::log(2.0 * std::numbers::pi * r);
  const smc::BootstrapModel bootstrap{
      [&model](const Vector& x, int k) { return model.transition(x, k); },
      [&model, r, log_norm](const Vector& z, const Vector& x) {
        const double resid = z[0] - model.obs_fn()(x)[0];
        return log_norm - 0.5 * resid * resid / r;
      },
      model.initial()};
  return smc::run_filter(bootstrap, observations, n_particles, resample_frac, rng);
}

std::vector<DynamicsPair> read_pairs_csv(const std::string& path) {
  const csv::Table table = csv::read(path);
  const auto prev = table.column("prev");
  const auto next = table.column("next");
  bool has_step = false;
  for (const auto& h : table.header) {
    has_step = has_step || h == "step";
  }
  const auto steps = has_step ? table.column("step") : std::vector<double>(prev.size(), 0.0);
  std::vector<DynamicsPair> pairs;
  pairs.reserve(prev.size());
  for (std::size_t i = 0; i < prev.size(); ++i) {
    pairs.push_back(DynamicsPair{prev[i], next[i], static_cast<int>(steps[i])});
  }
  return pairs;
}

void write_pairs_csv(std::ostream& out, const std::vector<DynamicsPair>& pairs) {
  csv::write_row(out, {"prev", "next", "step"});
  for (const auto& p : pairs) {
    csv::write_row(out, {csv::number(p.prev), csv::number(p.next), std::to_string(p.step)});
  }
}

}  // namespace bayes::gp_pf
