#ifndef BAYES_GP_PF_HPP
#define BAYES_GP_PF_HPP

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bayes/gp.hpp"
#include "bayes/gp_train.hpp"
#include "bayes/smc.hpp"
#include "bayes/ssm.hpp"

namespace bayes::gp_pf {

/// One supervised example of the unknown 1-D transition: next ≈ f(prev, step).
struct DynamicsPair {
  double prev;
  double next;
  int step = 0;
};

/// Known time-dependent forcing u(k) added to the learned transition.
using Drive = std::function<double(int)>;

/// State-space model whose transition density is the GP predictive
/// distribution N(μ(x_{k-1}) + u(k), σ²(x_{k-1})).
class GpDynamicsModel {
 public:
  GpDynamicsModel(gp::GpPosterior transition_gp, ObservationFn obs_fn, double obs_noise_var, Gaussian initial,
                  Drive drive = {}, bool time_input = false);

  const gp::GpPosterior& transition_gp() const { return transition_gp_; }
  const ObservationFn& obs_fn() const { return obs_fn_; }
  double obs_noise_var() const { return obs_noise_var_; }
  const Gaussian& initial() const { return initial_; }
  /// Whether the GP input is (x_{k-1}, k) instead of x_{k-1}.
  bool time_input() const { return time_input_; }

  /// Predictive mean and variance of x_k given x_{k-1}.
  smc::TransitionMoments transition(const Vector& x_prev, int k) const;

 private:
  gp::GpPosterior transition_gp_;
  ObservationFn obs_fn_;
  double obs_noise_var_;
  Gaussian initial_;
  Drive drive_;
  bool time_input_;
};

struct LearnOptions {
  /// Starting noise variance of the transition GP; 0 fixes it at exactly zero.
  double noise_var_init = 0.01;
  bool time_input = false;
};

/// Trains a zero-mean GP on prev -> next pairs (duplicates removed) and
/// returns the conditioned posterior. Needs at least two distinct pairs.
gp::GpPosterior learn_dynamics(const std::vector<DynamicsPair>& pairs, const gp::KernelSpec& kernel,
                               const gp::TrainConfig& cfg, const LearnOptions& options = {});

/// (x_{k-1}, x_k − u(k), k) for every step of a 1-D trajectory.
std::vector<DynamicsPair> pairs_from_trajectory(const Trajectory& traj, const Drive& drive = {});

/// Bootstrap particle filter driven by the learned transition; weighting and
/// resampling are those of smc::run_filter.
smc::FilterRun gp_particle_filter(const GpDynamicsModel& model, const std::vector<Vector>& observations,
                                  std::size_t n_particles, double resample_frac, RngStream& rng);

/// Columns prev, next (optionally step).
std::vector<DynamicsPair> read_pairs_csv(const std::string& path);
void write_pairs_csv(std::ostream& out, const std::vector<DynamicsPair>& pairs);

}  // namespace bayes::gp_pf

#endif  // BAYES_GP_PF_HPP
