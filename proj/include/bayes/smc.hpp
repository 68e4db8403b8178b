#ifndef BAYES_SMC_HPP
#define BAYES_SMC_HPP

#include <functional>
#include <iosfwd>
#include <vector>

#include "bayes/gauss.hpp"
#include "bayes/rng.hpp"
#include "bayes/ssm.hpp"

namespace bayes::smc {

/// Weighted particle approximation {x^i, w^i} of a filtering density.
class ParticleSet {
 public:
  /// Weights must be nonnegative and sum to 1 within 1e-9.
  ParticleSet(std::vector<Vector> states, Vector weights);

  /// Equal weights 1/N.
  static ParticleSet uniform(std::vector<Vector> states);

  const std::vector<Vector>& states() const { return states_; }
  const Vector& weights() const { return weights_; }
  std::size_t size() const { return states_.size(); }

  /// Σ w_i·x_i.
  Vector weighted_mean() const;

 private:
  std::vector<Vector> states_;
  Vector weights_;
};

struct McEstimate {
  double estimate;
  double std_error;
};

using ScalarFn = std::function<double(double)>;
using ScalarSampler = std::function<double(RngStream&)>;

/// Sample mean of f over n draws, with std_error = sample std / √n.
McEstimate mc_integrate(const ScalarFn& f, const ScalarSampler& sampler, std::size_t n, RngStream& rng);

/// Self-normalized importance sampling estimate of E_target[f].
double importance_estimate(const ScalarFn& f, const ScalarFn& target_density_unnorm,
                           const ScalarSampler& proposal_sampler, const ScalarFn& proposal_density,
                           std::size_t n, RngStream& rng);

/// 1 / Σ w_i².
double ess(const Vector& normalized_weights);
inline double ess(const ParticleSet& p) { return ess(p.weights()); }

/// Offspring indices for a fixed starting point u1 ∈ [0, 1/N).
std::vector<std::size_t> systematic_indices(const Vector& weights, double u1);

/// Systematic resampling; output weights are exactly 1/N.
ParticleSet systematic_resample(const ParticleSet& p, RngStream& rng);

enum class ProposalKind { Bootstrap };

/// Gaussian transition density N(mean, diag(var)) for one particle.
struct TransitionMoments {
  Vector mean;
  Vector var;
};

/// Everything the bootstrap filter needs from a model: the transition
/// density p(x_k | x_{k-1}) as per-particle Gaussian moments, the observation
/// log-likelihood log p(z_k | x_k), and the prior for x_0.
struct BootstrapModel {
  std::function<TransitionMoments(const Vector& x_prev, int k)> transition;
  std::function<double(const Vector& z, const Vector& x)> log_likelihood;
  Gaussian initial;
};

BootstrapModel bootstrap_model(const NonlinearSSM& model);

/// One SIS step: propagate through the proposal, multiply weights by the
/// likelihood in the log domain, renormalize. Throws ZeroTotalWeight when
/// every weight vanishes.
ParticleSet sis_step(const ParticleSet& p, const Vector& z, const BootstrapModel& model, int k, RngStream& rng);
ParticleSet sis_step(const ParticleSet& p, const Vector& z, const NonlinearSSM& model, ProposalKind proposal,
                     int k, RngStream& rng);

struct FilterStep {
  ParticleSet particles;  // carried to the next step (after any resampling)
  Vector mean;            // weighted mean before resampling
  double ess;             // before resampling
  bool resampled;
};

struct FilterRun {
  std::vector<FilterStep> steps;

  std::size_t resample_count() const;
  /// First coordinate of every step mean.
  std::vector<double> means() const;
};

/// Generic particle filter: SIS step, ESS, systematic resampling whenever
/// ESS < resample_frac·N.
FilterRun run_filter(const BootstrapModel& model, const std::vector<Vector>& observations, std::size_t n_particles,
                     double resample_frac, RngStream& rng);

FilterRun particle_filter(const NonlinearSSM& model, const std::vector<Vector>& observations,
                          std::size_t n_particles, double resample_frac, RngStream& rng);

/// Columns step, true_state, obs, pf_mean, ess, resampled (1-D models).
void write_pf_csv(std::ostream& out, const Trajectory& truth, const FilterRun& run);

/// Root mean square error of the first state coordinate over steps 1..K.
double rmse(const Trajectory& truth, const std::vector<double>& estimates);

}  // namespace bayes::smc

#endif  // BAYES_SMC_HPP
