#include "bayes/smc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>

#include "bayes/csv.hpp"
#include "bayes/error.hpp"

namespace bayes::smc {

namespace {

constexpr double kWeightSumTolerance = 1e-9;

// Exponentiates log weights after subtracting their maximum, then normalizes.
Vector normalize_log_weights(const Vector& log_w) {
  const double top = log_w.maxCoeff();
  if (!std::isfinite(top)) {
    throw ZeroTotalWeight("every particle weight vanished");
  }
  Vector w = (log_w.array() - top).exp();
  const double total = w.sum();
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw ZeroTotalWeight("particle weights do not normalize");
  }
  return w / total;
}

}  // namespace

ParticleSet::ParticleSet(std::vector<Vector> states, Vector weights)
    : states_{std::move(states)}, weights_{std::move(weights)} {
  if (states_.empty()) {
    throw InvalidArgument("particle set must hold at least one particle");
  }
  if (static_cast<std::size_t>(weights_.size()) != states_.size()) {
    throw DimensionMismatch("one weight per particle is required");
  }
  if (!weights_.allFinite() || (weights_.array() < 0.0).any()) {
    throw InvalidArgument("weights must be finite and nonnegative");
  }
  if (std::abs(weights_.sum() - 1.0) > kWeightSumTolerance) {
    throw InvalidArgument("weights must sum to 1");
  }
  const Eigen::Index d = states_.front().size();
  for (const auto& x : states_) {
    if (x.size() != d || !x.allFinite()) {
      throw InvalidArgument("particle states must share a dimension and be finite");
    }
  }
}

ParticleSet ParticleSet::uniform(std::vector<Vector> states) {
  const auto n = static_cast<Eigen::Index>(states.size());
  return ParticleSet{std::move(states), Vector::Constant(n, 1.0 / static_cast<double>(std::max<Eigen::Index>(n, 1)))};
}

Vector ParticleSet::weighted_mean() const {
  Vector mean = Vector::Zero(states_.front().size());
  for (std::size_t i = 0; i < states_.size(); ++i) {
    mean += weights_[static_cast<Eigen::Index>(i)] * states_[i];
  }
  return mean;
}

McEstimate mc_integrate(const ScalarFn& f, const ScalarSampler& sampler, std::size_t n, RngStream& rng) {
  if (n < 2) {
    throw InvalidArgument("mc_integrate needs n >= 2");
  }
  // Welford accumulation.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = f(sampler(rng));
    const double delta = v - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (v - mean);
  }
  const double variance = m2 / static_cast<double>(n - 1);
  return McEstimate{mean, std::sqrt(variance / static_cast<double>(n))};
}

double importance_estimate(const ScalarFn& f, const ScalarFn& target_density_unnorm,
                           const ScalarSampler& proposal_sampler, const ScalarFn& proposal_density,
                           std::size_t n, RngStream& rng) {
  if (n < 1) {
    throw InvalidArgument("importance_estimate needs n >= 1");
  }
  double weighted_sum = 0.0;
  double total_weight = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = proposal_sampler(rng);
    const double q = proposal_density(x);
    if (!(q > 0.0)) {
      throw InvalidArgument("proposal density vanished at one of its own samples");
    }
    const double w = target_density_unnorm(x) / q;
    weighted_sum += w * f(x);
    total_weight += w;
  }
  if (!(total_weight > 0.0)) {
    throw ZeroTotalWeight("all importance weights are zero");
  }
  return weighted_sum / total_weight;
}

double ess(const Vector& normalized_weights) {
  // Extended-precision accumulation keeps the uniform case at N to ~1e-12.
  long double sum_sq = 0.0L;
  for (const double w : normalized_weights) {
    sum_sq += static_cast<long double>(w) * w;
  }
  return static_cast<double>(1.0L / sum_sq);
}

std::vector<std::size_t> systematic_indices(const Vector& weights, double u1) {
  const auto n = static_cast<std::size_t>(weights.size());
  if (n == 0) {
    throw InvalidArgument("cannot resample an empty weight vector");
  }
  Vector cumulative(weights.size());
  std::partial_sum(weights.begin(), weights.end(), cumulative.begin());
  cumulative /= cumulative[cumulative.size() - 1];

  std::vector<std::size_t> indices(n);
  const double stride = 1.0 / static_cast<double>(n);
  std::size_t i = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double u = u1 + stride * static_cast<double>(j);
    while (u > cumulative[static_cast<Eigen::Index>(i)] && i + 1 < n) {
      ++i;
    }
    indices[j] = i;
  }
  return indices;
}

ParticleSet systematic_resample(const ParticleSet& p, RngStream& rng) {
  const double n = static_cast<double>(p.size());
  const auto indices = systematic_indices(p.weights(), rng.uniform(0.0, 1.0 / n));
  std::vector<Vector> states;
  states.reserve(indices.size());
  for (const std::size_t idx : indices) {
    states.push_back(p.states()[idx]);
  }
  return ParticleSet::uniform(std::move(states));
}

BootstrapModel bootstrap_model(const NonlinearSSM& model) {
  const Vector obs_var = model.obs_noise_var();
  const double log_norm = -0.5 * (2.0 * std::numbers::pi * obs_var.array()).log().sum();
  return BootstrapModel{
      [model](const Vector& x, int k) {
        return TransitionMoments{model.transition(x, k), model.process_noise_var()};
      },
      [model, obs_var, log_norm](const Vector& z, const Vector& x) {
        const Vector r = z - model.observe(x);
        return log_norm - 0.5 * (r.array().square() / obs_var.array()).sum();
      },
      model.initial()};
}

ParticleSet sis_step(const ParticleSet& p, const Vector& z, const BootstrapModel& model, int k, RngStream& rng) {
  const std::size_t n = p.size();
  std::vector<Vector> next;
  next.reserve(n);
  Vector log_w(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    TransitionMoments moments = model.transition(p.states()[i], k);
    Vector x = std::move(moments.mean);
    for (Eigen::Index c = 0; c < x.size(); ++c) {
      x[c] = x[c] + std::sqrt(moments.var[c]) * rng.normal();
    }
    const double prev = p.weights()[static_cast<Eigen::Index>(i)];
    double lw = prev > 0.0 ? std::log(prev) + model.log_likelihood(z, x) : -std::numeric_limits<double>::infinity();
    if (std::isnan(lw)) {
      lw = -std::numeric_limits<double>::infinity();
    }
    log_w[static_cast<Eigen::Index>(i)] = lw;
    next.push_back(std::move(x));
  }
  for (const auto& x : next) {
    if (!x.allFinite()) {
      throw ZeroTotalWeight("propagated particle is not finite");
    }
  }
  return ParticleSet{std::move(next), normalize_log_weights(log_w)};
}

ParticleSet sis_step(const ParticleSet& p, const Vector& z, const NonlinearSSM& model, ProposalKind proposal,
                     int k, RngStream& rng) {
  switch (proposal) {
    case ProposalKind::Bootstrap:
      return sis_step(p, z, bootstrap_model(model), k, rng);
  }
  throw InvalidArgument("unknown proposal kind");
}

std::size_t FilterRun::resample_count() const {
  return static_cast<std::size_t>(std::count_if(steps.begin(), steps.end(), [](const auto& s) { return s.resampled; }));
}

std::vector<double> FilterRun::means() const {
  std::vector<double> out;
  out.reserve(steps.size());
  for (const auto& s : steps) {
    out.push_back(s.mean[0]);
  }
  return out;
}

FilterRun run_filter(const BootstrapModel& model, const std::vector<Vector>& observations, std::size_t n_particles,
                     double resample_frac, RngStream& rng) {
  if (n_particles < 2) {
    throw InvalidArgument("particle filter needs at least two particles");
  }
  if (!(resample_frac >= 0.0 && resample_frac <= 1.0)) {
    throw InvalidArgument("resample_frac must lie in [0, 1]");
  }
  const double threshold = resample_frac * static_cast<double>(n_particles);
  ParticleSet particles = ParticleSet::uniform(mvn_sample(model.initial, rng, n_particles));

  FilterRun run;
  run.steps.reserve(observations.size());
  for (std::size_t t = 0; t < observations.size(); ++t) {
    particles = sis_step(particles, observations[t], model, static_cast<int>(t) + 1, rng);
    Vector mean = particles.weighted_mean();
    const double n_eff = ess(particles);
    const bool resample = n_eff < threshold;
    if (resample) {
      particles = systematic_resample(particles, rng);
    }
    run.steps.push_back(FilterStep{particles, std::move(mean), n_eff, resample});
  }
  return run;
}

FilterRun particle_filter(const NonlinearSSM& model, const std::vector<Vector>& observations,
                          std::size_t n_particles, double resample_frac, RngStream& rng) {
  return run_filter(bootstrap_model(model), observations, n_particles, resample_frac, rng);
}

void write_pf_csv(std::ostream& out, const Trajectory& truth, const FilterRun& run) {
  if (truth.observations.size() != run.steps.size()) {
    throw DimensionMismatch("write_pf_csv: trajectory and filter lengths differ");
  }
  csv::write_row(out, {"step", "true_state", "obs", "pf_mean", "ess", "resampled"});
  for (std::size_t k = 0; k < run.steps.size(); ++k) {
    const auto& s = run.steps[k];
    csv::write_row(out, {std::to_string(k + 1), csv::number(truth.states[k + 1][0]),
                         csv::number(truth.observations[k][0]), csv::number(s.mean[0]), csv::number(s.ess),
                         s.resampled ? "1" : "0"});
  }
}

double rmse(const Trajectory& truth, const std::vector<double>& estimates) {
  if (estimates.size() != truth.observations.size() || estimates.empty()) {
    throw DimensionMismatch("rmse: one estimate per observed step is required");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < estimates.size(); ++k) {
    const double e = estimates[k] - truth.states[k + 1][0];
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(estimates.size()));
}

}  // namespace bayes::smc
