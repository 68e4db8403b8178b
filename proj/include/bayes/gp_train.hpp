#ifndef BAYES_GP_TRAIN_HPP
#define BAYES_GP_TRAIN_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "bayes/gp.hpp"

namespace bayes::gp {

struct TrainConfig {
  int max_iters = 500;
  double grad_tol = 1e-4;
  double step_init = 0.1;
  int restarts = 1;
  std::uint64_t seed = 0;
  /// Which hyperparameters are optimized (layout of GpPrior::hyperparameters());
  /// empty means all of them.
  std::vector<bool> active;

  void validate(std::size_t hyperparameter_count) const;
};

struct TrainReport {
  GpPrior final_prior;
  double final_lml;
  int iterations;
  double grad_norm;
  int restart_index;
  double initial_lml;              // at the winning restart's starting point
  std::vector<double> lml_history;  // accepted iterates of the winning restart
};

/// Evidence maximization by gradient ascent in log space with a backtracking
/// line search (the step halves until the log marginal likelihood does not
/// decrease, at most 30 times, and doubles after each accepted step). Stops
/// when the active-gradient norm drops below grad_tol or after max_iters
/// accepted steps. Restart 0 starts at `init`; later restarts perturb each
/// coordinate uniformly within ±1. A restart whose start factors without
/// jitter never steps to a point that needs jitter. Returns the restart with the best final
/// value; throws AllRestartsFailed when no restart can even be evaluated.
TrainReport train(const GpPrior& init, const std::vector<Input>& train_x, const Vector& train_y,
                  const TrainConfig& cfg);

/// Plain-text block: one line per hyperparameter (name, log value, natural
/// value), then final_lml, iterations, grad_norm.
std::string format_train_report(const TrainReport& report);

}  // namespace bayes::gp

#endif  // BAYES_GP_TRAIN_HPP
