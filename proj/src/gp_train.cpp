#include "bayes/gp_train.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "bayes/csv.hpp"
#include "bayes/error.hpp"

namespace bayes::gp {

namespace {

constexpr int kMaxHalvings = 30;
constexpr double kMaxStep = 1e6;

struct Evaluation {
  double lml;
  Vector grad;  // inactive coordinates zeroed
  double jitter;
};

class Objective {
 public:
  Objective(const GpPrior& layout, const std::vector<Input>& xs, const Vector& ys, const std::vector<bool>& active)
      : layout_{layout}, xs_{xs}, ys_{ys}, active_{active} {}

  std::optional<Evaluation> operator()(const std::vector<double>& theta) const {
    try {
      const GpPrior prior = layout_.with_hyperparameters(theta);
      LmlWithGradient r = lml_and_gradients(prior, xs_, ys_);
      if (!std::isfinite(r.value) || !r.gradient.allFinite()) {
        return std::nullopt;
      }
      for (Eigen::Index i = 0; i < r.gradient.size(); ++i) {
        if (!active_[static_cast<std::size_t>(i)]) {
          r.gradient[i] = 0.0;
        }
      }
      return Evaluation{r.value, std::move(r.gradient), r.jitter};
    } catch (const NumericalError&) {
      return std::nullopt;
    }
  }

 private:
  const GpPrior& layout_;
  const std::vector<Input>& xs_;
  const Vector& ys_;
  const std::vector<bool>& active_;
};

struct RestartResult {
  std::vector<double> theta;
  double lml;
  double initial_lml;
  double grad_norm;
  int iterations;
  std::vector<double> history;
};

std::optional<RestartResult> ascend(const Objective& objective, std::vector<double> theta, const TrainConfig& cfg) {
  std::optional<Evaluation> current = objective(theta);
  if (!current) {
    return std::nullopt;
  }
  RestartResult out{theta, current->lml, current->lml, current->grad.norm(), 0, {current->lml}};
  const bool clean_start = current->jitter == 0.0;
  double step = cfg.step_init;
  while (out.iterations < cfg.max_iters && out.grad_norm >= cfg.grad_tol) {
    bool accepted = false;
    for (int h = 0; h <= kMaxHalvings; ++h, step *= 0.5) {
      std::vector<double> candidate = out.theta;
      for (std::size_t i = 0; i < candidate.size(); ++i) {
        candidate[i] += step * current->grad[static_cast<Eigen::Index>(i)];
      }
      std::optional<Evaluation> next = objective(candidate);
      // A jittered factorization scores a perturbed model, so once the start
      // factors cleanly such candidates are not comparable and get rejected.
      const bool comparable = next && (!clean_start || next->jitter == 0.0);
      if (comparable && next->lml >= out.lml) {
        out.theta = std::move(candidate);
        out.lml = next->lml;
        out.grad_norm = next->grad.norm();
        out.history.push_back(out.lml);
        current = std::move(next);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      break;
    }
    ++out.iterations;
    step = std::min(2.0 * step, kMaxStep);
  }
  return out;
}

}  // namespace

void TrainConfig::validate(std::size_t hyperparameter_count) const {
  if (max_iters < 1) throw InvalidArgument("max_iters must be >= 1");
  if (!(grad_tol > 0.0)) throw InvalidArgument("grad_tol must be > 0");
  if (!(step_init > 0.0)) throw InvalidArgument("step_init must be > 0");
  if (restarts < 1) throw InvalidArgument("restarts must be >= 1");
  if (!active.empty() && active.size() != hyperparameter_count) {
    throw DimensionMismatch("active mask must cover every hyperparameter");
  }
}

TrainReport train(const GpPrior& init, const std::vector<Input>& train_x, const Vector& train_y,
                  const TrainConfig& cfg) {
  const std::size_t dim = init.hyperparameter_count();
  cfg.validate(dim);
  const std::vector<bool> active = cfg.active.empty() ? std::vector<bool>(dim, true) : cfg.active;
  const Objective objective(init, train_x, train_y, active);
  const std::vector<double> start = init.hyperparameters();

  std::optional<RestartResult> best;
  int best_index = -1;
  RngStream seeds{cfg.seed};
  for (int r = 0; r < cfg.restarts; ++r) {
    std::vector<double> theta = start;
    if (r > 0) {
      RngStream rng = seeds.derive(static_cast<std::uint64_t>(r));
      for (std::size_t i = 0; i < dim; ++i) {
        if (active[i]) {
          theta[i] += rng.uniform(-1.0, 1.0);
        }
      }
    }
    std::optional<RestartResult> result = ascend(objective, std::move(theta), cfg);
    if (result && (!best || result->lml > best->lml)) {
      best = std::move(result);
      best_index = r;
    }
  }
  if (!best) {
    throw AllRestartsFailed("every restart failed to factor the covariance at its starting point");
  }
  return TrainReport{init.with_hyperparameters(best->theta),
                     best->lml,
                     best->iterations,
                     best->grad_norm,
                     best_index,
                     best->initial_lml,
                     std::move(best->history)};
}

std::string format_train_report(const TrainReport& report) {
  std::ostringstream out;
  const auto names = report.final_prior.hyperparameter_names();
  const auto values = report.final_prior.hyperparameters();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (report.final_prior.is_log_space(i)) {
      out << names[i] << " log=" << csv::number(values[i]) << " value=" << csv::number(std::exp(values[i])) << '\n';
    } else {
      out << names[i] << " log=none value=" << csv::number(values[i]) << '\n';
    }
  }
  out << "final_lml=" << csv::number(report.final_lml) << '\n';
  out << "iterations=" << report.iterations << '\n';
  out << "grad_norm=" << csv::number(report.grad_norm) << '\n';
  return out.str();
}

}  // namespace bayes::gp
