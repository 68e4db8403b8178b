#include "bayes/ssm.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "bayes/csv.hpp"
#include "bayes/error.hpp"

namespace bayes {

namespace {

void require_psd(const Matrix& a, const char* what) {
  require_finite(a, what);
  require_symmetric(a);
  const double trace = a.trace();
  if (trace < 0.0) {
    throw NotPositiveDefinite(std::string(what) + " is not positive semidefinite");
  }
  if (trace > 0.0 && Eigen::LDLT<Matrix>(a).vectorD().minCoeff() < -1e-10 * trace) {
    throw NotPositiveDefinite(std::string(what) + " is not positive semidefinite");
  }
}

// Zero-mean Gaussian noise; an all-zero covariance yields exact zeros and
// leaves the stream untouched.
class NoiseSource {
 public:
  explicit NoiseSource(const Matrix& cov) : dim_{cov.rows()} {
    if (!cov.isZero(0.0)) {
      factor_ = cholesky(cov).lower();
    }
  }

  Vector draw(RngStream& rng) const {
    if (factor_.size() == 0) {
      return Vector::Zero(dim_);
    }
    Vector z(dim_);
    for (Eigen::Index i = 0; i < dim_; ++i) {
      z[i] = rng.normal();
    }
    return factor_.triangularView<Eigen::Lower>() * z;
  }

 private:
  Eigen::Index dim_;
  Matrix factor_;
};

Vector initial_state(const Gaussian& initial, RngStream& rng) {
  return NoiseSource(initial.cov()).draw(rng) + initial.mean();
}

double gaussian_density(double x, double mean, double var) {
  const double d = x - mean;
  return std::exp(-0.5 * d * d / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

}  // namespace

LinearGaussianSSM::LinearGaussianSSM(Matrix F, Matrix H, Matrix Q, Matrix R, Gaussian initial)
    : F_{std::move(F)}, H_{std::move(H)}, Q_{std::move(Q)}, R_{std::move(R)}, initial_{std::move(initial)} {
  const Eigen::Index d = F_.rows();
  if (F_.cols() != d || d == 0) {
    throw NotSquare("F must be square and nonempty");
  }
  if (H_.cols() != d || H_.rows() == 0) {
    throw DimensionMismatch("H must have one column per state coordinate");
  }
  if (Q_.rows() != d || Q_.cols() != d) {
    throw DimensionMismatch("Q must be d x d");
  }
  if (R_.rows() != H_.rows() || R_.cols() != H_.rows()) {
    throw DimensionMismatch("R must be m x m");
  }
  if (initial_.dim() != d) {
    throw DimensionMismatch("initial Gaussian has wrong dimension");
  }
  require_finite(F_, "F");
  require_finite(H_, "H");
  require_psd(Q_, "Q");
  require_psd(R_, "R");
}

NonlinearSSM::NonlinearSSM(TransitionFn f, ObservationFn h, Vector process_noise_var, Vector obs_noise_var,
                           Gaussian initial)
    : f_{std::move(f)},
      h_{std::move(h)},
      process_noise_var_{std::move(process_noise_var)},
      obs_noise_var_{std::move(obs_noise_var)},
      initial_{std::move(initial)} {
  if (!f_ || !h_) {
    throw InvalidArgument("transition and observation maps are required");
  }
  if (process_noise_var_.size() == 0 || obs_noise_var_.size() == 0) {
    throw InvalidArgument("noise variance vectors must be nonempty");
  }
  if (!(process_noise_var_.array() > 0.0).all() || !process_noise_var_.allFinite()) {
    throw InvalidArgument("process noise variances must be finite and strictly positive");
  }
  if (!(obs_noise_var_.array() > 0.0).all() || !obs_noise_var_.allFinite()) {
    throw InvalidArgument("observation noise variances must be finite and strictly positive");
  }
  if (initial_.dim() != process_noise_var_.size()) {
    throw DimensionMismatch("initial Gaussian has wrong dimension");
  }
}

Trajectory simulate(const LinearGaussianSSM& model, int steps, RngStream& rng) {
  if (steps < 1) {
    throw InvalidArgument("simulate needs at least one step");
  }
  const NoiseSource process(model.Q());
  const NoiseSource measurement(model.R());
  Trajectory traj;
  traj.states.reserve(steps + 1);
  traj.observations.reserve(steps);
  traj.states.push_back(initial_state(model.initial(), rng));
  for (int k = 1; k <= steps; ++k) {
    Vector x = model.F() * traj.states.back() + process.draw(rng);
    traj.observations.push_back(model.H() * x + measurement.draw(rng));
    traj.states.push_back(std::move(x));
  }
  return traj;
}

Trajectory simulate(const NonlinearSSM& model, int steps, RngStream& rng) {
  if (steps < 1) {
    throw InvalidArgument("simulate needs at least one step");
  }
  const Vector process_sd = model.process_noise_var().cwiseSqrt();
  const Vector obs_sd = model.obs_noise_var().cwiseSqrt();
  Trajectory traj;
  traj.states.reserve(steps + 1);
  traj.observations.reserve(steps);
  traj.states.push_back(initial_state(model.initial(), rng));
  for (int k = 1; k <= steps; ++k) {
    Vector x = model.transition(traj.states.back(), k);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      x[i] += process_sd[i] * rng.normal();
    }
    Vector z = model.observe(x);
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      z[i] += obs_sd[i] * rng.normal();
    }
    traj.observations.push_back(std::move(z));
    traj.states.push_back(std::move(x));
  }
  return traj;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const Eigen::Index d = traj.states.empty() ? 0 : traj.states.front().size();
  const Eigen::Index m = traj.observations.empty() ? 0 : traj.observations.front().size();
  std::vector<std::string> header{"step"};
  for (Eigen::Index i = 0; i < d; ++i) {
    header.push_back("state_" + std::to_string(i));
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    header.push_back("obs_" + std::to_string(j));
  }
  csv::write_row(out, header);
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    std::vector<std::string> row{std::to_string(k)};
    for (Eigen::Index i = 0; i < d; ++i) {
      row.push_back(csv::number(traj.states[k][i]));
    }
    for (Eigen::Index j = 0; j < m; ++j) {
      row.push_back(k == 0 ? std::string{} : csv::number(traj.observations[k - 1][j]));
    }
    csv::write_row(out, row);
  }
}

double ungm_transition(double x, int k) {
  return x / 2.0 + 25.0 * x / (1.0 + x * x) + 8.0 * std::cos(1.2 * (k - 1));
}

double ungm_observe(double x) { return x * x / 20.0; }

NonlinearSSM ungm_model(double process_var, double obs_var, Gaussian initial) {
  return NonlinearSSM{
      [](const Vector& x, int k) { return Vector::Constant(1, ungm_transition(x[0], k)); },
      [](const Vector& x) { return Vector::Constant(1, ungm_observe(x[0])); },
      Vector::Constant(1, process_var), Vector::Constant(1, obs_var), std::move(initial)};
}

LinearGaussianSSM ar2_model(double frequency, double process_var, double obs_var, Gaussian initial) {
  Matrix F(2, 2);
  F << 2.0 * std::cos(2.0 * std::numbers::pi * frequency), -1.0, 1.0, 0.0;
  Matrix H(1, 2);
  H << 1.0, 0.0;
  return LinearGaussianSSM{F, H, process_var * Matrix::Identity(2, 2), Matrix::Constant(1, 1, obs_var),
                           std::move(initial)};
}

NonlinearSSM as_nonlinear(const LinearGaussianSSM& model) {
  const auto is_diagonal = [](const Matrix& a) {
    Matrix off = a;
    off.diagonal().setZero();
    return (off.array() == 0.0).all();
  };
  if (!is_diagonal(model.Q()) || !is_diagonal(model.R())) {
    throw InvalidArgument("as_nonlinear needs diagonal noise covariances");
  }
  Matrix F = model.F();
  Matrix H = model.H();
  return NonlinearSSM{[F](const Vector& x, int) -> Vector { return F * x; },
                      [H](const Vector& x) -> Vector { return H * x; }, model.Q().diagonal(),
                      model.R().diagonal(), model.initial()};
}

GridFilterResult grid_filter(const NonlinearSSM& model, const std::vector<Vector>& observations,
                             const GridSpec& spec) {
  if (model.state_dim() != 1 || model.obs_dim() != 1) {
    throw InvalidArgument("grid_filter handles 1-D models only");
  }
  if (spec.points < 2 || !(spec.upper > spec.lower)) {
    throw InvalidArgument("grid needs at least two points and upper > lower");
  }
  const Eigen::Index n = spec.points;
  GridFilterResult result;
  result.grid = Vector::LinSpaced(n, spec.lower, spec.upper);
  result.cell_width = (spec.upper - spec.lower) / static_cast<double>(n - 1);
  const double dx = result.cell_width;
  const Vector& grid = result.grid;

  const auto normalize = [dx](Vector& density, const char* stage) {
    const double mass = density.sum() * dx;
    if (!(mass >= 1e-300) || !std::isfinite(mass)) {
      throw GridUnderflow(std::string("total mass underflowed during ") + stage);
    }
    density /= mass;
  };

  // Prior at step 0. A zero-variance prior becomes a point mass in the nearest cell.
  Vector density(n);
  const double m0 = model.initial().mean()[0];
  const double v0 = model.initial().cov()(0, 0);
  if (v0 > 0.0) {
    for (Eigen::Index j = 0; j < n; ++j) {
      density[j] = gaussian_density(grid[j], m0, v0);
    }
  } else {
    density.setZero();
    const auto cell = static_cast<Eigen::Index>(std::lround((m0 - spec.lower) / dx));
    if (cell < 0 || cell >= n) {
      throw GridUnderflow("initial point mass lies outside the grid");
    }
    density[cell] = 1.0;
  }
  normalize(density, "initialization");

  const double q = model.process_noise_var()[0];
  const double r = model.obs_noise_var()[0];
  const double q_norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * q);
  Vector x_prev(1);

  result.steps.reserve(observations.size());
  for (std::size_t step = 0; step < observations.size(); ++step) {
    const int k = static_cast<int>(step) + 1;
    if (observations[step].size() != 1) {
      throw DimensionMismatch("grid_filter expects scalar observations");
    }

    GridStep out;
    out.predicted = Vector::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double mass = density[i] * dx;
      if (mass == 0.0) {
        continue;
      }
      x_prev[0] = grid[i];
      const double centre = model.transition(x_prev, k)[0];
      out.predicted.array() +=
          mass * q_norm * (-0.5 * (grid.array() - centre).square() / q).exp();
    }
    normalize(out.predicted, "prediction");

    const double z = observations[step][0];
    out.posterior.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      x_prev[0] = grid[j];
      out.posterior[j] = out.predicted[j] * gaussian_density(z, model.observe(x_prev)[0], r);
    }
    normalize(out.posterior, "update");

    out.mean = (grid.array() * out.posterior.array()).sum() * dx;
    out.variance = ((grid.array() - out.mean).square() * out.posterior.array()).sum() * dx;
    density = out.posterior;
    result.steps.push_back(std::move(out));
  }
  return result;
}

}  // namespace bayes
