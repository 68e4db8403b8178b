#ifndef BAYES_SSM_HPP
#define BAYES_SSM_HPP

#include <functional>
#include <iosfwd>
#include <vector>

#include "bayes/gauss.hpp"
#include "bayes/rng.hpp"

namespace bayes {

/// x_k = F·x_{k-1} + w,  z_k = H·x_k + v,  w ~ N(0, Q), v ~ N(0, R).
class LinearGaussianSSM {
 public:
  LinearGaussianSSM(Matrix F, Matrix H, Matrix Q, Matrix R, Gaussian initial);

  const Matrix& F() const { return F_; }
  const Matrix& H() const { return H_; }
  const Matrix& Q() const { return Q_; }
  const Matrix& R() const { return R_; }
  const Gaussian& initial() const { return initial_; }

  Eigen::Index state_dim() const { return F_.rows(); }
  Eigen::Index obs_dim() const { return H_.rows(); }

 private:
  Matrix F_, H_, Q_, R_;
  Gaussian initial_;
};

/// State transition map (x_{k-1}, k) -> deterministic part of x_k.
using TransitionFn = std::function<Vector(const Vector&, int)>;
/// Observation map x_k -> deterministic part of z_k.
using ObservationFn = std::function<Vector(const Vector&)>;

/// x_k = f(x_{k-1}, k) + w,  z_k = h(x_k) + v, with independent additive
/// Gaussian noise per coordinate.
class NonlinearSSM {
 public:
  NonlinearSSM(TransitionFn f, ObservationFn h, Vector process_noise_var, Vector obs_noise_var,
               Gaussian initial);

  Vector transition(const Vector& x, int k) const { return f_(x, k); }
  Vector observe(const Vector& x) const { return h_(x); }
  const TransitionFn& transition_fn() const { return f_; }
  const ObservationFn& observation_fn() const { return h_; }
  const Vector& process_noise_var() const { return process_noise_var_; }
  const Vector& obs_noise_var() const { return obs_noise_var_; }
  const Gaussian& initial() const { return initial_; }

  Eigen::Index state_dim() const { return process_noise_var_.size(); }
  Eigen::Index obs_dim() const { return obs_noise_var_.size(); }

 private:
  TransitionFn f_;
  ObservationFn h_;
  Vector process_noise_var_;
  Vector obs_noise_var_;
  Gaussian initial_;
};

/// Hidden states x_0..x_K and observations z_1..z_K.
struct Trajectory {
  std::vector<Vector> states;
  std::vector<Vector> observations;

  std::size_t steps() const { return observations.size(); }
};

/// x_0 comes from the initial Gaussian (exactly its mean when the covariance
/// is zero); zero noise covariances consume no randomness.
Trajectory simulate(const LinearGaussianSSM& model, int steps, RngStream& rng);
Trajectory simulate(const NonlinearSSM& model, int steps, RngStream& rng);

/// Columns step, state_*, obs_*; the step-0 row has empty observation cells.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

// Univariate nonlinear growth model.
double ungm_transition(double x, int k);
double ungm_observe(double x);
NonlinearSSM ungm_model(double process_var, double obs_var, Gaussian initial);

/// Second-order autoregression x_k = 2cos(2πf)·x_{k-1} − x_{k-2} in
/// companion form, observed through its first coordinate.
LinearGaussianSSM ar2_model(double frequency, double process_var, double obs_var, Gaussian initial);

struct GridSpec {
  double lower;
  double upper;
  int points;
};

struct GridStep {
  Vector predicted;  // density after the Chapman-Kolmogorov step
  Vector posterior;  // density after the Bayes update
  double mean;
  double variance;
};

struct GridFilterResult {
  Vector grid;
  double cell_width;
  std::vector<GridStep> steps;
};

/// Brute-force Bayes recursion for 1-D models on a fixed grid. Mass leaving
/// the grid is truncated and the density renormalized.
GridFilterResult grid_filter(const NonlinearSSM& model, const std::vector<Vector>& observations,
                             const GridSpec& spec);

/// 1-D linear-Gaussian model viewed as a NonlinearSSM (for the grid oracle and
/// particle filters).
NonlinearSSM as_nonlinear(const LinearGaussianSSM& model);

}  // namespace bayes

#endif  // BAYES_SSM_HPP
