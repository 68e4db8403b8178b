#ifndef BAYES_KALMAN_HPP
#define BAYES_KALMAN_HPP

#include <iosfwd>
#include <vector>

#include "bayes/gauss.hpp"
#include "bayes/ssm.hpp"

namespace bayes::kalman {

struct KalmanState {
  Gaussian prior;      // m_{k|k-1}, P_{k|k-1}
  Gaussian posterior;  // m_{k|k},   P_{k|k}
  Matrix gain;
  Vector innovation;   // z_k - H·m_{k|k-1}
  int step;
};

struct UpdateResult {
  Gaussian posterior;
  Matrix gain;
  Vector innovation;
};

/// m' = F·m,  P' = Q + F·P·Fᵀ.
Gaussian predict(const Gaussian& posterior, const LinearGaussianSSM& model);

/// Measurement update. The gain solves against the Cholesky factor of the
/// innovation covariance S = H·P·Hᵀ + R; the covariance uses the Joseph form
/// (I−KH)·P·(I−KH)ᵀ + K·R·Kᵀ. Throws SingularInnovation when S cannot be
/// factored.
UpdateResult update(const Gaussian& prior, const Vector& z, const LinearGaussianSSM& model);

/// Alternates predict/update from model.initial(), one state per observation.
std::vector<KalmanState> filter_sequence(const LinearGaussianSSM& model, const std::vector<Vector>& observations);

/// Columns step, true_state_*, obs_*, post_mean_*, post_var_ii.
void write_filter_csv(std::ostream& out, const Trajectory& truth, const std::vector<KalmanState>& states);

}  // namespace bayes::kalman

#endif  // BAYES_KALMAN_HPP
