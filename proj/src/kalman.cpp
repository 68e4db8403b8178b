#include "bayes/kalman.hpp"

#include <ostream>

#include "bayes/csv.hpp"
#include "bayes/error.hpp"

namespace bayes::kalman {

Gaussian predict(const Gaussian& posterior, const LinearGaussianSSM& model) {
  if (posterior.dim() != model.state_dim()) {
    throw DimensionMismatch("predict: state dimension differs from model");
  }
  const Matrix& F = model.F();
  return Gaussian{F * posterior.mean(), symmetrize(model.Q() + F * posterior.cov() * F.transpose())};
}

UpdateResult update(const Gaussian& prior, const Vector& z, const LinearGaussianSSM& model) {
  if (prior.dim() != model.state_dim()) {
    throw DimensionMismatch("update: state dimension differs from model");
  }
  if (z.size() != model.obs_dim()) {
    throw DimensionMismatch("update: observation dimension differs from model");
  }
  const Matrix& H = model.H();
  const Matrix& P = prior.cov();
  const Matrix PHt = P * H.transpose();
  const Matrix S = symmetrize(H * PHt + model.R());

  CholeskyFactor s_factor = [&] {
    try {
      return cholesky(S);
    } catch (const NotPositiveDefinite& e) {
      throw SingularInnovation(std::string("innovation covariance: ") + e.what());
    }
  }();
  // K = P·Hᵀ·S⁻¹  <=>  S·Kᵀ = H·P
  const Matrix gain = chol_solve(s_factor, Matrix(PHt.transpose())).transpose();

  Vector innovation = z - H * prior.mean();
  Vector mean = prior.mean() + gain * innovation;

  const Matrix I_KH = Matrix::Identity(P.rows(), P.cols()) - gain * H;
  Matrix cov = symmetrize(I_KH * P * I_KH.transpose() + gain * model.R() * gain.transpose());
  return UpdateResult{Gaussian{std::move(mean), std::move(cov)}, gain, std::move(innovation)};
}

std::vector<KalmanState> filter_sequence(const LinearGaussianSSM& model, const std::vector<Vector>& observations) {
  if (observations.empty()) {
    throw InvalidArgument("filter_sequence needs at least one observation");
  }
  std::vector<KalmanState> states;
  states.reserve(observations.size());
  Gaussian current = model.initial();
  for (std::size_t k = 0; k < observations.size(); ++k) {
    Gaussian prior = predict(current, model);
    UpdateResult upd = update(prior, observations[k], model);
    current = upd.posterior;
    states.push_back(KalmanState{std::move(prior), std::move(upd.posterior), std::move(upd.gain),
                                 std::move(upd.innovation), static_cast<int>(k) + 1});
  }
  return states;
}

void write_filter_csv(std::ostream& out, const Trajectory& truth, const std::vector<KalmanState>& states) {
  if (truth.observations.size() != states.size()) {
    throw DimensionMismatch("write_filter_csv: trajectory and filter lengths differ");
  }
  if (states.empty()) {
    return;
  }
  const Eigen::Index d = states.front().posterior.dim();
  const Eigen::Index m = truth.observations.front().size();
  std::vector<std::string> header{"step"};
  for (Eigen::Index i = 0; i < d; ++i) header.push_back("true_state_" + std::to_string(i));
  for (Eigen::Index j = 0; j < m; ++j) header.push_back("obs_" + std::to_string(j));
  for (Eigen::Index i = 0; i < d; ++i) header.push_back("post_mean_" + std::to_string(i));
  for (Eigen::Index i = 0; i < d; ++i) header.push_back("post_var_" + std::to_string(i) + std::to_string(i));
  csv::write_row(out, header);

  for (std::size_t k = 0; k < states.size(); ++k) {
    const auto& s = states[k];
    std::vector<std::string> row{std::to_string(s.step)};
    for (Eigen::Index i = 0; i < d; ++i) row.push_back(csv::number(truth.states[k + 1][i]));
    for (Eigen::Index j = 0; j < m; ++j) row.push_back(csv::number(truth.observations[k][j]));
    for (Eigen::Index i = 0; i < d; ++i) row.push_back(csv::number(s.posterior.mean()[i]));
    for (Eigen::Index i = 0; i < d; ++i) row.push_back(csv::number(s.posterior.cov()(i, i)));
    csv::write_row(out, row);
  }
}

}  // namespace bayes::kalman
