#ifndef BAYES_GP_HPP
#define BAYES_GP_HPP

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "bayes/gauss.hpp"
#include "bayes/kernel.hpp"
#include "bayes/rng.hpp"

namespace bayes::gp {

/// Zero or constant prior mean m(x).
struct MeanFunction {
  enum class Kind { Zero, Constant };

  Kind kind = Kind::Zero;
  double value = 0.0;

  static MeanFunction zero() { return {}; }
  static MeanFunction constant(double c) { return {Kind::Constant, c}; }

  double operator()(const Input&) const { return kind == Kind::Constant ? value : 0.0; }
};

/// f ~ GP(m, k), observed as y = f(x) + N(0, noise_var).
///
/// The optimizer works on a flat hyperparameter vector laid out as
/// [log kernel parameters..., mean constant (Constant mean only), log noise_var
/// (only when noise_var > 0)]. The mean constant is unconstrained; all other
/// coordinates are logarithms.
class GpPrior {
 public:
  GpPrior(MeanFunction mean, KernelSpec kernel, double noise_var);

  const MeanFunction& mean() const { return mean_; }
  const KernelSpec& kernel() const { return kernel_; }
  double noise_var() const { return noise_var_; }

  std::size_t hyperparameter_count() const;
  std::vector<double> hyperparameters() const;
  GpPrior with_hyperparameters(std::span<const double> values) const;
  std::vector<std::string> hyperparameter_names() const;
  /// Whether coordinate i of the hyperparameter vector is a logarithm.
  bool is_log_space(std::size_t i) const;

 private:
  bool has_mean_param() const { return mean_.kind == MeanFunction::Kind::Constant; }
  bool has_noise_param() const { return noise_var_ > 0.0; }

  MeanFunction mean_;
  KernelSpec kernel_;
  double noise_var_;
};

enum class PredictiveVariance {
  Observation,  // variance of a new noisy y*, includes noise_var
  Latent,       // variance of f(x*) alone
};

struct Prediction {
  Vector mean;
  Vector variance;
};

/// Trained GP state: Cholesky factor of K + σ²I and the weights
/// α = (K + σ²I)⁻¹(y − m), so the predictive mean is m(x*) + Σ α_i k(x_i, x*).
class GpPosterior {
 public:
  GpPosterior(GpPrior prior, std::vector<Input> train_x, Vector train_y, CholeskyFactor chol, Vector alpha);

  const GpPrior& prior() const { return prior_; }
  const std::vector<Input>& train_x() const { return train_x_; }
  const Vector& train_y() const { return train_y_; }
  const CholeskyFactor& chol() const { return chol_; }
  const Vector& alpha() const { return alpha_; }
  /// L⁻¹(y − m). Predictive means are formed as (L⁻¹k*)ᵀ·L⁻¹(y − m), which
  /// stays accurate when α is huge on an ill-conditioned Gram.
  const Vector& whitened() const { return whitened_; }
  std::size_t size() const { return train_x_.size(); }

  /// Single-point predictive mean and variance.
  void predict_point(const Input& x, double& mean, double& variance,
                     PredictiveVariance kind = PredictiveVariance::Observation) const;

  double log_marginal_likelihood() const;

 private:
  GpPrior prior_;
  std::vector<Input> train_x_;
  Vector train_y_;
  CholeskyFactor chol_;
  Vector alpha_;
  Vector whitened_;
};

/// One joint draw of noisy outputs y at xs.
Vector prior_sample(const GpPrior& prior, const std::vector<Input>& xs, RngStream& rng);

/// Conditions the prior on (train_x, train_y). Throws NotPositiveDefinite
/// when K + σ²I is rank deficient (e.g. duplicate inputs without noise).
GpPosterior condition(const GpPrior& prior, const std::vector<Input>& train_x, const Vector& train_y);

Prediction predict(const GpPosterior& post, const std::vector<Input>& test_x,
                   PredictiveVariance kind = PredictiveVariance::Observation);

/// log N(y | m, K + σ²I).
double log_marginal_likelihood(const GpPrior& prior, const std::vector<Input>& train_x, const Vector& train_y);

/// Gradient of the log marginal likelihood in the hyperparameter layout of
/// GpPrior::hyperparameters().
Vector lml_gradients(const GpPrior& prior, const std::vector<Input>& train_x, const Vector& train_y);

/// Log marginal likelihood and its gradient from a single factorization.
struct LmlWithGradient {
  double value;
  Vector gradient;
  double jitter = 0.0;  // diagonal jitter the factorization needed
};
LmlWithGradient lml_and_gradients(const GpPrior& prior, const std::vector<Input>& train_x, const Vector& train_y);

/// Columns x_star, mean, variance, lower95, upper95 (band is mean ± 2·sd).
void write_prediction_csv(std::ostream& out, const std::vector<double>& test_x, const Prediction& pred);

struct Dataset {
  std::vector<double> x;
  std::vector<double> y;
};

/// Reads a CSV with columns x, y.
Dataset read_dataset_csv(const std::string& path);
void write_dataset_csv(std::ostream& out, const Dataset& data);

}  // namespace bayes::gp

#endif  // BAYES_GP_HPP
