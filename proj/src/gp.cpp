#include "bayes/gp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "bayes/csv.hpp"
#include "bayes/error.hpp"

namespace bayes::gp {

namespace {

Vector prior_means(const MeanFunction& mean, const std::vector<Input>& xs) {
  Vector m(static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    m[static_cast<Eigen::Index>(i)] = mean(xs[i]);
  }
  return m;
}

void require_training_set(const std::vector<Input>& xs, const Vector& ys) {
  if (xs.empty()) {
    throw InvalidArgument("training set must be nonempty");
  }
  if (static_cast<Eigen::Index>(xs.size()) != ys.size()) {
    throw DimensionMismatch("train_x and train_y differ in length");
  }
  const Eigen::Index d = xs.front().size();
  for (const auto& x : xs) {
    if (x.size() != d || !x.allFinite()) {
      throw InvalidArgument("training inputs must be finite and share a dimension");
    }
  }
  if (!ys.allFinite()) {
    throw InvalidArgument("training outputs must be finite");
  }
}

// Two identical rows make K + σ²I exactly singular; the jitter policy would
// otherwise hide it.
void reject_identical_rows(const Matrix& ky, const std::vector<Input>& xs) {
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = i + 1; j < xs.size(); ++j) {
      if (xs[i] == xs[j] && ky.row(static_cast<Eigen::Index>(i)) == ky.row(static_cast<Eigen::Index>(j))) {
        throw NotPositiveDefinite("rank-deficient covariance: inputs " + std::to_string(i) + " and " +
                                  std::to_string(j) + " coincide and the model has no noise");
      }
    }
  }
}

}  // namespace

GpPrior::GpPrior(MeanFunction mean, KernelSpec kernel, double noise_var)
    : mean_{mean}, kernel_{std::move(kernel)}, noise_var_{noise_var} {
  if (!(noise_var_ >= 0.0) || !std::isfinite(noise_var_)) {
    throw InvalidArgument("noise variance must be finite and nonnegative");
  }
  if (!std::isfinite(mean_.value)) {
    throw InvalidArgument("mean constant must be finite");
  }
}

std::size_t GpPrior::hyperparameter_count() const {
  return kernel_.param_count() + (has_mean_param() ? 1 : 0) + (has_noise_param() ? 1 : 0);
}

std::vector<double> GpPrior::hyperparameters() const {
  std::vector<double> out = kernel_.log_params();
  if (has_mean_param()) {
    out.push_back(mean_.value);
  }
  if (has_noise_param()) {
    out.push_back(std::log(noise_var_));
  }
  return out;
}

GpPrior GpPrior::with_hyperparameters(std::span<const double> values) const {
  if (values.size() != hyperparameter_count()) {
    throw DimensionMismatch("wrong number of hyperparameters");
  }
  const std::size_t nk = kernel_.param_count();
  KernelSpec kernel = kernel_.with_log_params(values.first(nk));
  std::size_t next = nk;
  MeanFunction mean = mean_;
  if (has_mean_param()) {
    mean.value = values[next++];
  }
  double noise = noise_var_;
  if (has_noise_param()) {
    noise = std::exp(values[next]);
    if (!(noise > 0.0) || !std::isfinite(noise)) {
      throw NotPositiveDefinite("noise variance left the representable range");
    }
  }
  return GpPrior{mean, std::move(kernel), noise};
}

std::vector<std::string> GpPrior::hyperparameter_names() const {
  std::vector<std::string> names = kernel_.param_names();
  if (has_mean_param()) {
    names.emplace_back("mean.constant");
  }
  if (has_noise_param()) {
    names.emplace_back("noise_var");
  }
  return names;
}

bool GpPrior::is_log_space(std::size_t i) const {
  return !(has_mean_param() && i == kernel_.param_count());
}

GpPosterior::GpPosterior(GpPrior prior, std::vector<Input> train_x, Vector train_y, CholeskyFactor chol,
                         Vector alpha)
    : prior_{std::move(prior)},
      train_x_{std::move(train_x)},
      train_y_{std::move(train_y)},
      chol_{std::move(chol)},
      alpha_{std::move(alpha)},
      whitened_{chol_.solve_lower(Vector(train_y_ - prior_means(prior_.mean(), train_x_)))} {}

void GpPosterior::predict_point(const Input& x, double& mean, double& variance, PredictiveVariance kind) const {
  const auto n = static_cast<Eigen::Index>(train_x_.size());
  const KernelSpec& k = prior_.kernel();
  Vector kstar(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    kstar[i] = k(train_x_[static_cast<std::size_t>(i)], x, false);
  }
  const Vector v = chol_.solve_lower(kstar);
  mean = prior_.mean()(x) + v.dot(whitened_);
  const double reduction = v.squaredNorm();
  double prior_var = k(x, x, true);
  if (kind == PredictiveVariance::Observation) {
    prior_var += prior_.noise_var();
  }
  variance = std::max(prior_var - reduction, 0.0);
}

double GpPosterior::log_marginal_likelihood() const {
  const double n = static_cast<double>(train_x_.size());
  return -0.5 * whitened_.squaredNorm() - 0.5 * chol_.log_det() - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

Vector prior_sample(const GpPrior& prior, const std::vector<Input>& xs, RngStream& rng) {
  Matrix cov = gram(prior.kernel(), xs);
  cov.diagonal().array() += prior.noise_var();
  const Gaussian g{prior_means(prior.mean(), xs), cov};
  return mvn_sample(g, rng, 1).front();
}

GpPosterior condition(const GpPrior& prior, const std::vector<Input>& train_x, const Vector& train_y) {
  require_training_set(train_x, train_y);
  Matrix ky = gram(prior.kernel(), train_x);
  ky.diagonal().array() += prior.noise_var();
  reject_identical_rows(ky, train_x);
  CholeskyFactor chol = cholesky(ky);
  Vector alpha = chol_solve(chol, Vector(train_y - prior_means(prior.mean(), train_x)));
  return GpPosterior{prior, train_x, train_y, std::move(chol), std::move(alpha)};
}

Prediction predict(const GpPosterior& post, const std::vector<Input>& test_x, PredictiveVariance kind) {
  const KernelSpec& k = post.prior().kernel();
  const Matrix kstar = cross_gram(k, post.train_x(), test_x);
  const Matrix v = post.chol().solve_lower(kstar);
  Prediction out;
  out.mean = v.transpose() * post.whitened();
  out.variance = -v.colwise().squaredNorm().transpose();
  for (std::size_t j = 0; j < test_x.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    out.mean[jj] += post.prior().mean()(test_x[j]);
    double prior_var = k(test_x[j], test_x[j], true);
    if (kind == PredictiveVariance::Observation) {
      prior_var += post.prior().noise_var();
    }
    out.variance[jj] = std::max(out.variance[jj] + prior_var, 0.0);
  }
  return out;
}

double log_marginal_likelihood(const GpPrior& prior, const std::vector<Input>& train_x, const Vector& train_y) {
  return condition(prior, train_x, train_y).log_marginal_likelihood();
}

LmlWithGradient lml_and_gradients(const GpPrior& prior, const std::vector<Input>& train_x, const Vector& train_y) {
  const GpPosterior post = condition(prior, train_x, train_y);
  const auto n = static_cast<Eigen::Index>(train_x.size());
  const Vector& alpha = post.alpha();
  // W = α·αᵀ − (K + σ²I)⁻¹; every kernel derivative enters as ½·tr(W·∂K).
  const Matrix w = alpha * alpha.transpose() - chol_solve(post.chol(), Matrix(Matrix::Identity(n, n)));

  const KernelSpec& kernel = prior.kernel();
  const std::size_t nk = kernel.param_count();
  Vector grad = Vector::Zero(static_cast<Eigen::Index>(prior.hyperparameter_count()));
  std::vector<double> dk(nk);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      kernel.gradient(train_x[static_cast<std::size_t>(i)], train_x[static_cast<std::size_t>(j)], i == j, dk);
      const double weight = i == j ? 0.5 * w(i, i) : w(i, j);
      for (std::size_t p = 0; p < nk; ++p) {
        grad[static_cast<Eigen::Index>(p)] += weight * dk[p];
      }
    }
  }
  Eigen::Index next = static_cast<Eigen::Index>(nk);
  if (prior.mean().kind == MeanFunction::Kind::Constant) {
    grad[next++] = alpha.sum();
  }
  if (prior.noise_var() > 0.0) {
    grad[next] = 0.5 * prior.noise_var() * w.trace();
  }
  return LmlWithGradient{post.log_marginal_likelihood(), std::move(grad), post.chol().jitter()};
}

Vector lml_gradients(const GpPrior& prior, const std::vector<Input>& train_x, const Vector& train_y) {
  return lml_and_gradients(prior, train_x, train_y).gradient;
}

void write_prediction_csv(std::ostream& out, const std::vector<double>& test_x, const Prediction& pred) {
  if (static_cast<Eigen::Index>(test_x.size()) != pred.mean.size()) {
    throw DimensionMismatch("write_prediction_csv: lengths differ");
  }
  csv::write_row(out, {"x_star", "mean", "variance", "lower95", "upper95"});
  for (std::size_t i = 0; i < test_x.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double sd = std::sqrt(pred.variance[ii]);
    csv::write_row(out, {csv::number(test_x[i]), csv::number(pred.mean[ii]), csv::number(pred.variance[ii]),
                         csv::number(pred.mean[ii] - 2.0 * sd), csv::number(pred.mean[ii] + 2.0 * sd)});
  }
}

Dataset read_dataset_csv(const std::string& path) {
  const csv::Table table = csv::read(path);
  Dataset data{table.column("x"), table.column("y")};
  if (data.x.empty()) {
    throw IoError(path + ": dataset has no rows");
  }
  return data;
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  csv::write_row(out, {"x", "y"});
  for (std::size_t i = 0; i < data.x.size(); ++i) {
    csv::write_row(out, {csv::number(data.x[i]), csv::number(data.y[i])});
  }
}

}  // namespace bayes::gp
