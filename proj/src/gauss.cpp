#include "bayes/gauss.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "bayes/error.hpp"

namespace bayes {

namespace {

constexpr int kMaxJitterRetries = 3;
constexpr double kInitialJitter = 1e-12;
constexpr double kPsdTolerance = 1e-10;

// Plain column-by-column factorization of a + jitter·I. Returns false on the
// first nonpositive or non-finite pivot.
bool try_factor(const Matrix& a, double jitter, Matrix& lower) {
  const Eigen::Index n = a.rows();
  lower.setZero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double pivot = a(j, j) + jitter - lower.row(j).head(j).squaredNorm();
    if (!(pivot > 0.0) || !std::isfinite(pivot)) {
      return false;
    }
    const double d = std::sqrt(pivot);
    lower(j, j) = d;
    const Eigen::Index rest = n - j - 1;
    if (rest > 0) {
      lower.col(j).tail(rest) =
          (a.col(j).tail(rest) - lower.block(j + 1, 0, rest, j) * lower.row(j).head(j).transpose()) / d;
    }
  }
  return true;
}

}  // namespace

void require_finite(const Matrix& a, const char* what) {
  if (!a.allFinite()) {
    throw InvalidArgument(std::string(what) + " has non-finite entries");
  }
}

void require_symmetric(const Matrix& a, double rel_tol) {
  if (a.rows() != a.cols()) {
    throw NotSquare("matrix is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
  if (a.size() == 0) {
    return;
  }
  const double scale = a.cwiseAbs().maxCoeff();
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > rel_tol * scale) {
    throw NotSymmetric("asymmetry " + std::to_string(asym) + " exceeds tolerance");
  }
}

Matrix symmetrize(const Matrix& a) { return 0.5 * (a + a.transpose()); }

Gaussian::Gaussian(Vector mean, Matrix cov) : mean_{std::move(mean)}, cov_{std::move(cov)} {
  if (mean_.size() == 0) {
    throw InvalidArgument("Gaussian must have dimension >= 1");
  }
  if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size()) {
    throw DimensionMismatch("covariance shape does not match mean dimension");
  }
  require_finite(mean_, "mean");
  require_finite(cov_, "covariance");
  require_symmetric(cov_);
  const double trace = cov_.trace();
  if (trace < 0.0) {
    throw NotPositiveDefinite("covariance has negative trace");
  }
  if (trace > 0.0) {
    const Eigen::LDLT<Matrix> ldlt(cov_);
    if (ldlt.vectorD().minCoeff() < -kPsdTolerance * trace) {
      throw NotPositiveDefinite("covariance is not positive semidefinite");
    }
  }
}

Gaussian Gaussian::scalar(double mean, double variance) {
  return Gaussian{Vector::Constant(1, mean), Matrix::Constant(1, 1, variance)};
}

double CholeskyFactor::log_det() const { return 2.0 * lower_.diagonal().array().log().sum(); }

Matrix CholeskyFactor::reconstruct() const { return lower_ * lower_.transpose(); }

Vector CholeskyFactor::solve_lower(const Vector& b) const {
  if (b.size() != dim()) {
    throw DimensionMismatch("right-hand side has wrong length");
  }
  return lower_.triangularView<Eigen::Lower>().solve(b);
}

Matrix CholeskyFactor::solve_lower(const Matrix& b) const {
  if (b.rows() != dim()) {
    throw DimensionMismatch("right-hand side has wrong row count");
  }
  return lower_.triangularView<Eigen::Lower>().solve(b);
}

CholeskyFactor cholesky(const Matrix& a) {
  require_symmetric(a);
  require_finite(a, "matrix");
  const Eigen::Index n = a.rows();
  if (n == 0) {
    throw InvalidArgument("cannot factor an empty matrix");
  }
  Matrix lower;
  if (try_factor(a, 0.0, lower)) {
    return CholeskyFactor{std::move(lower), 0.0};
  }
  const double mean_diag = a.diagonal().mean();
  double jitter = kInitialJitter * (mean_diag > 0.0 ? mean_diag : 1.0);
  for (int retry = 0; retry < kMaxJitterRetries; ++retry, jitter *= 10.0) {
    if (try_factor(a, jitter, lower)) {
      return CholeskyFactor{std::move(lower), jitter};
    }
  }
  throw NotPositiveDefinite("Cholesky failed after " + std::to_string(kMaxJitterRetries) + " jitter retries");
}

Vector chol_solve(const CholeskyFactor& factor, const Vector& b) {
  if (b.size() != factor.dim()) {
    throw DimensionMismatch("chol_solve: right-hand side has wrong length");
  }
  const auto lower = factor.lower().triangularView<Eigen::Lower>();
  return lower.transpose().solve(lower.solve(b));
}

Matrix chol_solve(const CholeskyFactor& factor, const Matrix& b) {
  if (b.rows() != factor.dim()) {
    throw DimensionMismatch("chol_solve: right-hand side has wrong row count");
  }
  const auto lower = factor.lower().triangularView<Eigen::Lower>();
  return lower.transpose().solve(lower.solve(b));
}

std::vector<Vector> mvn_sample(const Gaussian& g, RngStream& rng, std::size_t n) {
  if (n == 0) {
    throw InvalidArgument("mvn_sample needs n >= 1");
  }
  const CholeskyFactor factor = cholesky(g.cov());
  std::vector<Vector> draws;
  draws.reserve(n);
  Vector z(g.dim());
  for (std::size_t s = 0; s < n; ++s) {
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      z[i] = rng.normal();
    }
    draws.emplace_back(g.mean() + factor.lower().triangularView<Eigen::Lower>() * z);
  }
  return draws;
}

double mvn_logpdf(const Vector& mean, const CholeskyFactor& cov_factor, const Vector& x) {
  if (x.size() != mean.size() || mean.size() != cov_factor.dim()) {
    throw DimensionMismatch("mvn_logpdf: dimensions differ");
  }
  const Vector white = cov_factor.solve_lower(Vector(x - mean));
  const double d = static_cast<double>(mean.size());
  return -0.5 * d * std::log(2.0 * std::numbers::pi) - 0.5 * cov_factor.log_det() - 0.5 * white.squaredNorm();
}

double mvn_logpdf(const Gaussian& g, const Vector& x) {
  return mvn_logpdf(g.mean(), cholesky(g.cov()), x);
}

}  // namespace bayes
