#ifndef BAYES_GAUSS_HPP
#define BAYES_GAUSS_HPP

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "bayes/rng.hpp"

namespace bayes {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kSymmetryTolerance = 1e-10;

/// Throws InvalidArgument if any entry is NaN or infinite.
void require_finite(const Matrix& a, const char* what);
/// Throws NotSquare / NotSymmetric. Symmetry is checked relative to the
/// largest absolute entry.
void require_symmetric(const Matrix& a, double rel_tol = kSymmetryTolerance);

/// (A + Aᵀ) / 2.
Matrix symmetrize(const Matrix& a);

/// Mean vector plus symmetric positive semidefinite covariance.
class Gaussian {
 public:
  Gaussian(Vector mean, Matrix cov);

  /// 1-D convenience.
  static Gaussian scalar(double mean, double variance);

  const Vector& mean() const { return mean_; }
  const Matrix& cov() const { return cov_; }
  Eigen::Index dim() const { return mean_.size(); }

 private:
  Vector mean_;
  Matrix cov_;
};

/// Lower-triangular factor L with L·Lᵀ = A + jitter·I.
class CholeskyFactor {
 public:
  CholeskyFactor(Matrix lower, double jitter) : lower_{std::move(lower)}, jitter_{jitter} {}

  const Matrix& lower() const { return lower_; }
  Eigen::Index dim() const { return lower_.rows(); }
  /// Diagonal jitter that was added to make the factorization succeed (0 when none).
  double jitter() const { return jitter_; }

  /// log|A| = 2·Σ log L_ii.
  double log_det() const;
  /// L·Lᵀ.
  Matrix reconstruct() const;

  /// L⁻¹·b (forward substitution only).
  Vector solve_lower(const Vector& b) const;
  Matrix solve_lower(const Matrix& b) const;

 private:
  Matrix lower_;
  double jitter_;
};

/// Cholesky factorization with escalating diagonal jitter. The first attempt
/// uses no jitter; on a nonpositive pivot it retries with 1e-12·mean(diag),
/// then ×10 per retry, at most 3 retries.
CholeskyFactor cholesky(const Matrix& a);

/// Solves A·x = b given the factor of A.
Vector chol_solve(const CholeskyFactor& factor, const Vector& b);
Matrix chol_solve(const CholeskyFactor& factor, const Matrix& b);

/// n independent draws from g.
std::vector<Vector> mvn_sample(const Gaussian& g, RngStream& rng, std::size_t n);

/// Log density of x under g. Requires g.cov() positive definite.
double mvn_logpdf(const Gaussian& g, const Vector& x);

/// Same, with a precomputed factor of the covariance.
double mvn_logpdf(const Vector& mean, const CholeskyFactor& cov_factor, const Vector& x);

}  // namespace bayes

#endif  // BAYES_GAUSS_HPP
