#ifndef BAYES_KERNEL_HPP
#define BAYES_KERNEL_HPP

#include <span>
#include <string>
#include <vector>

#include "bayes/gauss.hpp"

namespace bayes::gp {

/// GP inputs are vectors; every kernel here is a function of the Euclidean
/// distance r = |x − x'| (for scalar inputs, r = |x − x'|).
using Input = Vector;

inline Input scalar_input(double x) { return Input::Constant(1, x); }
std::vector<Input> scalar_inputs(std::span<const double> xs);

enum class KernelKind { SquaredExponential, QuasiPeriodic, RationalQuadratic, NoisyExponential, Sum };

/// Covariance function. Leaf kernels carry strictly positive parameters,
/// optimized in log space:
///
///   SquaredExponential(a, l):      a² exp(−r²/l²)
///   QuasiPeriodic(a, l, p):        a² exp(−2 sin²(π r)/p²) · exp(−r²/(2 l²))
///   RationalQuadratic(a, l, s):    a² (1 + r²/(2 s l²))^(−s)
///   NoisyExponential(a, l, b):     a² exp(−r²/(2 l²)) + b² δ
///
/// The δ term is 1 only when both arguments are the same data point (same
/// index in a Gram matrix, or a test point with itself), never for distinct
/// points that happen to coincide in value.
class KernelSpec {
 public:
  static KernelSpec squared_exponential(double amplitude, double length);
  static KernelSpec quasi_periodic(double amplitude, double decay_length, double periodic_scale);
  static KernelSpec rational_quadratic(double amplitude, double length, double shape);
  static KernelSpec noisy_exponential(double amplitude, double length, double white_amplitude);
  static KernelSpec sum(std::vector<KernelSpec> parts);

  KernelKind kind() const { return kind_; }
  /// Natural-scale parameters of a leaf (empty for Sum).
  const std::vector<double>& params() const { return params_; }
  const std::vector<KernelSpec>& parts() const { return parts_; }

  /// Total number of parameters, recursively.
  std::size_t param_count() const;
  std::vector<double> log_params() const;
  KernelSpec with_log_params(std::span<const double> log_params) const;
  std::vector<std::string> param_names() const;

  double operator()(const Input& x, const Input& x_prime, bool same_point = false) const;

  /// ∂k/∂(log θ) for every parameter, written into `out` (size param_count()).
  void gradient(const Input& x, const Input& x_prime, bool same_point, std::span<double> out) const;

 private:
  KernelSpec(KernelKind kind, std::vector<double> params, std::vector<KernelSpec> parts);

  double eval_sq(double r2, bool same_point) const;
  void gradient_sq(double r2, bool same_point, std::span<double> out) const;
  void collect_names(const std::string& prefix, std::vector<std::string>& out) const;
  std::size_t assign_log_params(std::span<const double> log_params);

  KernelKind kind_;
  std::vector<double> params_;
  std::vector<KernelSpec> parts_;
};

double kernel_eval(const KernelSpec& spec, const Input& x, const Input& x_prime, bool same_point = false);
double kernel_eval(const KernelSpec& spec, double x, double x_prime, bool same_point = false);

/// Symmetric matrix of pairwise kernel values; the diagonal counts as "same point".
Matrix gram(const KernelSpec& spec, const std::vector<Input>& xs);

/// Cross-covariance K(xs, ys) between distinct point sets.
Matrix cross_gram(const KernelSpec& spec, const std::vector<Input>& xs, const std::vector<Input>& ys);

}  // namespace bayes::gp

#endif  // BAYES_KERNEL_HPP
