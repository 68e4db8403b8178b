#include "bayes/kernel.hpp"

#include <cmath>
#include <numbers>

#include "bayes/error.hpp"

namespace bayes::gp {

namespace {

const char* leaf_prefix(KernelKind kind) {
  switch (kind) {
    case KernelKind::SquaredExponential: return "se";
    case KernelKind::QuasiPeriodic: return "qp";
    case KernelKind::RationalQuadratic: return "rq";
    case KernelKind::NoisyExponential: return "ne";
    case KernelKind::Sum: break;
  }
  return "sum";
}

std::vector<std::string> leaf_names(KernelKind kind) {
  switch (kind) {
    case KernelKind::SquaredExponential: return {"amplitude", "length"};
    case KernelKind::QuasiPeriodic: return {"amplitude", "decay_length", "periodic_scale"};
    case KernelKind::RationalQuadratic: return {"amplitude", "length", "shape"};
    case KernelKind::NoisyExponential: return {"amplitude", "length", "white_amplitude"};
    case KernelKind::Sum: break;
  }
  return {};
}

}  // namespace

std::vector<Input> scalar_inputs(std::span<const double> xs) {
  std::vector<Input> out;
  out.reserve(xs.size());
  for (const double x : xs) {
    out.push_back(scalar_input(x));
  }
  return out;
}

KernelSpec::KernelSpec(KernelKind kind, std::vector<double> params, std::vector<KernelSpec> parts)
    : kind_{kind}, params_{std::move(params)}, parts_{std::move(parts)} {
  if (kind_ == KernelKind::Sum) {
    if (parts_.empty()) {
      throw InvalidArgument("Sum kernel needs at least one part");
    }
    return;
  }
  for (const double p : params_) {
    if (!(p > 0.0) || !std::isfinite(p)) {
      throw InvalidArgument("kernel parameters must be finite and strictly positive");
    }
  }
}

KernelSpec KernelSpec::squared_exponential(double amplitude, double length) {
  return KernelSpec{KernelKind::SquaredExponential, {amplitude, length}, {}};
}

KernelSpec KernelSpec::quasi_periodic(double amplitude, double decay_length, double periodic_scale) {
  return KernelSpec{KernelKind::QuasiPeriodic, {amplitude, decay_length, periodic_scale}, {}};
}

KernelSpec KernelSpec::rational_quadratic(double amplitude, double length, double shape) {
  return KernelSpec{KernelKind::RationalQuadratic, {amplitude, length, shape}, {}};
}

KernelSpec KernelSpec::noisy_exponential(double amplitude, double length, double white_amplitude) {
  return KernelSpec{KernelKind::NoisyExponential, {amplitude, length, white_amplitude}, {}};
}

KernelSpec KernelSpec::sum(std::vector<KernelSpec> parts) { return KernelSpec{KernelKind::Sum, {}, std::move(parts)}; }

std::size_t KernelSpec::param_count() const {
  if (kind_ != KernelKind::Sum) {
    return params_.size();
  }
  std::size_t n = 0;
  for (const auto& part : parts_) {
    n += part.param_count();
  }
  return n;
}

std::vector<double> KernelSpec::log_params() const {
  std::vector<double> out;
  out.reserve(param_count());
  if (kind_ != KernelKind::Sum) {
    for (const double p : params_) {
      out.push_back(std::log(p));
    }
    return out;
  }
  for (const auto& part : parts_) {
    const auto sub = part.log_params();
    out.insert(out.end(), sub.begin(), sub.end());
  }
  return out;
}

std::size_t KernelSpec::assign_log_params(std::span<const double> log_params) {
  if (kind_ != KernelKind::Sum) {
    for (std::size_t i = 0; i < params_.size(); ++i) {
      params_[i] = std::exp(log_params[i]);
      if (!(params_[i] > 0.0) || !std::isfinite(params_[i])) {
        throw NotPositiveDefinite("kernel parameter left the representable range");
      }
    }
    return params_.size();
  }
  std::size_t used = 0;
  for (auto& part : parts_) {
    used += part.assign_log_params(log_params.subspan(used));
  }
  return used;
}

KernelSpec KernelSpec::with_log_params(std::span<const double> log_params) const {
  if (log_params.size() != param_count()) {
    throw DimensionMismatch("wrong number of kernel parameters");
  }
  KernelSpec copy = *this;
  copy.assign_log_params(log_params);
  return copy;
}

void KernelSpec::collect_names(const std::string& prefix, std::vector<std::string>& out) const {
  if (kind_ != KernelKind::Sum) {
    for (const auto& name : leaf_names(kind_)) {
      out.push_back(prefix + leaf_prefix(kind_) + "." + name);
    }
    return;
  }
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    parts_[i].collect_names(prefix + "part" + std::to_string(i) + ".", out);
  }
}

std::vector<std::string> KernelSpec::param_names() const {
  std::vector<std::string> out;
  collect_names("", out);
  return out;
}

double KernelSpec::eval_sq(double r2, bool same_point) const {
  switch (kind_) {
    case KernelKind::SquaredExponential: {
      const double a = params_[0], l = params_[1];
      return a * a * std::exp(-r2 / (l * l));
    }
    case KernelKind::QuasiPeriodic: {
      const double a = params_[0], l = params_[1], p = params_[2];
      const double s = std::sin(std::numbers::pi * std::sqrt(r2));
      return a * a * std::exp(-2.0 * s * s / (p * p)) * std::exp(-0.5 * r2 / (l * l));
    }
    case KernelKind::RationalQuadratic: {
      const double a = params_[0], l = params_[1], shape = params_[2];
      return a * a * std::pow(1.0 + r2 / (2.0 * shape * l * l), -shape);
    }
    case KernelKind::NoisyExponential: {
      const double a = params_[0], l = params_[1], b = params_[2];
      return a * a * std::exp(-0.5 * r2 / (l * l)) + (same_point ? b * b : 0.0);
    }
    case KernelKind::Sum: {
      double total = 0.0;
      for (const auto& part : parts_) {
        total += part.eval_sq(r2, same_point);
      }
      return total;
    }
  }
  return 0.0;
}

void KernelSpec::gradient_sq(double r2, bool same_point, std::span<double> out) const {
  switch (kind_) {
    case KernelKind::SquaredExponential: {
      const double l = params_[1];
      const double k = eval_sq(r2, same_point);
      out[0] = 2.0 * k;
      out[1] = k * 2.0 * r2 / (l * l);
      return;
    }
    case KernelKind::QuasiPeriodic: {
      const double l = params_[1], p = params_[2];
      const double s = std::sin(std::numbers::pi * std::sqrt(r2));
      const double k = eval_sq(r2, same_point);
      out[0] = 2.0 * k;
      out[1] = k * r2 / (l * l);
      out[2] = k * 4.0 * s * s / (p * p);
      return;
    }
    case KernelKind::RationalQuadratic: {
      const double l = params_[1], shape = params_[2];
      const double base = 1.0 + r2 / (2.0 * shape * l * l);
      const double k = eval_sq(r2, same_point);
      out[0] = 2.0 * k;
      out[1] = k * r2 / (l * l * base);
      out[2] = k * (-shape * std::log(base) + r2 / (2.0 * l * l * base));
      return;
    }
    case KernelKind::NoisyExponential: {
      const double a = params_[0], l = params_[1], b = params_[2];
      const double smooth = a * a * std::exp(-0.5 * r2 / (l * l));
      out[0] = 2.0 * smooth;
      out[1] = smooth * r2 / (l * l);
      out[2] = same_point ? 2.0 * b * b : 0.0;
      return;
    }
    case KernelKind::Sum: {
      std::size_t used = 0;
      for (const auto& part : parts_) {
        const std::size_t n = part.param_count();
        part.gradient_sq(r2, same_point, out.subspan(used, n));
        used += n;
      }
      return;
    }
  }
}

double KernelSpec::operator()(const Input& x, const Input& x_prime, bool same_point) const {
  if (x.size() != x_prime.size()) {
    throw DimensionMismatch("kernel inputs differ in dimension");
  }
  return eval_sq((x - x_prime).squaredNorm(), same_point);
}

void KernelSpec::gradient(const Input& x, const Input& x_prime, bool same_point, std::span<double> out) const {
  if (out.size() != param_count()) {
    throw DimensionMismatch("gradient buffer has wrong size");
  }
  gradient_sq((x - x_prime).squaredNorm(), same_point, out);
}

double kernel_eval(const KernelSpec& spec, const Input& x, const Input& x_prime, bool same_point) {
  return spec(x, x_prime, same_point);
}

double kernel_eval(const KernelSpec& spec, double x, double x_prime, bool same_point) {
  return spec(scalar_input(x), scalar_input(x_prime), same_point);
}

Matrix gram(const KernelSpec& spec, const std::vector<Input>& xs) {
  if (xs.empty()) {
    throw InvalidArgument("gram needs at least one input");
  }
  const auto n = static_cast<Eigen::Index>(xs.size());
  Matrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = spec(xs[i], xs[i], true);
    for (Eigen::Index j = 0; j < i; ++j) {
      k(i, j) = k(j, i) = spec(xs[i], xs[j], false);
    }
  }
  return k;
}

Matrix cross_gram(const KernelSpec& spec, const std::vector<Input>& xs, const std::vector<Input>& ys) {
  Matrix k(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(ys.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < ys.size(); ++j) {
      k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = spec(xs[i], ys[j], false);
    }
  }
  return k;
}

}  // namespace bayes::gp
