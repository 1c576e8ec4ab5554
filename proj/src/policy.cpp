#include "riskalloc/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace riskalloc {

namespace {

void check_value_at_risk_args(double lambda, double mu, double alpha, double noise_variance) {
  if (!(lambda > 0.0)) throw std::domain_error("value-at-risk: lambda must be > 0");
  if (!(mu > 0.0)) throw std::domain_error("value-at-risk: mu must be > 0");
  if (!(alpha >= kMinAlpha && alpha <= 1.0)) {
    throw std::domain_error("value-at-risk: alpha must lie in [1e-6, 1]");
  }
  if (!(noise_variance > 0.0)) throw std::domain_error("value-at-risk: noise variance must be > 0");
}

// (log(scale * squared_quantile))_+ with the clamp applied before the log so
// that an argument <= 1 yields exactly 0.
double clamped_log(double argument) { return argument > 1.0 ? std::log(argument) : 0.0; }

}  // namespace

void validate(const TerminalSpec& terminal) {
  if (!(terminal.noise_variance > 0.0) || !std::isfinite(terminal.noise_variance)) {
    throw std::invalid_argument("noise_variance must be finite and > 0");
  }
  if (!(terminal.alpha >= kMinAlpha && terminal.alpha <= 1.0)) {
    throw std::invalid_argument("alpha must lie in [1e-6, 1]");
  }
}

double rate(double power, double amplitude, double noise_variance) {
  return std::log1p(power * amplitude * amplitude / noise_variance);
}

Allocation tail_waterfilling(double amplitude, double t, double lambda, double mu, double alpha,
                             double noise_variance) {
  if (amplitude <= 0.0 || lambda <= 0.0) return {};
  const double inverse_snr = noise_variance / (amplitude * amplitude);
  const double cap = inverse_snr * std::expm1(std::max(t, 0.0));
  if (mu <= 0.0) return {cap, cap > 0.0 ? PolicyBranch::kCap : PolicyBranch::kZero};
  if (t <= 0.0) return {};

  const double waterfill = lambda / (mu * alpha) - inverse_snr;
  if (cap > waterfill) {
    if (waterfill <= 0.0) return {};
    return {waterfill, PolicyBranch::kWaterfill};
  }
  return {cap, PolicyBranch::kCap};
}

double risk_neutral_power(double amplitude, double lambda, double mu, double noise_variance) {
  if (!(mu > 0.0)) throw std::domain_error("risk-neutral power: mu must be > 0");
  if (amplitude <= 0.0) return 0.0;
  return std::max(lambda / mu - noise_variance / (amplitude * amplitude), 0.0);
}

double optimal_value_at_risk(double lambda, double mu, double alpha, double noise_variance,
                             const FadingModel& fading) {
  check_value_at_risk_args(lambda, mu, alpha, noise_variance);
  if (alpha == 1.0) return kInfinity;
  const double q = fading.quantile(alpha);
  return clamped_log(lambda / (mu * alpha * noise_variance) * (q * q));
}

double optimal_value_at_risk_rayleigh(double lambda, double mu, double alpha,
                                      double noise_variance, double scale) {
  check_value_at_risk_args(lambda, mu, alpha, noise_variance);
  if (alpha == 1.0) return kInfinity;
  return clamped_log(-2.0 * scale * scale * lambda / (mu * alpha * noise_variance) *
                     std::log1p(-alpha));
}

double optimal_value_at_risk_weibull(double lambda, double mu, double alpha,
                                     double noise_variance, double scale, double shape) {
  check_value_at_risk_args(lambda, mu, alpha, noise_variance);
  if (alpha == 1.0) return kInfinity;
  return clamped_log(scale * scale * lambda / (mu * alpha * noise_variance) *
                     std::pow(-std::log1p(-alpha), 2.0 / shape));
}

double rate_cdf(double r, double t, double lambda, double mu, double alpha, double noise_variance,
                const FadingModel& fading) {
  if (r < 0.0) return 0.0;
  if (r > std::max(t, 0.0)) return 1.0;
  return fading.cdf(std::sqrt(mu * alpha * noise_variance / lambda * std::exp(r)));
}

double value_at_risk_subgradient(double t, double lambda, double mu, double alpha,
                                 double noise_variance, const FadingModel& fading,
                                 double heaviside_at_zero) {
  if (t < 0.0) return 1.0;
  const double base = mu * alpha * noise_variance / lambda;
  if (t == 0.0) return 1.0 - heaviside_at_zero / alpha * fading.cdf(std::sqrt(base));
  return 1.0 - fading.cdf(std::sqrt(base * std::exp(t))) / alpha;
}

}  // namespace riskalloc
