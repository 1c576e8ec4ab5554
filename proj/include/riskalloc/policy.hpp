#pragma once

#include <limits>
#include <vector>

#include "riskalloc/fading.hpp"

namespace riskalloc {

/// One point-to-point link.
struct TerminalSpec {
  double noise_variance = 1.0;
  /// CV@R confidence level in (0,1]. alpha == 1 selects the risk-neutral policy.
  double alpha = 0.9;
  FadingModel fading = FadingModel::rayleigh(1.0);

  bool risk_neutral() const { return alpha == 1.0; }
  bool operator==(const TerminalSpec&) const = default;
};

/// Multipliers of the per-terminal CV@R rate constraints (lambda) and of the
/// average power budget (mu). Kept nonnegative by projection.
struct DualState {
  std::vector<double> lambda;
  double mu = 1.0;

  bool operator==(const DualState&) const = default;
};

/// Confidence levels below this make the optimal quantile collapse to zero
/// amplitude and the duals diverge; they are rejected.
inline constexpr double kMinAlpha = 1e-6;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Throws std::invalid_argument naming the offending field.
void validate(const TerminalSpec& terminal);

/// Instantaneous rate log(1 + p h^2 / noise) in nats.
double rate(double power, double amplitude, double noise_variance);

enum class PolicyBranch {
  kZero,       ///< no power: (lambda, mu) = 0, lambda = 0, t <= 0 or dead channel
  kWaterfill,  ///< (lambda/(mu alpha) - noise/h^2)_+, rate strictly below the cap
  kCap,        ///< just enough power to reach rate (t)_+
};

struct Allocation {
  double power = 0.0;
  PolicyBranch branch = PolicyBranch::kZero;
};

/// CV@R-optimal tail waterfilling for one terminal and one fading draw.
///
/// Maximizes -(lambda/alpha)(t - rate(p,h))_+ - mu p over p >= 0. The result is
/// the classical waterfilling level with waterline lambda/(mu alpha), capped so
/// the rate never exceeds (t)_+. With mu == 0 and lambda > 0 only the cap
/// remains. The branch tells the caller whether the rate sits on the cap.
Allocation tail_waterfilling(double amplitude, double t, double lambda, double mu, double alpha,
                             double noise_variance);

inline double tail_waterfilling_power(double amplitude, double t, double lambda, double mu,
                                      double alpha, double noise_variance) {
  return tail_waterfilling(amplitude, t, lambda, mu, alpha, noise_variance).power;
}

/// Classical ergodic waterfilling (lambda/mu - noise/h^2)_+. Throws
/// std::domain_error for mu <= 0.
double risk_neutral_power(double amplitude, double lambda, double mu, double noise_variance);

/// Optimal value-at-risk (rate cap) for a terminal:
///   ( log( lambda/(mu alpha noise) * quantile(alpha)^2 ) )_+
///
/// Returns +inf at alpha == 1; callers route that terminal to
/// risk_neutral_power instead. Throws std::domain_error for lambda <= 0,
/// mu <= 0, or alpha outside [kMinAlpha, 1].
double optimal_value_at_risk(double lambda, double mu, double alpha, double noise_variance,
                             const FadingModel& fading);

/// Closed form for Rayleigh(scale) fading.
double optimal_value_at_risk_rayleigh(double lambda, double mu, double alpha,
                                      double noise_variance, double scale);

/// Closed form for Weibull(scale, shape) fading, obtained by substituting the
/// Weibull quantile scale * (-log(1-alpha))^(1/shape).
double optimal_value_at_risk_weibull(double lambda, double mu, double alpha,
                                     double noise_variance, double scale, double shape);

/// Cdf of the instantaneous rate under tail_waterfilling at cap t, which is
/// also the outage probability P{rate <= r}.
double rate_cdf(double r, double t, double lambda, double mu, double alpha, double noise_variance,
                const FadingModel& fading);

/// Subgradient in t of the expected rate-cap objective. `heaviside_at_zero` is
/// the selection of the step multifunction at t == 0 and must lie in [0,1].
double value_at_risk_subgradient(double t, double lambda, double mu, double alpha,
                                 double noise_variance, const FadingModel& fading,
                                 double heaviside_at_zero = 1.0);

}  // namespace riskalloc
