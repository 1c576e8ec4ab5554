#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string_view>
#include <variant>
#include <vector>

#include "riskalloc/random.hpp"

namespace riskalloc {

enum class FadingKind { kRayleigh, kWeibull, kEmpirical };

std::string_view to_string(FadingKind kind);

/// Distribution of a channel amplitude h >= 0.
///
/// Rayleigh and Weibull are handled analytically. Empirical wraps a sorted
/// array of observed amplitudes with a right-continuous step cdf; its quantile
/// is the lower-index order statistic. Every draw goes through the inverse cdf
/// of a single uniform, so two solvers fed the same RandomStream see the same
/// fading path.
class FadingModel {
 public:
  struct Rayleigh {
    double scale;
    bool operator==(const Rayleigh&) const = default;
  };
  struct Weibull {
    double scale;
    double shape;
    bool operator==(const Weibull&) const = default;
  };
  struct Empirical {
    std::vector<double> samples;
    bool operator==(const Empirical&) const = default;
  };

  static FadingModel rayleigh(double scale);
  static FadingModel weibull(double scale, double shape);
  /// Samples are sorted on construction; all must be finite and >= 0.
  static FadingModel empirical(std::vector<double> samples);

  FadingKind kind() const;
  bool continuous() const { return kind() != FadingKind::kEmpirical; }

  /// P{h' <= h}. Throws std::domain_error for negative or NaN h.
  double cdf(double h) const;

  /// Smallest q with cdf(q) >= alpha. Throws std::domain_error unless
  /// 0 < alpha < 1.
  double quantile(double alpha) const;

  double sample(RandomStream& rng) const { return quantile(rng.uniform()); }

  const std::variant<Rayleigh, Weibull, Empirical>& params() const { return params_; }

  bool operator==(const FadingModel&) const = default;

 private:
  explicit FadingModel(std::variant<Rayleigh, Weibull, Empirical> params)
      : params_(std::move(params)) {}

  std::variant<Rayleigh, Weibull, Empirical> params_;
};

inline constexpr double kQuantileTolerance = 1e-10;

/// Inverts a nondecreasing cdf on [0, inf) by bracketing and bisection.
///
/// The upper bracket starts at 1 and doubles until cdf(upper) > alpha. The
/// returned point is the right end of the final bracket, so cdf(result) >=
/// alpha for right-continuous cdfs, and the bracket width is below `tol`.
template <class Cdf>
double bisect_quantile(const Cdf& cdf, double alpha, double tol = kQuantileTolerance) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::domain_error("bisect_quantile: alpha must lie in (0,1)");
  }
  double lower = 0.0;
  double upper = 1.0;
  int doublings = 0;
  while (cdf(upper) < alpha) {
    lower = upper;
    upper *= 2.0;
    if (++doublings > 1100) {
      throw std::domain_error("bisect_quantile: cdf never reaches alpha");
    }
  }
  while (upper - lower > tol) {
    const double mid = 0.5 * (lower + upper);
    if (mid <= lower || mid >= upper) break;
    if (cdf(mid) >= alpha) {
      upper = mid;
    } else {
      lower = mid;
    }
  }
  return upper;
}

}  // namespace riskalloc
