#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace riskalloc {

enum class UtilityKind { kSumrate, kProportionalFairness };

std::string_view to_string(UtilityKind kind);

/// Separable concave network utility of the risk-ergodic rates x.
///
/// Each utility supplies three things to the solver: the maximizer of
/// f(x) - lambda^T x, whether lambda is pinned to a known value (which removes
/// both the x- and lambda-steps), and f itself for reporting.
class Utility {
 public:
  /// f(x) = w^T x with w > 0 elementwise.
  static Utility sumrate(std::vector<double> weights);
  /// f(x) = sum_i log x_i.
  static Utility proportional_fairness();

  UtilityKind kind() const { return kind_; }
  const std::vector<double>& weights() const { return weights_; }

  /// argmax over x of f(x) - lambda^T x.
  ///
  /// Proportional fairness: 1/lambda, requires lambda > 0 (std::domain_error).
  /// Sumrate: bounded only at lambda == w, where every x is a maximizer and the
  /// origin is returned; any other lambda throws std::logic_error.
  std::vector<double> maximizer(std::span<const double> lambda) const;

  /// Sumrate pins lambda to w; proportional fairness leaves it free.
  std::optional<std::vector<double>> pinned_multipliers() const;

  /// f(x). Throws std::domain_error for x_i <= 0 under proportional fairness.
  double value(std::span<const double> x) const;

  bool operator==(const Utility&) const = default;

 private:
  Utility(UtilityKind kind, std::vector<double> weights)
      : kind_(kind), weights_(std::move(weights)) {}

  UtilityKind kind_;
  std::vector<double> weights_;
};

}  // namespace riskalloc
