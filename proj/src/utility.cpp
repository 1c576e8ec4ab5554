#include "riskalloc/utility.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace riskalloc {

std::string_view to_string(UtilityKind kind) {
  switch (kind) {
    case UtilityKind::kSumrate:
      return "sumrate";
    case UtilityKind::kProportionalFairness:
      return "proportional_fairness";
  }
  return "unknown";
}

Utility Utility::sumrate(std::vector<double> weights) {
  if (weights.empty()) throw std::invalid_argument("sumrate: weights must be nonempty");
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("sumrate: weights must be finite and > 0");
    }
  }
  return Utility(UtilityKind::kSumrate, std::move(weights));
}

Utility Utility::proportional_fairness() { return Utility(UtilityKind::kProportionalFairness, {}); }

std::vector<double> Utility::maximizer(std::span<const double> lambda) const {
  if (kind_ == UtilityKind::kSumrate) {
    if (!std::equal(lambda.begin(), lambda.end(), weights_.begin(), weights_.end())) {
      throw std::logic_error("sumrate: rate subproblem unbounded unless lambda == w");
    }
    return std::vector<double>(lambda.size(), 0.0);
  }
  std::vector<double> x(lambda.size());
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    if (!(lambda[i] > 0.0)) {
      throw std::domain_error("proportional fairness: lambda must be > 0");
    }
    x[i] = 1.0 / lambda[i];
  }
  return x;
}

std::optional<std::vector<double>> Utility::pinned_multipliers() const {
  if (kind_ == UtilityKind::kSumrate) return weights_;
  return std::nullopt;
}

double Utility::value(std::span<const double> x) const {
  double total = 0.0;
  if (kind_ == UtilityKind::kSumrate) {
    if (x.size() != weights_.size()) {
      throw std::invalid_argument("sumrate: x and w lengths differ");
    }
    for (std::size_t i = 0; i < x.size(); ++i) total += weights_[i] * x[i];
    return total;
  }
  for (double xi : x) {
    if (!(xi > 0.0)) throw std::domain_error("proportional fairness: x must be > 0");
    total += std::log(xi);
  }
  return total;
}

}  // namespace riskalloc
