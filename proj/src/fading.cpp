#include "riskalloc/fading.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace riskalloc {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument(std::string("fading: ") + what + " must be finite and > 0");
  }
}

}  // namespace

std::string_view to_string(FadingKind kind) {
  switch (kind) {
    case FadingKind::kRayleigh:
      return "rayleigh";
    case FadingKind::kWeibull:
      return "weibull";
    case FadingKind::kEmpirical:
      return "empirical";
  }
  return "unknown";
}

FadingModel FadingModel::rayleigh(double scale) {
  require_positive(scale, "rayleigh scale");
  return FadingModel(Rayleigh{scale});
}

FadingModel FadingModel::weibull(double scale, double shape) {
  require_positive(scale, "weibull scale");
  require_positive(shape, "weibull shape");
  return FadingModel(Weibull{scale, shape});
}

FadingModel FadingModel::empirical(std::vector<double> samples) {
  if (samples.empty()) {
    throw std::invalid_argument("fading: empirical model needs at least one sample");
  }
  for (double s : samples) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw std::invalid_argument("fading: empirical samples must be finite and >= 0");
    }
  }
  std::sort(samples.begin(), samples.end());
  return FadingModel(Empirical{std::move(samples)});
}

FadingKind FadingModel::kind() const {
  return std::visit(Overloaded{[](const Rayleigh&) { return FadingKind::kRayleigh; },
                               [](const Weibull&) { return FadingKind::kWeibull; },
                               [](const Empirical&) { return FadingKind::kEmpirical; }},
                    params_);
}

double FadingModel::cdf(double h) const {
  if (!(h >= 0.0)) {
    throw std::domain_error("fading cdf: amplitude must be >= 0");
  }
  return std::visit(
      Overloaded{
          [h](const Rayleigh& p) {
            return -std::expm1(-(h * h) / (2.0 * p.scale * p.scale));
          },
          [h](const Weibull& p) { return -std::expm1(-std::pow(h / p.scale, p.shape)); },
          [h](const Empirical& p) {
            const auto it = std::upper_bound(p.samples.begin(), p.samples.end(), h);
            return static_cast<double>(it - p.samples.begin()) /
                   static_cast<double>(p.samples.size());
          }},
      params_);
}

double FadingModel::quantile(double alpha) const {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::domain_error("fading quantile: alpha must lie in (0,1)");
  }
  return std::visit(
      Overloaded{[alpha](const Rayleigh& p) {
                   return p.scale * std::sqrt(-2.0 * std::log1p(-alpha));
                 },
                 [alpha](const Weibull& p) {
                   return p.scale * std::pow(-std::log1p(-alpha), 1.0 / p.shape);
                 },
                 [alpha](const Empirical& p) {
                   // smallest k with k/n >= alpha
                   const auto n = static_cast<double>(p.samples.size());
                   auto k = static_cast<std::size_t>(std::ceil(alpha * n));
                   if (k > 1 && static_cast<double>(k - 1) / n >= alpha) --k;  // alpha*n rounded up
                   k = std::clamp<std::size_t>(k, 1, p.samples.size());
                   return p.samples[k - 1];
                 }},
      params_);
}

}  // namespace riskalloc
