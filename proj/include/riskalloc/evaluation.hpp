#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "riskalloc/engine.hpp"

namespace riskalloc {

/// A policy with the duals and rate caps frozen.
struct FrozenPolicy {
  DualState duals;
  std::vector<double> value_at_risk;  // +inf for risk-neutral terminals
};

/// Policy with caps set from the closed-form value-at-risk at `duals`.
FrozenPolicy closed_form_policy(const DualState& duals, const NetworkSpec& spec);

/// Neumaier-compensated arithmetic mean. Throws std::domain_error when empty.
double compensated_mean(std::span<const double> samples);

/// Lower-tail CV@R of a reward sample:
///   max over t in samples of  t - sum_j (t - z_j)_+ / (alpha n).
/// The objective is piecewise linear in t with breakpoints at the samples, so
/// restricting t to the samples is exact. alpha == 1 returns compensated_mean.
/// Throws std::domain_error for empty samples or alpha outside (0,1].
double empirical_cvar_lower(std::span<const double> samples, double alpha);

/// Fraction of `sorted_samples` <= each level.
std::vector<double> empirical_outage(std::span<const double> sorted_samples,
                                     std::span<const double> levels);

/// Rate outage P{rate <= level} predicted by the rate cdf of the frozen policy.
double analytic_outage(const FrozenPolicy& policy, const NetworkSpec& spec, std::size_t terminal,
                       double level);

/// Evenly spaced levels on [0, max_level].
std::vector<double> outage_grid(double max_level, std::size_t points);

struct PolicySamples {
  std::vector<std::vector<double>> rates;  // [terminal][sample]
  double mean_total_power = 0.0;
  std::int64_t count = 0;
  std::uint64_t stream_seed = 0;  // evaluation_seed(seed)
};

/// Monte Carlo run of a frozen policy on fresh fading. Samples are generated
/// in fixed-size chunks, each from its own stream derived from
/// evaluation_seed(seed), and spread over worker threads; the output does not
/// depend on the number of threads.
PolicySamples simulate_policy(const FrozenPolicy& policy, const NetworkSpec& spec,
                              std::int64_t n_samples, std::uint64_t seed);

struct OutageCurve {
  std::vector<double> levels;
  std::vector<std::vector<double>> empirical;  // [terminal][level]
  std::vector<std::vector<double>> analytic;
};

/// Requires n_samples >= 10^4 (std::domain_error otherwise).
OutageCurve outage_curve(const FrozenPolicy& policy, const NetworkSpec& spec,
                         std::span<const double> levels, std::int64_t n_samples,
                         std::uint64_t seed);

struct TerminalReport {
  double alpha = 0.0;
  double noise_variance = 0.0;
  double value_at_risk = 0.0;
  double cvar = 0.0;
  double mean_rate = 0.0;
  bool risk_neutral = false;
};

struct EvaluationReport {
  std::vector<TerminalReport> terminals;
  OutageCurve outage;
  DualState duals;
  double mean_total_power = 0.0;
  double power_budget = 0.0;
  double power_gap = 0.0;  // power_budget - mean_total_power
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream_seed = 0;
  bool risk_neutral_routing = false;
};

inline constexpr std::size_t kDefaultOutagePoints = 200;

/// Evaluates the closed-form policy at `duals`. The outage grid spans
/// [0, 1.25 max finite cap], falling back to the largest sampled rate when
/// every terminal is risk-neutral.
EvaluationReport evaluate_policy(const DualState& duals, const NetworkSpec& spec,
                                 std::int64_t n_samples, std::uint64_t seed,
                                 std::size_t grid_points = kDefaultOutagePoints);

EvaluationReport evaluate_policy(const FrozenPolicy& policy, const NetworkSpec& spec,
                                 std::int64_t n_samples, std::uint64_t seed,
                                 std::size_t grid_points = kDefaultOutagePoints);

}  // namespace riskalloc
