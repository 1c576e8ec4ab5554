#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "riskalloc/policy.hpp"
#include "riskalloc/utility.hpp"

namespace riskalloc {

struct NetworkSpec {
  std::vector<TerminalSpec> terminals;
  double power_budget = 15.0;
  Utility utility = Utility::proportional_fairness();

  std::size_t size() const { return terminals.size(); }
  bool operator==(const NetworkSpec&) const = default;
};

struct SolverConfig {
  double step_dual = 1e-6;
  double step_t = 1e-4;  // primal-dual solver only
  std::int64_t iterations = 500000;
  std::uint64_t seed = 1;
  /// Defaults to 1 per terminal, or to the pinned multipliers of the utility.
  std::optional<std::vector<double>> initial_lambda;
  double initial_mu = 1.0;
  /// Primal-dual solver only; defaults to 1 per terminal.
  std::optional<std::vector<double>> initial_t;
  std::int64_t log_stride = 100;

  bool operator==(const SolverConfig&) const = default;
};

/// Both throw ConfigError naming the offending field.
void validate(const NetworkSpec& spec);
void validate(const SolverConfig& config, const NetworkSpec& spec);

enum class Algorithm { kDual, kPrimalDual };

std::string_view to_string(Algorithm algorithm);

struct TraceRow {
  std::int64_t iteration = 0;
  std::vector<double> lambda;  // after the dual step of this iteration
  double mu = 0.0;
  std::vector<double> t;  // rate cap the allocation used (+inf when risk-neutral)
  std::vector<double> x;
  std::vector<double> h;
  std::vector<double> p;
  std::vector<double> r;
};

struct IterateTrace {
  Algorithm algorithm = Algorithm::kDual;
  std::uint64_t seed = 0;
  std::int64_t iterations = 0;
  std::vector<TraceRow> rows;  // every log_stride-th iteration plus the last
  DualState final_state;
  /// Closed-form caps at final_state (dual) or the last t-iterate (primal-dual).
  std::vector<double> final_t;
};

/// Multipliers below this are treated as this value wherever a closed form
/// would divide by mu; the allocation itself still sees the exact mu.
inline constexpr double kMuFloor = 1e-12;

/// Closed-form value-at-risk for every terminal at the given duals. Terminals
/// with lambda_i == 0 get 0; risk-neutral terminals get +inf.
std::vector<double> closed_form_value_at_risk(const DualState& duals, const NetworkSpec& spec);

/// Allocation for terminal i given its cap t, routing alpha == 1 terminals to
/// the risk-neutral policy.
Allocation allocate(const NetworkSpec& spec, std::size_t terminal, double amplitude, double t,
                    const DualState& duals);

struct DualSubgradient {
  std::vector<double> lambda;
  double mu = 0.0;
};

/// Single-sample subgradient of the dual objective:
///   g_lambda_i = t_i - (t_i - r_i)_+ / alpha_i - x_i,  g_mu = P0 - ||p||_1.
/// For risk-neutral terminals (t_i = +inf) g_lambda_i reduces to r_i - x_i.
DualSubgradient dual_subgradient(std::span<const double> amplitudes, const NetworkSpec& spec,
                                 std::span<const double> t, std::span<const double> x,
                                 std::span<const double> power);

/// Projected step (state - step * g)_+.
DualState dual_step(const DualState& state, const DualSubgradient& g, double step);

/// Dual tail waterfilling: closed-form caps and allocations at the current
/// duals, stochastic projected subgradient descent on the duals.
IterateTrace run_dual(const NetworkSpec& spec, const SolverConfig& config);

/// Primal-dual baseline: caps learned by stochastic subgradient ascent,
///   t <- t + step_t (1 - 1{rate < t} / alpha),
/// then the same dual step. Same fading path as run_dual for equal seeds.
IterateTrace run_primal_dual(const NetworkSpec& spec, const SolverConfig& config);

IterateTrace run(Algorithm algorithm, const NetworkSpec& spec, const SolverConfig& config);

struct ConvergenceDiagnostic {
  bool converged = false;
  std::vector<double> lambda_change;  // relative change of window means
  double mu_change = 0.0;
  double max_change = 0.0;
};

/// Compares the mean of every dual over the last 10% of iterations with its
/// mean over the 10% before that.
ConvergenceDiagnostic diagnose_convergence(const IterateTrace& trace, double tolerance = 1e-3);

/// First logged iteration at which |t_i - target| <= band * |target|.
std::optional<std::int64_t> first_band_entry(const IterateTrace& trace, std::size_t terminal,
                                             double target, double band = 0.05);

}  // namespace riskalloc
