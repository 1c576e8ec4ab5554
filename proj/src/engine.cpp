#include "riskalloc/engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "riskalloc/error.hpp"
#include "riskalloc/random.hpp"

namespace riskalloc {

namespace {

std::string terminal_field(std::size_t i, const char* name) {
  return "network.terminals[" + std::to_string(i) + "]." + name;
}

bool is_finite_nonnegative(double v) { return v >= 0.0 && std::isfinite(v); }

// Everything the two solvers share: fading draws, allocation, x-step, dual step
// and logging. The solvers differ only in where the cap t comes from.
class Iteration {
 public:
  Iteration(const NetworkSpec& spec, const SolverConfig& config, Algorithm algorithm)
      : spec_(spec),
        config_(config),
        pinned_(spec.utility.pinned_multipliers()),
        rng_(config.seed),
        n_(spec.size()),
        h_(n_),
        p_(n_),
        r_(n_),
        x_(n_),
        capped_(n_),
        hinge_sum_(n_, 0.0) {
    validate(spec);
    validate(config, spec);
    state_.lambda = pinned_ ? *pinned_
                            : config.initial_lambda.value_or(std::vector<double>(n_, 1.0));
    state_.mu = config.initial_mu;
    trace_.algorithm = algorithm;
    trace_.seed = config.seed;
    trace_.iterations = config.iterations;
    trace_.rows.reserve(static_cast<std::size_t>(config.iterations / config.log_stride + 2));
  }

  const DualState& state() const { return state_; }
  const std::vector<bool>& capped() const { return capped_; }
  const std::vector<double>& rates() const { return r_; }

  void observe() {
    for (std::size_t i = 0; i < n_; ++i) h_[i] = spec_.terminals[i].fading.sample(rng_);
  }

  // Allocates at caps t, steps the duals, and logs. Returns nothing; the caller
  // reads rates()/capped() before the next observe().
  void allocate_and_step(std::int64_t iteration, const std::vector<double>& t) {
    for (std::size_t i = 0; i < n_; ++i) {
      const Allocation a = allocate(spec_, i, h_[i], t[i], state_);
      p_[i] = a.power;
      capped_[i] = a.branch == PolicyBranch::kCap;
      r_[i] = rate(p_[i], h_[i], spec_.terminals[i].noise_variance);
    }
    update_x(iteration, t);
    DualSubgradient g = dual_subgradient(h_, spec_, t, x_, p_);
    if (pinned_) std::fill(g.lambda.begin(), g.lambda.end(), 0.0);
    state_ = dual_step(state_, g, config_.step_dual);

    if (iteration % config_.log_stride == 0 || iteration == config_.iterations) {
      trace_.rows.push_back(TraceRow{iteration, state_.lambda, state_.mu, t, x_, h_, p_, r_});
    }
  }

  IterateTrace finish(std::vector<double> final_t) {
    trace_.final_state = state_;
    trace_.final_t = std::move(final_t);
    return std::move(trace_);
  }

 private:
  void update_x(std::int64_t iteration, const std::vector<double>& t) {
    if (!pinned_) {
      x_ = spec_.utility.maximizer(state_.lambda);
      return;
    }
    // x is eliminated; report the running constraint right-hand side instead.
    const double count = static_cast<double>(iteration);
    for (std::size_t i = 0; i < n_; ++i) {
      const TerminalSpec& term = spec_.terminals[i];
      if (term.risk_neutral()) {
        hinge_sum_[i] += r_[i];
        x_[i] = hinge_sum_[i] / count;
      } else {
        hinge_sum_[i] += std::max(t[i] - r_[i], 0.0);
        x_[i] = t[i] - hinge_sum_[i] / (count * term.alpha);
      }
    }
  }

  const NetworkSpec& spec_;
  const SolverConfig& config_;
  std::optional<std::vector<double>> pinned_;
  RandomStream rng_;
  std::size_t n_;
  DualState state_;
  std::vector<double> h_, p_, r_, x_;
  std::vector<bool> capped_;
  std::vector<double> hinge_sum_;
  IterateTrace trace_;
};

}  // namespace

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kDual:
      return "dtw";
    case Algorithm::kPrimalDual:
      return "pdtw";
  }
  return "unknown";
}

void validate(const NetworkSpec& spec) {
  if (spec.terminals.empty()) throw ConfigError("network.terminals", "need at least one terminal");
  if (!(spec.power_budget > 0.0) || !std::isfinite(spec.power_budget)) {
    throw ConfigError("network.power_budget", "must be finite and > 0");
  }
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const TerminalSpec& term = spec.terminals[i];
    if (!(term.noise_variance > 0.0) || !std::isfinite(term.noise_variance)) {
      throw ConfigError(terminal_field(i, "noise_variance"), "must be finite and > 0");
    }
    if (!(term.alpha >= kMinAlpha && term.alpha <= 1.0)) {
      throw ConfigError(terminal_field(i, "alpha"), "must lie in [1e-6, 1]");
    }
  }
  if (spec.utility.kind() == UtilityKind::kSumrate &&
      spec.utility.weights().size() != spec.size()) {
    throw ConfigError("network.utility.weights", "need one weight per terminal");
  }
}

void validate(const SolverConfig& config, const NetworkSpec& spec) {
  if (!(config.step_dual > 0.0) || !std::isfinite(config.step_dual)) {
    throw ConfigError("solver.step_dual", "must be finite and > 0");
  }
  if (!is_finite_nonnegative(config.step_t)) {
    throw ConfigError("solver.step_t", "must be finite and >= 0");
  }
  if (config.iterations < 1) throw ConfigError("solver.iterations", "must be >= 1");
  if (config.log_stride < 1) throw ConfigError("solver.log_stride", "must be >= 1");
  if (config.seed & kEvaluationSeedBit) {
    throw ConfigError("solver.seed", "must be below 2^63 (high bit is reserved for evaluation)");
  }
  if (!is_finite_nonnegative(config.initial_mu)) {
    throw ConfigError("solver.initial_mu", "must be finite and >= 0");
  }
  if (config.initial_lambda) {
    if (config.initial_lambda->size() != spec.size()) {
      throw ConfigError("solver.initial_lambda", "need one value per terminal");
    }
    for (double v : *config.initial_lambda) {
      if (!is_finite_nonnegative(v)) {
        throw ConfigError("solver.initial_lambda", "entries must be finite and >= 0");
      }
    }
  }
  if (config.initial_t) {
    if (config.initial_t->size() != spec.size()) {
      throw ConfigError("solver.initial_t", "need one value per terminal");
    }
    for (double v : *config.initial_t) {
      if (!std::isfinite(v)) throw ConfigError("solver.initial_t", "entries must be finite");
    }
  }
}

std::vector<double> closed_form_value_at_risk(const DualState& duals, const NetworkSpec& spec) {
  std::vector<double> t(spec.size());
  const double mu = std::max(duals.mu, kMuFloor);
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const TerminalSpec& term = spec.terminals[i];
    if (term.risk_neutral()) {
      t[i] = kInfinity;
    } else if (duals.lambda[i] <= 0.0) {
      t[i] = 0.0;
    } else {
      t[i] = optimal_value_at_risk(duals.lambda[i], mu, term.alpha, term.noise_variance,
                                   term.fading);
    }
  }
  return t;
}

Allocation allocate(const NetworkSpec& spec, std::size_t terminal, double amplitude, double t,
                    const DualState& duals) {
  const TerminalSpec& term = spec.terminals[terminal];
  const double lambda = duals.lambda[terminal];
  if (term.risk_neutral()) {
    const double p =
        risk_neutral_power(amplitude, lambda, std::max(duals.mu, kMuFloor), term.noise_variance);
    return {p, p > 0.0 ? PolicyBranch::kWaterfill : PolicyBranch::kZero};
  }
  return tail_waterfilling(amplitude, t, lambda, duals.mu, term.alpha, term.noise_variance);
}

DualSubgradient dual_subgradient(std::span<const double> amplitudes, const NetworkSpec& spec,
                                 std::span<const double> t, std::span<const double> x,
                                 std::span<const double> power) {
  DualSubgradient g;
  g.lambda.resize(spec.size());
  double total_power = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const TerminalSpec& term = spec.terminals[i];
    const double r = rate(power[i], amplitudes[i], term.noise_variance);
    if (std::isinf(t[i])) {
      g.lambda[i] = r - x[i];
    } else {
      g.lambda[i] = t[i] - std::max(t[i] - r, 0.0) / term.alpha - x[i];
    }
    total_power += power[i];
  }
  g.mu = spec.power_budget - total_power;
  return g;
}

DualState dual_step(const DualState& state, const DualSubgradient& g, double step) {
  DualState next;
  next.lambda.resize(state.lambda.size());
  for (std::size_t i = 0; i < state.lambda.size(); ++i) {
    next.lambda[i] = std::max(state.lambda[i] - step * g.lambda[i], 0.0);
  }
  next.mu = std::max(state.mu - step * g.mu, 0.0);
  return next;
}

IterateTrace run_dual(const NetworkSpec& spec, const SolverConfig& config) {
  Iteration it(spec, config, Algorithm::kDual);
  for (std::int64_t n = 1; n <= config.iterations; ++n) {
    it.observe();
    it.allocate_and_step(n, closed_form_value_at_risk(it.state(), spec));
  }
  const DualState final_state = it.state();
  return it.finish(closed_form_value_at_risk(final_state, spec));
}

IterateTrace run_primal_dual(const NetworkSpec& spec, const SolverConfig& config) {
  Iteration it(spec, config, Algorithm::kPrimalDual);
  std::vector<double> t = config.initial_t.value_or(std::vector<double>(spec.size(), 1.0));
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (spec.terminals[i].risk_neutral()) t[i] = kInfinity;
  }
  for (std::int64_t n = 1; n <= config.iterations; ++n) {
    it.observe();
    const std::vector<double> t_prev = t;
    it.allocate_and_step(n, t_prev);
    for (std::size_t i = 0; i < spec.size(); ++i) {
      const TerminalSpec& term = spec.terminals[i];
      if (term.risk_neutral()) continue;
      // A capped allocation sits exactly on t; only strictly lower rates count.
      const bool below = !it.capped()[i] && it.rates()[i] < t_prev[i];
      t[i] = t_prev[i] + config.step_t * (1.0 - (below ? 1.0 / term.alpha : 0.0));
    }
  }
  return it.finish(t);
}

IterateTrace run(Algorithm algorithm, const NetworkSpec& spec, const SolverConfig& config) {
  return algorithm == Algorithm::kDual ? run_dual(spec, config) : run_primal_dual(spec, config);
}

ConvergenceDiagnostic diagnose_convergence(const IterateTrace& trace, double tolerance) {
  ConvergenceDiagnostic diag;
  const std::size_t n = trace.final_state.lambda.size();
  diag.lambda_change.assign(n, 0.0);
  const double total = static_cast<double>(trace.iterations);

  std::vector<double> early_lambda(n, 0.0), late_lambda(n, 0.0);
  double early_mu = 0.0, late_mu = 0.0;
  std::size_t early_count = 0, late_count = 0;
  for (const TraceRow& row : trace.rows) {
    const double pos = static_cast<double>(row.iteration) / total;
    if (pos > 0.9) {
      for (std::size_t i = 0; i < n; ++i) late_lambda[i] += row.lambda[i];
      late_mu += row.mu;
      ++late_count;
    } else if (pos > 0.8) {
      for (std::size_t i = 0; i < n; ++i) early_lambda[i] += row.lambda[i];
      early_mu += row.mu;
      ++early_count;
    }
  }
  if (early_count == 0 || late_count == 0) {
    diag.max_change = kInfinity;
    return diag;
  }
  auto relative = [](double a, double b) {
    if (a == b) return 0.0;
    return std::abs(b - a) / std::max(std::abs(a), std::abs(b));
  };
  for (std::size_t i = 0; i < n; ++i) {
    diag.lambda_change[i] = relative(early_lambda[i] / static_cast<double>(early_count),
                                     late_lambda[i] / static_cast<double>(late_count));
    diag.max_change = std::max(diag.max_change, diag.lambda_change[i]);
  }
  diag.mu_change = relative(early_mu / static_cast<double>(early_count),
                            late_mu / static_cast<double>(late_count));
  diag.max_change = std::max(diag.max_change, diag.mu_change);
  diag.converged = diag.max_change < tolerance;
  return diag;
}

std::optional<std::int64_t> first_band_entry(const IterateTrace& trace, std::size_t terminal,
                                             double target, double band) {
  for (const TraceRow& row : trace.rows) {
    if (std::abs(row.t[terminal] - target) <= band * std::abs(target)) return row.iteration;
  }
  return std::nullopt;
}

}  // namespace riskalloc
