#include "riskalloc/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "riskalloc/random.hpp"

namespace riskalloc {

namespace {

constexpr std::int64_t kChunkSize = 1 << 16;

struct NeumaierSum {
  double sum = 0.0;
  double compensation = 0.0;

  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      compensation += (sum - t) + v;
    } else {
      compensation += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + compensation; }
};

std::vector<std::vector<double>> sorted_copy(const std::vector<std::vector<double>>& rates) {
  auto out = rates;
  for (auto& r : out) std::sort(r.begin(), r.end());
  return out;
}

OutageCurve build_curve(const FrozenPolicy& policy, const NetworkSpec& spec,
                        const std::vector<std::vector<double>>& sorted_rates,
                        std::span<const double> levels) {
  OutageCurve curve;
  curve.levels.assign(levels.begin(), levels.end());
  for (std::size_t i = 0; i < spec.size(); ++i) {
    curve.empirical.push_back(empirical_outage(sorted_rates[i], levels));
    std::vector<double> analytic(levels.size());
    for (std::size_t k = 0; k < levels.size(); ++k) {
      analytic[k] = analytic_outage(policy, spec, i, levels[k]);
    }
    curve.analytic.push_back(std::move(analytic));
  }
  return curve;
}

}  // namespace

FrozenPolicy closed_form_policy(const DualState& duals, const NetworkSpec& spec) {
  return FrozenPolicy{duals, closed_form_value_at_risk(duals, spec)};
}

double compensated_mean(std::span<const double> samples) {
  if (samples.empty()) throw std::domain_error("mean: empty sample");
  NeumaierSum acc;
  for (double v : samples) acc.add(v);
  return acc.value() / static_cast<double>(samples.size());
}

double empirical_cvar_lower(std::span<const double> samples, double alpha) {
  if (samples.empty()) throw std::domain_error("cvar: empty sample");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::domain_error("cvar: alpha must lie in (0,1]");
  if (alpha == 1.0) return compensated_mean(samples);

  std::vector<double> z(samples.begin(), samples.end());
  std::sort(z.begin(), z.end());
  const double scale = 1.0 / (alpha * static_cast<double>(z.size()));
  // shortfall = sum_{j<=k} (z_k - z_j), built incrementally so that ties add
  // exactly zero.
  double shortfall = 0.0;
  double best = z[0];
  for (std::size_t k = 1; k < z.size(); ++k) {
    shortfall += static_cast<double>(k) * (z[k] - z[k - 1]);
    best = std::max(best, z[k] - shortfall * scale);
  }
  return best;
}

std::vector<double> empirical_outage(std::span<const double> sorted_samples,
                                     std::span<const double> levels) {
  std::vector<double> out(levels.size());
  const auto n = static_cast<double>(sorted_samples.size());
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const auto it = std::upper_bound(sorted_samples.begin(), sorted_samples.end(), levels[k]);
    out[k] = static_cast<double>(it - sorted_samples.begin()) / n;
  }
  return out;
}

double analytic_outage(const FrozenPolicy& policy, const NetworkSpec& spec, std::size_t terminal,
                       double level) {
  const TerminalSpec& term = spec.terminals[terminal];
  const double lambda = policy.duals.lambda[terminal];
  if (level < 0.0) return 0.0;
  if (lambda <= 0.0) return 1.0;  // no power, rate is identically 0
  double mu = policy.duals.mu;
  if (term.risk_neutral()) mu = std::max(mu, kMuFloor);
  return rate_cdf(level, policy.value_at_risk[terminal], lambda, mu, term.alpha,
                  term.noise_variance, term.fading);
}

std::vector<double> outage_grid(double max_level, std::size_t points) {
  std::vector<double> grid(points);
  if (points == 1) return {0.0};
  for (std::size_t k = 0; k < points; ++k) {
    grid[k] = max_level * static_cast<double>(k) / static_cast<double>(points - 1);
  }
  return grid;
}

PolicySamples simulate_policy(const FrozenPolicy& policy, const NetworkSpec& spec,
                              std::int64_t n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw std::domain_error("simulate_policy: need at least one sample");
  const std::size_t n_terms = spec.size();
  const std::int64_t n_chunks = (n_samples + kChunkSize - 1) / kChunkSize;

  PolicySamples out;
  out.count = n_samples;
  out.stream_seed = evaluation_seed(seed);
  out.rates.assign(n_terms, std::vector<double>(static_cast<std::size_t>(n_samples)));
  std::vector<NeumaierSum> chunk_power(static_cast<std::size_t>(n_chunks));

  auto work_chunk = [&](std::int64_t c) {
    RandomStream rng(derive_seed(out.stream_seed, static_cast<std::uint64_t>(c)));
    const std::int64_t begin = c * kChunkSize;
    const std::int64_t end = std::min(n_samples, begin + kChunkSize);
    NeumaierSum& power = chunk_power[static_cast<std::size_t>(c)];
    for (std::int64_t s = begin; s < end; ++s) {
      for (std::size_t i = 0; i < n_terms; ++i) {
        const TerminalSpec& term = spec.terminals[i];
        const double h = term.fading.sample(rng);
        const Allocation a = allocate(spec, i, h, policy.value_at_risk[i], policy.duals);
        out.rates[i][static_cast<std::size_t>(s)] = rate(a.power, h, term.noise_variance);
        power.add(a.power);
      }
    }
  };

  const auto hw = std::max(1u, std::thread::hardware_concurrency());
  const auto n_workers = static_cast<std::int64_t>(std::min<std::int64_t>(hw, n_chunks));
  std::atomic<std::int64_t> next{0};
  {
    std::vector<std::jthread> workers;
    for (std::int64_t w = 0; w < n_workers; ++w) {
      workers.emplace_back([&] {
        for (std::int64_t c = next++; c < n_chunks; c = next++) work_chunk(c);
      });
    }
  }

  NeumaierSum total;
  for (const NeumaierSum& c : chunk_power) total.add(c.value());
  out.mean_total_power = total.value() / static_cast<double>(n_samples);
  return out;
}

OutageCurve outage_curve(const FrozenPolicy& policy, const NetworkSpec& spec,
                         std::span<const double> levels, std::int64_t n_samples,
                         std::uint64_t seed) {
  if (n_samples < 10000) throw std::domain_error("outage_curve: need at least 10^4 samples");
  const PolicySamples samples = simulate_policy(policy, spec, n_samples, seed);
  return build_curve(policy, spec, sorted_copy(samples.rates), levels);
}

EvaluationReport evaluate_policy(const DualState& duals, const NetworkSpec& spec,
                                 std::int64_t n_samples, std::uint64_t seed,
                                 std::size_t grid_points) {
  return evaluate_policy(closed_form_policy(duals, spec), spec, n_samples, seed, grid_points);
}

EvaluationReport evaluate_policy(const FrozenPolicy& policy, const NetworkSpec& spec,
                                 std::int64_t n_samples, std::uint64_t seed,
                                 std::size_t grid_points) {
  const PolicySamples samples = simulate_policy(policy, spec, n_samples, seed);
  const auto sorted = sorted_copy(samples.rates);

  EvaluationReport report;
  report.duals = policy.duals;
  report.samples = samples.count;
  report.seed = seed;
  report.stream_seed = samples.stream_seed;
  report.mean_total_power = samples.mean_total_power;
  report.power_budget = spec.power_budget;
  report.power_gap = spec.power_budget - samples.mean_total_power;

  double max_cap = 0.0;
  bool any_finite_cap = false;
  double max_rate = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const TerminalSpec& term = spec.terminals[i];
    TerminalReport t;
    t.alpha = term.alpha;
    t.noise_variance = term.noise_variance;
    t.value_at_risk = policy.value_at_risk[i];
    t.risk_neutral = term.risk_neutral();
    t.mean_rate = compensated_mean(samples.rates[i]);
    t.cvar = empirical_cvar_lower(samples.rates[i], term.alpha);
    report.risk_neutral_routing = report.risk_neutral_routing || t.risk_neutral;
    if (std::isfinite(t.value_at_risk)) {
      any_finite_cap = true;
      max_cap = std::max(max_cap, t.value_at_risk);
    }
    max_rate = std::max(max_rate, sorted[i].back());
    report.terminals.push_back(t);
  }
  double top = any_finite_cap ? 1.25 * max_cap : 1.25 * max_rate;
  if (!(top > 0.0)) top = 1.0;
  const std::vector<double> levels = outage_grid(top, grid_points);
  report.outage = build_curve(policy, spec, sorted, levels);
  return report;
}

}  // namespace riskalloc
