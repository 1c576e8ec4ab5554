#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "riskalloc/engine.hpp"
#include "riskalloc/error.hpp"

using namespace riskalloc;

namespace {

NetworkSpec single_terminal(double alpha, Utility utility = Utility::proportional_fairness()) {
  NetworkSpec spec;
  spec.terminals.push_back({1.0, alpha, FadingModel::rayleigh(1.0)});
  spec.power_budget = 15.0;
  spec.utility = std::move(utility);
  return spec;
}

NetworkSpec three_terminals(Utility utility) {
  NetworkSpec spec;
  for (double noise : {1.0, 2.0, 3.0}) {
    spec.terminals.push_back({noise, 0.9, FadingModel::rayleigh(1.0)});
  }
  spec.utility = std::move(utility);
  return spec;
}

SolverConfig short_run(std::int64_t iterations, std::uint64_t seed = 1) {
  SolverConfig c;
  c.iterations = iterations;
  c.seed = seed;
  c.log_stride = 1;
  return c;
}

// Sample Lagrangian in lambda for fixed primal variables.
double lagrangian(double lambda, double t, double r, double alpha, double x) {
  return std::log(x) - lambda * x + lambda * (t - std::max(t - r, 0.0) / alpha);
}

}  // namespace

TEST_CASE("dual subgradient") {
  NetworkSpec spec = single_terminal(0.5);
  const double h = 1.0;
  const double p = std::expm1(0.5);  // rate 0.5 at unit gain and noise
  const std::vector<double> amp{h}, t{1.0}, x{0.5}, power{p};
  const DualSubgradient g = dual_subgradient(amp, spec, t, x, power);
  CHECK(g.lambda[0] == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(g.mu == doctest::Approx(15.0 - p).epsilon(1e-14));

  const double step = 1e-6;
  const double fd = (lagrangian(1.0 + step, 1.0, 0.5, 0.5, 0.5) -
                     lagrangian(1.0 - step, 1.0, 0.5, 0.5, 0.5)) /
                    (2.0 * step);
  CHECK(fd == doctest::Approx(g.lambda[0]).epsilon(1e-8));

  NetworkSpec three = three_terminals(Utility::proportional_fairness());
  const std::vector<double> amp3{1.0, 1.0, 1.0}, t3{1.0, 1.0, 1.0}, x3{1.0, 1.0, 1.0},
      p3{4.0, 3.0, 3.0};
  CHECK(dual_subgradient(amp3, three, t3, x3, p3).mu == 5.0);
}

TEST_CASE("dual subgradient for a risk-neutral terminal") {
  NetworkSpec spec = single_terminal(1.0);
  const std::vector<double> amp{2.0}, t{kInfinity}, x{0.25}, power{0.75};
  const DualSubgradient g = dual_subgradient(amp, spec, t, x, power);
  CHECK(g.lambda[0] == doctest::Approx(std::log(4.0) - 0.25).epsilon(1e-14));
}

TEST_CASE("dual step") {
  const DualState s{{1.0, 0.2}, 1.0};
  const DualSubgradient g{{-0.5, 1e6}, 5.0};
  const DualState next = dual_step(s, g, 1e-6);
  CHECK(next.mu == doctest::Approx(1.0 - 5e-6).epsilon(1e-15));
  CHECK(next.lambda[0] == doctest::Approx(1.0 + 5e-7).epsilon(1e-15));
  CHECK(next.lambda[1] == 0.0);  // projected
}

TEST_CASE("closed-form caps") {
  NetworkSpec spec = three_terminals(Utility::proportional_fairness());
  spec.terminals[2].alpha = 1.0;
  const DualState d{{1.0, 0.0, 1.0}, 0.1};
  const auto t = closed_form_value_at_risk(d, spec);
  CHECK(t[0] == doctest::Approx(optimal_value_at_risk(1.0, 0.1, 0.9, 1.0, spec.terminals[0].fading)));
  CHECK(t[1] == 0.0);
  CHECK(std::isinf(t[2]));

  const DualState zero_mu{{1.0, 1.0, 1.0}, 0.0};
  CHECK(std::isfinite(closed_form_value_at_risk(zero_mu, spec)[0]));
}

TEST_CASE("determinism and common random numbers") {
  const NetworkSpec spec = three_terminals(Utility::proportional_fairness());
  const SolverConfig cfg = short_run(2000, 42);
  const IterateTrace a = run_dual(spec, cfg), b = run_dual(spec, cfg);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    CHECK(a.rows[k].lambda == b.rows[k].lambda);
    CHECK(a.rows[k].mu == b.rows[k].mu);
    CHECK(a.rows[k].p == b.rows[k].p);
  }
  const IterateTrace other = run_dual(spec, short_run(2000, 43));
  CHECK(other.rows.back().h != a.rows.back().h);

  const IterateTrace pd = run_primal_dual(spec, cfg);
  REQUIRE(pd.rows.size() == a.rows.size());
  for (std::size_t k = 0; k < a.rows.size(); ++k) CHECK(pd.rows[k].h == a.rows[k].h);
}

TEST_CASE("trace logging") {
  const NetworkSpec spec = three_terminals(Utility::proportional_fairness());
  SolverConfig cfg = short_run(1005);
  cfg.log_stride = 100;
  const IterateTrace tr = run_dual(spec, cfg);
  REQUIRE(tr.rows.size() == 11);
  CHECK(tr.rows.front().iteration == 100);
  CHECK(tr.rows.back().iteration == 1005);
  CHECK(tr.rows.back().lambda == tr.final_state.lambda);
  CHECK(tr.final_t == closed_form_value_at_risk(tr.final_state, spec));
}

TEST_CASE("sumrate keeps lambda at the weights") {
  const std::vector<double> w{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  const NetworkSpec spec = three_terminals(Utility::sumrate(w));
  const IterateTrace tr = run_dual(spec, short_run(3000));
  for (const TraceRow& row : tr.rows) CHECK(row.lambda == w);
  CHECK(tr.final_state.mu != 1.0);
}

TEST_CASE("alpha = 1 allocates classical waterfilling exactly") {
  const NetworkSpec spec = single_terminal(1.0, Utility::sumrate({1.0}));
  const IterateTrace tr = run_dual(spec, short_run(500));
  double mu_before = 1.0;
  for (const TraceRow& row : tr.rows) {
    CHECK(std::isinf(row.t[0]));
    CHECK(row.p[0] == risk_neutral_power(row.h[0], 1.0, mu_before, 1.0));
    mu_before = row.mu;
  }
}

TEST_CASE("primal-dual with zero cap step keeps t fixed") {
  const NetworkSpec spec = three_terminals(Utility::proportional_fairness());
  SolverConfig cfg = short_run(1000);
  cfg.step_t = 0.0;
  cfg.initial_t = std::vector<double>{0.5, 1.5, 2.5};
  const IterateTrace tr = run_primal_dual(spec, cfg);
  for (const TraceRow& row : tr.rows) CHECK(row.t == *cfg.initial_t);
  CHECK(tr.final_t == *cfg.initial_t);
}

TEST_CASE("primal-dual cap step follows the indicator") {
  // one iteration from t = 1: capped or above moves up by step_t, below moves
  // down by step_t (1/alpha - 1)
  const NetworkSpec spec = single_terminal(0.5);
  SolverConfig cfg = short_run(1, 7);
  cfg.step_t = 0.01;
  const IterateTrace tr = run_primal_dual(spec, cfg);
  const double r = tr.rows[0].r[0];
  const Allocation a = allocate(spec, 0, tr.rows[0].h[0], 1.0, DualState{{1.0}, 1.0});
  const bool below = a.branch != PolicyBranch::kCap && r < 1.0;
  CHECK(tr.final_t[0] == doctest::Approx(below ? 1.0 - 0.01 : 1.0 + 0.01).epsilon(1e-15));
}

TEST_CASE("small alpha stays finite") {
  NetworkSpec spec = three_terminals(Utility::proportional_fairness());
  for (auto& term : spec.terminals) term.alpha = 0.1;
  SolverConfig cfg = short_run(20000);
  cfg.log_stride = 50;
  for (const IterateTrace& tr : {run_dual(spec, cfg), run_primal_dual(spec, cfg)}) {
    for (const TraceRow& row : tr.rows) {
      for (double v : row.lambda) CHECK(std::isfinite(v));
      for (double v : row.t) CHECK(std::isfinite(v));
      for (double v : row.p) CHECK(std::isfinite(v));
      CHECK(std::isfinite(row.mu));
    }
  }
}

TEST_CASE("configuration errors name the field") {
  const NetworkSpec spec = three_terminals(Utility::proportional_fairness());
  auto field_of = [&](SolverConfig c) {
    try {
      (void)run_dual(spec, c);
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string("none");
  };
  SolverConfig c = short_run(0);
  CHECK(field_of(c) == "solver.iterations");
  c = short_run(10);
  c.step_dual = 0.0;
  CHECK(field_of(c) == "solver.step_dual");
  c = short_run(10);
  c.seed = kEvaluationSeedBit | 1;
  CHECK(field_of(c) == "solver.seed");
  c = short_run(10);
  c.initial_lambda = std::vector<double>{1.0};
  CHECK(field_of(c) == "solver.initial_lambda");

  NetworkSpec bad = spec;
  bad.terminals[1].alpha = 0.0;
  CHECK_THROWS_AS(run_dual(bad, short_run(10)), ConfigError);
  bad = spec;
  bad.terminals.clear();
  CHECK_THROWS_AS(run_dual(bad, short_run(10)), ConfigError);
  bad = spec;
  bad.utility = Utility::sumrate({1.0, 1.0});
  CHECK_THROWS_AS(run_dual(bad, short_run(10)), ConfigError);
}

TEST_CASE("convergence diagnostic and band entry") {
  IterateTrace tr;
  tr.iterations = 100;
  tr.final_state = DualState{{1.0}, 1.0};
  for (std::int64_t k = 1; k <= 100; ++k) {
    const double v = k <= 90 ? 1.0 : 1.0005;
    tr.rows.push_back(TraceRow{k, {v}, 1.0, {k < 50 ? 0.0 : 2.0}, {}, {}, {}, {}});
  }
  const ConvergenceDiagnostic d = diagnose_convergence(tr);
  CHECK(d.converged);
  CHECK(d.lambda_change[0] == doctest::Approx(0.0005 / 1.0005));
  CHECK(d.mu_change == 0.0);
  CHECK_FALSE(diagnose_convergence(tr, 1e-4).converged);

  CHECK(first_band_entry(tr, 0, 2.0).value() == 50);
  CHECK_FALSE(first_band_entry(tr, 0, 5.0).has_value());

  IterateTrace sparse = tr;
  sparse.rows.resize(10);
  CHECK_FALSE(diagnose_convergence(sparse).converged);
}
