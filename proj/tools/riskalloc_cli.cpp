// Experiment driver: trains and evaluates risk-aware power allocation
// policies and writes CSV/JSON data for plotting.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "riskalloc/config.hpp"
#include "riskalloc/error.hpp"
#include "riskalloc/experiment.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> iterations;
  std::optional<std::int64_t> stride;
  std::vector<double> alphas;
};

void add_common_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "Experiment config (JSON)")->required();
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--seed", o.seed, "Training seed (< 2^63)");
  cmd->add_option("--iterations", o.iterations, "Solver iterations");
  cmd->add_option("--stride", o.stride, "Trace logging stride (1 = every iteration)");
  cmd->add_option("--alpha", o.alphas, "Comma-separated confidence levels")->delimiter(',');
}

int execute(const Overrides& o, std::optional<riskalloc::RunMode> mode) {
  using namespace riskalloc;
  ExperimentConfig cfg = load_config(o.config_path);
  if (mode) cfg.mode = *mode;
  if (o.out) cfg.output_dir = *o.out;
  if (o.seed) cfg.solver.seed = *o.seed;
  if (o.iterations) cfg.solver.iterations = *o.iterations;
  if (o.stride) cfg.solver.log_stride = *o.stride;
  if (!o.alphas.empty()) cfg.alphas = o.alphas;
  validate(cfg);

  const ExperimentResult result = run_experiment(cfg);
  for (const auto& path : result.files) std::cout << path.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Risk-aware power allocation via dual tail waterfilling"};
  app.require_subcommand(1);

  Overrides run_opts, compare_opts, evaluate_opts, sweep_opts;
  auto* run = app.add_subcommand("run", "Run the mode named in the config (dtw by default)");
  auto* compare = app.add_subcommand("compare", "DTW and PDTW t-iterates side by side");
  auto* evaluate = app.add_subcommand("evaluate", "Monte Carlo evaluation of a policy");
  auto* sweep = app.add_subcommand("sweep", "One DTW run per confidence level");
  add_common_flags(run, run_opts);
  add_common_flags(compare, compare_opts);
  add_common_flags(evaluate, evaluate_opts);
  add_common_flags(sweep, sweep_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return execute(run_opts, std::nullopt);
    if (compare->parsed()) return execute(compare_opts, riskalloc::RunMode::kCompare);
    if (evaluate->parsed()) return execute(evaluate_opts, riskalloc::RunMode::kEvaluate);
    if (sweep->parsed()) return execute(sweep_opts, riskalloc::RunMode::kSweep);
  } catch (const riskalloc::ParseError& e) {
    std::cerr << "config parse error: " << e.what() << '\n';
    return 2;
  } catch (const riskalloc::ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
