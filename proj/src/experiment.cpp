#include "riskalloc/experiment.hpp"

#include <fmt/format.h>

#include <cmath>
#include <exception>
#include <fstream>
#include <thread>

#include "json.hpp"

namespace riskalloc {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void append_row(std::string& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  out += '\n';
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

fs::path write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << contents;
  out.close();
  if (!out) throw std::runtime_error("failed writing " + path.string());
  return path;
}

std::string alpha_label(double alpha) { return fmt::format("a{}", alpha); }

struct TrainedRun {
  IterateTrace trace;
  EvaluationReport report;
  ConvergenceDiagnostic diagnostic;
};

TrainedRun train_and_evaluate(Algorithm algorithm, const NetworkSpec& spec,
                              const ExperimentConfig& cfg) {
  TrainedRun run;
  run.trace = riskalloc::run(algorithm, spec, cfg.solver);
  run.diagnostic = diagnose_convergence(run.trace);
  // The primal-dual policy is scored with the caps it learned.
  const FrozenPolicy policy = algorithm == Algorithm::kDual
                                  ? closed_form_policy(run.trace.final_state, spec)
                                  : FrozenPolicy{run.trace.final_state, run.trace.final_t};
  run.report = evaluate_policy(policy, spec, cfg.eval_samples, cfg.solver.seed, cfg.outage_points);
  return run;
}

void write_run(const fs::path& dir, const ExperimentConfig& cfg, const TrainedRun& run,
               ExperimentResult& result) {
  result.files.push_back(write_file(dir / "trace.csv", trace_csv(run.trace)));
  result.files.push_back(write_file(dir / "outage.csv", outage_csv(run.report)));
  result.files.push_back(write_file(dir / "report.json", report_json(run.report, run.diagnostic)));
  result.files.push_back(write_file(dir / "config.json", emit_config(cfg)));
}

void run_single(const ExperimentConfig& cfg, Algorithm algorithm, ExperimentResult& result) {
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  write_run(dir, cfg, train_and_evaluate(algorithm, cfg.network, cfg), result);
}

void run_evaluate(const ExperimentConfig& cfg, ExperimentResult& result) {
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  if (!cfg.policy) {
    write_run(dir, cfg, train_and_evaluate(Algorithm::kDual, cfg.network, cfg), result);
    return;
  }
  const EvaluationReport report = evaluate_policy(*cfg.policy, cfg.network, cfg.eval_samples,
                                                  cfg.solver.seed, cfg.outage_points);
  result.files.push_back(write_file(dir / "outage.csv", outage_csv(report)));
  result.files.push_back(write_file(dir / "report.json", report_json(report, std::nullopt)));
  result.files.push_back(write_file(dir / "config.json", emit_config(cfg)));
}

void run_compare(const ExperimentConfig& cfg, ExperimentResult& result) {
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);

  std::vector<NetworkSpec> specs;
  std::vector<ComparisonRun> runs;
  if (cfg.alphas.empty()) {
    specs.push_back(cfg.network);
    runs.push_back({});
  }
  for (double a : cfg.alphas) {
    specs.push_back(with_alpha(cfg.network, a));
    runs.push_back({alpha_label(a), {}, {}});
  }

  // Two workers per level; each owns its trace slot.
  std::vector<std::exception_ptr> errors(2 * runs.size());
  {
    std::vector<std::jthread> workers;
    for (std::size_t k = 0; k < runs.size(); ++k) {
      workers.emplace_back([&, k] {
        try {
          runs[k].dual = run_dual(specs[k], cfg.solver);
        } catch (...) {
          errors[2 * k] = std::current_exception();
        }
      });
      workers.emplace_back([&, k] {
        try {
          runs[k].primal_dual = run_primal_dual(specs[k], cfg.solver);
        } catch (...) {
          errors[2 * k + 1] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  result.files.push_back(write_file(dir / "compare.csv", compare_csv(runs, cfg.solver.seed)));
  result.files.push_back(write_file(dir / "config.json", emit_config(cfg)));
}

void run_sweep(const ExperimentConfig& cfg, ExperimentResult& result) {
  const fs::path root(cfg.output_dir);
  fs::create_directories(root);

  std::vector<ExperimentConfig> configs;
  for (double a : cfg.alphas) {
    ExperimentConfig c = cfg;
    c.mode = RunMode::kDual;
    c.alphas.clear();
    c.network = with_alpha(cfg.network, a);
    c.output_dir = (root / fmt::format("alpha_{}", a)).string();
    configs.push_back(std::move(c));
  }
  std::vector<ExperimentResult> partial(configs.size());
  std::vector<std::exception_ptr> errors(configs.size());
  {
    std::vector<std::jthread> workers;
    for (std::size_t k = 0; k < configs.size(); ++k) {
      workers.emplace_back([&, k] {
        try {
          run_single(configs[k], Algorithm::kDual, partial[k]);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (auto& p : partial) result.files.insert(result.files.end(), p.files.begin(), p.files.end());
  result.files.push_back(write_file(root / "config.json", emit_config(cfg)));
}

}  // namespace

std::string format_number(double value) { return fmt::format("{:.17g}", value); }

std::string trace_csv(const IterateTrace& trace) {
  const std::size_t n = trace.final_state.lambda.size();
  std::string out = fmt::format("# seed={} algorithm={}\n", trace.seed, to_string(trace.algorithm));
  std::vector<std::string> header{"iter"};
  for (std::size_t i = 1; i <= n; ++i) header.push_back(fmt::format("lambda_{}", i));
  header.push_back("mu");
  for (const char* name : {"t", "p", "r"}) {
    for (std::size_t i = 1; i <= n; ++i) header.push_back(fmt::format("{}_{}", name, i));
  }
  append_row(out, header);

  std::vector<std::string> cells;
  for (const TraceRow& row : trace.rows) {
    cells.clear();
    cells.push_back(std::to_string(row.iteration));
    for (double v : row.lambda) cells.push_back(format_number(v));
    cells.push_back(format_number(row.mu));
    for (const auto* field : {&row.t, &row.p, &row.r}) {
      for (double v : *field) cells.push_back(format_number(v));
    }
    append_row(out, cells);
  }
  return out;
}

std::string outage_csv(const EvaluationReport& report) {
  const OutageCurve& curve = report.outage;
  std::string out = fmt::format("# seed={} samples={}\n", report.seed, report.samples);
  std::vector<std::string> header{"rate_level"};
  for (std::size_t i = 1; i <= curve.empirical.size(); ++i) {
    header.push_back(fmt::format("empirical_{}", i));
    header.push_back(fmt::format("analytic_{}", i));
  }
  append_row(out, header);
  std::vector<std::string> cells;
  for (std::size_t k = 0; k < curve.levels.size(); ++k) {
    cells.clear();
    cells.push_back(format_number(curve.levels[k]));
    for (std::size_t i = 0; i < curve.empirical.size(); ++i) {
      cells.push_back(format_number(curve.empirical[i][k]));
      cells.push_back(format_number(curve.analytic[i][k]));
    }
    append_row(out, cells);
  }
  return out;
}

std::string compare_csv(const std::vector<ComparisonRun>& runs, std::uint64_t seed) {
  std::string out = fmt::format("# seed={}\n", seed);
  std::vector<std::string> header{"iter"};
  for (const ComparisonRun& run : runs) {
    const std::string infix = run.label.empty() ? "" : run.label + "_";
    const std::size_t n = run.dual.final_state.lambda.size();
    for (const char* algo : {"dtw", "pdtw"}) {
      for (std::size_t i = 1; i <= n; ++i) header.push_back(fmt::format("{}_{}t{}", algo, infix, i));
    }
  }
  append_row(out, header);
  if (runs.empty()) return out;

  const std::size_t rows = runs.front().dual.rows.size();
  for (const ComparisonRun& run : runs) {
    if (run.dual.rows.size() != rows || run.primal_dual.rows.size() != rows) {
      throw std::logic_error("compare_csv: traces log different iterations");
    }
  }
  std::vector<std::string> cells;
  for (std::size_t k = 0; k < rows; ++k) {
    cells.clear();
    cells.push_back(std::to_string(runs.front().dual.rows[k].iteration));
    for (const ComparisonRun& run : runs) {
      for (double v : run.dual.rows[k].t) cells.push_back(format_number(v));
      for (double v : run.primal_dual.rows[k].t) cells.push_back(format_number(v));
    }
    append_row(out, cells);
  }
  return out;
}

std::string report_json(const EvaluationReport& report,
                        const std::optional<ConvergenceDiagnostic>& diagnostic) {
  json j;
  j["seed"] = report.seed;
  j["stream_seed"] = report.stream_seed;
  j["samples"] = report.samples;
  j["risk_neutral_routing"] = report.risk_neutral_routing;
  j["power_budget"] = report.power_budget;
  j["mean_total_power"] = report.mean_total_power;
  j["power_gap"] = report.power_gap;
  j["duals"] = {{"lambda", report.duals.lambda}, {"mu", report.duals.mu}};
  j["terminals"] = json::array();
  for (const TerminalReport& t : report.terminals) {
    j["terminals"].push_back({{"alpha", t.alpha},
                              {"noise_variance", t.noise_variance},
                              {"value_at_risk", number_or_null(t.value_at_risk)},
                              {"cvar", t.cvar},
                              {"mean_rate", t.mean_rate},
                              {"risk_neutral", t.risk_neutral}});
  }
  j["outage"] = {{"levels", report.outage.levels},
                 {"empirical", report.outage.empirical},
                 {"analytic", report.outage.analytic}};
  if (diagnostic) {
    j["convergence"] = {{"converged", diagnostic->converged},
                        {"lambda_change", diagnostic->lambda_change},
                        {"mu_change", diagnostic->mu_change},
                        {"max_change", number_or_null(diagnostic->max_change)}};
  }
  return j.dump(2) + "\n";
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  validate(config);
  ExperimentResult result;
  switch (config.mode) {
    case RunMode::kDual:
      run_single(config, Algorithm::kDual, result);
      break;
    case RunMode::kPrimalDual:
      run_single(config, Algorithm::kPrimalDual, result);
      break;
    case RunMode::kCompare:
      run_compare(config, result);
      break;
    case RunMode::kEvaluate:
      run_evaluate(config, result);
      break;
    case RunMode::kSweep:
      run_sweep(config, result);
      break;
  }
  return result;
}

}  // namespace riskalloc
