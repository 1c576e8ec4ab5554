#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "riskalloc/config.hpp"
#include "riskalloc/evaluation.hpp"

namespace riskalloc {

/// 17 significant digits, enough to round-trip any double.
std::string format_number(double value);

/// Columns: iter, lambda_1..N, mu, t_1..N, p_1..N, r_1..N. The first line is a
/// "# seed=<u64>" comment, followed by the header row.
std::string trace_csv(const IterateTrace& trace);

/// Columns: rate_level, empirical_1, analytic_1, ..., empirical_N, analytic_N.
std::string outage_csv(const EvaluationReport& report);

struct ComparisonRun {
  std::string label;  // e.g. "a0.45"; empty for a single run at the configured levels
  IterateTrace dual;
  IterateTrace primal_dual;
};

/// Columns: iter, then per run dtw_<label>_t<i> and pdtw_<label>_t<i> (or
/// dtw_t<i>, pdtw_t<i> for an unlabelled run).
/// All traces must log the same iterations.
std::string compare_csv(const std::vector<ComparisonRun>& runs, std::uint64_t seed);

std::string report_json(const EvaluationReport& report,
                        const std::optional<ConvergenceDiagnostic>& diagnostic);

struct ExperimentResult {
  std::vector<std::filesystem::path> files;
};

/// Runs the configured mode and writes its outputs under config.output_dir:
///   dtw / pdtw : trace.csv, outage.csv, report.json, config.json
///   compare    : compare.csv, config.json
///   evaluate   : outage.csv, report.json, config.json (+ trace.csv if trained)
///   sweep      : alpha_<a>/ with the dtw outputs, one directory per level
/// Throws on invalid configuration or I/O failure.
ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace riskalloc
