#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "riskalloc/engine.hpp"

namespace riskalloc {

enum class RunMode { kDual, kPrimalDual, kCompare, kEvaluate, kSweep };

std::string_view to_string(RunMode mode);

struct ExperimentConfig {
  RunMode mode = RunMode::kDual;
  NetworkSpec network;
  SolverConfig solver;
  /// Confidence levels applied to every terminal, one run each. Required for
  /// sweeps; optional for compare (empty means "use the terminals' own").
  std::vector<double> alphas;
  std::int64_t eval_samples = 1000000;
  std::size_t outage_points = 200;
  /// Evaluate mode only: frozen duals to evaluate instead of training.
  std::optional<DualState> policy;
  std::string output_dir = "out";

  bool operator==(const ExperimentConfig&) const = default;
};

/// Malformed JSON. line() and column() are 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Parses and fully validates a JSON experiment config. Unknown keys are
/// rejected. Throws ParseError for malformed JSON and ConfigError for schema
/// or range violations.
ExperimentConfig parse_config(std::string_view text);

ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON form; parse_config(emit_config(c)) == c.
std::string emit_config(const ExperimentConfig& config);

/// Throws ConfigError naming the offending field.
void validate(const ExperimentConfig& config);

/// Copy of `spec` with every terminal's confidence level set to `alpha`.
NetworkSpec with_alpha(NetworkSpec spec, double alpha);

}  // namespace riskalloc
