#include "riskalloc/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "riskalloc/error.hpp"

namespace riskalloc {

using nlohmann::json;

namespace {

// Walks one JSON object, remembering which keys were read so that leftovers
// can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  void mark(const char* key) { seen_.insert(key); }

  bool has(const char* key) const {
    const auto it = j_.find(key);
    return it != j_.end() && !it->is_null();
  }

  const json& get(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) throw ConfigError(field(key), "required field missing");
    return *it;
  }

  double number(const char* key) { return as_number(get(key), field(key)); }

  double number_or(const char* key, double fallback) {
    seen_.insert(key);
    return has(key) ? number(key) : fallback;
  }

  std::int64_t integer_or(const char* key, std::int64_t fallback) {
    seen_.insert(key);
    return has(key) ? as_integer(get(key), field(key)) : fallback;
  }

  std::uint64_t unsigned_or(const char* key, std::uint64_t fallback) {
    seen_.insert(key);
    if (!has(key)) return fallback;
    const json& v = get(key);
    if (!v.is_number_unsigned()) throw ConfigError(field(key), "expected a nonnegative integer");
    return v.get<std::uint64_t>();
  }

  std::string string(const char* key) {
    const json& v = get(key);
    if (!v.is_string()) throw ConfigError(field(key), "expected a string");
    return v.get<std::string>();
  }

  std::string string_or(const char* key, std::string fallback) {
    seen_.insert(key);
    return has(key) ? string(key) : fallback;
  }

  std::vector<double> numbers(const char* key) {
    const json& v = get(key);
    if (!v.is_array()) throw ConfigError(field(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(as_number(v[i], field(key) + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

  std::optional<std::vector<double>> optional_numbers(const char* key) {
    seen_.insert(key);
    if (!has(key)) return std::nullopt;
    return numbers(key);
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(field(key), "unknown key");
    }
  }

  static double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where, "expected a number");
    return v.get<double>();
  }

  static std::int64_t as_integer(const json& v, const std::string& where) {
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9.0e15) {
        return static_cast<std::int64_t>(d);
      }
    }
    throw ConfigError(where, "expected an integer");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

FadingModel read_fading(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  const std::string kind = r.string("kind");
  try {
    FadingModel model = [&] {
      if (kind == "rayleigh") return FadingModel::rayleigh(r.number("scale"));
      if (kind == "weibull") return FadingModel::weibull(r.number("scale"), r.number("shape"));
      if (kind == "empirical") return FadingModel::empirical(r.numbers("samples"));
      throw ConfigError(r.field("kind"), "expected rayleigh, weibull or empirical");
    }();
    r.finish();
    return model;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
}

TerminalSpec read_terminal(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  TerminalSpec t;
  t.noise_variance = r.number("noise_variance");
  t.alpha = r.number("alpha");
  t.fading = read_fading(r.get("fading"), r.field("fading"));
  r.finish();
  return t;
}

Utility read_utility(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  const std::string kind = r.string("kind");
  Utility u = Utility::proportional_fairness();
  if (kind == "sumrate") {
    try {
      u = Utility::sumrate(r.numbers("weights"));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw ConfigError(r.field("weights"), e.what());
    }
  } else if (kind != "proportional_fairness") {
    throw ConfigError(r.field("kind"), "expected sumrate or proportional_fairness");
  }
  r.finish();
  return u;
}

NetworkSpec read_network(const json& j) {
  ObjectReader r(j, "network");
  NetworkSpec spec;
  spec.power_budget = r.number("power_budget");
  spec.utility = read_utility(r.get("utility"), "network.utility");
  const json& terms = r.get("terminals");
  if (!terms.is_array()) throw ConfigError("network.terminals", "expected an array");
  for (std::size_t i = 0; i < terms.size(); ++i) {
    spec.terminals.push_back(read_terminal(terms[i], "network.terminals[" + std::to_string(i) + "]"));
  }
  r.finish();
  return spec;
}

SolverConfig read_solver(const json& j) {
  ObjectReader r(j, "solver");
  SolverConfig c;
  c.step_dual = r.number_or("step_dual", c.step_dual);
  c.step_t = r.number_or("step_t", c.step_t);
  c.iterations = r.integer_or("iterations", c.iterations);
  c.seed = r.unsigned_or("seed", c.seed);
  c.initial_lambda = r.optional_numbers("initial_lambda");
  c.initial_mu = r.number_or("initial_mu", c.initial_mu);
  c.initial_t = r.optional_numbers("initial_t");
  c.log_stride = r.integer_or("log_stride", c.log_stride);
  r.finish();
  return c;
}

RunMode read_mode(const std::string& s) {
  if (s == "dtw") return RunMode::kDual;
  if (s == "pdtw") return RunMode::kPrimalDual;
  if (s == "compare") return RunMode::kCompare;
  if (s == "evaluate") return RunMode::kEvaluate;
  if (s == "sweep") return RunMode::kSweep;
  throw ConfigError("mode", "expected dtw, pdtw, compare, evaluate or sweep");
}

void read_evaluation(const json& j, ExperimentConfig& cfg) {
  ObjectReader r(j, "evaluation");
  cfg.eval_samples = r.integer_or("samples", cfg.eval_samples);
  const std::int64_t points =
      r.integer_or("outage_points", static_cast<std::int64_t>(cfg.outage_points));
  if (points < 2) throw ConfigError("evaluation.outage_points", "must be >= 2");
  cfg.outage_points = static_cast<std::size_t>(points);
  if (r.has("policy")) {
    ObjectReader p(r.get("policy"), "evaluation.policy");
    DualState duals;
    duals.lambda = p.numbers("lambda");
    duals.mu = p.number("mu");
    p.finish();
    cfg.policy = std::move(duals);
  }
  r.mark("policy");
  r.finish();
}

std::pair<std::size_t, std::size_t> line_and_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

json fading_json(const FadingModel& model) {
  json j;
  j["kind"] = std::string(to_string(model.kind()));
  std::visit(
      [&j](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, FadingModel::Rayleigh>) {
          j["scale"] = p.scale;
        } else if constexpr (std::is_same_v<P, FadingModel::Weibull>) {
          j["scale"] = p.scale;
          j["shape"] = p.shape;
        } else {
          j["samples"] = p.samples;
        }
      },
      model.params());
  return j;
}

}  // namespace

std::string_view to_string(RunMode mode) {
  switch (mode) {
    case RunMode::kDual:
      return "dtw";
    case RunMode::kPrimalDual:
      return "pdtw";
    case RunMode::kCompare:
      return "compare";
    case RunMode::kEvaluate:
      return "evaluate";
    case RunMode::kSweep:
      return "sweep";
  }
  return "unknown";
}

void validate(const ExperimentConfig& config) {
  validate(config.network);
  validate(config.solver, config.network);
  if (config.mode == RunMode::kSweep && config.alphas.empty()) {
    throw ConfigError("alphas", "sweep mode needs at least one confidence level");
  }
  for (std::size_t i = 0; i < config.alphas.size(); ++i) {
    const double a = config.alphas[i];
    if (!(a >= kMinAlpha && a <= 1.0)) {
      throw ConfigError("alphas[" + std::to_string(i) + "]", "must lie in [1e-6, 1]");
    }
  }
  if (config.eval_samples < 1) throw ConfigError("evaluation.samples", "must be >= 1");
  if (config.outage_points < 2) throw ConfigError("evaluation.outage_points", "must be >= 2");
  if (config.policy) {
    if (config.policy->lambda.size() != config.network.size()) {
      throw ConfigError("evaluation.policy.lambda", "need one value per terminal");
    }
    for (double v : config.policy->lambda) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw ConfigError("evaluation.policy.lambda", "entries must be finite and >= 0");
      }
    }
    if (!(config.policy->mu >= 0.0) || !std::isfinite(config.policy->mu)) {
      throw ConfigError("evaluation.policy.mu", "must be finite and >= 0");
    }
  }
  if (config.output_dir.empty()) throw ConfigError("output_dir", "must be nonempty");
}

ExperimentConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_and_column(text, e.byte);
    throw ParseError(line, column, e.what());
  }

  ObjectReader r(root, "");
  ExperimentConfig cfg;
  cfg.mode = read_mode(r.string_or("mode", "dtw"));
  cfg.network = read_network(r.get("network"));
  if (r.has("solver")) cfg.solver = read_solver(r.get("solver"));
  r.mark("solver");
  if (r.has("evaluation")) read_evaluation(r.get("evaluation"), cfg);
  r.mark("evaluation");
  if (r.has("alphas")) cfg.alphas = r.numbers("alphas");
  r.mark("alphas");
  cfg.output_dir = r.string_or("output_dir", cfg.output_dir);
  r.finish();
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string emit_config(const ExperimentConfig& config) {
  json root;
  root["mode"] = std::string(to_string(config.mode));
  root["output_dir"] = config.output_dir;

  json network;
  network["power_budget"] = config.network.power_budget;
  json utility;
  utility["kind"] = std::string(to_string(config.network.utility.kind()));
  if (config.network.utility.kind() == UtilityKind::kSumrate) {
    utility["weights"] = config.network.utility.weights();
  }
  network["utility"] = utility;
  network["terminals"] = json::array();
  for (const TerminalSpec& t : config.network.terminals) {
    network["terminals"].push_back(
        {{"noise_variance", t.noise_variance}, {"alpha", t.alpha}, {"fading", fading_json(t.fading)}});
  }
  root["network"] = network;

  const SolverConfig& s = config.solver;
  json solver = {{"step_dual", s.step_dual},   {"step_t", s.step_t},
                 {"iterations", s.iterations}, {"seed", s.seed},
                 {"initial_mu", s.initial_mu}, {"log_stride", s.log_stride}};
  if (s.initial_lambda) solver["initial_lambda"] = *s.initial_lambda;
  if (s.initial_t) solver["initial_t"] = *s.initial_t;
  root["solver"] = solver;

  json evaluation = {{"samples", config.eval_samples}, {"outage_points", config.outage_points}};
  if (config.policy) {
    evaluation["policy"] = {{"lambda", config.policy->lambda}, {"mu", config.policy->mu}};
  }
  root["evaluation"] = evaluation;
  if (!config.alphas.empty()) root["alphas"] = config.alphas;
  return root.dump(2) + "\n";
}

NetworkSpec with_alpha(NetworkSpec spec, double alpha) {
  for (TerminalSpec& t : spec.terminals) t.alpha = alpha;
  return spec;
}

}  // namespace riskalloc
