#include "bai/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "bai/allocation.hpp"
#include "bai/bounds.hpp"
#include "bai/error.hpp"

namespace bai {

using Json = nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------------------
// Config parsing

const char* const kKnownKeys[] = {"K",          "means",      "variances", "variance_support",
                                  "mean_rule",  "gap_bounds", "strategies", "budgets",
                                  "trials",     "seed",       "workers"};

[[noreturn]] void type_error(std::string_view key, std::string_view expected) {
  throw ParseError("key '" + std::string(key) + "': expected " + std::string(expected));
}

double to_double(const Json& j, std::string_view key) {
  if (!j.is_number()) type_error(key, "a number");
  return j.get<double>();
}

std::uint64_t to_uint(const Json& j, std::string_view key) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_float()) {
    const double d = j.get<double>();
    if (d >= 0.0 && d < 18446744073709551616.0 && d == std::floor(d)) {
      return static_cast<std::uint64_t>(d);
    }
  }
  type_error(key, "a non-negative integer");
}

std::vector<double> to_doubles(const Json& j, std::string_view key) {
  if (!j.is_array()) type_error(key, "an array of numbers");
  std::vector<double> out;
  for (const auto& e : j) out.push_back(to_double(e, key));
  return out;
}

std::pair<double, double> to_pair(const Json& j, std::string_view key) {
  const auto v = to_doubles(j, key);
  if (v.size() != 2) type_error(key, "[lo, hi]");
  return {v[0], v[1]};
}

MeanRule to_mean_rule(const Json& j) {
  std::string type;
  if (j.is_string()) {
    type = j.get<std::string>();
  } else if (j.is_object()) {
    if (!j.contains("type") || !j["type"].is_string()) type_error("mean_rule.type", "a string");
    type = j["type"].get<std::string>();
    for (const auto& [k, v] : j.items()) {
      const bool known = k == "type" || (type == "fixed" && k == "value") ||
                         (type == "uniform" && (k == "lo" || k == "hi"));
      if (!known) throw ParseError("unknown key 'mean_rule." + k + "'");
    }
  } else {
    type_error("mean_rule", "\"fixed\", \"uniform\" or an object");
  }
  if (type == "fixed") {
    FixedMeans rule;
    if (j.is_object() && j.contains("value")) rule.value = to_double(j["value"], "mean_rule.value");
    return rule;
  }
  if (type == "uniform") {
    UniformMeans rule;
    if (j.is_object() && j.contains("lo")) rule.lo = to_double(j["lo"], "mean_rule.lo");
    if (j.is_object() && j.contains("hi")) rule.hi = to_double(j["hi"], "mean_rule.hi");
    return rule;
  }
  throw ParseError("key 'mean_rule': unknown rule '" + type + "'");
}

void validate_document(const ConfigDocument& c) {
  if (c.variance_support) {
    if (c.variances) throw ValidationError("give either variances or variance_support, not both");
    if (c.means) throw ValidationError("means cannot be combined with variance_support");
    if (!c.arms) throw ValidationError("variance_support needs K");
    InstanceGenerator g{*c.arms, c.mean_rule.value_or(FixedMeans{}), *c.variance_support};
    ExperimentConfig probe;
    probe.instance = g;
    probe.strategies.push_back(StrategySpec::gna_eba());
    probe.budgets.push_back(1);
    probe.validate();
  } else if (c.mean_rule) {
    throw ValidationError("mean_rule needs variance_support");
  }
  if (c.means && !c.variances) {
    throw ValidationError("means need variances");
  }
  if (c.arms && *c.arms < 2) {
    throw ValidationError("K must be >= 2");
  }
  if (c.variances) {
    if (c.arms && c.variances->size() != *c.arms) {
      throw ValidationError("K does not match the number of variances");
    }
    validate_variances(*c.variances);
  }
  if (c.means) {
    if (c.arms && c.means->size() != *c.arms) {
      throw ValidationError("K does not match the number of means");
    }
    const BanditInstance instance(*c.means, *c.variances);
    if (c.gap_bounds && !validate_gap_bounds(instance, *c.gap_bounds)) {
      throw ValidationError("gap_bounds do not contain every suboptimal gap");
    }
  }
  std::optional<std::size_t> k = c.arms;
  if (!k && c.variances) k = c.variances->size();
  for (const auto& s : c.strategies) {
    if (s.conjectured_arm() && k && *s.conjectured_arm() >= *k) {
      throw ValidationError("strategy " + s.name() + " names an arm beyond K");
    }
  }
  for (std::size_t i = 0; i < c.budgets.size(); ++i) {
    if (c.budgets[i] == 0) throw ValidationError("budgets must be >= 1");
    if (i > 0 && c.budgets[i] <= c.budgets[i - 1]) {
      throw ValidationError("budgets must be strictly increasing");
    }
  }
  if (c.trials && *c.trials == 0) throw ValidationError("trials must be >= 1");
  if (c.workers && *c.workers == 0) throw ValidationError("workers must be >= 1");
}

std::string line_context(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace

ConfigDocument parse_config(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // e.byte is one past the offending character.
    throw ParseError(line_context(text, e.byte == 0 ? 0 : e.byte - 1) +
                     ": malformed JSON config");
  }
  if (!j.is_object()) throw ParseError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(std::begin(kKnownKeys), std::end(kKnownKeys), key) == std::end(kKnownKeys)) {
      throw ParseError("unknown key '" + key + "'");
    }
  }

  ConfigDocument c;
  if (j.contains("K")) c.arms = to_uint(j["K"], "K");
  if (j.contains("means")) c.means = to_doubles(j["means"], "means");
  if (j.contains("variances")) c.variances = to_doubles(j["variances"], "variances");
  if (j.contains("variance_support")) {
    const auto [lo, hi] = to_pair(j["variance_support"], "variance_support");
    c.variance_support = VarianceSupport{lo, hi};
  }
  if (j.contains("mean_rule")) c.mean_rule = to_mean_rule(j["mean_rule"]);
  if (j.contains("gap_bounds")) {
    const auto [lo, hi] = to_pair(j["gap_bounds"], "gap_bounds");
    c.gap_bounds = GapBounds(lo, hi);
  }
  if (j.contains("strategies")) {
    if (!j["strategies"].is_array()) type_error("strategies", "an array of strategy names");
    for (const auto& s : j["strategies"]) {
      if (!s.is_string()) type_error("strategies", "an array of strategy names");
      c.strategies.push_back(StrategySpec::parse(s.get<std::string>()));
    }
  }
  if (j.contains("budgets")) {
    if (!j["budgets"].is_array()) type_error("budgets", "an array of positive integers");
    for (const auto& b : j["budgets"]) c.budgets.push_back(to_uint(b, "budgets"));
  }
  if (j.contains("trials")) c.trials = to_uint(j["trials"], "trials");
  if (j.contains("seed")) c.seed = to_uint(j["seed"], "seed");
  if (j.contains("workers")) {
    const auto w = to_uint(j["workers"], "workers");
    if (w > 1024) throw ValidationError("workers must be <= 1024");
    c.workers = static_cast<unsigned>(w);
  }
  validate_document(c);
  return c;
}

std::string config_to_json(const ConfigDocument& c) {
  Json j = Json::object();
  if (c.arms) j["K"] = *c.arms;
  if (c.means) j["means"] = *c.means;
  if (c.variances) j["variances"] = *c.variances;
  if (c.variance_support) {
    j["variance_support"] = {c.variance_support->lo, c.variance_support->hi};
  }
  if (c.mean_rule) {
    if (const auto* f = std::get_if<FixedMeans>(&*c.mean_rule)) {
      j["mean_rule"] = {{"type", "fixed"}, {"value", f->value}};
    } else {
      const auto& u = std::get<UniformMeans>(*c.mean_rule);
      j["mean_rule"] = {{"type", "uniform"}, {"lo", u.lo}, {"hi", u.hi}};
    }
  }
  if (c.gap_bounds) j["gap_bounds"] = {c.gap_bounds->lo(), c.gap_bounds->hi()};
  if (!c.strategies.empty()) {
    j["strategies"] = Json::array();
    for (const auto& s : c.strategies) j["strategies"].push_back(s.name());
  }
  if (!c.budgets.empty()) j["budgets"] = c.budgets;
  if (c.trials) j["trials"] = *c.trials;
  if (c.seed) j["seed"] = *c.seed;
  if (c.workers) j["workers"] = *c.workers;
  return j.dump(2) + "\n";
}

ExperimentConfig ConfigDocument::experiment(std::optional<std::uint64_t> seed_override) const {
  ExperimentConfig e;
  if (means && variances) {
    e.instance = BanditInstance(*means, *variances);
  } else if (variance_support && arms) {
    e.instance = InstanceGenerator{*arms, mean_rule.value_or(FixedMeans{}), *variance_support};
  } else {
    throw ValidationError("config needs means and variances, or K and variance_support");
  }
  if (strategies.empty()) throw ValidationError("config needs strategies");
  if (budgets.empty()) throw ValidationError("config needs budgets");
  if (!trials) throw ValidationError("config needs trials");
  e.strategies = strategies;
  e.budgets = budgets;
  e.trials = *trials;
  e.master_seed = seed_override.value_or(seed.value_or(0));
  e.gap_bounds = gap_bounds;
  e.workers = workers.value_or(1);
  e.validate();
  return e;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
    f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    f.flush();
    if (!f) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw IoError("write to " + tmp.string() + " failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw IoError("cannot rename onto " + path.string() + ": " + ec.message());
  }
}

// ---------------------------------------------------------------------------
// Command line

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  if (f.bad()) throw IoError("read of " + path + " failed");
  return ss.str();
}

std::uint64_t parse_seed_env(const char* text) {
  std::uint64_t value = 0;
  const std::string_view s(text);
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || end != s.data() + s.size() || s.empty()) {
    throw ParseError(std::string(kSeedEnvVar) + " must be a non-negative integer");
  }
  return value;
}

// --seed beats the config seed, which beats the environment, which beats 0.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, const ConfigDocument& doc) {
  if (flag) return *flag;
  if (doc.seed) return *doc.seed;
  if (const char* env = std::getenv(kSeedEnvVar); env != nullptr && *env != '\0') {
    return parse_seed_env(env);
  }
  return 0;
}

void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << text;
  } else {
    write_file_atomic(out_path, text);
  }
}

Json weights_json(const AllocationWeights& w) {
  return Json(std::vector<double>(w.values().begin(), w.values().end()));
}

void print_cell_issues(const std::vector<CellFailure>& issues, std::string_view status,
                       std::ostream& err) {
  for (const auto& f : issues) {
    Json j = {{"status", status}, {"strategy", f.strategy}};
    j["T"] = f.budget ? Json(*f.budget) : Json(nullptr);
    j["message"] = f.message;
    err << j.dump() << '\n';
  }
}

struct SolveArgs {
  std::vector<double> variances;
  std::optional<std::size_t> best_arm;
  bool oo = false;
  std::vector<double> means;
  double tolerance = SolverOptions{}.tolerance;
  std::size_t max_iterations = SolverOptions{}.max_iterations;
  std::string out;
};

int cmd_solve(const SolveArgs& a, std::ostream& out) {
  const SolverOptions opts{a.tolerance, a.max_iterations};
  Json j;
  if (a.oo) {
    if (a.means.empty()) throw ValidationError("--oo needs --means");
    const BanditInstance instance(a.means, a.variances);
    const auto r = solve_oo(instance, opts);
    j = {{"weights", weights_json(r.weights)}, {"objective", r.objective},
         {"converged", r.converged}, {"iterations", r.iterations}};
  } else if (a.best_arm) {
    validate_variances(a.variances);
    if (*a.best_arm == 0 || *a.best_arm > a.variances.size()) {
      throw ValidationError("--best-arm must be between 1 and K");
    }
    const ArmIndex star = *a.best_arm - 1;
    const auto w = solve_known_best(a.variances, star);
    j = {{"weights", weights_json(w)},
         {"objective", known_best_objective(w, a.variances, star)},
         {"converged", true},
         {"iterations", 0}};
  } else {
    const auto r = solve_gna(a.variances, opts);
    j = {{"weights", weights_json(r.weights)}, {"objective", r.objective},
         {"converged", r.converged}, {"iterations", r.iterations}};
  }
  emit(j.dump(2) + "\n", a.out, out);
  return kExitOk;
}

struct ConfigArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::string format = "csv";
};

int cmd_bounds(const ConfigArgs& a, std::ostream& out) {
  const ConfigDocument doc = parse_config(read_file(a.config));
  const std::uint64_t seed = resolve_seed(a.seed, doc);

  std::vector<double> variances;
  std::optional<BanditInstance> instance;
  if (doc.means) {
    instance.emplace(*doc.means, *doc.variances);
  } else if (doc.variance_support) {
    instance = generate_instance(
        InstanceGenerator{*doc.arms, doc.mean_rule.value_or(FixedMeans{}), *doc.variance_support},
        seed);
  }
  if (instance) {
    variances.assign(instance->variances().begin(), instance->variances().end());
  } else if (doc.variances) {
    variances = *doc.variances;
  } else {
    throw ValidationError("bounds needs variances, or K and variance_support");
  }

  std::optional<GapBounds> gb = doc.gap_bounds;
  if (!gb && instance) gb = observed_gap_bounds(*instance);
  if (!gb) throw ValidationError("bounds needs gap_bounds or means");

  const SolverReport gna = solve_gna(variances);
  Json j;
  j["gap_bounds"] = {gb->lo(), gb->hi()};
  j["lower_bound"] = worst_case_lower_bound(gb->hi(), gna).value();
  j["upper_bound"] = gna_upper_bound(gb->lo(), gna).value();
  j["uniform_lower_bound_per_astar"] = Json::array();
  for (ArmIndex s = 0; s < variances.size(); ++s) {
    j["uniform_lower_bound_per_astar"].push_back(
        uniform_lower_bound(gb->hi(), variances, s).value());
  }
  j["gna_weights"] = weights_json(gna.weights);
  if (instance && !doc.budgets.empty()) {
    Json c = {{"strategy", "gna_eba"}, {"T", doc.budgets}, {"bound", Json::array()}};
    for (const auto t : doc.budgets) {
      // Evaluate at the realized sample fractions when every arm is sampled.
      const auto schedule = build_schedule(gna.weights, t);
      const AllocationWeights w = schedule.has_unsampled_arm()
                                      ? gna.weights
                                      : AllocationWeights(schedule.fractions());
      c["bound"].push_back(chernoff_misid_bound(*instance, w, t));
    }
    j["chernoff"] = std::move(c);
  } else {
    j["chernoff"] = nullptr;
  }
  emit(j.dump(2) + "\n", a.out, out);
  return kExitOk;
}

ExperimentConfig load_experiment(const ConfigArgs& a) {
  const ConfigDocument doc = parse_config(read_file(a.config));
  ExperimentConfig e = doc.experiment(resolve_seed(a.seed, doc));
  if (a.workers) {
    if (*a.workers == 0) throw ValidationError("workers must be >= 1");
    e.workers = *a.workers;
  }
  return e;
}

int cmd_simulate(const ConfigArgs& a, std::ostream& out, std::ostream& err) {
  const ExperimentConfig e = load_experiment(a);
  const SweepReport report = run_sweep(e);
  Json j;
  j["instance"] = {{"means", std::vector<double>(report.instance.means().begin(),
                                                 report.instance.means().end())},
                   {"variances", std::vector<double>(report.instance.variances().begin(),
                                                     report.instance.variances().end())},
                   {"best_arm", report.instance.best_arm() + 1}};
  j["master_seed"] = e.master_seed;
  j["trials"] = e.trials;
  j["weights"] = Json::object();
  for (const auto& [name, w] : report.weights) {
    j["weights"][name] = w ? weights_json(*w) : Json(nullptr);
  }
  j["rows"] = Json::parse(to_json(report.rows));
  auto issues = [](const std::vector<CellFailure>& v) {
    Json arr = Json::array();
    for (const auto& f : v) {
      arr.push_back({{"strategy", f.strategy},
                     {"T", f.budget ? Json(*f.budget) : Json(nullptr)},
                     {"message", f.message}});
    }
    return arr;
  };
  j["failures"] = issues(report.failures);
  j["warnings"] = issues(report.warnings);
  emit(j.dump(2) + "\n", a.out, out);
  print_cell_issues(report.failures, "cell_failure", err);
  print_cell_issues(report.warnings, "warning", err);
  return kExitOk;
}

int cmd_sweep(const ConfigArgs& a, std::ostream& err) {
  const ExperimentConfig e = load_experiment(a);
  const SweepReport report = run_sweep(e);
  write_file_atomic(a.out, a.format == "json" ? to_json(report.rows) : to_csv(report.rows));
  print_cell_issues(report.failures, "cell_failure", err);
  print_cell_issues(report.warnings, "warning", err);
  return kExitOk;
}

int report_error(std::ostream& err, std::string_view kind, std::string_view message, int code) {
  Json j = {{"status", "error"}, {"kind", kind}, {"message", message}, {"exit_code", code}};
  err << j.dump() << '\n';
  return code;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fixed-budget best-arm identification for Gaussian bandits", "bai"};
  app.require_subcommand(1);

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "Compute an allocation");
  solve_cmd->add_option("--variances", solve.variances, "Arm variances")
      ->required()
      ->delimiter(',');
  auto* best_opt =
      solve_cmd->add_option("--best-arm", solve.best_arm, "Known best arm (1-based), closed form");
  auto* oo_opt = solve_cmd->add_flag("--oo", solve.oo, "Oracle allocation from true means");
  oo_opt->excludes(best_opt);
  solve_cmd->add_option("--means", solve.means, "Arm means (with --oo)")->delimiter(',');
  solve_cmd->add_option("--tol", solve.tolerance, "Solver tolerance");
  solve_cmd->add_option("--max-iter", solve.max_iterations, "Solver iteration cap");
  solve_cmd->add_option("--out", solve.out, "Output file (default stdout)");

  ConfigArgs bounds;
  auto* bounds_cmd = app.add_subcommand("bounds", "Evaluate the rate bounds");
  bounds_cmd->add_option("--config", bounds.config, "Config file")->required();
  bounds_cmd->add_option("--out", bounds.out, "Output file (default stdout)");
  bounds_cmd->add_option("--seed", bounds.seed, "Seed for generated instances");

  ConfigArgs simulate;
  auto* simulate_cmd = app.add_subcommand("simulate", "Run the experiment, JSON report");
  simulate_cmd->add_option("--config", simulate.config, "Config file")->required();
  simulate_cmd->add_option("--out", simulate.out, "Output file (default stdout)");
  simulate_cmd->add_option("--seed", simulate.seed, "Master seed");
  simulate_cmd->add_option("--workers", simulate.workers, "Worker threads");

  ConfigArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run the experiment, CSV or JSON table");
  sweep_cmd->add_option("--config", sweep.config, "Config file")->required();
  sweep_cmd->add_option("--out", sweep.out, "Output file")->required();
  sweep_cmd->add_option("--format", sweep.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  sweep_cmd->add_option("--seed", sweep.seed, "Master seed");
  sweep_cmd->add_option("--workers", sweep.workers, "Worker threads");

  try {
    std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
    std::reverse(rest.begin(), rest.end());
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    return report_error(err, "usage", e.what(), kExitUsage);
  }

  try {
    if (*solve_cmd) return cmd_solve(solve, out);
    if (*bounds_cmd) return cmd_bounds(bounds, out);
    if (*simulate_cmd) return cmd_simulate(simulate, out, err);
    if (*sweep_cmd) return cmd_sweep(sweep, err);
  } catch (const ParseError& e) {
    return report_error(err, "parse", e.what(), kExitParse);
  } catch (const ValidationError& e) {
    return report_error(err, "validation", e.what(), kExitValidation);
  } catch (const NonConvergenceError& e) {
    return report_error(err, "non_convergence", e.what(), kExitNonConvergence);
  } catch (const IoError& e) {
    return report_error(err, "io", e.what(), kExitIo);
  } catch (const std::exception& e) {
    return report_error(err, "internal", e.what(), kExitInternal);
  }
  return report_error(err, "usage", "no subcommand", kExitUsage);
}

}  // namespace bai
