#include "bai/sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <thread>

#include "json.hpp"

#include "bai/bounds.hpp"
#include "bai/error.hpp"

namespace bai {

namespace {

constexpr std::uint64_t kInstanceSalt = 0x696e7374616e6365ULL;  // "instance"

void validate_generator(const InstanceGenerator& g) {
  if (g.arms < 2) {
    throw ValidationError("K must be >= 2");
  }
  const auto& vs = g.variance_support;
  if (!(vs.lo > 0.0) || !std::isfinite(vs.hi) || !(vs.lo <= vs.hi)) {
    throw ValidationError("variance support must satisfy 0 < lo <= hi < inf");
  }
  if (const auto* fixed = std::get_if<FixedMeans>(&g.mean_rule)) {
    if (!(fixed->value < 1.0) || !std::isfinite(fixed->value)) {
      throw ValidationError("best arm not unique: fixed suboptimal mean must be < 1");
    }
  } else {
    const auto& u = std::get<UniformMeans>(g.mean_rule);
    if (!std::isfinite(u.lo) || !(u.lo <= u.hi)) {
      throw ValidationError("uniform mean rule needs lo <= hi");
    }
    if (!(u.hi < 1.0)) {
      throw ValidationError("best arm not unique: uniform mean rule needs hi < 1");
    }
  }
}

}  // namespace

BanditInstance generate_instance(const InstanceGenerator& generator, Rng& rng) {
  validate_generator(generator);
  const std::size_t k = generator.arms;
  std::vector<double> variances(k);
  std::uniform_real_distribution<double> variance(generator.variance_support.lo,
                                                  generator.variance_support.hi);
  for (auto& v : variances) v = variance(rng);

  std::vector<double> means(k);
  means[0] = 1.0;
  if (const auto* fixed = std::get_if<FixedMeans>(&generator.mean_rule)) {
    std::fill(means.begin() + 1, means.end(), fixed->value);
  } else {
    const auto& u = std::get<UniformMeans>(generator.mean_rule);
    means[1] = 0.75;
    std::uniform_real_distribution<double> mean(u.lo, u.hi);
    for (std::size_t a = 2; a < k; ++a) means[a] = mean(rng);
  }
  return BanditInstance(std::move(means), std::move(variances));
}

BanditInstance generate_instance(const InstanceGenerator& generator, std::uint64_t master_seed) {
  Rng rng(mix64(mix64(master_seed) ^ kInstanceSalt));
  return generate_instance(generator, rng);
}

void ExperimentConfig::validate() const {
  if (strategies.empty()) {
    throw ValidationError("at least one strategy is required");
  }
  if (budgets.empty()) {
    throw ValidationError("at least one budget is required");
  }
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    if (budgets[i] == 0) {
      throw ValidationError("budgets must be >= 1");
    }
    if (i > 0 && budgets[i] <= budgets[i - 1]) {
      throw ValidationError("budgets must be strictly increasing");
    }
  }
  if (trials == 0) {
    throw ValidationError("trials must be >= 1");
  }
  if (workers == 0) {
    throw ValidationError("workers must be >= 1");
  }
  if (const auto* g = std::get_if<InstanceGenerator>(&instance)) {
    validate_generator(*g);
  }
}

BanditInstance ExperimentConfig::resolve_instance() const {
  if (const auto* explicit_instance = std::get_if<BanditInstance>(&instance)) {
    return *explicit_instance;
  }
  return generate_instance(std::get<InstanceGenerator>(instance), master_seed);
}

SweepResult summarize(std::string strategy, std::size_t arms, std::uint64_t budget,
                      std::uint64_t trials, std::uint64_t errors) {
  if (trials == 0 || errors > trials || budget == 0) {
    throw ValidationError("summarize needs 0 <= errors <= trials, trials >= 1, T >= 1");
  }
  SweepResult r;
  r.strategy = std::move(strategy);
  r.arms = arms;
  r.budget = budget;
  r.trials = trials;
  r.errors = errors;
  const auto n = static_cast<double>(trials);
  const auto t = static_cast<double>(budget);
  r.p_hat = static_cast<double>(errors) / n;
  r.std_err = std::sqrt(r.p_hat * (1.0 - r.p_hat) / n);
  r.censored = errors == 0;
  const double p = r.censored ? 1.0 / (n + 1.0) : r.p_hat;
  r.complexity = (0.0 - std::log(p)) / t;
  return r;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::string_view strategy,
                         std::uint64_t budget, std::uint64_t trial) noexcept {
  std::uint64_t h = mix64(master_seed);
  h = mix64(h ^ fnv1a64(strategy));
  h = mix64(h ^ budget);
  return mix64(h ^ trial);
}

TrialOutcome run_trial(const StrategySpec& spec, const std::optional<AllocationWeights>& weights,
                       const BanditInstance& instance, std::uint64_t budget, Rng& rng) {
  if (spec.kind() == StrategyKind::kSuccessiveRejects) {
    return successive_rejects(instance, budget, rng);
  }
  if (!weights) {
    throw ValidationError("strategy " + spec.name() + " needs static weights");
  }
  return run_block_strategy(*weights, instance, budget, rng);
}

SweepResult estimate_misid(const StrategySpec& spec,
                           const std::optional<AllocationWeights>& weights,
                           const BanditInstance& instance, std::uint64_t budget,
                           std::uint64_t trials, std::uint64_t master_seed,
                           const EstimateOptions& options) {
  if (trials == 0) {
    throw ValidationError("trials must be >= 1");
  }
  const std::string name = spec.name();
  const ArmIndex best = instance.best_arm();

  // Validate the cell up front so worker threads never throw.
  std::optional<AllocationSchedule> schedule;
  if (spec.kind() == StrategyKind::kSuccessiveRejects) {
    (void)successive_rejects_phases(instance.arms(), budget);
  } else {
    if (!weights) {
      throw ValidationError("strategy " + name + " needs static weights");
    }
    schedule = build_schedule(*weights, budget);
    if (schedule->arms() != instance.arms()) {
      throw ValidationError("weights and instance differ in arm count");
    }
  }

  auto count_errors = [&](std::uint64_t begin, std::uint64_t end) {
    std::uint64_t errors = 0;
    for (std::uint64_t i = begin; i < end; ++i) {
      Rng rng(trial_seed(master_seed, name, budget, i));
      const TrialOutcome out = schedule ? run_block_strategy(*schedule, instance, rng)
                                        : successive_rejects(instance, budget, rng);
      errors += out.recommended != best ? 1 : 0;
    }
    return errors;
  };

  const std::uint64_t workers =
      std::clamp<std::uint64_t>(options.workers == 0 ? 1 : options.workers, 1, trials);
  std::uint64_t errors = 0;
  if (workers == 1) {
    errors = count_errors(0, trials);
  } else {
    std::vector<std::uint64_t> partial(workers, 0);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::uint64_t w = 0; w < workers; ++w) {
      const std::uint64_t begin = trials * w / workers;
      const std::uint64_t end = trials * (w + 1) / workers;
      pool.emplace_back([&, w, begin, end] { partial[w] = count_errors(begin, end); });
    }
    for (auto& t : pool) t.join();
    for (const auto e : partial) errors += e;
  }

  SweepResult r = summarize(name, instance.arms(), budget, trials, errors);
  r.master_seed = master_seed;
  if (weights) r.theoretical_rate = instance_rate(instance, *weights).value();
  return r;
}

SweepResult estimate_misid(const StrategySpec& spec, const BanditInstance& instance,
                           std::uint64_t budget, std::uint64_t trials, std::uint64_t master_seed,
                           const EstimateOptions& options) {
  return estimate_misid(spec, make_strategy_weights(spec, instance), instance, budget, trials,
                        master_seed, options);
}

SweepReport run_sweep(const ExperimentConfig& config) {
  config.validate();
  SweepReport report{config.resolve_instance(), {}, {}, {}, {}};
  const EstimateOptions options{config.workers};
  for (const auto& spec : config.strategies) {
    const std::string name = spec.name();
    std::optional<AllocationWeights> weights;
    try {
      weights = make_strategy_weights(spec, report.instance);
    } catch (const Error& e) {
      report.failures.push_back({name, std::nullopt, e.what()});
      continue;
    }
    report.weights.emplace_back(name, weights);
    for (const auto budget : config.budgets) {
      try {
        if (weights && build_schedule(*weights, budget).has_unsampled_arm()) {
          report.warnings.push_back(
              {name, budget, "some arm receives no samples; it is excluded from the argmax"});
        }
        report.rows.push_back(estimate_misid(spec, weights, report.instance, budget,
                                             config.trials, config.master_seed, options));
      } catch (const Error& e) {
        report.failures.push_back({name, budget, e.what()});
      }
    }
  }
  return report;
}

std::string format_double(double value) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

std::string to_csv(const std::vector<SweepResult>& rows) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += r.strategy;
    out += ',' + std::to_string(r.arms);
    out += ',' + std::to_string(r.budget);
    out += ',' + std::to_string(r.trials);
    out += ',' + format_double(r.p_hat);
    out += ',' + format_double(r.std_err);
    out += ',' + format_double(r.complexity);
    out += r.censored ? ",true," : ",false,";
    if (r.theoretical_rate) out += format_double(*r.theoretical_rate);
    out += ',' + std::to_string(r.master_seed);
    out += '\n';
  }
  return out;
}

std::string to_json(const std::vector<SweepResult>& rows) {
  auto doc = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json row;
    row["strategy"] = r.strategy;
    row["K"] = r.arms;
    row["T"] = r.budget;
    row["trials"] = r.trials;
    row["p_hat"] = r.p_hat;
    row["std_err"] = r.std_err;
    row["complexity"] = r.complexity;
    row["censored"] = r.censored;
    row["theoretical_rate"] =
        r.theoretical_rate ? nlohmann::ordered_json(*r.theoretical_rate) : nullptr;
    row["master_seed"] = r.master_seed;
    doc.push_back(std::move(row));
  }
  return doc.dump(2) + "\n";
}

}  // namespace bai
