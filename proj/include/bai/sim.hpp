#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bai/allocation.hpp"
#include "bai/model.hpp"
#include "bai/strategies.hpp"

namespace bai {

/// Means (1, value, ..., value). Requires value < 1.
struct FixedMeans {
  double value = 0.75;
  friend bool operator==(const FixedMeans&, const FixedMeans&) = default;
};

/// Means (1, 0.75, m_3, ..., m_K) with m_a drawn from U[lo, hi]. Requires
/// lo <= hi < 1 so arm 1 stays the unique best.
struct UniformMeans {
  double lo = 0.75;
  double hi = 0.90;
  friend bool operator==(const UniformMeans&, const UniformMeans&) = default;
};

using MeanRule = std::variant<FixedMeans, UniformMeans>;

/// Support [lo, hi] of the i.i.d. uniform variance draws, 0 < lo <= hi.
struct VarianceSupport {
  double lo = 0.5;
  double hi = 5.0;
  friend bool operator==(const VarianceSupport&, const VarianceSupport&) = default;
};

struct InstanceGenerator {
  std::size_t arms = 2;
  MeanRule mean_rule = FixedMeans{};
  VarianceSupport variance_support;
  friend bool operator==(const InstanceGenerator&, const InstanceGenerator&) = default;
};

/// Draws one instance. Variances are consumed from the stream before means.
[[nodiscard]] BanditInstance generate_instance(const InstanceGenerator& generator, Rng& rng);

/// The instance a generator yields for a given master seed. The stream is
/// salted so it never coincides with a trial stream.
[[nodiscard]] BanditInstance generate_instance(const InstanceGenerator& generator,
                                               std::uint64_t master_seed);

struct ExperimentConfig {
  std::variant<InstanceGenerator, BanditInstance> instance;
  std::vector<StrategySpec> strategies;
  std::vector<std::uint64_t> budgets;  // strictly increasing
  std::uint64_t trials = 1;
  std::uint64_t master_seed = 0;
  std::optional<GapBounds> gap_bounds;
  unsigned workers = 1;

  /// Checks the sweep invariants; throws ValidationError.
  void validate() const;

  /// The explicit instance, or the generated one for master_seed.
  [[nodiscard]] BanditInstance resolve_instance() const;
};

struct SweepResult {
  std::string strategy;
  std::size_t arms = 0;
  std::uint64_t budget = 0;
  std::uint64_t trials = 0;
  std::uint64_t errors = 0;
  double p_hat = 0.0;
  double std_err = 0.0;
  /// -log(p_hat)/T, or log(trials + 1)/T when censored.
  double complexity = 0.0;
  bool censored = false;
  std::optional<double> theoretical_rate;  // absent for adaptive strategies
  std::uint64_t master_seed = 0;

  friend bool operator==(const SweepResult&, const SweepResult&) = default;
};

/// Fills p_hat, std_err, complexity and censored from an error count.
[[nodiscard]] SweepResult summarize(std::string strategy, std::size_t arms, std::uint64_t budget,
                                    std::uint64_t trials, std::uint64_t errors);

/// splitmix64 finalizer.
[[nodiscard]] std::uint64_t mix64(std::uint64_t x) noexcept;

/// 64-bit FNV-1a.
[[nodiscard]] std::uint64_t fnv1a64(std::string_view text) noexcept;

/// Seed of one trial:
///   h = mix64(master_seed)
///   h = mix64(h ^ fnv1a64(strategy))
///   h = mix64(h ^ T)
///   h = mix64(h ^ trial)
[[nodiscard]] std::uint64_t trial_seed(std::uint64_t master_seed, std::string_view strategy,
                                       std::uint64_t budget, std::uint64_t trial) noexcept;

/// Runs one trial of a strategy.
/// `weights` must be the strategy's static weights, or nullopt for SR.
[[nodiscard]] TrialOutcome run_trial(const StrategySpec& spec,
                                     const std::optional<AllocationWeights>& weights,
                                     const BanditInstance& instance, std::uint64_t budget,
                                     Rng& rng);

struct EstimateOptions {
  unsigned workers = 1;
};

/// Monte Carlo estimate of the misidentification probability. The result does
/// not depend on the worker count.
[[nodiscard]] SweepResult estimate_misid(const StrategySpec& spec, const BanditInstance& instance,
                                         std::uint64_t budget, std::uint64_t trials,
                                         std::uint64_t master_seed,
                                         const EstimateOptions& options = {});

/// Same, with the strategy weights already solved.
[[nodiscard]] SweepResult estimate_misid(const StrategySpec& spec,
                                         const std::optional<AllocationWeights>& weights,
                                         const BanditInstance& instance, std::uint64_t budget,
                                         std::uint64_t trials, std::uint64_t master_seed,
                                         const EstimateOptions& options = {});

struct CellFailure {
  std::string strategy;
  std::optional<std::uint64_t> budget;  // absent when the whole strategy failed
  std::string message;
};

struct SweepReport {
  BanditInstance instance;
  std::vector<std::pair<std::string, std::optional<AllocationWeights>>> weights;
  std::vector<SweepResult> rows;  // strategy-major, budgets in config order
  std::vector<CellFailure> failures;
  std::vector<CellFailure> warnings;  // e.g. cells where some arm gets no samples
};

/// Every strategy x budget cell. Failing cells are reported, not thrown.
[[nodiscard]] SweepReport run_sweep(const ExperimentConfig& config);

/// Shortest round-trip decimal form of a double.
[[nodiscard]] std::string format_double(double value);

inline constexpr std::string_view kCsvHeader =
    "strategy,K,T,trials,p_hat,std_err,complexity,censored,theoretical_rate,master_seed";

[[nodiscard]] std::string to_csv(const std::vector<SweepResult>& rows);
[[nodiscard]] std::string to_json(const std::vector<SweepResult>& rows);

}  // namespace bai
