#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bai/allocation.hpp"
#include "bai/model.hpp"

namespace bai {

/// Random engine used by every trial. Bit-level reproducibility holds within
/// one standard library implementation.
using Rng = std::mt19937_64;

/// Deterministic block schedule: arm 0 occupies the first counts[0] rounds,
/// arm 1 the next counts[1], and so on. counts sum to budget exactly.
class AllocationSchedule {
 public:
  AllocationSchedule(std::vector<std::uint64_t> counts, std::uint64_t budget);

  [[nodiscard]] std::span<const std::uint64_t> counts() const noexcept { return counts_; }
  [[nodiscard]] std::uint64_t count(ArmIndex a) const { return counts_.at(a); }
  [[nodiscard]] std::uint64_t budget() const noexcept { return budget_; }
  [[nodiscard]] std::size_t arms() const noexcept { return counts_.size(); }

  /// Some arm receives no samples; the recommender ignores such arms.
  [[nodiscard]] bool has_unsampled_arm() const noexcept;

  /// Arm pulled at round t, 1 <= t <= budget.
  [[nodiscard]] ArmIndex arm_at(std::uint64_t t) const;

  /// counts / budget.
  [[nodiscard]] std::vector<double> fractions() const;

 private:
  std::vector<std::uint64_t> counts_;
  std::uint64_t budget_;
};

/// counts[a] = ceil(C_a T) - ceil(C_{a-1} T) with C_a the cumulative weight and
/// the last block ending exactly at T. Throws ValidationError if T == 0.
[[nodiscard]] AllocationSchedule build_schedule(const AllocationWeights& w, std::uint64_t budget);

enum class StrategyKind { kGnaEba, kHGnaEba, kUniformEba, kSuccessiveRejects, kOoEba };

/// A strategy and its parameters. `conjectured_arm` is set iff kind is kHGnaEba.
class StrategySpec {
 public:
  static StrategySpec gna_eba() { return StrategySpec(StrategyKind::kGnaEba, std::nullopt); }
  static StrategySpec h_gna_eba(ArmIndex conjectured) {
    return StrategySpec(StrategyKind::kHGnaEba, conjectured);
  }
  static StrategySpec uniform_eba() { return StrategySpec(StrategyKind::kUniformEba, std::nullopt); }
  static StrategySpec successive_rejects() {
    return StrategySpec(StrategyKind::kSuccessiveRejects, std::nullopt);
  }
  static StrategySpec oo_eba() { return StrategySpec(StrategyKind::kOoEba, std::nullopt); }

  /// Parses `gna_eba`, `h_gna_eba:<arm>` (1-based), `uniform_eba`, `sr`, `oo_eba`.
  static StrategySpec parse(std::string_view name);

  [[nodiscard]] StrategyKind kind() const noexcept { return kind_; }
  [[nodiscard]] std::optional<ArmIndex> conjectured_arm() const noexcept { return conjectured_; }

  /// Variances are always treated as known in this library.
  [[nodiscard]] bool variances_known() const noexcept { return true; }

  /// Inverse of parse.
  [[nodiscard]] std::string name() const;

  friend bool operator==(const StrategySpec&, const StrategySpec&) = default;

 private:
  StrategySpec(StrategyKind kind, std::optional<ArmIndex> conjectured)
      : kind_(kind), conjectured_(conjectured) {}

  StrategyKind kind_;
  std::optional<ArmIndex> conjectured_;
};

struct TrialOutcome {
  ArmIndex recommended = 0;
  std::vector<double> sample_means;  // NaN for arms that were never pulled
  std::vector<std::uint64_t> counts;
};

/// Argmax of sample_means over arms with a positive count, lowest index on
/// ties. Throws ValidationError if every count is zero or sizes differ.
[[nodiscard]] ArmIndex eba_recommend(std::span<const double> sample_means,
                                     std::span<const std::uint64_t> counts);

/// Draws counts[a] outcomes of arm a in block order and recommends the
/// empirical best arm. Sample means divide by the realized count.
[[nodiscard]] TrialOutcome run_block_strategy(const AllocationSchedule& schedule,
                                              const BanditInstance& instance, Rng& rng);
[[nodiscard]] TrialOutcome run_block_strategy(const AllocationWeights& w,
                                              const BanditInstance& instance,
                                              std::uint64_t budget, Rng& rng);

/// Per-arm pull count of each Successive Rejects phase, n_1..n_{K-1}, with
/// n_k = ceil((T - K) / (Kbar (K + 1 - k))) and Kbar = 1/2 + sum_{i=2}^K 1/i.
/// Throws ValidationError if T < K.
[[nodiscard]] std::vector<std::uint64_t> successive_rejects_phases(std::size_t arms,
                                                                   std::uint64_t budget);

/// Successive Rejects. Each phase tops every surviving arm up to n_k pulls and
/// drops the arm with the lowest sample mean (highest index on ties). The
/// recommendation is the last survivor. Throws ValidationError if T < K.
[[nodiscard]] TrialOutcome successive_rejects(const BanditInstance& instance,
                                              std::uint64_t budget, Rng& rng);

/// Static weights of a strategy, or nullopt for the adaptive SR baseline.
[[nodiscard]] std::optional<AllocationWeights> make_strategy_weights(
    const StrategySpec& spec, const BanditInstance& instance);

}  // namespace bai
