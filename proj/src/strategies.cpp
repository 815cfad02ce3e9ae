#include "bai/strategies.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include "bai/error.hpp"

namespace bai {

namespace {

// ceil(x) that does not jump to the next integer because of rounding noise in
// x, e.g. (1/3 + 1/3 + 1/3) * 30 = 30.000000000000004.
std::uint64_t guarded_ceil(double x) {
  const double guard = 1e-9 * std::max(1.0, std::abs(x));
  const double c = std::ceil(x - guard);
  return c <= 0.0 ? 0 : static_cast<std::uint64_t>(c);
}

double sample_mean(double sum, std::uint64_t n) {
  return n == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(n);
}

}  // namespace

AllocationSchedule::AllocationSchedule(std::vector<std::uint64_t> counts, std::uint64_t budget)
    : counts_(std::move(counts)), budget_(budget) {
  if (counts_.size() < 2) {
    throw ValidationError("schedule needs at least two arms");
  }
  if (std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0}) != budget_) {
    throw ValidationError("schedule counts must sum to the budget");
  }
}

bool AllocationSchedule::has_unsampled_arm() const noexcept {
  return std::find(counts_.begin(), counts_.end(), 0) != counts_.end();
}

ArmIndex AllocationSchedule::arm_at(std::uint64_t t) const {
  if (t == 0 || t > budget_) {
    throw ValidationError("round out of range");
  }
  std::uint64_t end = 0;
  for (ArmIndex a = 0; a < counts_.size(); ++a) {
    end += counts_[a];
    if (t <= end) return a;
  }
  return counts_.size() - 1;  // unreachable: counts sum to budget
}

std::vector<double> AllocationSchedule::fractions() const {
  std::vector<double> out(counts_.size());
  for (std::size_t a = 0; a < counts_.size(); ++a) {
    out[a] = static_cast<double>(counts_[a]) / static_cast<double>(budget_);
  }
  return out;
}

AllocationSchedule build_schedule(const AllocationWeights& w, std::uint64_t budget) {
  if (budget == 0) {
    throw ValidationError("budget must be >= 1");
  }
  const auto t = static_cast<double>(budget);
  std::vector<std::uint64_t> counts(w.arms());
  double cumulative = 0.0;
  std::uint64_t previous_end = 0;
  for (ArmIndex a = 0; a + 1 < w.arms(); ++a) {
    cumulative += w[a];
    const std::uint64_t end = std::clamp(guarded_ceil(cumulative * t), previous_end, budget);
    counts[a] = end - previous_end;
    previous_end = end;
  }
  counts.back() = budget - previous_end;
  return AllocationSchedule(std::move(counts), budget);
}

StrategySpec StrategySpec::parse(std::string_view name) {
  if (name == "gna_eba") return gna_eba();
  if (name == "uniform_eba") return uniform_eba();
  if (name == "sr") return successive_rejects();
  if (name == "oo_eba") return oo_eba();
  constexpr std::string_view kPrefix = "h_gna_eba:";
  if (name.substr(0, kPrefix.size()) == kPrefix) {
    const std::string_view digits = name.substr(kPrefix.size());
    std::size_t arm = 0;
    const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), arm);
    if (ec != std::errc() || end != digits.data() + digits.size() || digits.empty()) {
      throw ParseError("bad conjectured arm in strategy '" + std::string(name) + "'");
    }
    if (arm == 0) {
      throw ValidationError("conjectured arm is 1-based and must be >= 1");
    }
    return h_gna_eba(arm - 1);
  }
  throw ParseError("unknown strategy '" + std::string(name) + "'");
}

std::string StrategySpec::name() const {
  switch (kind_) {
    case StrategyKind::kGnaEba:
      return "gna_eba";
    case StrategyKind::kHGnaEba:
      return "h_gna_eba:" + std::to_string(*conjectured_ + 1);
    case StrategyKind::kUniformEba:
      return "uniform_eba";
    case StrategyKind::kSuccessiveRejects:
      return "sr";
    case StrategyKind::kOoEba:
      return "oo_eba";
  }
  return "unknown";
}

ArmIndex eba_recommend(std::span<const double> sample_means,
                       std::span<const std::uint64_t> counts) {
  if (sample_means.size() != counts.size()) {
    throw ValidationError("sample means and counts differ in length");
  }
  std::optional<ArmIndex> best;
  for (ArmIndex a = 0; a < counts.size(); ++a) {
    if (counts[a] == 0) continue;
    if (!best || sample_means[a] > sample_means[*best]) best = a;
  }
  if (!best) {
    throw ValidationError("no arm was sampled");
  }
  return *best;
}

TrialOutcome run_block_strategy(const AllocationSchedule& schedule,
                                const BanditInstance& instance, Rng& rng) {
  if (schedule.arms() != instance.arms()) {
    throw ValidationError("schedule and instance differ in arm count");
  }
  TrialOutcome out;
  out.counts.assign(schedule.counts().begin(), schedule.counts().end());
  out.sample_means.resize(instance.arms());
  for (ArmIndex a = 0; a < instance.arms(); ++a) {
    std::normal_distribution<double> outcome(instance.mean(a), instance.stddev(a));
    double sum = 0.0;
    for (std::uint64_t i = 0; i < out.counts[a]; ++i) sum += outcome(rng);
    out.sample_means[a] = sample_mean(sum, out.counts[a]);
  }
  out.recommended = eba_recommend(out.sample_means, out.counts);
  return out;
}

TrialOutcome run_block_strategy(const AllocationWeights& w, const BanditInstance& instance,
                                std::uint64_t budget, Rng& rng) {
  return run_block_strategy(build_schedule(w, budget), instance, rng);
}

std::vector<std::uint64_t> successive_rejects_phases(std::size_t arms, std::uint64_t budget) {
  if (arms < 2) {
    throw ValidationError("successive rejects needs at least two arms");
  }
  if (budget < arms) {
    throw ValidationError("successive rejects needs T >= K");
  }
  double kbar = 0.5;
  for (std::size_t i = 2; i <= arms; ++i) kbar += 1.0 / static_cast<double>(i);
  const auto spare = static_cast<double>(budget - arms);
  std::vector<std::uint64_t> n(arms - 1);
  for (std::size_t k = 1; k < arms; ++k) {
    n[k - 1] = guarded_ceil(spare / (kbar * static_cast<double>(arms + 1 - k)));
  }
  return n;
}

TrialOutcome successive_rejects(const BanditInstance& instance, std::uint64_t budget, Rng& rng) {
  const std::size_t k_arms = instance.arms();
  const auto phases = successive_rejects_phases(k_arms, budget);

  std::vector<double> sums(k_arms, 0.0);
  std::vector<std::uint64_t> counts(k_arms, 0);
  std::vector<bool> alive(k_arms, true);
  std::vector<std::normal_distribution<double>> outcome;
  outcome.reserve(k_arms);
  for (ArmIndex a = 0; a < k_arms; ++a) {
    outcome.emplace_back(instance.mean(a), instance.stddev(a));
  }

  for (const std::uint64_t target : phases) {
    for (ArmIndex a = 0; a < k_arms; ++a) {
      if (!alive[a]) continue;
      for (; counts[a] < target; ++counts[a]) sums[a] += outcome[a](rng);
    }
    // Drop the empirically worst survivor; an unsampled arm counts as worst,
    // and among equals the highest index goes.
    std::optional<ArmIndex> worst;
    for (ArmIndex a = 0; a < k_arms; ++a) {
      if (!alive[a]) continue;
      if (!worst) {
        worst = a;
        continue;
      }
      const bool a_empty = counts[a] == 0;
      const bool w_empty = counts[*worst] == 0;
      if (a_empty != w_empty) {
        if (a_empty) worst = a;
        continue;
      }
      if (a_empty || sums[a] / static_cast<double>(counts[a]) <=
                         sums[*worst] / static_cast<double>(counts[*worst])) {
        worst = a;
      }
    }
    alive[*worst] = false;
  }

  TrialOutcome out;
  out.counts = counts;
  out.sample_means.resize(k_arms);
  for (ArmIndex a = 0; a < k_arms; ++a) out.sample_means[a] = sample_mean(sums[a], counts[a]);
  out.recommended = static_cast<ArmIndex>(std::find(alive.begin(), alive.end(), true) -
                                          alive.begin());
  return out;
}

std::optional<AllocationWeights> make_strategy_weights(const StrategySpec& spec,
                                                       const BanditInstance& instance) {
  switch (spec.kind()) {
    case StrategyKind::kGnaEba:
      return solve_gna(instance.variances()).weights;
    case StrategyKind::kHGnaEba:
      if (*spec.conjectured_arm() >= instance.arms()) {
        throw ValidationError("conjectured arm " + std::to_string(*spec.conjectured_arm() + 1) +
                              " exceeds K = " + std::to_string(instance.arms()));
      }
      return solve_h_gna(instance.variances(), *spec.conjectured_arm());
    case StrategyKind::kUniformEba:
      return AllocationWeights::uniform(instance.arms());
    case StrategyKind::kOoEba:
      return solve_oo(instance).weights;
    case StrategyKind::kSuccessiveRejects:
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace bai
