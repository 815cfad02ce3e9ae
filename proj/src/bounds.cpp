#include "bai/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bai/error.hpp"

namespace bai {

RateValue::RateValue(double value) : value_(value) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw ValidationError("rate must be finite and non-negative");
  }
}

namespace {

void require_positive_gap(double delta, const char* name) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw ValidationError(std::string(name) + " must be finite and > 0");
  }
}

}  // namespace

RateValue worst_case_lower_bound(double delta_hi, const SolverReport& gna) {
  require_positive_gap(delta_hi, "delta_hi");
  return RateValue(delta_hi * delta_hi * gna.objective);
}

RateValue worst_case_lower_bound(double delta_hi, std::span<const double> variances) {
  require_positive_gap(delta_hi, "delta_hi");
  return worst_case_lower_bound(delta_hi, solve_gna(variances));
}

RateValue gna_upper_bound(double delta_lo, const SolverReport& gna) {
  require_positive_gap(delta_lo, "delta_lo");
  return RateValue(delta_lo * delta_lo * gna.objective);
}

RateValue gna_upper_bound(double delta_lo, std::span<const double> variances) {
  require_positive_gap(delta_lo, "delta_lo");
  return gna_upper_bound(delta_lo, solve_gna(variances));
}

RateValue uniform_lower_bound(double delta_hi, std::span<const double> variances,
                              ArmIndex a_star) {
  require_positive_gap(delta_hi, "delta_hi");
  validate_variances(variances);
  if (a_star >= variances.size()) {
    throw ValidationError("best arm index out of range");
  }
  double rest = 0.0;
  for (ArmIndex a = 0; a < variances.size(); ++a) {
    if (a != a_star) rest += variances[a];
  }
  const double denom = std::sqrt(variances[a_star]) + std::sqrt(rest);
  return RateValue(delta_hi * delta_hi / (2.0 * denom * denom));
}

RateValue instance_rate(const BanditInstance& instance, const AllocationWeights& w) {
  if (w.arms() != instance.arms()) {
    throw ValidationError("allocation and instance differ in arm count");
  }
  const ArmIndex best = instance.best_arm();
  const auto g = gaps(instance);
  double rate = std::numeric_limits<double>::infinity();
  for (ArmIndex a = 0; a < instance.arms(); ++a) {
    if (a == best) continue;
    rate = std::min(rate, g[a] * g[a] / (2.0 * omega(w, instance.variances(), best, a)));
  }
  return RateValue(rate);
}

double chernoff_misid_bound(const BanditInstance& instance, const AllocationWeights& w,
                            std::uint64_t budget) {
  if (w.arms() != instance.arms()) {
    throw ValidationError("allocation and instance differ in arm count");
  }
  const ArmIndex best = instance.best_arm();
  const auto g = gaps(instance);
  const double t = static_cast<double>(budget);
  double total = 0.0;
  for (ArmIndex a = 0; a < instance.arms(); ++a) {
    if (a == best) continue;
    total += std::exp(-t * g[a] * g[a] / (2.0 * omega(w, instance.variances(), best, a)));
  }
  return std::min(1.0, total);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double two_arm_misid_probability(double gap, double var_best, double var_other,
                                 std::uint64_t n_best, std::uint64_t n_other) {
  if (!(gap >= 0.0) || !(var_best > 0.0) || !(var_other > 0.0)) {
    throw ValidationError("two-arm probability needs gap >= 0 and positive variances");
  }
  if (n_best == 0 || n_other == 0) {
    throw ValidationError("two-arm probability needs both counts >= 1");
  }
  const double sd = std::sqrt(var_best / static_cast<double>(n_best) +
                              var_other / static_cast<double>(n_other));
  return normal_cdf(-gap / sd);
}

double exact_two_arm_misid(const BanditInstance& instance, std::uint64_t n1, std::uint64_t n2) {
  if (instance.arms() != 2) {
    throw ValidationError("exact two-arm probability needs exactly two arms");
  }
  const ArmIndex best = instance.best_arm();
  const ArmIndex other = 1 - best;
  const std::uint64_t counts[2] = {n1, n2};
  return two_arm_misid_probability(instance.mean(best) - instance.mean(other),
                                   instance.variance(best), instance.variance(other),
                                   counts[best], counts[other]);
}

}  // namespace bai
