#pragma once

#include <cstdint>
#include <span>

#include "bai/allocation.hpp"
#include "bai/model.hpp"

namespace bai {

/// Exponent coefficient of the misidentification probability, in nats per
/// round: the c in P(error) ~ exp(-c T). Always finite and >= 0.
class RateValue {
 public:
  explicit RateValue(double value);
  [[nodiscard]] double value() const noexcept { return value_; }
  friend auto operator<=>(const RateValue&, const RateValue&) = default;

 private:
  double value_;
};

// Worst-case bounds share the objective of the worst-case allocation solve so
// that the lower and upper bound coincide bit-for-bit when delta_lo == delta_hi.

/// delta_hi^2 * max_w min_pairs 1/(2 Omega). Solves for the allocation.
[[nodiscard]] RateValue worst_case_lower_bound(double delta_hi, std::span<const double> variances);
[[nodiscard]] RateValue worst_case_lower_bound(double delta_hi, const SolverReport& gna);

/// delta_lo^2 * min_pairs 1/(2 Omega(w_gna)).
[[nodiscard]] RateValue gna_upper_bound(double delta_lo, std::span<const double> variances);
[[nodiscard]] RateValue gna_upper_bound(double delta_lo, const SolverReport& gna);

/// delta_hi^2 / (2 (sd(a*) + sqrt(sum_{a != a*} var(a)))^2).
[[nodiscard]] RateValue uniform_lower_bound(double delta_hi, std::span<const double> variances,
                                            ArmIndex a_star);

/// Large-deviation rate of the empirical-best-arm recommender under a static
/// allocation w: min_{a != a*} Delta_a^2 / (2 Omega(a*, a)).
[[nodiscard]] RateValue instance_rate(const BanditInstance& instance, const AllocationWeights& w);

/// min(1, sum_{a != a*} exp(-T Delta_a^2 / (2 Omega(a*, a)))).
///
/// With w equal to the realized sample fractions (counts / T) this is a
/// rigorous upper bound on the misidentification probability of the
/// empirical-best-arm rule. T = 0 gives 1.
[[nodiscard]] double chernoff_misid_bound(const BanditInstance& instance,
                                          const AllocationWeights& w, std::uint64_t budget);

/// Standard normal CDF.
[[nodiscard]] double normal_cdf(double x);

/// P(mean_best_hat <= mean_other_hat) for two independent Gaussian sample
/// means, i.e. Phi(-gap / sqrt(var_best/n_best + var_other/n_other)).
/// gap >= 0; gap == 0 gives 0.5.
[[nodiscard]] double two_arm_misid_probability(double gap, double var_best, double var_other,
                                               std::uint64_t n_best, std::uint64_t n_other);

/// Exact misidentification probability of the empirical-best-arm rule on a
/// two-armed instance with deterministic counts (n1, n2) for arms (1, 2).
/// Throws ValidationError unless K == 2 and both counts are >= 1.
[[nodiscard]] double exact_two_arm_misid(const BanditInstance& instance, std::uint64_t n1,
                                         std::uint64_t n2);

}  // namespace bai
