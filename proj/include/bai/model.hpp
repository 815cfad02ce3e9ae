#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bai {

/// Arms are indexed from 0 inside the library. File formats and the CLI use
/// 1-based arm numbers and convert at the boundary.
using ArmIndex = std::size_t;

/// Gaussian bandit instance: arm a yields N(means[a], variances[a]).
///
/// Construction validates the instance: at least two arms, strictly positive
/// finite variances, finite means and a unique best arm (exact comparison).
/// Instances are immutable afterwards.
class BanditInstance {
 public:
  BanditInstance(std::vector<double> means, std::vector<double> variances);

  [[nodiscard]] std::size_t arms() const noexcept { return means_.size(); }
  [[nodiscard]] std::span<const double> means() const noexcept { return means_; }
  [[nodiscard]] std::span<const double> variances() const noexcept { return variances_; }
  [[nodiscard]] double mean(ArmIndex a) const { return means_.at(a); }
  [[nodiscard]] double variance(ArmIndex a) const { return variances_.at(a); }
  [[nodiscard]] double stddev(ArmIndex a) const;
  [[nodiscard]] ArmIndex best_arm() const noexcept { return best_; }

  friend bool operator==(const BanditInstance&, const BanditInstance&) = default;

 private:
  std::vector<double> means_;
  std::vector<double> variances_;
  ArmIndex best_ = 0;
};

/// Bounds (lo, hi) on every suboptimal gap, 0 < lo <= hi < inf.
class GapBounds {
 public:
  GapBounds(double delta_lo, double delta_hi);

  [[nodiscard]] double lo() const noexcept { return lo_; }
  [[nodiscard]] double hi() const noexcept { return hi_; }

  friend bool operator==(const GapBounds&, const GapBounds&) = default;

 private:
  double lo_;
  double hi_;
};

/// Checks a variance vector on its own: K >= 2, every entry finite and > 0.
/// Throws ValidationError naming the violated invariant.
void validate_variances(std::span<const double> variances);

/// Index of the unique largest mean; throws ValidationError on a tie.
[[nodiscard]] ArmIndex best_arm(std::span<const double> means);
[[nodiscard]] ArmIndex best_arm(const BanditInstance& instance);

/// gaps[a] = mean[best] - mean[a]; the entry at the best arm is exactly 0.
[[nodiscard]] std::vector<double> gaps(const BanditInstance& instance);

/// True iff every suboptimal gap lies inside [lo, hi].
[[nodiscard]] bool validate_gap_bounds(const BanditInstance& instance, const GapBounds& bounds);

/// Tightest bounds consistent with the instance: (min gap, max gap) over
/// suboptimal arms.
[[nodiscard]] GapBounds observed_gap_bounds(const BanditInstance& instance);

}  // namespace bai
