#include "bai/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bai/error.hpp"

namespace bai {

void validate_variances(std::span<const double> variances) {
  if (variances.size() < 2) {
    throw ValidationError("at least two arms are required, got " +
                          std::to_string(variances.size()));
  }
  for (std::size_t a = 0; a < variances.size(); ++a) {
    const double v = variances[a];
    if (!std::isfinite(v)) {
      throw ValidationError("variance must be finite (arm " + std::to_string(a + 1) + ")");
    }
    if (!(v > 0.0)) {
      throw ValidationError("variance must be > 0 (arm " + std::to_string(a + 1) + ")");
    }
  }
}

ArmIndex best_arm(std::span<const double> means) {
  if (means.empty()) {
    throw ValidationError("no arms");
  }
  ArmIndex best = 0;
  bool tied = false;
  for (ArmIndex a = 1; a < means.size(); ++a) {
    if (means[a] > means[best]) {
      best = a;
      tied = false;
    } else if (means[a] == means[best]) {
      tied = true;
    }
  }
  if (tied) {
    throw ValidationError("best arm not unique");
  }
  return best;
}

ArmIndex best_arm(const BanditInstance& instance) { return instance.best_arm(); }

BanditInstance::BanditInstance(std::vector<double> means, std::vector<double> variances)
    : means_(std::move(means)), variances_(std::move(variances)) {
  if (means_.size() != variances_.size()) {
    throw ValidationError("means and variances differ in length (" +
                          std::to_string(means_.size()) + " vs " +
                          std::to_string(variances_.size()) + ")");
  }
  validate_variances(variances_);
  for (std::size_t a = 0; a < means_.size(); ++a) {
    if (!std::isfinite(means_[a])) {
      throw ValidationError("mean must be finite (arm " + std::to_string(a + 1) + ")");
    }
  }
  best_ = bai::best_arm(means_);
}

double BanditInstance::stddev(ArmIndex a) const { return std::sqrt(variances_.at(a)); }

GapBounds::GapBounds(double delta_lo, double delta_hi) : lo_(delta_lo), hi_(delta_hi) {
  if (!(delta_lo > 0.0) || !std::isfinite(delta_hi) || !(delta_lo <= delta_hi)) {
    throw ValidationError("gap bounds must satisfy 0 < lo <= hi < inf");
  }
}

std::vector<double> gaps(const BanditInstance& instance) {
  const double top = instance.mean(instance.best_arm());
  std::vector<double> out(instance.arms());
  for (ArmIndex a = 0; a < instance.arms(); ++a) {
    out[a] = top - instance.mean(a);
  }
  out[instance.best_arm()] = 0.0;
  return out;
}

bool validate_gap_bounds(const BanditInstance& instance, const GapBounds& bounds) {
  const auto g = gaps(instance);
  for (ArmIndex a = 0; a < g.size(); ++a) {
    if (a == instance.best_arm()) continue;
    if (g[a] < bounds.lo() || g[a] > bounds.hi()) return false;
  }
  return true;
}

GapBounds observed_gap_bounds(const BanditInstance& instance) {
  const auto g = gaps(instance);
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (ArmIndex a = 0; a < g.size(); ++a) {
    if (a == instance.best_arm()) continue;
    lo = std::min(lo, g[a]);
    hi = std::max(hi, g[a]);
  }
  return GapBounds(lo, hi);
}

}  // namespace bai
