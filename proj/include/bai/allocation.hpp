#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "bai/model.hpp"

namespace bai {

/// A point of the open probability simplex: every entry in (0, 1) and the
/// entries sum to 1 within 1e-12.
class AllocationWeights {
 public:
  static constexpr double kSumTolerance = 1e-12;

  explicit AllocationWeights(std::vector<double> weights);

  /// (1/K, ..., 1/K).
  static AllocationWeights uniform(std::size_t arms);

  [[nodiscard]] std::size_t arms() const noexcept { return w_.size(); }
  [[nodiscard]] double operator[](ArmIndex a) const { return w_[a]; }
  [[nodiscard]] std::span<const double> values() const noexcept { return w_; }

  friend bool operator==(const AllocationWeights&, const AllocationWeights&) = default;

 private:
  std::vector<double> w_;
};

/// Outcome of a numerical max-min solve.
///
/// `objective` is the achieved min-over-pairs rate coefficient, 1/(2 max Omega)
/// for the worst-case program and min Delta^2/(2 Omega) for the oracle program.
/// `residual` is the largest weight change over the final iteration.
struct SolverReport {
  AllocationWeights weights;
  double objective = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  double residual = 0.0;
};

struct SolverOptions {
  double tolerance = 1e-10;
  std::size_t max_iterations = 1'000'000;
};

/// Pairwise variance cost var[i]/w[i] + var[j]/w[j]. Throws on i == j.
[[nodiscard]] double omega(const AllocationWeights& w, std::span<const double> variances,
                           ArmIndex i, ArmIndex j);

/// Worst-case (best-arm agnostic) allocation: minimizes the largest Omega over
/// all unordered pairs of arms. Throws NonConvergenceError if the solver does
/// not meet `options.tolerance` within the iteration cap.
[[nodiscard]] SolverReport solve_gna(std::span<const double> variances,
                                     const SolverOptions& options = {});

/// Closed-form allocation for a known best arm:
///   w(a*) = sd(a*) / (sd(a*) + sqrt(S)),  w(a) = (1 - w(a*)) var(a) / S,
/// with S the summed variance of the other arms.
[[nodiscard]] AllocationWeights solve_known_best(std::span<const double> variances,
                                                 ArmIndex a_star);

/// The same program as solve_known_best, min over w of max_{a != a*}
/// Omega(a*, a), solved numerically. Used to cross-check the closed form.
[[nodiscard]] SolverReport solve_known_best_numeric(std::span<const double> variances,
                                                    ArmIndex a_star,
                                                    const SolverOptions& options = {});

/// Full-information oracle allocation: minimizes max_{a != a*} Omega(a*, a) /
/// Delta_a^2. Needs the true means.
[[nodiscard]] SolverReport solve_oo(const BanditInstance& instance,
                                    const SolverOptions& options = {});

/// Hypothesis allocation around a conjectured best arm; identical to
/// solve_known_best with a* replaced by the conjecture.
[[nodiscard]] AllocationWeights solve_h_gna(std::span<const double> variances,
                                            ArmIndex conjectured);

/// Rate coefficient min_{a != a*} 1/(2 Omega(a*, a)) of a fixed allocation.
[[nodiscard]] double known_best_objective(const AllocationWeights& w,
                                          std::span<const double> variances, ArmIndex a_star);

/// Rate coefficient min over all pairs of 1/(2 Omega) of a fixed allocation.
[[nodiscard]] double gna_objective(const AllocationWeights& w, std::span<const double> variances);

// ---------------------------------------------------------------------------
// Brute-force oracle

enum class PairRate {
  kGna,        // all unordered pairs, weight 1
  kKnownBest,  // pairs (a*, a), weight 1
  kOracle,     // pairs (a*, a), weight Delta_a^2
};

struct GridOracleRequest {
  PairRate objective = PairRate::kGna;
  std::vector<double> variances;
  std::optional<std::vector<double>> means;  // required for kOracle
  std::optional<ArmIndex> a_star;            // required for kKnownBest
  double resolution = 1e-3;                  // 1/resolution must be an integer
  int refine_levels = 0;                     // zoom-in passes, each 10x finer
};

struct GridOracleResult {
  AllocationWeights weights;
  double objective;  // min over the selected pairs of coef/(2 Omega)
};

/// Exhaustive search of the simplex lattice {k * resolution}. Points with a
/// zero coordinate are skipped (open simplex); ties keep the lexicographically
/// smallest weight vector. Refinement passes search a finer lattice in a box
/// around the incumbent. Exponential in K, so K <= 4 is enforced.
[[nodiscard]] GridOracleResult grid_oracle(const GridOracleRequest& request);

}  // namespace bai
