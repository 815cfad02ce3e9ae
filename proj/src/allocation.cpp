#include "bai/allocation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

#include "bai/error.hpp"

namespace bai {

AllocationWeights::AllocationWeights(std::vector<double> weights) : w_(std::move(weights)) {
  if (w_.size() < 2) {
    throw ValidationError("allocation needs at least two arms");
  }
  double sum = 0.0;
  for (double x : w_) {
    if (!(x > 0.0 && x < 1.0)) {
      throw ValidationError("allocation weight outside (0, 1)");
    }
    sum += x;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw ValidationError("allocation weights do not sum to 1");
  }
}

AllocationWeights AllocationWeights::uniform(std::size_t arms) {
  return AllocationWeights(std::vector<double>(arms, 1.0 / static_cast<double>(arms)));
}

double omega(const AllocationWeights& w, std::span<const double> variances, ArmIndex i,
             ArmIndex j) {
  if (i == j) {
    throw ValidationError("omega needs two distinct arms");
  }
  if (i >= w.arms() || j >= w.arms() || w.arms() != variances.size()) {
    throw ValidationError("omega arm index out of range");
  }
  return variances[i] / w[i] + variances[j] / w[j];
}

double gna_objective(const AllocationWeights& w, std::span<const double> variances) {
  double worst = 0.0;
  for (ArmIndex i = 0; i < w.arms(); ++i) {
    for (ArmIndex j = i + 1; j < w.arms(); ++j) {
      worst = std::max(worst, omega(w, variances, i, j));
    }
  }
  return 1.0 / (2.0 * worst);
}

double known_best_objective(const AllocationWeights& w, std::span<const double> variances,
                            ArmIndex a_star) {
  double worst = 0.0;
  for (ArmIndex a = 0; a < w.arms(); ++a) {
    if (a == a_star) continue;
    worst = std::max(worst, omega(w, variances, a_star, a));
  }
  return 1.0 / (2.0 * worst);
}

namespace {

struct CostPair {
  ArmIndex i;
  ArmIndex j;
  double coef;
};

// minimize max_p coef_p * (var_i / w_i + var_j / w_j) over the simplex.
struct MinMaxProgram {
  std::vector<double> variances;
  std::vector<CostPair> pairs;
};

struct BarrierOutcome {
  std::vector<double> weights;
  std::size_t iterations = 0;
  bool converged = false;
  double residual = std::numeric_limits<double>::infinity();
};

// Log-barrier interior-point method on the epigraph form
//   minimize t  s.t.  cost_p(w) <= t,  sum(w) = 1,
// with Newton centering steps on the equality-constrained barrier problem.
// Variables x = (w_0, ..., w_{K-1}, t). The problem is rescaled so that the
// largest variance and the largest pair coefficient are both 1.
class BarrierSolver {
 public:
  BarrierSolver(MinMaxProgram program, const SolverOptions& options)
      : prog_(std::move(program)), opts_(options) {
    const double vmax = *std::max_element(prog_.variances.begin(), prog_.variances.end());
    for (double& v : prog_.variances) v /= vmax;
    double cmax = 0.0;
    for (const auto& p : prog_.pairs) cmax = std::max(cmax, p.coef);
    for (auto& p : prog_.pairs) p.coef /= cmax;
    arms_ = prog_.variances.size();
    const auto n = static_cast<Eigen::Index>(arms_ + 1);
    basis_ = Eigen::MatrixXd::Zero(n, n - 1);
    for (Eigen::Index a = 0; a + 2 < n; ++a) {
      basis_(a, a) = 1.0;
      basis_(n - 2, a) = -1.0;
    }
    basis_(n - 1, n - 2) = 1.0;
  }

  BarrierOutcome run() {
    const auto n = static_cast<Eigen::Index>(arms_ + 1);
    Eigen::VectorXd x(n);
    for (std::size_t a = 0; a < arms_; ++a) x(idx(a)) = 1.0 / static_cast<double>(arms_);
    x(n - 1) = 1.5 * max_cost(x);

    const double m = static_cast<double>(prog_.pairs.size());
    double tau = m / x(n - 1);
    BarrierOutcome out;

    while (true) {
      if (!center(x, tau, out)) {
        break;
      }
      if (m / tau <= kGapTolerance * x(n - 1)) {
        out.converged = out.residual <= opts_.tolerance;
        break;
      }
      tau *= kTauGrowth;
    }

    out.weights.resize(arms_);
    double sum = 0.0;
    for (std::size_t a = 0; a < arms_; ++a) sum += x(idx(a));
    for (std::size_t a = 0; a < arms_; ++a) out.weights[a] = x(idx(a)) / sum;
    return out;
  }

 private:
  static constexpr double kGapTolerance = 1e-13;
  static constexpr double kTauGrowth = 10.0;
  static constexpr double kNewtonTolerance = 1e-18;
  static constexpr double kStallTolerance = 1e-14;
  static constexpr int kMaxCenteringSteps = 200;

  static Eigen::Index idx(std::size_t a) { return static_cast<Eigen::Index>(a); }

  [[nodiscard]] double cost(const CostPair& p, const Eigen::VectorXd& x) const {
    return p.coef * (prog_.variances[p.i] / x(idx(p.i)) + prog_.variances[p.j] / x(idx(p.j)));
  }

  [[nodiscard]] double max_cost(const Eigen::VectorXd& x) const {
    double best = 0.0;
    for (const auto& p : prog_.pairs) best = std::max(best, cost(p, x));
    return best;
  }

  [[nodiscard]] bool feasible(const Eigen::VectorXd& x) const {
    for (std::size_t a = 0; a < arms_; ++a) {
      if (!(x(idx(a)) > 0.0)) return false;
    }
    const double t = x(x.size() - 1);
    for (const auto& p : prog_.pairs) {
      if (!(t - cost(p, x) > 0.0)) return false;
    }
    return true;
  }

  [[nodiscard]] double barrier_value(const Eigen::VectorXd& x, double tau) const {
    const double t = x(x.size() - 1);
    double f = tau * t;
    for (const auto& p : prog_.pairs) f -= std::log(t - cost(p, x));
    return f;
  }

  // Newton iterations at fixed tau. Returns false when the iteration cap is
  // exhausted.
  bool center(Eigen::VectorXd& x, double tau, BarrierOutcome& out) {
    const Eigen::Index n = x.size();
    const Eigen::Index tpos = n - 1;
    Eigen::VectorXd grad(n);
    Eigen::MatrixXd hess(n, n);
    Eigen::VectorXd a_p(n);

    for (int step = 0; step < kMaxCenteringSteps; ++step) {
      if (out.iterations >= opts_.max_iterations) return false;

      const double t = x(tpos);
      grad.setZero();
      grad(tpos) = tau;
      hess.setZero();
      for (const auto& p : prog_.pairs) {
        const double s = t - cost(p, x);
        const double wi = x(idx(p.i));
        const double wj = x(idx(p.j));
        const double vi = p.coef * prog_.variances[p.i];
        const double vj = p.coef * prog_.variances[p.j];
        // a_p = gradient of cost_p - t
        a_p.setZero();
        a_p(idx(p.i)) = -vi / (wi * wi);
        a_p(idx(p.j)) = -vj / (wj * wj);
        a_p(tpos) = -1.0;
        grad += a_p / s;
        hess += (a_p * a_p.transpose()) / (s * s);
        hess(idx(p.i), idx(p.i)) += 2.0 * vi / (wi * wi * wi) / s;
        hess(idx(p.j), idx(p.j)) += 2.0 * vj / (wj * wj * wj) / s;
      }

      // Null-space step: w_{K-1} = 1 - sum of the other weights, so every
      // direction stays on the simplex exactly.
      const Eigen::VectorXd g_red = basis_.transpose() * grad;
      const Eigen::MatrixXd h_red = basis_.transpose() * hess * basis_;
      const Eigen::VectorXd d_red = h_red.ldlt().solve(-g_red);
      const Eigen::VectorXd dx = basis_ * d_red;
      const double decrement = -grad.dot(dx);

      double s = 1.0;
      while (!feasible(x + s * dx)) {
        s *= 0.5;
        if (s < 1e-30) return true;
      }
      // Near the center the barrier value is dominated by rounding, so the
      // sufficient-decrease test is only applied to long steps.
      if (decrement > 1e-10) {
        const double f0 = barrier_value(x, tau);
        while (barrier_value(x + s * dx, tau) > f0 - 0.25 * s * decrement) {
          s *= 0.5;
          if (s < 1e-30) break;
        }
      }
      x += s * dx;
      x(tpos - 1) = 1.0 - x.head(tpos - 1).sum();
      ++out.iterations;
      out.residual = s * dx.head(tpos).cwiseAbs().maxCoeff();

      double moved = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        moved = std::max(moved, std::abs(s * dx(i)) / std::max(std::abs(x(i)), 1e-300));
      }
      if (decrement / 2.0 <= kNewtonTolerance || moved <= kStallTolerance) {
        return true;
      }
    }
    return true;
  }

  MinMaxProgram prog_;
  SolverOptions opts_;
  std::size_t arms_ = 0;
  Eigen::MatrixXd basis_;
};

BarrierOutcome solve_program(MinMaxProgram program, const SolverOptions& options) {
  return BarrierSolver(std::move(program), options).run();
}

SolverReport finish(BarrierOutcome outcome, const std::function<double(const AllocationWeights&)>& objective,
                    const SolverOptions& options, const char* what) {
  AllocationWeights w(std::move(outcome.weights));
  const double obj = objective(w);
  if (!outcome.converged && outcome.residual > options.tolerance) {
    throw NonConvergenceError(std::string(what) + " did not converge: residual " +
                              [&] { char b[32]; std::snprintf(b, sizeof b, "%.3g", outcome.residual); return std::string(b); }() + " after " +
                              std::to_string(outcome.iterations) + " iterations");
  }
  return SolverReport{std::move(w), obj, outcome.iterations, outcome.converged, outcome.residual};
}

std::vector<double> to_vector(std::span<const double> s) { return {s.begin(), s.end()}; }

}  // namespace

SolverReport solve_gna(std::span<const double> variances, const SolverOptions& options) {
  validate_variances(variances);
  MinMaxProgram prog{to_vector(variances), {}};
  for (ArmIndex i = 0; i < variances.size(); ++i) {
    for (ArmIndex j = i + 1; j < variances.size(); ++j) {
      prog.pairs.push_back({i, j, 1.0});
    }
  }
  return finish(
      solve_program(std::move(prog), options),
      [&](const AllocationWeights& w) { return gna_objective(w, variances); }, options,
      "solve_gna");
}

AllocationWeights solve_known_best(std::span<const double> variances, ArmIndex a_star) {
  validate_variances(variances);
  if (a_star >= variances.size()) {
    throw ValidationError("best arm index out of range");
  }
  double rest = 0.0;
  for (ArmIndex a = 0; a < variances.size(); ++a) {
    if (a != a_star) rest += variances[a];
  }
  const double sd_star = std::sqrt(variances[a_star]);
  const double w_star = sd_star / (sd_star + std::sqrt(rest));
  std::vector<double> w(variances.size());
  for (ArmIndex a = 0; a < variances.size(); ++a) {
    w[a] = (a == a_star) ? w_star : (1.0 - w_star) * variances[a] / rest;
  }
  return AllocationWeights(std::move(w));
}

AllocationWeights solve_h_gna(std::span<const double> variances, ArmIndex conjectured) {
  return solve_known_best(variances, conjectured);
}

SolverReport solve_known_best_numeric(std::span<const double> variances, ArmIndex a_star,
                                      const SolverOptions& options) {
  validate_variances(variances);
  if (a_star >= variances.size()) {
    throw ValidationError("best arm index out of range");
  }
  MinMaxProgram prog{to_vector(variances), {}};
  for (ArmIndex a = 0; a < variances.size(); ++a) {
    if (a != a_star) prog.pairs.push_back({a_star, a, 1.0});
  }
  return finish(
      solve_program(std::move(prog), options),
      [&](const AllocationWeights& w) { return known_best_objective(w, variances, a_star); },
      options, "solve_known_best_numeric");
}

SolverReport solve_oo(const BanditInstance& instance, const SolverOptions& options) {
  const ArmIndex a_star = instance.best_arm();
  const auto g = gaps(instance);
  MinMaxProgram prog{to_vector(instance.variances()), {}};
  for (ArmIndex a = 0; a < instance.arms(); ++a) {
    if (a == a_star) continue;
    if (!(g[a] > 0.0)) {
      throw ValidationError("oracle allocation needs strictly positive gaps");
    }
    prog.pairs.push_back({a_star, a, 1.0 / (g[a] * g[a])});
  }
  const auto variances = instance.variances();
  return finish(
      solve_program(std::move(prog), options),
      [&](const AllocationWeights& w) {
        double rate = std::numeric_limits<double>::infinity();
        for (ArmIndex a = 0; a < w.arms(); ++a) {
          if (a == a_star) continue;
          rate = std::min(rate, g[a] * g[a] / (2.0 * omega(w, variances, a_star, a)));
        }
        return rate;
      },
      options, "solve_oo");
}

// ---------------------------------------------------------------------------

namespace {

class GridObjective {
 public:
  explicit GridObjective(const GridOracleRequest& req) : var_(req.variances) {
    const std::size_t k = var_.size();
    switch (req.objective) {
      case PairRate::kGna:
        for (ArmIndex i = 0; i < k; ++i)
          for (ArmIndex j = i + 1; j < k; ++j) pairs_.push_back({i, j, 1.0});
        break;
      case PairRate::kKnownBest: {
        if (!req.a_star || *req.a_star >= k) {
          throw ValidationError("grid oracle: known-best objective needs a valid a_star");
        }
        for (ArmIndex a = 0; a < k; ++a)
          if (a != *req.a_star) pairs_.push_back({*req.a_star, a, 1.0});
        break;
      }
      case PairRate::kOracle: {
        if (!req.means) {
          throw ValidationError("grid oracle: oracle objective needs means");
        }
        const BanditInstance inst(*req.means, var_);
        const auto g = gaps(inst);
        for (ArmIndex a = 0; a < k; ++a)
          if (a != inst.best_arm()) pairs_.push_back({inst.best_arm(), a, g[a] * g[a]});
        break;
      }
    }
  }

  // min over pairs of coef / (2 Omega); larger is better.
  [[nodiscard]] double operator()(std::span<const double> w) const {
    double rate = std::numeric_limits<double>::infinity();
    for (const auto& p : pairs_) {
      rate = std::min(rate, p.coef / (2.0 * (var_[p.i] / w[p.i] + var_[p.j] / w[p.j])));
    }
    return rate;
  }

 private:
  std::vector<double> var_;
  std::vector<CostPair> pairs_;
};

struct Incumbent {
  std::vector<double> w;
  double value = -std::numeric_limits<double>::infinity();

  void offer(std::span<const double> cand, double v) {
    // Strict improvement only, so the earliest (lexicographically smallest)
    // candidate wins ties up to rounding.
    if (v > value * (1.0 + 1e-12) || w.empty()) {
      w.assign(cand.begin(), cand.end());
      value = v;
    }
  }
};

}  // namespace

GridOracleResult grid_oracle(const GridOracleRequest& req) {
  const std::size_t k = req.variances.size();
  if (k > 4) {
    throw ValidationError("grid oracle supports at most 4 arms");
  }
  validate_variances(req.variances);
  if (!(req.resolution > 0.0 && req.resolution < 1.0)) {
    throw ValidationError("grid resolution must lie in (0, 1)");
  }
  const double steps_real = 1.0 / req.resolution;
  const auto steps = static_cast<long>(std::llround(steps_real));
  if (std::abs(steps_real - static_cast<double>(steps)) > 1e-9 * steps_real ||
      steps < static_cast<long>(k)) {
    throw ValidationError("grid resolution must divide 1");
  }

  const GridObjective objective(req);
  Incumbent best;
  std::vector<long> counts(k, 0);
  std::vector<double> w(k, 0.0);

  // Compositions of `steps` into k positive parts, in lexicographic order.
  std::function<void(std::size_t, long)> enumerate = [&](std::size_t pos, long remaining) {
    if (pos + 1 == k) {
      counts[pos] = remaining;
      for (std::size_t a = 0; a < k; ++a)
        w[a] = static_cast<double>(counts[a]) / static_cast<double>(steps);
      best.offer(w, objective(w));
      return;
    }
    const long slots_after = static_cast<long>(k - pos - 1);
    for (long c = 1; c <= remaining - slots_after; ++c) {
      counts[pos] = c;
      enumerate(pos + 1, remaining - c);
    }
  };
  enumerate(0, steps);

  double h = req.resolution;
  constexpr long kHalfWidth = 20;
  for (int level = 0; level < req.refine_levels; ++level) {
    h /= 10.0;
    const std::vector<double> centre = best.w;
    std::vector<long> offset(k - 1, -kHalfWidth);
    while (true) {
      double head = 0.0;
      bool ok = true;
      for (std::size_t a = 0; a + 1 < k; ++a) {
        w[a] = centre[a] + static_cast<double>(offset[a]) * h;
        ok = ok && w[a] > 0.0;
        head += w[a];
      }
      w[k - 1] = 1.0 - head;
      if (ok && w[k - 1] > 0.0) best.offer(w, objective(w));

      std::size_t d = k - 1;
      while (d > 0 && offset[d - 1] == kHalfWidth) {
        offset[d - 1] = -kHalfWidth;
        --d;
      }
      if (d == 0) break;
      ++offset[d - 1];
    }
  }

  return GridOracleResult{AllocationWeights(best.w), best.value};
}

}  // namespace bai
