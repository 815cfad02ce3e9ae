#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "bai/bounds.hpp"
#include "bai/error.hpp"
#include "bai/sim.hpp"
#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"

using namespace bai;

namespace {

ExperimentConfig two_arm_config() {
  ExperimentConfig c;
  c.instance = BanditInstance({1.0, 0.75}, {1.0, 4.0});
  c.strategies = {StrategySpec::gna_eba(), StrategySpec::uniform_eba()};
  c.budgets = {100, 200, 400};
  c.trials = 3000;
  c.master_seed = 7;
  return c;
}

}  // namespace

TEST_SUITE("sim") {
  TEST_CASE("generator: fixed means") {
    InstanceGenerator g;
    g.arms = 2;
    g.mean_rule = FixedMeans{0.75};
    g.variance_support = {0.5, 5.0};
    const auto p = generate_instance(g, 1);
    CHECK(p.means()[0] == 1.0);
    CHECK(p.means()[1] == 0.75);
    for (double v : p.variances()) {
      CHECK(v >= 0.5);
      CHECK(v <= 5.0);
    }
    CHECK(generate_instance(g, 1) == p);
    CHECK_FALSE(generate_instance(g, 2) == p);
  }

  TEST_CASE("generator: uniform means") {
    InstanceGenerator g;
    g.arms = 5;
    g.mean_rule = UniformMeans{0.75, 0.90};
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto p = generate_instance(g, seed);
      CHECK(p.means()[0] == 1.0);
      CHECK(p.means()[1] == 0.75);
      for (std::size_t a = 2; a < 5; ++a) {
        CHECK(p.means()[a] >= 0.75);
        CHECK(p.means()[a] <= 0.90);
      }
      CHECK(p.best_arm() == 0);
    }
  }

  TEST_CASE("generator rejects bad specs") {
    InstanceGenerator g;
    g.arms = 3;
    g.mean_rule = FixedMeans{1.0};
    CHECK_THROWS_AS((void)generate_instance(g, 0), ValidationError);
    g.mean_rule = UniformMeans{0.8, 1.2};
    CHECK_THROWS_AS((void)generate_instance(g, 0), ValidationError);
    g.mean_rule = FixedMeans{0.5};
    g.variance_support = {0.0, 1.0};
    CHECK_THROWS_AS((void)generate_instance(g, 0), ValidationError);
    g.variance_support = {2.0, 1.0};
    CHECK_THROWS_AS((void)generate_instance(g, 0), ValidationError);
    g.variance_support = {1.0, 2.0};
    g.arms = 1;
    CHECK_THROWS_AS((void)generate_instance(g, 0), ValidationError);
  }

  TEST_CASE("summary statistics") {
    const auto r = summarize("gna_eba", 2, 1000, 400, 100);
    CHECK(r.p_hat == 0.25);
    CHECK(r.std_err == std::sqrt(0.25 * 0.75 / 400));
    CHECK(r.complexity == doctest::Approx(-std::log(0.25) / 1000));
    CHECK_FALSE(r.censored);

    const auto c = summarize("gna_eba", 2, 1000, 999, 0);
    CHECK(c.censored);
    CHECK(c.p_hat == 0.0);
    CHECK(c.std_err == 0.0);
    CHECK(c.complexity == doctest::Approx(std::log(1000.0) / 1000));

    const auto one = summarize("sr", 2, 10, 5, 5);
    CHECK(one.complexity == 0.0);
    CHECK_FALSE(std::signbit(one.complexity));

    constexpr std::uint64_t kTrials = 1'000'000'000;
    const auto e5 = summarize("x", 2, 1000, kTrials,
                              static_cast<std::uint64_t>(std::llround(std::exp(-5.0) * kTrials)));
    CHECK(e5.complexity == doctest::Approx(0.005).epsilon(1e-8));

    CHECK_THROWS_AS((void)summarize("x", 2, 10, 0, 0), ValidationError);
    CHECK_THROWS_AS((void)summarize("x", 2, 10, 5, 6), ValidationError);
  }

  TEST_CASE("seed mixing") {
    CHECK(mix64(0) == 0xe220a8397b1dcdafULL);  // splitmix64 reference output for state 0
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    const auto expected = mix64(mix64(mix64(mix64(9) ^ fnv1a64("sr")) ^ 100) ^ 3);
    CHECK(trial_seed(9, "sr", 100, 3) == expected);
    CHECK(trial_seed(9, "sr", 100, 3) != trial_seed(9, "sr", 100, 4));
    CHECK(trial_seed(9, "sr", 100, 3) != trial_seed(9, "gna_eba", 100, 3));
    CHECK(trial_seed(9, "sr", 100, 3) != trial_seed(9, "sr", 200, 3));
  }

  TEST_CASE("estimate matches the exact probability and ignores worker count") {
    const BanditInstance p({1.0, 0.75}, {1.0, 4.0});
    const auto one = estimate_misid(StrategySpec::gna_eba(), p, 500, 100000, 11);
    const auto four = estimate_misid(StrategySpec::gna_eba(), p, 500, 100000, 11, {4});
    CHECK(one == four);
    const double exact = oracle::two_arm_misid(0.25, 1.0, 4.0, 167, 333);
    CHECK(std::abs(one.p_hat - exact) <= 3.0 * std::sqrt(exact * (1 - exact) / 100000));
    REQUIRE(one.theoretical_rate);
    CHECK(*one.theoretical_rate == doctest::Approx(0.0625 / 18.0).epsilon(1e-9));
    CHECK(one.master_seed == 11);
    CHECK(one.trials == 100000);
  }

  TEST_CASE("GNA beats uniform allocation on the two-arm instance") {
    // Exact values at T = 1000: counts (334, 666) give 0.0042040,
    // (500, 500) give 0.0062097.
    const BanditInstance p({1.0, 0.75}, {1.0, 4.0});
    const double exact_gna = oracle::two_arm_misid(0.25, 1.0, 4.0, 334, 666);
    const double exact_uni = oracle::two_arm_misid(0.25, 1.0, 4.0, 500, 500);
    CHECK(exact_gna == doctest::Approx(0.0042040).epsilon(1e-4));
    CHECK(exact_uni == doctest::Approx(0.0062097).epsilon(1e-4));

    constexpr std::uint64_t kTrials = 100000;
    const auto gna = estimate_misid(StrategySpec::gna_eba(), p, 1000, kTrials, 5);
    const auto uni = estimate_misid(StrategySpec::uniform_eba(), p, 1000, kTrials, 5);
    CHECK(std::abs(gna.p_hat - exact_gna) <= 3.0 * std::sqrt(exact_gna * (1 - exact_gna) / kTrials));
    CHECK(std::abs(uni.p_hat - exact_uni) <= 3.0 * std::sqrt(exact_uni * (1 - exact_uni) / kTrials));
    // The exact difference is 6.2 combined standard errors at this trial
    // count, so a 3-error margin holds with overwhelming probability.
    const double combined = std::hypot(gna.std_err, uni.std_err);
    CHECK(uni.p_hat - gna.p_hat > 3.0 * combined);

    // Empirical complexity tracks the exact complexity, which sits above the
    // rate at this budget.
    const double exact_complexity = -std::log(exact_gna) / 1000.0;
    CHECK(std::abs(gna.complexity - exact_complexity) <= 0.03 * exact_complexity);
    CHECK(gna.complexity > *gna.theoretical_rate);
  }

  TEST_CASE("sweep shape, determinism and per-cell statistics") {
    auto config = two_arm_config();
    const auto report = run_sweep(config);
    REQUIRE(report.rows.size() == 6);
    CHECK(report.failures.empty());
    CHECK(report.rows[0].strategy == "gna_eba");
    CHECK(report.rows[0].budget == 100);
    CHECK(report.rows[5].strategy == "uniform_eba");
    CHECK(report.rows[5].budget == 400);

    config.workers = 3;
    const auto parallel = run_sweep(config);
    CHECK(parallel.rows == report.rows);
    CHECK(to_csv(parallel.rows) == to_csv(report.rows));

    for (std::size_t s = 0; s < 2; ++s) {
      for (std::size_t i = 0; i < 3; ++i) {
        const auto& r = report.rows[3 * s + i];
        CHECK(r.std_err == std::sqrt(r.p_hat * (1 - r.p_hat) / r.trials));
        CHECK(r.censored == (r.p_hat == 0.0));
        CHECK(r.complexity >= 0.0);
        // The union bound at the realized fractions dominates the truth.
        const auto w = *report.weights[s].second;
        const auto sched = build_schedule(w, r.budget);
        const double bound =
            chernoff_misid_bound(report.instance, AllocationWeights(sched.fractions()), r.budget);
        CHECK(bound >= r.p_hat - 3.0 * r.std_err);
        if (i > 0) {
          const auto& prev = report.rows[3 * s + i - 1];
          CHECK(r.p_hat <= prev.p_hat + 3.0 * std::hypot(r.std_err, prev.std_err));
        }
      }
    }
  }

  TEST_CASE("sweep reports failures without aborting") {
    ExperimentConfig c;
    c.instance = BanditInstance({1.0, 0.5, 0.25}, {1.0, 1.0, 1.0});
    c.strategies = {StrategySpec::h_gna_eba(7), StrategySpec::successive_rejects(),
                    StrategySpec::gna_eba()};
    c.budgets = {2, 30};
    c.trials = 50;
    const auto r = run_sweep(c);
    REQUIRE(r.failures.size() == 2);
    CHECK(r.failures[0].strategy == "h_gna_eba:8");
    CHECK_FALSE(r.failures[0].budget.has_value());
    CHECK(r.failures[1].strategy == "sr");
    CHECK(r.failures[1].budget == std::uint64_t{2});
    REQUIRE(r.rows.size() == 3);
    CHECK(r.rows[0].strategy == "sr");
    CHECK_FALSE(r.rows[0].theoretical_rate.has_value());
    CHECK(r.rows[1].theoretical_rate.has_value());
    // T = 2 leaves one of three arms without samples.
    REQUIRE(r.warnings.size() == 1);
    CHECK(r.warnings[0].budget == std::uint64_t{2});
  }

  TEST_CASE("config validation") {
    auto c = two_arm_config();
    c.budgets = {100, 100};
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = two_arm_config();
    c.trials = 0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = two_arm_config();
    c.strategies.clear();
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = two_arm_config();
    c.budgets = {0};
    CHECK_THROWS_AS(c.validate(), ValidationError);
  }

  TEST_CASE("generated instance is fixed per configuration") {
    ExperimentConfig c;
    c.instance = InstanceGenerator{4, FixedMeans{0.75}, {0.5, 5.0}};
    c.strategies = {StrategySpec::gna_eba()};
    c.budgets = {50};
    c.trials = 10;
    c.master_seed = 3;
    CHECK(c.resolve_instance() == c.resolve_instance());
    CHECK(run_sweep(c).instance == generate_instance(std::get<InstanceGenerator>(c.instance), 3));
  }

  TEST_CASE("csv and json output") {
    std::vector<SweepResult> rows;
    rows.push_back(summarize("gna_eba", 2, 500, 1000, 31));
    rows.back().theoretical_rate = 0.1;
    rows.back().master_seed = 7;
    rows.push_back(summarize("sr", 2, 500, 1000, 0));
    rows.back().master_seed = 7;
    const std::string csv = to_csv(rows);
    CHECK(csv ==
          "strategy,K,T,trials,p_hat,std_err,complexity,censored,theoretical_rate,master_seed\n"
          "gna_eba,2,500,1000,0.031," + format_double(rows[0].std_err) + "," +
              format_double(rows[0].complexity) + ",false,0.1,7\n"
              "sr,2,500,1000,0,0," + format_double(rows[1].complexity) + ",true,,7\n");

    const auto j = nlohmann::json::parse(to_json(rows));
    REQUIRE(j.size() == 2);
    CHECK(j[0]["p_hat"].get<double>() == 0.031);
    CHECK(j[0]["std_err"].get<double>() == rows[0].std_err);
    CHECK(j[1]["theoretical_rate"].is_null());
    CHECK(j[1]["censored"].get<bool>());

    for (double x : {0.1, 1.0 / 3.0, 1e-300, 123456789.0}) {
      CHECK(std::stod(format_double(x)) == x);
    }
  }
}
