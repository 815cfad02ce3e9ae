#include <random>
#include <vector>

#include "bai/error.hpp"
#include "bai/model.hpp"
#include "doctest.h"

using namespace bai;

TEST_SUITE("model") {
  TEST_CASE("best arm") {
    CHECK(best_arm(std::vector<double>{1.0, 0.75}) == 0);
    CHECK(best_arm(std::vector<double>{0.0, 0.0, 1.0}) == 2);
    CHECK_THROWS_WITH_AS((void)best_arm(std::vector<double>{1.0, 1.0}), "best arm not unique",
                         ValidationError);
    CHECK_THROWS_AS((void)best_arm(std::vector<double>{0.5, 2.0, 2.0}), ValidationError);
    CHECK(best_arm(std::vector<double>{2.0, 1.0, 1.0}) == 0);
    CHECK(best_arm(BanditInstance({0.1, 0.3, 0.2}, {1, 1, 1})) == 1);
  }

  TEST_CASE("instance validation") {
    CHECK_THROWS_AS(BanditInstance({1.0}, {1.0}), ValidationError);
    CHECK_THROWS_AS(BanditInstance({1.0, 0.5}, {1.0}), ValidationError);
    CHECK_THROWS_WITH_AS(BanditInstance({1.0, 0.5}, {0.0, 1.0}),
                         doctest::Contains("variance must be > 0"), ValidationError);
    CHECK_THROWS_AS(BanditInstance({1.0, 0.5}, {-1.0, 1.0}), ValidationError);
    CHECK_THROWS_AS(BanditInstance({1.0, 0.5}, {1.0, INFINITY}), ValidationError);
    CHECK_THROWS_AS(BanditInstance({1.0, NAN}, {1.0, 1.0}), ValidationError);
    CHECK_THROWS_WITH_AS(BanditInstance({1.0, 1.0}, {1.0, 1.0}), "best arm not unique",
                         ValidationError);

    const BanditInstance p({1.0, 0.75}, {1.0, 4.0});
    CHECK(p.arms() == 2);
    CHECK(p.best_arm() == 0);
    CHECK(p.stddev(1) == 2.0);
    CHECK(p == BanditInstance({1.0, 0.75}, {1.0, 4.0}));
  }

  TEST_CASE("gaps") {
    CHECK(gaps(BanditInstance({1.0, 0.75}, {1, 1})) == std::vector<double>{0.0, 0.25});
    CHECK(gaps(BanditInstance({1.0, 0.75, 0.75, 0.75, 0.75}, {1, 1, 1, 1, 1})) ==
          std::vector<double>{0.0, 0.25, 0.25, 0.25, 0.25});
    const auto g = gaps(BanditInstance({5.0, 5.0 - 1e-9}, {1, 1}));
    CHECK(g[0] == 0.0);
    CHECK(g[1] == doctest::Approx(1e-9).epsilon(1e-6));
  }

  TEST_CASE("gap bounds") {
    CHECK(validate_gap_bounds(BanditInstance({1.0, 0.75}, {1, 1}), GapBounds(0.25, 0.25)));
    CHECK_FALSE(
        validate_gap_bounds(BanditInstance({1.0, 0.75, 0.5}, {1, 1, 1}), GapBounds(0.25, 0.25)));
    CHECK(validate_gap_bounds(BanditInstance({1.0, 0.8, 0.7}, {1, 1, 1}), GapBounds(0.1, 0.4)));
    CHECK_THROWS_AS(GapBounds(0.0, 1.0), ValidationError);
    CHECK_THROWS_AS(GapBounds(0.5, 0.25), ValidationError);
    CHECK_THROWS_AS(GapBounds(0.5, INFINITY), ValidationError);
  }

  TEST_CASE("properties over random instances") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> mean(-3.0, 3.0);
    std::uniform_real_distribution<double> var(0.1, 10.0);
    std::uniform_int_distribution<int> arms(2, 8);
    for (int trial = 0; trial < 500; ++trial) {
      const int k = arms(rng);
      std::vector<double> m(k);
      std::vector<double> v(k);
      for (int a = 0; a < k; ++a) {
        m[a] = mean(rng);
        v[a] = var(rng);
      }
      const BanditInstance p(m, v);
      const auto g = gaps(p);
      CHECK(g[p.best_arm()] == 0.0);
      for (double x : g) CHECK(x >= 0.0);
      CHECK(validate_gap_bounds(p, observed_gap_bounds(p)));

      const double shift = mean(rng);
      std::vector<double> shifted = m;
      for (auto& x : shifted) x += shift;
      const auto gs = gaps(BanditInstance(shifted, v));
      for (int a = 0; a < k; ++a) CHECK(gs[a] == doctest::Approx(g[a]).epsilon(1e-12).scale(1));
    }
  }
}
