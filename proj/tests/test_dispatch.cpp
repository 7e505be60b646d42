#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "mgrt/dispatch.hpp"
#include "mgrt/rng.hpp"

using namespace mgrt;

namespace {

// Controller inputs that reproduce the worked four-step example:
// C = {-60, -20, 140, 500}, D = {6, 2, -7, -25} at omega = 10.
StateWindow example_window() {
  StateWindow w;
  w.load_kw = {100.0, 120.0, 170.0, 250.0};
  w.solar_kw = {160.0, 140.0, 100.0, 0.0};
  w.buy_price = {3.0, 3.0, 2.0, 2.0};
  w.sell_price = {1.0, 1.0, 1.0, 1.0};
  w.soc = 75.0;
  return w;
}

ControllerConfig example_config() {
  ControllerConfig config;
  config.horizon = 4;
  config.omega = 10.0;
  return config;
}

// Recomputes the SoC recurrence and band feasibility of a returned plan.
void check_plan_feasible(const ControlPlan& plan, const CostDiff& cd, double soc,
                         const ControllerConfig& config) {
  REQUIRE(plan.battery_on.size() == cd.steps());
  REQUIRE(plan.grid_on.size() == cd.steps());
  REQUIRE(plan.soc_path.size() == cd.steps());
  double prev = soc;
  double objective = 0.0;
  for (std::size_t t = 0; t < cd.steps(); ++t) {
    CHECK(plan.battery_on[t] + plan.grid_on[t] == 1);
    const double expected =
        plan.battery_on[t] ? prev + cd.diff[t] * config.step_hours : prev;
    CHECK(plan.soc_path[t] == expected);
    CHECK(plan.soc_path[t] >= config.soc_min - kSocTolerance);
    CHECK(plan.soc_path[t] <= config.soc_max + kSocTolerance);
    if (!plan.battery_on[t]) objective += cd.cost[t];
    prev = plan.soc_path[t];
  }
  CHECK(plan.objective == objective);
}

}  // namespace

TEST_CASE("cost/diff precomputation matches the worked example") {
  const CostDiff cd = build_cost_diff(example_window(), example_config());
  CHECK(cd.cost == std::vector<double>{-60.0, -20.0, 140.0, 500.0});
  CHECK(cd.diff == std::vector<double>{6.0, 2.0, -7.0, -25.0});
}

TEST_CASE("balanced window produces all-zero cost and diff") {
  StateWindow w;
  w.load_kw = {3.0, 1.0, 2.0};
  w.solar_kw = w.load_kw;
  w.buy_price = {9.4, 9.4, 9.4};
  w.sell_price = {5.0, 5.0, 5.0};
  ControllerConfig config;
  config.horizon = 3;
  const CostDiff cd = build_cost_diff(w, config);
  CHECK(cd.cost == std::vector<double>{0.0, 0.0, 0.0});
  CHECK(cd.diff == std::vector<double>{0.0, 0.0, 0.0});
}

TEST_CASE("deficit step is priced at the buy tariff") {
  StateWindow w;
  w.load_kw = {5.0};
  w.solar_kw = {0.0};
  w.buy_price = {10.0};
  w.sell_price = {1.0};
  ControllerConfig config;
  config.horizon = 1;
  config.omega = 2.0;
  const CostDiff cd = build_cost_diff(w, config);
  CHECK(cd.cost == std::vector<double>{50.0});
  CHECK(cd.diff == std::vector<double>{-2.5});
}

TEST_CASE("window length must match the horizon") {
  ControllerConfig config;
  config.horizon = 5;
  config.omega = 10.0;
  CHECK_THROWS_AS(build_cost_diff(example_window(), config), std::invalid_argument);
}

TEST_CASE("config validation") {
  ControllerConfig config;
  CHECK_NOTHROW(config.validate());
  SUBCASE("zero horizon") {
    config.horizon = 0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  }
  SUBCASE("non-positive step") {
    config.step_hours = 0.0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  }
  SUBCASE("inverted band") {
    config.soc_min = 100.0;
    config.soc_max = 75.0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  }
  SUBCASE("band outside percent range") {
    config.soc_max = 101.0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  }
  SUBCASE("non-positive omega") {
    config.omega = 0.0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  }
}

TEST_CASE("solver reproduces the worked example optimum") {
  const ControllerConfig config = example_config();
  const CostDiff cd = build_cost_diff(example_window(), config);
  const ControlPlan plan = solve_dispatch(cd, 75.0, config);
  CHECK(plan.battery_on == std::vector<std::uint8_t>{1, 1, 1, 0});
  CHECK(plan.grid_on == std::vector<std::uint8_t>{0, 0, 0, 1});
  CHECK(plan.objective == 500.0);
  CHECK(plan.soc_path == std::vector<double>{81.0, 83.0, 76.0, 76.0});
  check_plan_feasible(plan, cd, 75.0, config);
}

TEST_CASE("all-zero costs pick the all-OFF plan by tie-break") {
  ControllerConfig config;
  config.horizon = 4;
  CostDiff cd;
  cd.cost.assign(4, 0.0);
  cd.diff.assign(4, 0.0);
  const ControlPlan plan = solve_dispatch(cd, 80.0, config);
  CHECK(plan.objective == 0.0);
  CHECK(plan.battery_on == std::vector<std::uint8_t>{0, 0, 0, 0});
}

TEST_CASE("full battery cannot charge away a positive cost") {
  ControllerConfig config;
  config.horizon = 1;
  CostDiff cd;
  cd.cost = {10.0};
  cd.diff = {1.0};
  const ControlPlan plan = solve_dispatch(cd, 100.0, config);
  CHECK(plan.battery_on == std::vector<std::uint8_t>{0});
  CHECK(plan.objective == 10.0);
}

TEST_CASE("initial SoC outside the band is rejected") {
  ControllerConfig config;
  config.horizon = 1;
  CostDiff cd;
  cd.cost = {1.0};
  cd.diff = {0.0};
  CHECK_THROWS_AS(solve_dispatch(cd, 74.9, config), std::invalid_argument);
  CHECK_THROWS_AS(solve_dispatch(cd, 100.1, config), std::invalid_argument);
}

TEST_CASE("enumeration agrees on the worked example and small cases") {
  const ControllerConfig config = example_config();
  const CostDiff cd = build_cost_diff(example_window(), config);
  const ControlPlan a = solve_dispatch(cd, 75.0, config);
  const ControlPlan b = enumerate_dispatch(cd, 75.0, config);
  CHECK(a.objective == b.objective);
  CHECK(a.battery_on == b.battery_on);
  CHECK(a.soc_path == b.soc_path);

  ControllerConfig one;
  one.horizon = 1;
  CostDiff sell;
  sell.cost = {-5.0};
  sell.diff = {1.0};
  // Idling on a surplus step forfeits the sale.
  const ControlPlan p = enumerate_dispatch(sell, 80.0, one);
  CHECK(p.battery_on == std::vector<std::uint8_t>{0});
  CHECK(p.objective == -5.0);
}

TEST_CASE("enumeration guard rejects long horizons") {
  ControllerConfig config;
  config.horizon = 21;
  CostDiff cd;
  cd.cost.assign(21, 1.0);
  cd.diff.assign(21, 0.0);
  CHECK_THROWS_AS(enumerate_dispatch(cd, 80.0, config), std::invalid_argument);
}

TEST_CASE("control step returns the first command of the optimum") {
  CHECK(control_step(example_window(), example_config()).first == 1);

  StateWindow surplus;
  surplus.load_kw = {1.0, 1.0};
  surplus.solar_kw = {4.0, 4.0};
  surplus.buy_price = {9.4, 9.4};
  surplus.sell_price = {5.0, 5.0};
  surplus.soc = 100.0;
  ControllerConfig config;
  config.horizon = 2;
  // Battery already full: every charge step is infeasible, so sell.
  auto [cmd, plan] = control_step(surplus, config);
  CHECK(cmd == 0);
  CHECK(plan.battery_on == std::vector<std::uint8_t>{0, 0});

  StateWindow balanced;
  balanced.load_kw = {2.0, 2.0};
  balanced.solar_kw = {2.0, 2.0};
  balanced.buy_price = {9.4, 9.4};
  balanced.sell_price = {5.0, 5.0};
  balanced.soc = 80.0;
  CHECK(control_step(balanced, config).first == 0);
}

TEST_CASE("solver matches enumeration on 500 random instances") {
  Rng rng = Rng::stream(2024, "dispatch/fuzz");
  for (int i = 0; i < 500; ++i) {
    ControllerConfig config;
    config.horizon = static_cast<std::size_t>(rng.uniform_int(1, 12));
    CostDiff cd;
    for (std::size_t t = 0; t < config.horizon; ++t) {
      cd.cost.push_back(rng.uniform(-100.0, 100.0));
      cd.diff.push_back(rng.uniform(-10.0, 10.0));
    }
    const double soc = rng.uniform(75.0, 100.0);

    const ControlPlan fast = solve_dispatch(cd, soc, config);
    const ControlPlan slow = enumerate_dispatch(cd, soc, config);
    REQUIRE(fast.objective == slow.objective);
    REQUIRE(fast.battery_on == slow.battery_on);
    check_plan_feasible(fast, cd, soc, config);
    check_plan_feasible(slow, cd, soc, config);

    // The all-OFF plan is always feasible, and dropping every negative
    // cost is the best conceivable outcome.
    double all_off = 0.0;
    double lower = 0.0;
    for (double c : cd.cost) {
      all_off += c;
      lower += std::min(0.0, c);
    }
    CHECK(fast.objective <= all_off + 1e-12);
    CHECK(fast.objective >= lower - 1e-12);

    const ControlPlan again = solve_dispatch(cd, soc, config);
    CHECK(again.objective == fast.objective);
    CHECK(again.battery_on == fast.battery_on);
  }
}

TEST_CASE("ties prefer fewer ON commands then lexicographic order") {
  ControllerConfig config;
  config.horizon = 2;
  CostDiff cd;
  // Both steps free to toggle: every plan costs zero.
  cd.cost = {0.0, 0.0};
  cd.diff = {1.0, -1.0};
  const ControlPlan plan = solve_dispatch(cd, 80.0, config);
  CHECK(plan.objective == 0.0);
  CHECK(plan.battery_on == std::vector<std::uint8_t>{0, 0});

  // Near the ceiling only one of the two equal-cost steps can charge:
  // {1,0} and {0,1} tie at objective 5 with one ON each; the smaller
  // command bit string wins.
  cd.cost = {5.0, 5.0};
  cd.diff = {0.5, 0.5};
  const ControlPlan tie = solve_dispatch(cd, 99.5, config);
  CHECK(tie.objective == 5.0);
  CHECK(tie.battery_on == std::vector<std::uint8_t>{0, 1});
  const ControlPlan tie2 = enumerate_dispatch(cd, 99.5, config);
  CHECK(tie2.battery_on == tie.battery_on);
}
