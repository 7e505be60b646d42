#include <cmath>
#include <numeric>
#include <stdexcept>

#include "doctest.h"
#include "mgrt/plant.hpp"
#include "mgrt/rng.hpp"

using namespace mgrt;

namespace {

Scenario flat_scenario(double load, double solar, int hours) {
  Scenario s;
  const std::size_t n = static_cast<std::size_t>(hours) * 60;
  s.load_kw.assign(n, load);
  s.solar_kw.assign(n, solar);
  s.buy_price.assign(n, 9.4);
  s.sell_price.assign(n, 5.0);
  return s;
}

}  // namespace

TEST_CASE("step_minute OFF trades the imbalance with the grid") {
  BatteryState state{80.0, 0.2};

  SUBCASE("balanced") {
    auto [next, rec] = step_minute(state, 2.0, 2.0, 0, 9.4, 5.0);
    CHECK(next.soc == 80.0);
    CHECK(rec.cost_delta == 0.0);
    CHECK(rec.grid_kw == 0.0);
  }
  SUBCASE("deficit bought at the buy price") {
    auto [next, rec] = step_minute(state, 6.0, 0.0, 0, 13.4, 5.0);
    CHECK(next.soc == 80.0);
    CHECK(rec.grid_kw == 6.0);
    CHECK(rec.cost_delta == doctest::Approx(0.0134).epsilon(1e-12));
  }
  SUBCASE("surplus sold at the sell price") {
    auto [next, rec] = step_minute(state, 0.0, 6.0, 0, 13.4, 5.0);
    CHECK(next.soc == 80.0);
    CHECK(rec.grid_kw == -6.0);
    CHECK(rec.cost_delta == doctest::Approx(-0.005).epsilon(1e-12));
  }
}

TEST_CASE("step_minute ON charges surplus and sells the overflow") {
  BatteryState state{99.5, 0.2};
  // 12 kW surplus for one minute = 0.2 kWh; only 0.1 kWh of room remains.
  auto [next, rec] = step_minute(state, 0.0, 12.0, 1, 9.4, 5.0);
  CHECK(next.soc == 100.0);
  CHECK(rec.cost_delta == doctest::Approx(-0.005).epsilon(1e-12));
  CHECK(rec.grid_kw == doctest::Approx(-6.0).epsilon(1e-12));

  // With room to spare the grid is untouched and energy is conserved.
  BatteryState roomy{80.0, 0.2};
  auto [next2, rec2] = step_minute(roomy, 0.0, 6.0, 1, 9.4, 5.0);
  CHECK(rec2.cost_delta == 0.0);
  CHECK(rec2.grid_kw == 0.0);
  CHECK((next2.soc - 80.0) * 0.2 == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("step_minute ON discharges deficit and buys the shortfall") {
  BatteryState state{75.5, 0.2};
  auto [next, rec] = step_minute(state, 12.0, 0.0, 1, 13.4, 5.0);
  CHECK(next.soc == 75.0);
  // 0.2 kWh deficit, 0.1 kWh reserve: half is bought.
  CHECK(rec.cost_delta == doctest::Approx(0.1 * 13.4 / 100.0).epsilon(1e-12));
  CHECK(rec.grid_kw == doctest::Approx(6.0).epsilon(1e-12));

  BatteryState deep{90.0, 0.2};
  auto [next2, rec2] = step_minute(deep, 6.0, 0.0, 1, 13.4, 5.0);
  CHECK(rec2.cost_delta == 0.0);
  CHECK((90.0 - next2.soc) * 0.2 == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("step_minute rejects bad inputs") {
  BatteryState state{80.0, 0.2};
  CHECK_THROWS_AS(step_minute(state, -1.0, 0.0, 0, 9.4, 5.0), std::invalid_argument);
  CHECK_THROWS_AS(step_minute(state, 0.0, -1.0, 0, 9.4, 5.0), std::invalid_argument);
  CHECK_THROWS_AS(step_minute(state, 1.0, 0.0, 0, 0.0, 5.0), std::invalid_argument);
  CHECK_THROWS_AS(step_minute(state, 1.0, 0.0, 0, 9.4, -5.0), std::invalid_argument);
}

TEST_CASE("inert scenario simulates to zero cost") {
  const Scenario s = flat_scenario(0.0, 0.0, 24);
  const SimResult r = run_simulation(s, ControllerConfig{}, 80.0);
  CHECK(r.total_cost == 0.0);
  CHECK(r.avg_soc == 80.0);
  for (const MinuteRecord& rec : r.trace) CHECK(rec.soc_after == 80.0);
  CHECK(r.hours() == 24);
}

TEST_CASE("absent attacker equals the identity attacker bit for bit") {
  const Scenario s = synth_scenario(3, 1);
  const ControllerConfig config;
  const SimResult plain = run_simulation(s, config, 85.0);
  const SimResult spoofless =
      run_simulation(s, config, 85.0, [](const AttackContext& ctx) { return ctx.soc; });
  CHECK(plain.total_cost == spoofless.total_cost);
  CHECK(plain.hourly_costs == spoofless.hourly_costs);
  CHECK(plain.reported_soc == spoofless.reported_soc);
  CHECK(plain.commands == spoofless.commands);
  CHECK(plain.avg_soc == spoofless.avg_soc);
  CHECK(plain.avg_reported_soc == spoofless.avg_reported_soc);
  REQUIRE(plain.trace.size() == spoofless.trace.size());
  for (std::size_t i = 0; i < plain.trace.size(); ++i) {
    CHECK(plain.trace[i].soc_after == spoofless.trace[i].soc_after);
    CHECK(plain.trace[i].cost_delta == spoofless.trace[i].cost_delta);
  }
}

TEST_CASE("controller beats the all-OFF baseline on the synthetic scenario") {
  const Scenario s = synth_scenario(7, 2);
  const ControllerConfig config;
  const SimResult run = run_simulation(s, config, 80.0);
  const SimResult off = baseline_all_off(s, config, 80.0);
  CHECK(run.total_cost < off.total_cost);
  for (int cmd : off.commands) CHECK(cmd == 0);
  // Same initial state, same exogenous series: only the commands differ.
  CHECK(off.avg_reported_soc == doctest::Approx(80.0));
}

TEST_CASE("pure surplus baseline sells at a profit") {
  const Scenario s = flat_scenario(0.5, 2.5, 6);
  const SimResult off = baseline_all_off(s, ControllerConfig{}, 80.0);
  CHECK(off.total_cost < 0.0);
}

TEST_CASE("ledger adds up at minute and hour granularity") {
  const Scenario s = synth_scenario(11, 1);
  const SimResult r = run_simulation(s, ControllerConfig{}, 90.0);
  double minute_sum = 0.0;
  for (const MinuteRecord& rec : r.trace) minute_sum += rec.cost_delta;
  const double hour_sum =
      std::accumulate(r.hourly_costs.begin(), r.hourly_costs.end(), 0.0);
  CHECK(std::abs(minute_sum - r.total_cost) <= 1e-9);
  CHECK(std::abs(hour_sum - r.total_cost) <= 1e-9);

  double soc_sum = 0.0;
  for (const MinuteRecord& rec : r.trace) soc_sum += rec.soc_after;
  CHECK(r.avg_soc == doctest::Approx(soc_sum / r.trace.size()).epsilon(1e-12));
}

TEST_CASE("SoC stays inside the band under aggressive spoofing") {
  const Scenario s = synth_scenario(5, 1);
  Rng rng = Rng::stream(99, "plant/spoof");
  const SimResult r = run_simulation(s, ControllerConfig{}, 75.0,
                                     [&rng](const AttackContext&) {
                                       return rng.uniform(75.0, 100.0);
                                     });
  for (const MinuteRecord& rec : r.trace) {
    CHECK(rec.soc_after >= 75.0 - 1e-9);
    CHECK(rec.soc_after <= 100.0 + 1e-9);
  }
}

TEST_CASE("engine cursors can fork mid-run") {
  const Scenario s = synth_scenario(7, 1);
  const ControllerConfig config;
  const SimEngine engine(s, config);

  SimEngine::Cursor cursor = engine.start(80.0);
  for (int k = 0; k < 6; ++k) engine.step_hour(cursor, cursor.soc);

  SimEngine::Cursor forked = cursor;
  const auto a = engine.step_hour(cursor, cursor.soc);
  const auto b = engine.step_hour(forked, forked.soc);
  CHECK(a.command == b.command);
  CHECK(a.hourly_cost == b.hourly_cost);
  CHECK(cursor.soc == forked.soc);
  CHECK(cursor.total_cost == forked.total_cost);

  // A fresh engine reproduces the continuation, so cached control
  // decisions cannot drift from recomputed ones.
  const SimEngine fresh(s, config);
  SimEngine::Cursor replay = fresh.start(80.0);
  for (int k = 0; k < 7; ++k) fresh.step_hour(replay, replay.soc);
  CHECK(replay.soc == cursor.soc);
  CHECK(replay.total_cost == cursor.total_cost);
}

TEST_CASE("stepping past the scenario end throws") {
  const Scenario s = flat_scenario(1.0, 0.0, 2);
  const SimEngine engine(s, ControllerConfig{});
  SimEngine::Cursor cursor = engine.start(80.0);
  engine.step_hour(cursor, cursor.soc);
  engine.step_hour(cursor, cursor.soc);
  CHECK_THROWS_AS(engine.step_hour(cursor, cursor.soc), std::out_of_range);
}

TEST_CASE("reported SoC outside the band is rejected") {
  const Scenario s = flat_scenario(1.0, 0.0, 2);
  const SimEngine engine(s, ControllerConfig{});
  SimEngine::Cursor cursor = engine.start(80.0);
  CHECK_THROWS_AS(engine.step_hour(cursor, 74.0), std::invalid_argument);
  CHECK_THROWS_AS(engine.step_hour(cursor, 101.0), std::invalid_argument);
}

TEST_CASE("simulation can stop after a prefix of hours") {
  const Scenario s = synth_scenario(7, 1);
  const SimResult full = run_simulation(s, ControllerConfig{}, 80.0);
  const SimResult prefix = run_simulation(s, ControllerConfig{}, 80.0, {}, 6);
  REQUIRE(prefix.hours() == 6);
  CHECK(full.hours() == 24);
  for (std::size_t k = 0; k < 6; ++k) {
    CHECK(prefix.hourly_costs[k] == full.hourly_costs[k]);
    CHECK(prefix.commands[k] == full.commands[k]);
  }
  CHECK(run_simulation(s, ControllerConfig{}, 80.0, {}, kAllHours).hours() == 24);
}

TEST_CASE("invalid initial SoC is rejected") {
  const Scenario s = flat_scenario(1.0, 0.0, 2);
  CHECK_THROWS_AS(run_simulation(s, ControllerConfig{}, 60.0), std::invalid_argument);
  CHECK_THROWS_AS(run_simulation(s, ControllerConfig{}, 100.5), std::invalid_argument);
}
