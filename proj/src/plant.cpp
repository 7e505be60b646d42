#include "mgrt/plant.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mgrt {

std::pair<BatteryState, MinuteRecord> step_minute(const BatteryState& state,
                                                  double load_kw, double solar_kw,
                                                  int command, double buy_price,
                                                  double sell_price, double soc_min,
                                                  double soc_max) {
  if (load_kw < 0.0 || solar_kw < 0.0) {
    throw std::invalid_argument("powers must be non-negative");
  }
  if (!(buy_price > 0.0) || !(sell_price > 0.0)) {
    throw std::invalid_argument("prices must be positive");
  }

  const double e = solar_kw - load_kw;      // kW, positive = surplus
  const double energy = e / 60.0;           // kWh over this minute

  BatteryState next = state;
  MinuteRecord rec;
  rec.load_kw = load_kw;
  rec.solar_kw = solar_kw;
  rec.command = command;

  if (command == 0) {
    // Grid absorbs the whole imbalance.
    rec.grid_kw = -e;
    rec.cost_delta = (energy >= 0.0) ? -energy * sell_price / 100.0
                                     : (-energy) * buy_price / 100.0;
  } else if (energy >= 0.0) {
    // Charge; overflow beyond the SoC ceiling is sold.
    const double room = std::max(0.0, (soc_max - state.soc) * state.omega);
    const double stored = std::min(energy, room);
    next.soc = std::min(state.soc + stored / state.omega, soc_max);
    const double overflow = std::max(0.0, energy - stored);
    rec.grid_kw = -overflow * 60.0;
    rec.cost_delta = -overflow * sell_price / 100.0;
  } else {
    // Discharge; shortfall below the SoC floor is bought.
    const double reserve = std::max(0.0, (state.soc - soc_min) * state.omega);
    const double drawn = std::min(-energy, reserve);
    next.soc = std::max(state.soc - drawn / state.omega, soc_min);
    const double shortfall = std::max(0.0, -energy - drawn);
    rec.grid_kw = shortfall * 60.0;
    rec.cost_delta = shortfall * buy_price / 100.0;
  }
  rec.soc_after = next.soc;
  return {next, rec};
}

SimEngine::SimEngine(const Scenario& scenario, const ControllerConfig& config)
    : scenario_(&scenario), config_(config) {
  config_.validate();
  scenario.validate();
  const std::size_t hours = scenario.hours();
  load_avg_.reserve(hours);
  solar_avg_.reserve(hours);
  buy_avg_.reserve(hours);
  sell_avg_.reserve(hours);
  for (std::size_t h = 0; h < hours; ++h) {
    load_avg_.push_back(hour_average(scenario.load_kw, h));
    solar_avg_.push_back(hour_average(scenario.solar_kw, h));
    buy_avg_.push_back(hour_average(scenario.buy_price, h));
    sell_avg_.push_back(hour_average(scenario.sell_price, h));
  }
  command_memo_.resize(hours);
}

SimEngine::Cursor SimEngine::start(double init_soc) const {
  if (!(init_soc >= config_.soc_min && init_soc <= config_.soc_max)) {
    throw std::invalid_argument("initial SoC " + std::to_string(init_soc) +
                                " outside operating band");
  }
  Cursor cursor;
  cursor.soc = init_soc;
  return cursor;
}

StateWindow SimEngine::window_at(std::size_t hour, double soc) const {
  const std::size_t hours = load_avg_.size();
  StateWindow w;
  w.load_kw.reserve(config_.horizon);
  w.solar_kw.reserve(config_.horizon);
  w.buy_price.reserve(config_.horizon);
  w.sell_price.reserve(config_.horizon);
  for (std::size_t i = 0; i < config_.horizon; ++i) {
    const std::size_t h = (hour + i) % hours;
    w.load_kw.push_back(load_avg_[h]);
    w.solar_kw.push_back(solar_avg_[h]);
    w.buy_price.push_back(buy_avg_[h]);
    w.sell_price.push_back(sell_avg_[h]);
  }
  w.soc = soc;
  return w;
}

double SimEngine::hour_cost_term(std::size_t hour) const {
  const double e = solar_avg_[hour] - load_avg_[hour];
  return (e >= 0.0) ? -sell_avg_[hour] * e : -buy_avg_[hour] * e;
}

double SimEngine::hour_diff_term(std::size_t hour) const {
  return (solar_avg_[hour] - load_avg_[hour]) / config_.omega;
}

AttackContext SimEngine::context_at(const Cursor& cursor) const {
  AttackContext ctx;
  ctx.hour = cursor.hour;
  ctx.cost_term = hour_cost_term(cursor.hour);
  ctx.diff_term = hour_diff_term(cursor.hour);
  ctx.load_kw = load_avg_[cursor.hour];
  ctx.solar_kw = solar_avg_[cursor.hour];
  ctx.soc = cursor.soc;
  return ctx;
}

SimEngine::HourOutcome SimEngine::step_hour(Cursor& cursor, double reported_soc,
                                            std::vector<MinuteRecord>* trace,
                                            bool force_off) const {
  if (cursor.hour >= hours()) {
    throw std::out_of_range("simulation ran past the scenario end");
  }
  if (!(reported_soc >= config_.soc_min - kSocTolerance &&
        reported_soc <= config_.soc_max + kSocTolerance)) {
    throw std::invalid_argument("reported SoC " + std::to_string(reported_soc) +
                                " outside operating band");
  }

  int command = 0;
  if (!force_off) {
    auto& memo = command_memo_[cursor.hour];
    const std::uint64_t key = std::bit_cast<std::uint64_t>(reported_soc);
    if (const auto it = memo.find(key); it != memo.end()) {
      command = it->second;
    } else {
      const StateWindow window = window_at(cursor.hour, reported_soc);
      command = control_step(window, config_).first;
      memo.emplace(key, command);
    }
  }

  BatteryState state{cursor.soc, config_.omega};
  double hourly_cost = 0.0;
  const std::size_t base = cursor.hour * 60;
  for (std::size_t m = 0; m < 60; ++m) {
    const std::size_t minute = base + m;
    auto [next, rec] = step_minute(state, scenario_->load_kw[minute],
                                   scenario_->solar_kw[minute], command,
                                   scenario_->buy_price[minute],
                                   scenario_->sell_price[minute],
                                   config_.soc_min, config_.soc_max);
    state = next;
    rec.minute = minute;
    hourly_cost += rec.cost_delta;
    cursor.soc_minute_sum += rec.soc_after;
    if (trace != nullptr) trace->push_back(rec);
  }

  cursor.soc = state.soc;
  cursor.total_cost += hourly_cost;
  cursor.reported_sum += reported_soc;
  cursor.hour += 1;
  return {command, hourly_cost};
}

namespace {

SimResult run_loop(const Scenario& scenario, const ControllerConfig& config,
                   double init_soc, const Attacker& attacker, std::size_t hours,
                   bool force_off) {
  const SimEngine engine(scenario, config);
  const std::size_t total = std::min(hours, engine.hours());
  if (total == 0) {
    throw std::invalid_argument("simulation needs at least one hour");
  }

  SimResult result;
  result.trace.reserve(total * 60);
  result.hourly_costs.reserve(total);
  result.reported_soc.reserve(total);
  result.commands.reserve(total);

  SimEngine::Cursor cursor = engine.start(init_soc);
  for (std::size_t k = 0; k < total; ++k) {
    double reported = cursor.soc;
    if (attacker) {
      reported = attacker(engine.context_at(cursor));
    }
    const auto outcome = engine.step_hour(cursor, reported, &result.trace, force_off);
    result.hourly_costs.push_back(outcome.hourly_cost);
    result.reported_soc.push_back(reported);
    result.commands.push_back(outcome.command);
  }

  result.total_cost = cursor.total_cost;
  result.avg_soc = cursor.soc_minute_sum / static_cast<double>(total * 60);
  result.avg_reported_soc = cursor.reported_sum / static_cast<double>(total);
  return result;
}

}  // namespace

SimResult run_simulation(const Scenario& scenario, const ControllerConfig& config,
                         double init_soc, const Attacker& attacker,
                         std::size_t hours) {
  return run_loop(scenario, config, init_soc, attacker, hours, false);
}

SimResult baseline_all_off(const Scenario& scenario, const ControllerConfig& config,
                           double init_soc, std::size_t hours) {
  return run_loop(scenario, config, init_soc, {}, hours, true);
}

}  // namespace mgrt
