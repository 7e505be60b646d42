#include "mgrt/threat.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mgrt {
namespace {

double band_clamp(double soc, const ControllerConfig& config) {
  return std::min(std::max(soc, config.soc_min), config.soc_max);
}

void check_soc_in_band(double soc, const ControllerConfig& config) {
  if (!(soc >= config.soc_min - kSocTolerance) ||
      !(soc <= config.soc_max + kSocTolerance)) {
    throw std::invalid_argument("SoC " + std::to_string(soc) +
                                " outside operating band");
  }
}

/// Conservative cap on the per-hour grid size, independent of the realized
/// SoC trajectory.
std::size_t max_grid_points(const AttackBounds& bounds, const ControllerConfig& config,
                            double grid_step) {
  double width = std::min(bounds.offset_max - bounds.offset_min,
                          config.soc_max - config.soc_min);
  if (bounds.mode == AttackMode::kRelative5Pct) {
    width = std::min(width, 0.1 * config.soc_max);
  }
  width = std::max(width, 0.0);
  return static_cast<std::size_t>(std::floor(width / grid_step)) + 3;
}

}  // namespace

std::string to_string(AttackMode mode) {
  return mode == AttackMode::kFullRange ? "full" : "pct5";
}

AttackMode attack_mode_from_string(const std::string& name) {
  if (name == "full") return AttackMode::kFullRange;
  if (name == "pct5") return AttackMode::kRelative5Pct;
  throw std::invalid_argument("unknown attack mode '" + name + "' (use full|pct5)");
}

Interval feasible_offsets(const AttackBounds& bounds, double soc,
                          const ControllerConfig& config) {
  check_soc_in_band(soc, config);
  double lo = std::max(bounds.offset_min, config.soc_min - soc);
  double hi = std::min(bounds.offset_max, config.soc_max - soc);
  if (bounds.mode == AttackMode::kRelative5Pct) {
    lo = std::max(lo, -0.05 * soc);
    hi = std::min(hi, 0.05 * soc);
  }
  return {lo, hi};
}

double apply_fdi(double soc, const FdiAction& action, const AttackBounds& bounds,
                 const ControllerConfig& config) {
  const Interval interval = feasible_offsets(bounds, soc, config);
  const double offset = interval.empty() ? 0.0 : interval.clamp(action.offset);
  return band_clamp(soc + offset, config);
}

std::vector<double> offset_grid(const Interval& interval, double grid_step) {
  if (!(grid_step > 0.0)) {
    throw std::invalid_argument("grid_step must be positive");
  }
  if (interval.empty()) return {0.0};
  std::vector<double> grid;
  for (std::size_t i = 0;; ++i) {
    const double v = interval.lo + static_cast<double>(i) * grid_step;
    if (v >= interval.hi) break;
    grid.push_back(v);
  }
  grid.push_back(interval.hi);
  if (interval.lo <= 0.0 && 0.0 <= interval.hi) {
    grid.push_back(0.0);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

StepAttack oracle_attack_step(const StateWindow& window, const AttackBounds& bounds,
                              const ControllerConfig& config, double grid_step) {
  const CostDiff cd = build_cost_diff(window, config);
  const Interval interval = feasible_offsets(bounds, window.soc, config);
  const std::vector<double> grid = offset_grid(interval, grid_step);

  StepAttack best;
  best.baseline_objective =
      solve_dispatch(cd, band_clamp(window.soc, config), config).objective;
  bool first = true;
  for (const double offset : grid) {
    const double spoofed = band_clamp(window.soc + offset, config);
    const double objective = solve_dispatch(cd, spoofed, config).objective;
    const bool better =
        first || objective > best.attacked_objective ||
        (objective == best.attacked_objective &&
         (std::abs(offset) < std::abs(best.offset) ||
          (std::abs(offset) == std::abs(best.offset) && offset < best.offset)));
    if (better) {
      best.offset = offset;
      best.attacked_objective = objective;
      first = false;
    }
  }
  return best;
}

EpisodeAttack oracle_attack_horizon(const Scenario& scenario,
                                    const ControllerConfig& config, double init_soc,
                                    const AttackBounds& bounds, double grid_step,
                                    std::size_t hours) {
  const SimEngine engine(scenario, config);
  if (hours == 0 || hours > engine.hours()) {
    throw std::invalid_argument("hours must be in [1, scenario hours]");
  }
  const std::size_t points = max_grid_points(bounds, config, grid_step);
  const double sequences = static_cast<double>(hours) * std::log(static_cast<double>(points));
  if (sequences > std::log(1e6)) {
    throw std::invalid_argument(
        "exhaustive horizon search exceeds the 10^6 sequence limit (" +
        std::to_string(points) + " grid points over " + std::to_string(hours) +
        " hours); coarsen the grid or shorten the horizon");
  }

  std::vector<double> offsets(hours, 0.0);
  std::vector<double> best_offsets;
  double best_cost = 0.0;
  bool have_best = false;

  // Depth-first over per-hour grids in ascending order: the first maximum
  // found is the lexicographically smallest maximizing sequence.
  auto descend = [&](auto&& self, const SimEngine::Cursor& cursor,
                     std::size_t depth) -> void {
    if (depth == hours) {
      if (!have_best || cursor.total_cost > best_cost) {
        have_best = true;
        best_cost = cursor.total_cost;
        best_offsets = offsets;
      }
      return;
    }
    const Interval interval = feasible_offsets(bounds, cursor.soc, config);
    for (const double offset : offset_grid(interval, grid_step)) {
      SimEngine::Cursor forked = cursor;
      const double reported = band_clamp(cursor.soc + offset, config);
      engine.step_hour(forked, reported);
      offsets[depth] = offset;
      self(self, forked, depth + 1);
    }
  };
  descend(descend, engine.start(init_soc), 0);

  // Replay the winning sequence to collect the per-hour report.
  EpisodeAttack attack;
  attack.offsets = best_offsets;
  SimEngine::Cursor cursor = engine.start(init_soc);
  for (std::size_t k = 0; k < hours; ++k) {
    const double actual = cursor.soc;
    const double reported = band_clamp(actual + best_offsets[k], config);
    const auto outcome = engine.step_hour(cursor, reported);
    attack.actual_soc.push_back(actual);
    attack.reported_soc.push_back(reported);
    attack.hourly_costs.push_back(outcome.hourly_cost);
  }
  attack.total_cost = cursor.total_cost;
  attack.avg_soc = cursor.soc_minute_sum / static_cast<double>(hours * 60);
  attack.avg_reported_soc = cursor.reported_sum / static_cast<double>(hours);
  attack.no_attack_cost = run_simulation(scenario, config, init_soc, {}, hours).total_cost;
  return attack;
}

EpisodeAttack greedy_attack_episode(const Scenario& scenario,
                                    const ControllerConfig& config, double init_soc,
                                    const AttackBounds& bounds, double grid_step,
                                    std::size_t hours) {
  const SimEngine engine(scenario, config);
  const std::size_t total = std::min(hours, engine.hours());
  if (total == 0) {
    throw std::invalid_argument("hours must be at least 1");
  }

  EpisodeAttack attack;
  SimEngine::Cursor cursor = engine.start(init_soc);
  for (std::size_t k = 0; k < total; ++k) {
    const double actual = cursor.soc;
    const StateWindow window = engine.window_at(cursor.hour, actual);
    const StepAttack step = oracle_attack_step(window, bounds, config, grid_step);
    const double reported = apply_fdi(actual, {step.offset}, bounds, config);
    const auto outcome = engine.step_hour(cursor, reported);
    attack.offsets.push_back(step.offset);
    attack.actual_soc.push_back(actual);
    attack.reported_soc.push_back(reported);
    attack.hourly_costs.push_back(outcome.hourly_cost);
  }
  attack.total_cost = cursor.total_cost;
  attack.avg_soc = cursor.soc_minute_sum / static_cast<double>(total * 60);
  attack.avg_reported_soc = cursor.reported_sum / static_cast<double>(total);
  attack.no_attack_cost = run_simulation(scenario, config, init_soc, {}, total).total_cost;
  return attack;
}

}  // namespace mgrt
