#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "mgrt/scenario.hpp"

namespace mgrt {

/// Controller parameters. `omega` converts battery energy to state of
/// charge: kWh per SoC percentage point (capacity_kWh / 100).
struct ControllerConfig {
  std::size_t horizon = 24;   // T, steps
  double step_hours = 1.0;    // length of one step
  double soc_min = 75.0;      // percent
  double soc_max = 100.0;     // percent
  double omega = 0.3;         // kWh per percent (30 kWh battery)

  void validate() const;
};

/// Feasibility slack for SoC bound checks, in percent.
inline constexpr double kSocTolerance = 1e-9;

/// Precomputed controller state: per step, the grid cost `cost[t]` incurred
/// if the battery is OFF and the SoC rate `diff[t]` (percent per hour)
/// applied if it is ON.
struct CostDiff {
  std::vector<double> cost;
  std::vector<double> diff;

  std::size_t steps() const { return cost.size(); }
};

/// Dispatch solution over the horizon: battery commands, their grid
/// complements, the predicted SoC path and the realized objective.
struct ControlPlan {
  std::vector<std::uint8_t> battery_on;   // y_t
  std::vector<std::uint8_t> grid_on;      // 1 - y_t
  std::vector<double> soc_path;           // predicted SoC after each step
  double objective = 0.0;                 // sum of cost[t] over OFF steps

  std::size_t on_count() const;
};

/// Cost/difference precomputation: e_t = solar_t - load_t; surplus is
/// valued at the sell price, deficit at the buy price; diff_t = e_t / omega.
CostDiff build_cost_diff(const StateWindow& window, const ControllerConfig& config);

/// Exact minimizer of the dispatch problem over all 2^T command sequences,
/// subject to the SoC recurrence and operating band. Ties are broken toward
/// fewer ON commands, then the lexicographically smallest command string.
/// Depth-first branch and bound; exactness is bit-for-bit against
/// enumerate_dispatch.
ControlPlan solve_dispatch(const CostDiff& cd, double soc, const ControllerConfig& config);

/// Brute-force reference: evaluates every command sequence. Guarded to
/// horizons of at most 20 steps.
ControlPlan enumerate_dispatch(const CostDiff& cd, double soc, const ControllerConfig& config);

/// One control decision: solves the window and returns the first command
/// (the one actually invoked) together with the full plan for diagnostics.
std::pair<int, ControlPlan> control_step(const StateWindow& window,
                                         const ControllerConfig& config);

}  // namespace mgrt
