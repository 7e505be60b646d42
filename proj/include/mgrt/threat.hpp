#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mgrt/dispatch.hpp"
#include "mgrt/plant.hpp"
#include "mgrt/scenario.hpp"

namespace mgrt {

enum class AttackMode {
  kFullRange,    // any report inside the operating band
  kRelative5Pct  // offset within +/-5% of the actual SoC
};

std::string to_string(AttackMode mode);
AttackMode attack_mode_from_string(const std::string& name);

/// Feasible region of the SoC offset. The binding constraints are the
/// explicit offset box, the mode's relative cap, and the requirement that
/// the spoofed SoC stays inside the operating band.
struct AttackBounds {
  double offset_min = -100.0;
  double offset_max = 100.0;
  AttackMode mode = AttackMode::kFullRange;
};

/// A single spoof decision: the signed offset added to the reported SoC.
struct FdiAction {
  double offset = 0.0;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool empty() const { return hi < lo; }
  double width() const { return hi - lo; }
  double clamp(double v) const { return v < lo ? lo : (v > hi ? hi : v); }
};

/// Feasible offsets at the given actual SoC. Always contains 0 for SoC
/// inside the operating band.
Interval feasible_offsets(const AttackBounds& bounds, double soc,
                          const ControllerConfig& config);

/// Applies the spoof: clamps the offset into its feasible region, then the
/// result into the operating band. Infeasible proposals are clamped, not
/// rejected, so unconstrained policy outputs are always usable.
double apply_fdi(double soc, const FdiAction& action, const AttackBounds& bounds,
                 const ControllerConfig& config);

/// Evaluation grid over an offset interval: lo, lo+step, ..., the interval
/// end, and the unattacked point 0; sorted and deduplicated.
std::vector<double> offset_grid(const Interval& interval, double grid_step);

struct StepAttack {
  double offset = 0.0;
  double attacked_objective = 0.0;   // controller's optimum under the spoof
  double baseline_objective = 0.0;   // controller's optimum at offset 0
};

/// Per-step reference attack: exhaustively maximizes the controller's
/// planned objective over the offset grid. Ties go to the smallest
/// magnitude offset, then the more negative one.
StepAttack oracle_attack_step(const StateWindow& window, const AttackBounds& bounds,
                              const ControllerConfig& config, double grid_step);

struct EpisodeAttack {
  std::vector<double> offsets;        // chosen offset per hour
  std::vector<double> reported_soc;   // spoofed value handed to the controller
  std::vector<double> actual_soc;     // SoC when the report was made
  std::vector<double> hourly_costs;
  double total_cost = 0.0;
  double no_attack_cost = 0.0;
  double avg_soc = 0.0;
  double avg_reported_soc = 0.0;
};

/// Whole-horizon reference attack: exhaustively simulates every per-hour
/// grid offset sequence over the first `hours` hours and returns the
/// realized-cost maximizer. Guarded against combinatorial blowup
/// (worst-case sequences capped at 10^6).
EpisodeAttack oracle_attack_horizon(const Scenario& scenario,
                                    const ControllerConfig& config, double init_soc,
                                    const AttackBounds& bounds, double grid_step,
                                    std::size_t hours);

/// Step-wise reference attack over a whole run: applies oracle_attack_step
/// at each hour of the simulation.
EpisodeAttack greedy_attack_episode(const Scenario& scenario,
                                    const ControllerConfig& config, double init_soc,
                                    const AttackBounds& bounds, double grid_step,
                                    std::size_t hours = kAllHours);

}  // namespace mgrt
