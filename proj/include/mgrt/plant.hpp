#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mgrt/dispatch.hpp"
#include "mgrt/scenario.hpp"

namespace mgrt {

/// Battery charge level and its energy scale.
struct BatteryState {
  double soc = 80.0;   // percent
  double omega = 0.3;  // kWh per percent
};

/// One simulated minute. grid_kw is signed, positive when buying.
struct MinuteRecord {
  std::size_t minute = 0;
  double load_kw = 0.0;
  double solar_kw = 0.0;
  int command = 0;
  double soc_after = 0.0;
  double grid_kw = 0.0;
  double cost_delta = 0.0;  // dollars
};

/// Full simulation outcome: minute trace, per-hour cost ledger, summary
/// aggregates and the hourly values that were handed to the controller.
struct SimResult {
  std::vector<MinuteRecord> trace;
  std::vector<double> hourly_costs;
  std::vector<double> reported_soc;
  std::vector<int> commands;
  double total_cost = 0.0;
  double avg_soc = 0.0;           // mean per-minute SoC
  double avg_reported_soc = 0.0;  // mean of hourly reported values

  std::size_t hours() const { return hourly_costs.size(); }
};

/// Read-only context handed to the attacker hook before each control step.
/// cost_term/diff_term are the current hour's precomputed controller values
/// (they do not depend on the SoC, so true and spoofed agree).
struct AttackContext {
  std::size_t hour = 0;
  double cost_term = 0.0;
  double diff_term = 0.0;
  double load_kw = 0.0;
  double solar_kw = 0.0;
  double soc = 0.0;  // actual SoC
};

/// Per-hour transform of the reported SoC. Must return a value inside the
/// operating band; the threat module's clamping provides that.
using Attacker = std::function<double(const AttackContext&)>;

/// One minute of plant dynamics per the four battery/grid scenarios: OFF
/// trades the whole imbalance with the grid; ON charges surplus or
/// discharges deficit, with saturation overflow/shortfall routed to the
/// grid at the current minute's price. The plant enforces the same SoC band
/// as the controller.
std::pair<BatteryState, MinuteRecord> step_minute(const BatteryState& state,
                                                  double load_kw, double solar_kw,
                                                  int command, double buy_price,
                                                  double sell_price,
                                                  double soc_min = 75.0,
                                                  double soc_max = 100.0);

/// Hour-stepped simulation core. Precomputes the per-hour averages once so
/// window construction is cheap, and exposes a copyable cursor so search
/// procedures can fork a run mid-way.
class SimEngine {
 public:
  SimEngine(const Scenario& scenario, const ControllerConfig& config);

  struct Cursor {
    double soc = 0.0;
    std::size_t hour = 0;
    double total_cost = 0.0;
    double soc_minute_sum = 0.0;
    double reported_sum = 0.0;
  };

  struct HourOutcome {
    int command = 0;
    double hourly_cost = 0.0;
  };

  Cursor start(double init_soc) const;

  /// Runs one control step and the following 60 plant minutes. The
  /// controller sees `reported_soc`; the plant evolves the true SoC.
  HourOutcome step_hour(Cursor& cursor, double reported_soc,
                        std::vector<MinuteRecord>* trace = nullptr,
                        bool force_off = false) const;

  StateWindow window_at(std::size_t hour, double soc) const;
  AttackContext context_at(const Cursor& cursor) const;

  std::size_t hours() const { return scenario_->hours(); }
  const ControllerConfig& config() const { return config_; }
  const Scenario& scenario() const { return *scenario_; }

  double hour_load(std::size_t hour) const { return load_avg_[hour]; }
  double hour_solar(std::size_t hour) const { return solar_avg_[hour]; }
  double hour_cost_term(std::size_t hour) const;
  double hour_diff_term(std::size_t hour) const;

 private:
  const Scenario* scenario_;
  ControllerConfig config_;
  std::vector<double> load_avg_;
  std::vector<double> solar_avg_;
  std::vector<double> buy_avg_;
  std::vector<double> sell_avg_;
  // The command is a pure function of (hour, reported SoC); search procedures
  // revisit the same pairs heavily, so cache by the SoC's bit pattern.
  mutable std::vector<std::unordered_map<std::uint64_t, int>> command_memo_;
};

inline constexpr std::size_t kAllHours = std::numeric_limits<std::size_t>::max();

/// Hourly control loop: read (possibly spoofed) SoC, solve the dispatch
/// window, hold the first command for 60 minutes, accrue the cost ledger.
SimResult run_simulation(const Scenario& scenario, const ControllerConfig& config,
                         double init_soc, const Attacker& attacker = {},
                         std::size_t hours = kAllHours);

/// Same loop with every command forced OFF: the no-battery reference run.
SimResult baseline_all_off(const Scenario& scenario, const ControllerConfig& config,
                           double init_soc, std::size_t hours = kAllHours);

}  // namespace mgrt
