#include "mgrt/dispatch.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace mgrt {
namespace {

void check_initial_soc(double soc, const ControllerConfig& config) {
  if (!(soc >= config.soc_min - kSocTolerance) ||
      !(soc <= config.soc_max + kSocTolerance)) {
    throw std::invalid_argument("initial SoC " + std::to_string(soc) +
                                " outside operating band [" +
                                std::to_string(config.soc_min) + ", " +
                                std::to_string(config.soc_max) + "]");
  }
}

/// Shared search state for the branch-and-bound solver. Candidates replace
/// the incumbent only on strictly better (objective, on-count); depth-first
/// OFF-before-ON order makes the first tie the lexicographically smallest
/// command string, which matches enumerate_dispatch's explicit tie-break.
struct Search {
  const CostDiff& cd;
  const ControllerConfig& config;
  std::vector<double> suffix_neg;  // sum over t' >= t of min(0, cost[t'])

  std::vector<std::uint8_t> commands;
  std::vector<double> soc_path;

  bool have_best = false;
  double best_objective = 0.0;
  std::size_t best_on = 0;
  std::vector<std::uint8_t> best_commands;
  std::vector<double> best_soc_path;

  void descend(std::size_t t, double soc, double objective, std::size_t on) {
    const std::size_t T = cd.steps();
    if (t == T) {
      if (!have_best || objective < best_objective ||
          (objective == best_objective && on < best_on)) {
        have_best = true;
        best_objective = objective;
        best_on = on;
        best_commands = commands;
        best_soc_path = soc_path;
      }
      return;
    }
    // Admissible bound: remaining OFF steps can contribute at most the
    // negative part of the remaining costs.
    if (have_best) {
      const double lower = objective + suffix_neg[t];
      if (lower > best_objective) return;
      if (lower == best_objective && on >= best_on) return;
    }

    // OFF: SoC unchanged, cost[t] accrues.
    commands[t] = 0;
    soc_path[t] = soc;
    descend(t + 1, soc, objective + cd.cost[t], on);

    // ON: cost skipped, SoC moves by diff[t]; prune if it leaves the band.
    const double next = soc + cd.diff[t] * config.step_hours;
    if (next >= config.soc_min - kSocTolerance &&
        next <= config.soc_max + kSocTolerance) {
      commands[t] = 1;
      soc_path[t] = next;
      descend(t + 1, next, objective, on + 1);
    }
  }
};

}  // namespace

void ControllerConfig::validate() const {
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  if (!(step_hours > 0.0)) throw std::invalid_argument("step_hours must be positive");
  if (!(soc_min >= 0.0 && soc_min < soc_max && soc_max <= 100.0)) {
    throw std::invalid_argument("need 0 <= soc_min < soc_max <= 100");
  }
  if (!(omega > 0.0)) throw std::invalid_argument("omega must be positive");
}

std::size_t ControlPlan::on_count() const {
  std::size_t n = 0;
  for (auto y : battery_on) n += y;
  return n;
}

CostDiff build_cost_diff(const StateWindow& window, const ControllerConfig& config) {
  if (window.steps() != config.horizon) {
    throw std::invalid_argument("window length " + std::to_string(window.steps()) +
                                " does not match horizon " +
                                std::to_string(config.horizon));
  }
  CostDiff cd;
  cd.cost.reserve(window.steps());
  cd.diff.reserve(window.steps());
  for (std::size_t t = 0; t < window.steps(); ++t) {
    const double e = window.solar_kw[t] - window.load_kw[t];
    const double c = (e >= 0.0) ? -window.sell_price[t] * e : -window.buy_price[t] * e;
    cd.cost.push_back(c);
    cd.diff.push_back(e / config.omega);
  }
  return cd;
}

ControlPlan solve_dispatch(const CostDiff& cd, double soc, const ControllerConfig& config) {
  config.validate();
  check_initial_soc(soc, config);
  if (cd.diff.size() != cd.steps() || cd.steps() != config.horizon) {
    throw std::invalid_argument("cost/diff length does not match horizon");
  }
  const std::size_t T = cd.steps();

  Search search{cd, config, {}, {}, {}};
  search.suffix_neg.assign(T + 1, 0.0);
  for (std::size_t t = T; t-- > 0;) {
    search.suffix_neg[t] = search.suffix_neg[t + 1] + std::min(0.0, cd.cost[t]);
  }
  search.commands.assign(T, 0);
  search.soc_path.assign(T, 0.0);
  search.descend(0, soc, 0.0, 0);

  ControlPlan plan;
  plan.battery_on = std::move(search.best_commands);
  plan.soc_path = std::move(search.best_soc_path);
  plan.objective = search.best_objective;
  plan.grid_on.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    plan.grid_on[t] = static_cast<std::uint8_t>(1 - plan.battery_on[t]);
  }
  return plan;
}

ControlPlan enumerate_dispatch(const CostDiff& cd, double soc, const ControllerConfig& config) {
  config.validate();
  check_initial_soc(soc, config);
  if (cd.diff.size() != cd.steps() || cd.steps() != config.horizon) {
    throw std::invalid_argument("cost/diff length does not match horizon");
  }
  const std::size_t T = cd.steps();
  if (T > 20) {
    throw std::invalid_argument("enumerate_dispatch limited to 20 steps, got " +
                                std::to_string(T));
  }

  bool have_best = false;
  double best_objective = 0.0;
  std::size_t best_on = 0;
  std::vector<std::uint8_t> best_commands;
  std::vector<double> best_soc_path;

  std::vector<std::uint8_t> commands(T);
  std::vector<double> soc_path(T);
  const std::uint64_t total = 1ULL << T;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    double b = soc;
    double objective = 0.0;
    std::size_t on = 0;
    bool feasible = true;
    for (std::size_t t = 0; t < T; ++t) {
      const bool y = (mask >> t) & 1ULL;
      commands[t] = y ? 1 : 0;
      if (y) {
        b = b + cd.diff[t] * config.step_hours;
        if (!(b >= config.soc_min - kSocTolerance &&
              b <= config.soc_max + kSocTolerance)) {
          feasible = false;
          break;
        }
        ++on;
      } else {
        objective += cd.cost[t];
      }
      soc_path[t] = b;
    }
    if (!feasible) continue;
    const bool better =
        !have_best || objective < best_objective ||
        (objective == best_objective &&
         (on < best_on ||
          (on == best_on && std::lexicographical_compare(
                                commands.begin(), commands.end(),
                                best_commands.begin(), best_commands.end()))));
    if (better) {
      have_best = true;
      best_objective = objective;
      best_on = on;
      best_commands = commands;
      best_soc_path = soc_path;
    }
  }

  ControlPlan plan;
  plan.battery_on = std::move(best_commands);
  plan.soc_path = std::move(best_soc_path);
  plan.objective = best_objective;
  plan.grid_on.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    plan.grid_on[t] = static_cast<std::uint8_t>(1 - plan.battery_on[t]);
  }
  return plan;
}

std::pair<int, ControlPlan> control_step(const StateWindow& window,
                                         const ControllerConfig& config) {
  const CostDiff cd = build_cost_diff(window, config);
  ControlPlan plan = solve_dispatch(cd, window.soc, config);
  const int command = plan.battery_on.empty() ? 0 : plan.battery_on.front();
  return {command, std::move(plan)};
}

}  // namespace mgrt
