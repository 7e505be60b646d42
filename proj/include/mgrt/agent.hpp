#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mgrt/mlp.hpp"
#include "mgrt/plant.hpp"
#include "mgrt/threat.hpp"

namespace mgrt {

/// Divisors applied to the raw observation {b, c, d, p_load, p_solar}.
struct NormScales {
  double soc = 100.0;
  double cost = 1.0;
  double diff = 1.0;
  double power = 10.0;
};

/// Observation for one control hour: actual SoC plus the controller's
/// current-hour cost/difference terms and the averaged powers.
struct AgentState {
  double soc = 0.0;
  double cost_term = 0.0;
  double diff_term = 0.0;
  double load_kw = 0.0;
  double solar_kw = 0.0;
};

AgentState state_from_context(const AttackContext& ctx);
std::vector<double> normalize_state(const AgentState& s, const NormScales& scales);
/// cost/diff divisors from the no-attack hour averages; SoC and power
/// divisors fixed at 100 and 10.
NormScales derive_scales(const Scenario& scenario, const ControllerConfig& config);

struct GaussianPolicy {
  Mlp mean;  // observation -> offset mean, percent units
  double log_std = 0.0;
};

struct ActionSample {
  double offset = 0.0;      // squashed into the feasible interval
  double pre_squash = 0.0;  // raw Gaussian draw z
  double log_prob = 0.0;    // density of `offset`, squash correction included
};

/// Saturating map from the real line onto [lo, hi].
double squash_to_interval(double z, const Interval& interval);
/// log |d squash / dz| at z.
double squash_log_jacobian(double z, const Interval& interval);
double gaussian_log_density(double z, double mean, double log_std);

ActionSample sample_action(const GaussianPolicy& policy,
                           std::span<const double> norm_state,
                           const Interval& interval, Rng& rng);
/// Recomputes offset/log_prob for an existing draw z at the current
/// parameters (used by the update and by gradient checks).
ActionSample describe_action(const GaussianPolicy& policy,
                             std::span<const double> norm_state,
                             const Interval& interval, double z);

double td_advantage(double reward, double v_s, double v_next, double gamma,
                    bool terminal);

struct Transition {
  AgentState s;
  double offset = 0.0;
  double pre_squash = 0.0;
  Interval interval;  // feasible interval the action was squashed into
  double reward = 0.0;
  AgentState next;
  bool terminal = false;
};

struct ActorCritic {
  GaussianPolicy policy;
  Mlp critic;
  NormScales scales;
  AttackBounds bounds;
};

/// Fresh agent: separate 5-64-64-1 tanh networks for the policy mean and the
/// critic, log_std starting at log 5.
ActorCritic make_agent(std::uint64_t seed, const NormScales& scales,
                       const AttackBounds& bounds);

struct StepLosses {
  double actor = 0.0;
  double critic = 0.0;
  double delta = 0.0;
};

struct StepGrads {
  std::vector<double> actor;   // mean-network params, then log_std
  std::vector<double> critic;
  StepLosses losses;
  double target = 0.0;  // frozen critic target r + gamma * V(s')
};

StepGrads compute_step_grads(const ActorCritic& ac, const Transition& t,
                             double gamma);
/// The scalar objective those gradients differentiate: critic term
/// (frozen_target - V(s))^2 plus actor term -log_prob * frozen_delta, with
/// the draw z, the target, and the advantage all held fixed.
StepLosses step_losses(const ActorCritic& ac, const Transition& t,
                       double frozen_target, double frozen_delta);

/// One online update of both networks; throws on non-finite losses.
StepLosses update_step(ActorCritic& ac, Optimizer& actor_opt,
                       Optimizer& critic_opt, const Transition& t, double gamma);

struct TrainConfig {
  std::size_t episodes = 1000;
  std::size_t steps = 48;  // hourly steps per episode
  double gamma = 0.99;
  double actor_lr = 3e-4;
  double critic_lr = 1e-3;
  OptimConfig::Kind optimizer = OptimConfig::Kind::kAdam;
  std::uint64_t seed = 1;
  AttackBounds bounds;
  double init_soc_lo = 75.0;  // lo == hi trains a fixed-init agent
  double init_soc_hi = 100.0;
};

struct TrainResult {
  ActorCritic agent;
  std::vector<double> curve;          // per-episode cumulative reward
  std::vector<double> episode_costs;  // matching simulated dollars
};

TrainResult train(const Scenario& scenario, const ControllerConfig& config,
                  const TrainConfig& tc);

struct EvalRow {
  double init_soc = 0.0;
  std::string attack_mode;  // "none" or the agent's mode
  double cost = 0.0;
  double cost_increase_pct = 0.0;
  double avg_charge = 0.0;
  double avg_reported = 0.0;
};

/// Simulation hook that spoofs the reported SoC with policy samples.
Attacker policy_attacker(const ActorCritic& ac, const ControllerConfig& config,
                         Rng& rng);

/// Per initial SoC: a deterministic no-attack row plus the average of
/// `runs` stochastic policy rollouts.
std::vector<EvalRow> evaluate(const ActorCritic& ac, const Scenario& scenario,
                              const ControllerConfig& config,
                              const std::vector<double>& init_socs,
                              std::size_t runs, std::uint64_t seed,
                              std::size_t hours = kAllHours);

void save_agent(const ActorCritic& ac, const std::filesystem::path& path);
ActorCritic load_agent(const std::filesystem::path& path);

}  // namespace mgrt
