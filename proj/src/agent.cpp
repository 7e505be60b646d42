#include "mgrt/agent.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace mgrt {
namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274;  // log(2*pi)/2

const std::vector<std::size_t> kNetSizes{5, 64, 64, 1};

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double band_clamp(double soc, const ControllerConfig& config) {
  return std::min(std::max(soc, config.soc_min), config.soc_max);
}

ActionSample finish_action(double mu, double log_std, const Interval& interval,
                           double z) {
  ActionSample sample;
  sample.pre_squash = z;
  if (interval.empty()) {
    return sample;  // no feasible spoof; act as no-attack
  }
  sample.offset = squash_to_interval(z, interval);
  sample.log_prob = gaussian_log_density(z, mu, log_std) -
                    squash_log_jacobian(z, interval);
  return sample;
}

}  // namespace

AgentState state_from_context(const AttackContext& ctx) {
  return {ctx.soc, ctx.cost_term, ctx.diff_term, ctx.load_kw, ctx.solar_kw};
}

std::vector<double> normalize_state(const AgentState& s, const NormScales& scales) {
  return {s.soc / scales.soc, s.cost_term / scales.cost, s.diff_term / scales.diff,
          s.load_kw / scales.power, s.solar_kw / scales.power};
}

NormScales derive_scales(const Scenario& scenario, const ControllerConfig& config) {
  const SimEngine engine(scenario, config);
  double cmax = 0.0;
  double dmax = 0.0;
  for (std::size_t h = 0; h < engine.hours(); ++h) {
    cmax = std::max(cmax, std::abs(engine.hour_cost_term(h)));
    dmax = std::max(dmax, std::abs(engine.hour_diff_term(h)));
  }
  NormScales scales;
  scales.cost = cmax > 0.0 ? cmax : 1.0;
  scales.diff = dmax > 0.0 ? dmax : 1.0;
  return scales;
}

double squash_to_interval(double z, const Interval& interval) {
  const double c = 0.5 * (interval.lo + interval.hi);
  const double r = 0.5 * (interval.hi - interval.lo);
  if (!(r > 0.0)) return c;
  return c + r * std::tanh((z - c) / r);
}

double squash_log_jacobian(double z, const Interval& interval) {
  const double c = 0.5 * (interval.lo + interval.hi);
  const double r = 0.5 * (interval.hi - interval.lo);
  if (!(r > 0.0)) return 0.0;
  // log(1 - tanh^2 u) without cancellation for large |u|.
  const double u = std::abs((z - c) / r);
  return 2.0 * (std::log(2.0) - u - std::log1p(std::exp(-2.0 * u)));
}

double gaussian_log_density(double z, double mean, double log_std) {
  const double diff = z - mean;
  const double quad = diff == 0.0 ? 0.0 : std::pow(diff / std::exp(log_std), 2);
  return -log_std - kHalfLog2Pi - 0.5 * quad;
}

ActionSample sample_action(const GaussianPolicy& policy,
                           std::span<const double> norm_state,
                           const Interval& interval, Rng& rng) {
  const double mu = policy.mean.forward(norm_state)[0];
  const double z = mu + std::exp(policy.log_std) * rng.normal();
  return finish_action(mu, policy.log_std, interval, z);
}

ActionSample describe_action(const GaussianPolicy& policy,
                             std::span<const double> norm_state,
                             const Interval& interval, double z) {
  const double mu = policy.mean.forward(norm_state)[0];
  return finish_action(mu, policy.log_std, interval, z);
}

double td_advantage(double reward, double v_s, double v_next, double gamma,
                    bool terminal) {
  return reward + gamma * v_next * (terminal ? 0.0 : 1.0) - v_s;
}

ActorCritic make_agent(std::uint64_t seed, const NormScales& scales,
                       const AttackBounds& bounds) {
  ActorCritic ac;
  Rng actor_rng = Rng::stream(seed, "agent/actor");
  Rng critic_rng = Rng::stream(seed, "agent/critic");
  ac.policy.mean = Mlp(kNetSizes, Activation::kTanh, Activation::kLinear, actor_rng);
  ac.policy.log_std = std::log(5.0);
  ac.critic = Mlp(kNetSizes, Activation::kTanh, Activation::kLinear, critic_rng);
  ac.scales = scales;
  ac.bounds = bounds;
  return ac;
}

StepGrads compute_step_grads(const ActorCritic& ac, const Transition& t,
                             double gamma) {
  StepGrads out;
  const std::vector<double> norm_s = normalize_state(t.s, ac.scales);
  const std::vector<double> norm_next = normalize_state(t.next, ac.scales);

  MlpCache critic_cache;
  const double v_s = ac.critic.forward(norm_s, &critic_cache)[0];
  const double v_next = ac.critic.forward(norm_next)[0];
  const double delta = td_advantage(t.reward, v_s, v_next, gamma, t.terminal);
  out.target = delta + v_s;  // r + gamma * V(s'), frozen
  out.losses.delta = delta;
  out.losses.critic = delta * delta;

  const double critic_up[] = {-2.0 * delta};
  ac.critic.flatten_grads(ac.critic.backward(critic_cache, critic_up), out.critic);

  MlpCache mean_cache;
  const double mu = ac.policy.mean.forward(norm_s, &mean_cache)[0];
  const ActionSample replay =
      finish_action(mu, ac.policy.log_std, t.interval, t.pre_squash);
  out.losses.actor = -replay.log_prob * delta;

  // For the fixed draw z, the squash correction does not depend on the
  // parameters, so only the Gaussian part contributes.
  const double sigma2 = std::exp(2.0 * ac.policy.log_std);
  const double zdiff = t.pre_squash - mu;
  const double mean_up[] = {t.interval.empty() ? 0.0 : -delta * zdiff / sigma2};
  ac.policy.mean.flatten_grads(ac.policy.mean.backward(mean_cache, mean_up),
                               out.actor);
  out.actor.push_back(t.interval.empty()
                          ? 0.0
                          : -delta * (zdiff * zdiff / sigma2 - 1.0));
  return out;
}

StepLosses step_losses(const ActorCritic& ac, const Transition& t,
                       double frozen_target, double frozen_delta) {
  StepLosses losses;
  const std::vector<double> norm_s = normalize_state(t.s, ac.scales);
  const double v_s = ac.critic.forward(norm_s)[0];
  losses.delta = frozen_target - v_s;
  losses.critic = losses.delta * losses.delta;
  const ActionSample replay =
      describe_action(ac.policy, norm_s, t.interval, t.pre_squash);
  losses.actor = -replay.log_prob * frozen_delta;
  return losses;
}

StepLosses update_step(ActorCritic& ac, Optimizer& actor_opt,
                       Optimizer& critic_opt, const Transition& t, double gamma) {
  const StepGrads grads = compute_step_grads(ac, t, gamma);
  if (!std::isfinite(grads.losses.actor) || !std::isfinite(grads.losses.critic)) {
    throw std::runtime_error(
        "non-finite training loss (actor " + std::to_string(grads.losses.actor) +
        ", critic " + std::to_string(grads.losses.critic) + ")");
  }

  std::vector<double> actor_params = ac.policy.mean.params();
  actor_params.push_back(ac.policy.log_std);
  actor_opt.step(actor_params, grads.actor);
  ac.policy.mean.set_params(
      std::span<const double>(actor_params.data(), actor_params.size() - 1));
  ac.policy.log_std = actor_params.back();

  std::vector<double> critic_params = ac.critic.params();
  critic_opt.step(critic_params, grads.critic);
  ac.critic.set_params(critic_params);
  return grads.losses;
}

TrainResult train(const Scenario& scenario, const ControllerConfig& config,
                  const TrainConfig& tc) {
  const SimEngine engine(scenario, config);
  if (tc.steps == 0 || tc.steps > engine.hours()) {
    throw std::invalid_argument("episode length must be in [1, scenario hours]");
  }
  if (!(tc.gamma > 0.0) || tc.gamma > 1.0) {
    throw std::invalid_argument("gamma must be in (0, 1]");
  }

  TrainResult out;
  out.agent = make_agent(tc.seed, derive_scales(scenario, config), tc.bounds);
  ActorCritic& ac = out.agent;
  Optimizer actor_opt({tc.optimizer, tc.actor_lr},
                      ac.policy.mean.param_count() + 1);
  Optimizer critic_opt({tc.optimizer, tc.critic_lr}, ac.critic.param_count());
  Rng init_rng = Rng::stream(tc.seed, "train/init");
  Rng action_rng = Rng::stream(tc.seed, "train/action");

  for (std::size_t episode = 0; episode < tc.episodes; ++episode) {
    const double init_soc =
        tc.init_soc_hi > tc.init_soc_lo
            ? tc.init_soc_lo + (tc.init_soc_hi - tc.init_soc_lo) * init_rng.uniform()
            : tc.init_soc_lo;
    SimEngine::Cursor cursor = engine.start(init_soc);
    double cumulative = 0.0;
    for (std::size_t k = 0; k < tc.steps; ++k) {
      const AgentState s = state_from_context(engine.context_at(cursor));
      const Interval interval = feasible_offsets(tc.bounds, cursor.soc, config);
      const ActionSample action =
          sample_action(ac.policy, normalize_state(s, ac.scales), interval,
                        action_rng);
      const double reported = band_clamp(cursor.soc + action.offset, config);
      const auto outcome = engine.step_hour(cursor, reported);
      const double reward = 1000.0 * outcome.hourly_cost;

      const std::size_t next_hour = cursor.hour % engine.hours();
      const AgentState next{cursor.soc, engine.hour_cost_term(next_hour),
                            engine.hour_diff_term(next_hour),
                            engine.hour_load(next_hour),
                            engine.hour_solar(next_hour)};
      const Transition transition{s,        action.offset, action.pre_squash,
                                  interval, reward,        next,
                                  k + 1 == tc.steps};
      update_step(ac, actor_opt, critic_opt, transition, tc.gamma);
      cumulative += reward;
    }
    out.curve.push_back(cumulative);
    out.episode_costs.push_back(cursor.total_cost);
  }
  return out;
}

Attacker policy_attacker(const ActorCritic& ac, const ControllerConfig& config,
                         Rng& rng) {
  return [agent = &ac, config, gen = &rng](const AttackContext& ctx) {
    const AgentState s = state_from_context(ctx);
    const Interval interval = feasible_offsets(agent->bounds, ctx.soc, config);
    const ActionSample action = sample_action(
        agent->policy, normalize_state(s, agent->scales), interval, *gen);
    return band_clamp(ctx.soc + action.offset, config);
  };
}

std::vector<EvalRow> evaluate(const ActorCritic& ac, const Scenario& scenario,
                              const ControllerConfig& config,
                              const std::vector<double>& init_socs,
                              std::size_t runs, std::uint64_t seed,
                              std::size_t hours) {
  if (runs == 0) {
    throw std::invalid_argument("runs must be at least 1");
  }
  std::vector<EvalRow> rows;
  for (std::size_t i = 0; i < init_socs.size(); ++i) {
    const double init_soc = init_socs[i];
    const SimResult base = run_simulation(scenario, config, init_soc, {}, hours);
    rows.push_back({init_soc, "none", base.total_cost, 0.0, base.avg_soc,
                    base.avg_reported_soc});

    double cost_sum = 0.0;
    double charge_sum = 0.0;
    double reported_sum = 0.0;
    for (std::size_t run = 0; run < runs; ++run) {
      Rng rng = Rng::stream(
          seed, "eval/" + std::to_string(i) + "/" + std::to_string(run));
      const SimResult res = run_simulation(scenario, config, init_soc,
                                           policy_attacker(ac, config, rng), hours);
      cost_sum += res.total_cost;
      charge_sum += res.avg_soc;
      reported_sum += res.avg_reported_soc;
    }
    const double n = static_cast<double>(runs);
    const double cost = cost_sum / n;
    const double denom = std::abs(base.total_cost);
    rows.push_back({init_soc, to_string(ac.bounds.mode), cost,
                    denom > 1e-12 ? (cost - base.total_cost) / denom * 100.0 : 0.0,
                    charge_sum / n, reported_sum / n});
  }
  return rows;
}

void save_agent(const ActorCritic& ac, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << "mgrt-agent-v1\n";
  out << "mode " << to_string(ac.bounds.mode) << "\n";
  out << "bounds " << g17(ac.bounds.offset_min) << ' ' << g17(ac.bounds.offset_max)
      << "\n";
  out << "scales " << g17(ac.scales.soc) << ' ' << g17(ac.scales.cost) << ' '
      << g17(ac.scales.diff) << ' ' << g17(ac.scales.power) << "\n";
  out << "log_std " << g17(ac.policy.log_std) << "\n";
  const std::vector<std::size_t> sizes = ac.policy.mean.layer_sizes();
  out << "layers " << sizes.size();
  for (const std::size_t s : sizes) out << ' ' << s;
  out << "\n";
  for (const char* name : {"mean", "critic"}) {
    out << name;
    const std::vector<double> params = std::string(name) == "mean"
                                           ? ac.policy.mean.params()
                                           : ac.critic.params();
    for (std::size_t i = 0; i < params.size(); ++i) {
      out << (i % 8 == 0 ? '\n' : ' ') << g17(params[i]);
    }
    out << "\n";
  }
  if (!out) {
    throw std::runtime_error("write failed for " + path.string());
  }
}

ActorCritic load_agent(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  const auto fail = [&](const std::string& what) -> std::runtime_error {
    return std::runtime_error(path.string() + ": " + what);
  };
  std::string magic;
  if (!std::getline(in, magic) || magic != "mgrt-agent-v1") {
    throw fail("not an agent file (bad header)");
  }
  const auto expect = [&](const std::string& keyword) {
    std::string token;
    if (!(in >> token) || token != keyword) {
      throw fail("expected '" + keyword + "'");
    }
  };

  ActorCritic ac;
  expect("mode");
  std::string mode;
  in >> mode;
  ac.bounds.mode = attack_mode_from_string(mode);
  expect("bounds");
  if (!(in >> ac.bounds.offset_min >> ac.bounds.offset_max)) {
    throw fail("bad bounds");
  }
  expect("scales");
  if (!(in >> ac.scales.soc >> ac.scales.cost >> ac.scales.diff >>
        ac.scales.power)) {
    throw fail("bad scales");
  }
  expect("log_std");
  if (!(in >> ac.policy.log_std)) {
    throw fail("bad log_std");
  }
  expect("layers");
  std::size_t n = 0;
  if (!(in >> n) || n < 2) {
    throw fail("bad layer count");
  }
  std::vector<std::size_t> sizes(n);
  for (std::size_t& s : sizes) {
    if (!(in >> s) || s == 0) {
      throw fail("bad layer size");
    }
  }
  for (const char* name : {"mean", "critic"}) {
    expect(name);
    Mlp net(sizes, Activation::kTanh, Activation::kLinear);
    std::vector<double> params(net.param_count());
    for (double& p : params) {
      if (!(in >> p)) {
        throw fail(std::string("truncated ") + name + " parameters");
      }
    }
    net.set_params(params);
    (std::string(name) == "mean" ? ac.policy.mean : ac.critic) = std::move(net);
  }
  return ac;
}

}  // namespace mgrt
