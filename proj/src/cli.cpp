#include "mgrt/cli.hpp"

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "mgrt/agent.hpp"
#include "mgrt/plant.hpp"
#include "mgrt/rng.hpp"
#include "mgrt/scenario.hpp"
#include "mgrt/threat.hpp"

namespace mgrt {
namespace {

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  return out;
}

void check_stream(const std::ofstream& out, const std::filesystem::path& path) {
  if (!out) {
    throw std::runtime_error("write failed for " + path.string());
  }
}

/// Options shared by every command that consumes a scenario directory.
struct ScenarioArgs {
  std::string dir;
  TouSchedule tou;
  double capacity_kwh = 30.0;
  std::size_t horizon = 24;

  void attach(CLI::App* cmd, bool required_dir = true) {
    auto* opt = cmd->add_option("--scenario", dir,
                                "scenario directory with load.csv and solar.csv");
    if (required_dir) opt->required();
    cmd->add_option("--capacity-kwh", capacity_kwh, "battery capacity in kWh")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--T", horizon, "controller lookahead in hours")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--price-off", tou.off_peak, "off-peak buy price, cents/kWh")
        ->capture_default_str();
    cmd->add_option("--price-mid", tou.mid_peak, "mid-peak buy price, cents/kWh")
        ->capture_default_str();
    cmd->add_option("--price-on", tou.on_peak, "on-peak buy price, cents/kWh")
        ->capture_default_str();
    cmd->add_option("--price-sell", tou.sell, "sell price, cents/kWh")
        ->capture_default_str();
  }

  Scenario load() const {
    const std::filesystem::path base(dir);
    return load_scenario(base / "load.csv", base / "solar.csv", tou);
  }

  ControllerConfig config() const {
    ControllerConfig config;
    config.horizon = horizon;
    config.omega = capacity_kwh / 100.0;
    config.validate();
    return config;
  }

  void manifest_flags(RunManifest& m) const {
    m.flags.push_back("--scenario=" + dir);
    m.flags.push_back("--capacity-kwh=" + g17(capacity_kwh));
    m.flags.push_back("--T=" + std::to_string(horizon));
    m.flags.push_back("--price-off=" + g17(tou.off_peak));
    m.flags.push_back("--price-mid=" + g17(tou.mid_peak));
    m.flags.push_back("--price-on=" + g17(tou.on_peak));
    m.flags.push_back("--price-sell=" + g17(tou.sell));
  }

  void manifest_inputs(RunManifest& m) const {
    const std::filesystem::path base(dir);
    for (const char* name : {"load.csv", "solar.csv"}) {
      const std::filesystem::path p = base / name;
      m.inputs.emplace_back(p.string(), digest_hex(file_digest(p)));
    }
  }
};

struct BoundsArgs {
  std::string mode = "full";
  double offset_min = -100.0;
  double offset_max = 100.0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--attack-mode", mode, "spoof constraint: full or pct5")
        ->capture_default_str()
        ->check(CLI::IsMember({"full", "pct5"}));
    cmd->add_option("--offset-min", offset_min, "lower spoof offset bound")
        ->capture_default_str();
    cmd->add_option("--offset-max", offset_max, "upper spoof offset bound")
        ->capture_default_str();
  }

  AttackBounds bounds() const {
    AttackBounds b;
    b.mode = attack_mode_from_string(mode);
    b.offset_min = offset_min;
    b.offset_max = offset_max;
    if (offset_min > offset_max) {
      throw std::invalid_argument("--offset-min exceeds --offset-max");
    }
    return b;
  }

  void manifest_flags(RunManifest& m) const {
    m.flags.push_back("--attack-mode=" + mode);
    m.flags.push_back("--offset-min=" + g17(offset_min));
    m.flags.push_back("--offset-max=" + g17(offset_max));
  }
};

void write_trace(const std::vector<MinuteRecord>& trace,
                 const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "minute,load_kw,solar_kw,command,soc,grid_kw,cost_delta\n";
  for (const MinuteRecord& r : trace) {
    out << r.minute << ',' << g17(r.load_kw) << ',' << g17(r.solar_kw) << ','
        << r.command << ',' << g17(r.soc_after) << ',' << g17(r.grid_kw) << ','
        << g17(r.cost_delta) << '\n';
  }
  check_stream(out, path);
}

void write_curve(const std::vector<double>& curve,
                 const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "episode,cumulative_reward\n";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    out << (i + 1) << ',' << g17(curve[i]) << '\n';
  }
  check_stream(out, path);
}

void write_eval_report(const std::vector<EvalRow>& rows,
                       const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "init_soc,attack_mode,cost,cost_increase_pct,avg_charge,avg_reported\n";
  for (const EvalRow& r : rows) {
    out << g17(r.init_soc) << ',' << r.attack_mode << ',' << g17(r.cost) << ','
        << g17(r.cost_increase_pct) << ',' << g17(r.avg_charge) << ','
        << g17(r.avg_reported) << '\n';
  }
  check_stream(out, path);
}

void write_oracle_report(const EpisodeAttack& attack,
                         const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "hour,a_b,b_reported,b_actual,hourly_cost\n";
  for (std::size_t k = 0; k < attack.offsets.size(); ++k) {
    out << k << ',' << g17(attack.offsets[k]) << ',' << g17(attack.reported_soc[k])
        << ',' << g17(attack.actual_soc[k]) << ',' << g17(attack.hourly_costs[k])
        << '\n';
  }
  check_stream(out, path);
}

// --- synth ---------------------------------------------------------------

struct SynthCmd {
  std::uint64_t seed = 1;
  int days = 2;
  std::string out;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("synth", "generate a synthetic scenario");
    cmd->add_option("--seed", seed, "random seed")->capture_default_str();
    cmd->add_option("--days", days, "scenario length in days")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--out", out, "output directory")->required();
    cmd->callback([this] { run(); });
  }

  void run() const {
    const Scenario scenario = synth_scenario(seed, days);
    save_scenario(scenario, out);

    RunManifest m;
    m.command = "synth";
    m.flags = {"--seed=" + std::to_string(seed), "--days=" + std::to_string(days),
               "--out=" + out};
    write_manifest(m, std::filesystem::path(out) / "scenario.manifest");
    std::cout << "wrote " << out << "/load.csv and " << out << "/solar.csv ("
              << scenario.hours() << " hours)\n";
  }
};

// --- simulate ------------------------------------------------------------

struct SimulateCmd {
  ScenarioArgs scenario;
  double init_soc = 80.0;
  std::size_t hours = 0;  // 0 = whole scenario
  bool force_off = false;
  std::string out;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("simulate", "run the plant under the controller");
    scenario.attach(cmd);
    cmd->add_option("--init-soc", init_soc, "initial state of charge, percent")
        ->capture_default_str();
    cmd->add_option("--hours", hours, "hours to simulate (0 = whole scenario)")
        ->capture_default_str();
    cmd->add_flag("--force-off", force_off, "hold every battery command OFF");
    cmd->add_option("--out", out, "trace CSV path")->required();
    cmd->callback([this] { run(); });
  }

  void run() const {
    const Scenario sc = scenario.load();
    const ControllerConfig config = scenario.config();
    const std::size_t limit = hours == 0 ? kAllHours : hours;
    const SimResult result =
        force_off ? baseline_all_off(sc, config, init_soc, limit)
                  : run_simulation(sc, config, init_soc, {}, limit);
    write_trace(result.trace, out);

    RunManifest m;
    m.command = "simulate";
    scenario.manifest_flags(m);
    m.flags.push_back("--init-soc=" + g17(init_soc));
    m.flags.push_back("--hours=" + std::to_string(hours));
    if (force_off) m.flags.push_back("--force-off");
    m.flags.push_back("--out=" + out);
    scenario.manifest_inputs(m);
    write_manifest(m, out + ".manifest");

    std::cout << format_score(result.total_cost, result.avg_soc) << "\n";
  }
};

// --- train ---------------------------------------------------------------

struct TrainCmd {
  ScenarioArgs scenario;
  BoundsArgs bounds;
  std::size_t episodes = 1000;
  std::size_t steps = 48;
  double gamma = 0.99;
  double actor_lr = 3e-4;
  double critic_lr = 1e-3;
  double init_lo = 75.0;
  double init_hi = 100.0;
  std::uint64_t seed = 1;
  std::string out;
  std::string curve;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("train", "train the spoofing agent");
    scenario.attach(cmd);
    bounds.attach(cmd);
    cmd->add_option("--episodes", episodes, "training episodes")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--steps", steps, "hourly steps per episode")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--gamma", gamma, "discount factor")->capture_default_str();
    cmd->add_option("--actor-lr", actor_lr, "actor learning rate")
        ->capture_default_str();
    cmd->add_option("--critic-lr", critic_lr, "critic learning rate")
        ->capture_default_str();
    cmd->add_option("--init-soc-lo", init_lo, "episode initial SoC lower bound")
        ->capture_default_str();
    cmd->add_option("--init-soc-hi", init_hi, "episode initial SoC upper bound")
        ->capture_default_str();
    cmd->add_option("--seed", seed, "random seed")->capture_default_str();
    cmd->add_option("--out", out, "trained agent path")->required();
    cmd->add_option("--curve", curve, "learning-curve CSV path")->required();
    cmd->callback([this] { run(); });
  }

  void run() const {
    const Scenario sc = scenario.load();
    const ControllerConfig config = scenario.config();
    TrainConfig tc;
    tc.episodes = episodes;
    tc.steps = steps;
    tc.gamma = gamma;
    tc.actor_lr = actor_lr;
    tc.critic_lr = critic_lr;
    tc.seed = seed;
    tc.bounds = bounds.bounds();
    tc.init_soc_lo = init_lo;
    tc.init_soc_hi = init_hi;
    const TrainResult result = train(sc, config, tc);
    save_agent(result.agent, out);
    write_curve(result.curve, curve);

    RunManifest m;
    m.command = "train";
    scenario.manifest_flags(m);
    bounds.manifest_flags(m);
    m.flags.push_back("--episodes=" + std::to_string(episodes));
    m.flags.push_back("--steps=" + std::to_string(steps));
    m.flags.push_back("--gamma=" + g17(gamma));
    m.flags.push_back("--actor-lr=" + g17(actor_lr));
    m.flags.push_back("--critic-lr=" + g17(critic_lr));
    m.flags.push_back("--init-soc-lo=" + g17(init_lo));
    m.flags.push_back("--init-soc-hi=" + g17(init_hi));
    m.flags.push_back("--seed=" + std::to_string(seed));
    m.flags.push_back("--out=" + out);
    m.flags.push_back("--curve=" + curve);
    scenario.manifest_inputs(m);
    write_manifest(m, out + ".manifest");

    const double last = result.curve.empty() ? 0.0 : result.curve.back();
    char line[96];
    std::snprintf(line, sizeof line, "trained %zu episodes; final reward %.2f\n",
                  episodes, last);
    std::cout << line;
  }
};

// --- attack (Table-II style evaluation) ----------------------------------

struct AttackCmd {
  ScenarioArgs scenario;
  std::string agent_path;
  std::vector<double> init_socs{75, 80, 85, 90, 95, 100};
  std::size_t runs = 10;
  std::size_t hours = 0;
  std::uint64_t seed = 1;
  std::string out;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("attack", "evaluate a trained agent");
    scenario.attach(cmd);
    cmd->add_option("--agent", agent_path, "trained agent file")->required();
    cmd->add_option("--init-soc", init_socs,
                    "initial SoC list, comma separated")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--runs", runs, "stochastic rollouts per initial SoC")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--hours", hours, "hours per rollout (0 = whole scenario)")
        ->capture_default_str();
    cmd->add_option("--seed", seed, "random seed")->capture_default_str();
    cmd->add_option("--out", out, "report CSV path")->required();
    cmd->callback([this] { run(); });
  }

  void run() const {
    const Scenario sc = scenario.load();
    const ControllerConfig config = scenario.config();
    const ActorCritic agent = load_agent(agent_path);
    const std::size_t limit = hours == 0 ? kAllHours : hours;
    const std::vector<EvalRow> rows =
        evaluate(agent, sc, config, init_socs, runs, seed, limit);
    write_eval_report(rows, out);

    RunManifest m;
    m.command = "attack";
    scenario.manifest_flags(m);
    m.flags.push_back("--agent=" + agent_path);
    std::string list;
    for (std::size_t i = 0; i < init_socs.size(); ++i) {
      list += (i ? "," : "") + g17(init_socs[i]);
    }
    m.flags.push_back("--init-soc=" + list);
    m.flags.push_back("--runs=" + std::to_string(runs));
    m.flags.push_back("--hours=" + std::to_string(hours));
    m.flags.push_back("--seed=" + std::to_string(seed));
    m.flags.push_back("--out=" + out);
    m.inputs.emplace_back(agent_path, digest_hex(file_digest(agent_path)));
    scenario.manifest_inputs(m);
    write_manifest(m, out + ".manifest");

    std::cout << "wrote " << out << " (" << rows.size() << " rows)\n";
  }
};

// --- oracle --------------------------------------------------------------

struct OracleCmd {
  ScenarioArgs scenario;
  BoundsArgs bounds;
  std::string mode = "greedy";
  double grid = 0.5;
  std::size_t hours = 0;
  double init_soc = 90.0;
  std::string out;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("oracle", "brute-force reference attacks");
    scenario.attach(cmd);
    bounds.attach(cmd);
    cmd->add_option("--mode", mode, "greedy (per hour) or exact (whole horizon)")
        ->capture_default_str()
        ->check(CLI::IsMember({"greedy", "exact"}));
    cmd->add_option("--grid", grid, "offset grid step, percent")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--hours", hours, "attack horizon (0 = whole scenario)")
        ->capture_default_str();
    cmd->add_option("--init-soc", init_soc, "initial state of charge, percent")
        ->capture_default_str();
    cmd->add_option("--out", out, "per-hour report CSV path")->required();
    cmd->callback([this] { run(); });
  }

  void run() const {
    const Scenario sc = scenario.load();
    const ControllerConfig config = scenario.config();
    const AttackBounds b = bounds.bounds();
    const std::size_t limit = hours == 0 ? sc.hours() : hours;
    const EpisodeAttack attack =
        mode == "exact"
            ? oracle_attack_horizon(sc, config, init_soc, b, grid, limit)
            : greedy_attack_episode(sc, config, init_soc, b, grid, limit);
    write_oracle_report(attack, out);

    RunManifest m;
    m.command = "oracle";
    scenario.manifest_flags(m);
    bounds.manifest_flags(m);
    m.flags.push_back("--mode=" + mode);
    m.flags.push_back("--grid=" + g17(grid));
    m.flags.push_back("--hours=" + std::to_string(hours));
    m.flags.push_back("--init-soc=" + g17(init_soc));
    m.flags.push_back("--out=" + out);
    scenario.manifest_inputs(m);
    write_manifest(m, out + ".manifest");

    std::cout << format_score(attack.total_cost, attack.avg_soc) << "\n";
    char line[64];
    std::snprintf(line, sizeof line, "No-attack: $%.2f\n", attack.no_attack_cost);
    std::cout << line;
  }
};

// --- rerun ---------------------------------------------------------------

struct RerunCmd {
  std::string manifest_path;
  int exit_code = 0;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("rerun", "replay a command from its manifest");
    cmd->add_option("--manifest", manifest_path, "manifest written by a prior run")
        ->required();
    cmd->callback([this] { run(); });
  }

  void run() {
    const RunManifest m = read_manifest(manifest_path);
    for (const auto& [path, digest] : m.inputs) {
      if (digest_hex(file_digest(path)) != digest) {
        throw std::runtime_error("input " + path +
                                 " changed since the manifest was written");
      }
    }
    std::vector<std::string> args{"mgrt", m.command};
    args.insert(args.end(), m.flags.begin(), m.flags.end());
    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const std::string& a : args) argv.push_back(a.c_str());
    exit_code = run_cli(static_cast<int>(argv.size()), argv.data());
  }
};

}  // namespace

std::string format_score(double cost_dollars, double avg_charge_pct) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "Score: $%.2f. Avg Batt Charge: %.3f%%",
                cost_dollars, avg_charge_pct);
  return buf;
}

std::uint64_t file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  std::ostringstream bytes;
  bytes << in.rdbuf();
  return fnv1a64(bytes.str());
}

std::string digest_hex(std::uint64_t digest) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(digest));
  return buf;
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "mgrt-manifest-v1\n";
  out << "version " << (manifest.version.empty() ? MGRT_VERSION : manifest.version)
      << "\n";
  out << "command " << manifest.command << "\n";
  for (const std::string& flag : manifest.flags) {
    out << "flag " << flag << "\n";
  }
  for (const auto& [input, digest] : manifest.inputs) {
    out << "input " << digest << ' ' << input << "\n";
  }
  check_stream(out, path);
}

RunManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  std::string line;
  if (!std::getline(in, line) || line != "mgrt-manifest-v1") {
    throw std::runtime_error(path.string() + ": not a manifest (bad header)");
  }
  RunManifest m;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::size_t space = line.find(' ');
    if (space == std::string::npos) {
      throw std::runtime_error(path.string() + ": malformed line '" + line + "'");
    }
    const std::string key = line.substr(0, space);
    const std::string value = line.substr(space + 1);
    if (key == "version") {
      m.version = value;
    } else if (key == "command") {
      m.command = value;
    } else if (key == "flag") {
      m.flags.push_back(value);
    } else if (key == "input") {
      const std::size_t cut = value.find(' ');
      if (cut == std::string::npos) {
        throw std::runtime_error(path.string() + ": malformed input line");
      }
      m.inputs.emplace_back(value.substr(cut + 1), value.substr(0, cut));
    } else {
      throw std::runtime_error(path.string() + ": unknown key '" + key + "'");
    }
  }
  if (m.command.empty()) {
    throw std::runtime_error(path.string() + ": missing command");
  }
  return m;
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"microgrid dispatch, SoC-spoofing attacks, and red-team training"};
  app.set_version_flag("--version", std::string("mgrt ") + MGRT_VERSION);
  app.require_subcommand(1);

  SynthCmd synth;
  SimulateCmd simulate;
  TrainCmd train_cmd;
  AttackCmd attack;
  OracleCmd oracle;
  RerunCmd rerun;
  synth.attach(app);
  simulate.attach(app);
  train_cmd.attach(app);
  attack.attach(app);
  oracle.attach(app);
  rerun.attach(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rerun.exit_code;
}

}  // namespace mgrt
