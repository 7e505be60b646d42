#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mgrt/agent.hpp"
#include "mgrt/dispatch.hpp"
#include "mgrt/plant.hpp"
#include "mgrt/scenario.hpp"
#include "mgrt/threat.hpp"

namespace py = pybind11;
using namespace mgrt;

namespace {

ControllerConfig make_config(std::size_t horizon, double capacity_kwh,
                             double soc_min, double soc_max) {
  ControllerConfig config;
  config.horizon = horizon;
  config.omega = capacity_kwh / 100.0;
  config.soc_min = soc_min;
  config.soc_max = soc_max;
  config.validate();
  return config;
}

py::dict result_dict(const SimResult& r) {
  py::dict d;
  d["total_cost"] = r.total_cost;
  d["avg_soc"] = r.avg_soc;
  d["avg_reported_soc"] = r.avg_reported_soc;
  d["hourly_costs"] = r.hourly_costs;
  d["commands"] = r.commands;
  d["reported_soc"] = r.reported_soc;
  return d;
}

py::dict attack_dict(const EpisodeAttack& a) {
  py::dict d;
  d["offsets"] = a.offsets;
  d["reported_soc"] = a.reported_soc;
  d["actual_soc"] = a.actual_soc;
  d["hourly_costs"] = a.hourly_costs;
  d["total_cost"] = a.total_cost;
  d["no_attack_cost"] = a.no_attack_cost;
  d["avg_soc"] = a.avg_soc;
  d["avg_reported_soc"] = a.avg_reported_soc;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Microgrid battery dispatch, plant simulation, and SoC-spoofing "
            "attack tools";

  py::class_<Scenario>(m, "Scenario")
      .def_readonly("load_kw", &Scenario::load_kw)
      .def_readonly("solar_kw", &Scenario::solar_kw)
      .def_readonly("buy_price", &Scenario::buy_price)
      .def_readonly("sell_price", &Scenario::sell_price)
      .def("minutes", &Scenario::minutes)
      .def("hours", &Scenario::hours);

  m.def("synth_scenario",
        [](std::uint64_t seed, int days) { return synth_scenario(seed, days); },
        py::arg("seed") = 1, py::arg("days") = 2);
  m.def("load_scenario",
        [](const std::string& load_path, const std::string& solar_path) {
          return load_scenario(load_path, solar_path, {});
        },
        py::arg("load_path"), py::arg("solar_path"));
  m.def("save_scenario",
        [](const Scenario& s, const std::string& dir) { save_scenario(s, dir); },
        py::arg("scenario"), py::arg("dir"));

  m.def("costs_and_diffs",
        [](const std::vector<double>& load_kw, const std::vector<double>& solar_kw,
           const std::vector<double>& buy_price,
           const std::vector<double>& sell_price, double omega) {
          StateWindow w{load_kw, solar_kw, buy_price, sell_price, 0.0};
          ControllerConfig config;
          config.horizon = load_kw.size();
          config.omega = omega;
          config.validate();
          const CostDiff cd = build_cost_diff(w, config);
          return py::make_tuple(cd.cost, cd.diff);
        },
        py::arg("load_kw"), py::arg("solar_kw"), py::arg("buy_price"),
        py::arg("sell_price"), py::arg("omega"),
        "Per-hour controller cost terms c_t and SoC differences d_t");

  m.def("solve_dispatch",
        [](const std::vector<double>& costs, const std::vector<double>& diffs,
           double init_soc, double soc_min, double soc_max) {
          CostDiff cd{costs, diffs};
          ControllerConfig config;
          config.horizon = costs.size();
          config.soc_min = soc_min;
          config.soc_max = soc_max;
          config.validate();
          const ControlPlan plan = solve_dispatch(cd, init_soc, config);
          std::vector<int> on(plan.battery_on.begin(), plan.battery_on.end());
          return py::make_tuple(on, plan.objective, plan.soc_path);
        },
        py::arg("costs"), py::arg("diffs"), py::arg("init_soc"),
        py::arg("soc_min") = 75.0, py::arg("soc_max") = 100.0,
        "Exact optimal ON/OFF plan: (commands, objective, soc_path)");

  m.def("simulate",
        [](const Scenario& s, double init_soc, double capacity_kwh,
           std::size_t horizon, std::size_t hours, bool force_off, double soc_min,
           double soc_max) {
          const ControllerConfig config =
              make_config(horizon, capacity_kwh, soc_min, soc_max);
          const std::size_t limit = hours == 0 ? kAllHours : hours;
          const SimResult r = force_off
                                  ? baseline_all_off(s, config, init_soc, limit)
                                  : run_simulation(s, config, init_soc, {}, limit);
          return result_dict(r);
        },
        py::arg("scenario"), py::arg("init_soc") = 80.0,
        py::arg("capacity_kwh") = 30.0, py::arg("horizon") = 24,
        py::arg("hours") = 0, py::arg("force_off") = false,
        py::arg("soc_min") = 75.0, py::arg("soc_max") = 100.0);

  m.def("greedy_attack",
        [](const Scenario& s, double init_soc, const std::string& mode,
           double grid, std::size_t hours, double capacity_kwh,
           std::size_t horizon) {
          const ControllerConfig config =
              make_config(horizon, capacity_kwh, 75.0, 100.0);
          AttackBounds bounds;
          bounds.mode = attack_mode_from_string(mode);
          const std::size_t limit = hours == 0 ? kAllHours : hours;
          return attack_dict(
              greedy_attack_episode(s, config, init_soc, bounds, grid, limit));
        },
        py::arg("scenario"), py::arg("init_soc") = 90.0, py::arg("mode") = "full",
        py::arg("grid") = 0.5, py::arg("hours") = 0,
        py::arg("capacity_kwh") = 30.0, py::arg("horizon") = 24);

  m.def("exact_attack",
        [](const Scenario& s, double init_soc, const std::string& mode,
           double grid, std::size_t hours, double capacity_kwh,
           std::size_t horizon) {
          const ControllerConfig config =
              make_config(horizon, capacity_kwh, 75.0, 100.0);
          AttackBounds bounds;
          bounds.mode = attack_mode_from_string(mode);
          return attack_dict(
              oracle_attack_horizon(s, config, init_soc, bounds, grid, hours));
        },
        py::arg("scenario"), py::arg("init_soc") = 90.0, py::arg("mode") = "full",
        py::arg("grid") = 5.0, py::arg("hours") = 4,
        py::arg("capacity_kwh") = 30.0, py::arg("horizon") = 24);

  m.def("train_agent",
        [](const Scenario& s, const std::string& out_path, std::size_t episodes,
           std::size_t steps, std::uint64_t seed, const std::string& mode,
           double capacity_kwh, std::size_t horizon) {
          const ControllerConfig config =
              make_config(horizon, capacity_kwh, 75.0, 100.0);
          TrainConfig tc;
          tc.episodes = episodes;
          tc.steps = steps;
          tc.seed = seed;
          tc.bounds.mode = attack_mode_from_string(mode);
          const TrainResult result = train(s, config, tc);
          if (!out_path.empty()) {
            save_agent(result.agent, out_path);
          }
          return result.curve;
        },
        py::arg("scenario"), py::arg("out_path") = "",
        py::arg("episodes") = 1000, py::arg("steps") = 48, py::arg("seed") = 1,
        py::arg("mode") = "full", py::arg("capacity_kwh") = 30.0,
        py::arg("horizon") = 24,
        "Train the spoofing agent; returns the per-episode reward curve");

  m.def("evaluate_agent",
        [](const std::string& agent_path, const Scenario& s,
           const std::vector<double>& init_socs, std::size_t runs,
           std::uint64_t seed, double capacity_kwh, std::size_t horizon) {
          const ControllerConfig config =
              make_config(horizon, capacity_kwh, 75.0, 100.0);
          const ActorCritic agent = load_agent(agent_path);
          py::list rows;
          for (const EvalRow& r :
               evaluate(agent, s, config, init_socs, runs, seed)) {
            py::dict d;
            d["init_soc"] = r.init_soc;
            d["attack_mode"] = r.attack_mode;
            d["cost"] = r.cost;
            d["cost_increase_pct"] = r.cost_increase_pct;
            d["avg_charge"] = r.avg_charge;
            d["avg_reported"] = r.avg_reported;
            rows.append(d);
          }
          return rows;
        },
        py::arg("agent_path"), py::arg("scenario"),
        py::arg("init_socs") = std::vector<double>{75, 80, 85, 90, 95, 100},
        py::arg("runs") = 10, py::arg("seed") = 1, py::arg("capacity_kwh") = 30.0,
        py::arg("horizon") = 24);

#ifdef MGRT_VERSION
  m.attr("__version__") = MGRT_VERSION;
#endif
}
