#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "stagelearn/config.hpp"
#include "stagelearn/dynamics.hpp"
#include "stagelearn/errors.hpp"
#include "stagelearn/experiment.hpp"
#include "stagelearn/games.hpp"
#include "stagelearn/sim.hpp"

namespace py = pybind11;
using namespace stagelearn;

namespace {

using Settings = std::map<std::string, py::object>;

std::string as_text(const py::object& value) {
  if (py::isinstance<py::bool_>(value)) return value.cast<bool>() ? "true" : "false";
  if (py::isinstance<py::list>(value) || py::isinstance<py::tuple>(value)) {
    std::string out;
    for (const auto& item : value) {
      if (!out.empty()) out += ",";
      out += py::str(item).cast<std::string>();
    }
    return out;
  }
  return py::str(value).cast<std::string>();
}

ExperimentSpec build_spec(const std::optional<std::string>& config, const Settings& settings) {
  ExperimentSpec spec = config ? load_experiment(*config) : ExperimentSpec{};
  for (const auto& [key, value] : settings) apply_setting(spec, key, as_text(value));
  return spec;
}

std::vector<double> weights(const ActionDistribution& rho) {
  return {rho.weights().begin(), rho.weights().end()};
}

py::dict summary_dict(const RunSummary& s) {
  py::dict d;
  d["n"] = s.config.n;
  d["learner"] = std::string(to_string(s.config.learner.kind));
  d["seed"] = s.config.seed;
  d["final_distance"] = s.final_distance;
  d["final_br_fraction"] = s.final_br_fraction;
  d["rounds_to_threshold"] = s.rounds_to_threshold;
  d["stage_end_rounds"] = s.stage_end_rounds;
  d["stage_distances"] = s.stage_distances;
  d["stage_br_fractions"] = s.stage_br_fractions;
  return d;
}

py::dict run_dict(const RunTrace& trace) {
  py::dict d = summary_dict(summarize(trace));
  py::dict config;
  for (const auto& [key, value] : config_entries(trace.config)) config[py::str(key)] = value;
  d["config"] = config;
  std::vector<std::vector<double>> rho;
  std::vector<std::vector<double>> bases;
  for (const auto& stage : trace.stages) {
    rho.push_back(weights(stage.rho));
    bases.push_back(weights(stage.bases));
  }
  d["stage_rho"] = rho;
  d["stage_bases"] = bases;
  std::vector<double> round_distance;
  round_distance.reserve(trace.rounds.size());
  for (const auto& r : trace.rounds) round_distance.push_back(r.distance);
  d["round_distances"] = round_distance;
  return d;
}

std::shared_ptr<const AnonymousGame> game_from(const std::string& kind, const std::string& matrix,
                                               const std::string& mode, int penalty_n) {
  GameConfig config;
  config.kind = kind;
  config.matrix = matrix;
  config.mode = parse_payoff_mode(mode);
  config.penalty_n = penalty_n;
  return make_game(config);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Stage learning in large anonymous games";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);

  m.def("contribution_cost", &contribution_cost, py::arg("x"), py::arg("penalty_n") = kDefaultPenaltyN);
  m.def("contribution_utility", &contribution_utility, py::arg("x"), py::arg("y"),
        py::arg("penalty_n") = kDefaultPenaltyN);
  m.def(
      "l1_distance",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        return l1_distance(ActionDistribution(a), ActionDistribution(b));
      },
      py::arg("a"), py::arg("b"));
  m.def("close_l1_bound", &close_l1_bound, py::arg("e"), py::arg("eps"));
  m.def("abr_containment_threshold", &abr_containment_threshold, py::arg("eta"), py::arg("lipschitz"));

  py::class_<AnonymousGame, std::shared_ptr<AnonymousGame>>(m, "Game")
      .def_static(
          "contribution",
          [](int penalty_n, const std::string& mode) {
            return std::const_pointer_cast<AnonymousGame>(game_from("contribution", "", mode, penalty_n));
          },
          py::arg("penalty_n") = kDefaultPenaltyN, py::arg("mode") = "meanfield")
      .def_static(
          "matrix",
          [](const std::string& name_or_path, const std::string& mode) {
            return std::const_pointer_cast<AnonymousGame>(game_from("matrix", name_or_path, mode, 0));
          },
          py::arg("name_or_path"), py::arg("mode") = "meanfield")
      .def_static(
          "from_rows",
          [](const std::vector<std::vector<double>>& rows, const std::string& mode) {
            return std::shared_ptr<AnonymousGame>(
                std::make_shared<MatrixGame>(PayoffMatrix(rows), parse_payoff_mode(mode)));
          },
          py::arg("rows"), py::arg("mode") = "meanfield")
      .def_property_readonly("name", &AnonymousGame::name)
      .def_property_readonly("num_actions", &AnonymousGame::num_actions)
      .def_property_readonly("lipschitz_constant", &AnonymousGame::lipschitz_constant)
      .def(
          "expected_payoff",
          [](const AnonymousGame& g, Action a, const std::vector<double>& rho) {
            return g.expected_payoff(a, ActionDistribution(rho));
          },
          py::arg("action"), py::arg("rho"))
      .def(
          "best_replies",
          [](const AnonymousGame& g, const std::vector<double>& rho, double eta) {
            return best_reply_set(ActionDistribution(rho), eta, g);
          },
          py::arg("rho"), py::arg("eta") = 0.0)
      .def(
          "is_eta_nash",
          [](const AnonymousGame& g, const std::vector<double>& rho, double eta) {
            return is_eta_nash(ActionDistribution(rho), eta, g);
          },
          py::arg("rho"), py::arg("eta") = 0.0)
      .def(
          "br_sequence",
          [](const AnonymousGame& g, const std::vector<double>& rho0, double eta, int max_steps,
             const std::string& rule) {
            const auto seq = br_sequence(ActionDistribution(rho0), eta, g, max_steps, parse_reply_rule(rule));
            py::dict d;
            std::vector<std::vector<double>> steps;
            for (const auto& s : seq.steps) steps.push_back(weights(s));
            d["steps"] = steps;
            d["converged"] = seq.converged;
            d["fixed_point_index"] = seq.fixed_point_index;
            return d;
          },
          py::arg("rho0"), py::arg("eta") = 0.0, py::arg("max_steps") = 50, py::arg("rule") = "pointmass");

  m.def(
      "config_entries",
      [](const std::optional<std::string>& config, const Settings& settings) {
        const auto spec = build_spec(config, settings);
        py::dict d;
        for (const auto& [key, value] : config_entries(resolve(spec.base))) d[py::str(key)] = value;
        return d;
      },
      py::arg("config") = py::none(), py::arg("settings") = Settings{},
      "Resolved key/value settings of a config file plus overrides.");

  m.def(
      "run",
      [](const std::optional<std::string>& config, const Settings& settings) {
        const auto spec = build_spec(config, settings);
        RunTrace trace;
        {
          py::gil_scoped_release release;
          trace = run(resolve(spec.base));
        }
        return run_dict(trace);
      },
      py::arg("config") = py::none(), py::arg("settings") = Settings{},
      "One run of the base config (sweep axes are ignored).");

  m.def(
      "sweep",
      [](const std::optional<std::string>& config, const Settings& settings, int threads) {
        const auto spec = build_spec(config, settings);
        SweepOutcome outcome;
        {
          py::gil_scoped_release release;
          outcome = run_sweep(spec, threads);
        }
        py::list runs;
        for (const auto& r : outcome.runs) runs.append(summary_dict(r));
        py::list table;
        for (const auto& row : outcome.table) {
          py::dict d;
          d["n"] = row.n;
          d["learner"] = std::string(to_string(row.learner));
          d["stage"] = row.stage;
          d["end_round"] = row.end_round;
          d["mean_distance"] = row.mean_distance;
          d["mean_br_fraction"] = row.mean_br_fraction;
          d["runs"] = row.runs;
          table.append(d);
        }
        py::dict d;
        d["runs"] = runs;
        d["table"] = table;
        return d;
      },
      py::arg("config") = py::none(), py::arg("settings") = Settings{}, py::arg("threads") = 1,
      "Every (n, learner, seed) point of a config; per-run summaries and the per-stage table.");
}
