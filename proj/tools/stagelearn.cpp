// Command line runner: single runs, sweeps, analysis of games.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <optional>
#include <string>
#include <vector>

#include "stagelearn/config.hpp"
#include "stagelearn/dynamics.hpp"
#include "stagelearn/errors.hpp"
#include "stagelearn/experiment.hpp"
#include "stagelearn/games.hpp"
#include "stagelearn/sim.hpp"

namespace fs = std::filesystem;
using namespace stagelearn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

struct ExperimentArgs {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::optional<int> threads;
  std::vector<std::string> settings;
  std::string populations;
  std::string seeds;
  std::string learners;
  bool traces = true;
};

struct AnalyzeArgs {
  std::string game = "contribution";
  std::string mode = "brs";
  std::string payoff = "meanfield";
  std::string rho;
  int action = -1;
  double eta = 0.0;
  std::string rule = "pointmass";
  int max_steps = 50;
  int penalty_n = kDefaultPenaltyN;
  int samples = 200;
  std::uint64_t seed = 1;
  std::string out;
};

struct PlotArgs {
  std::string in;
  std::string out;
};

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir.string() +
                  (ec ? ": " + ec.message() : ""));
  }
}

template <class Fn>
std::string render(Fn&& fn) {
  std::ostringstream out;
  fn(out);
  return out.str();
}

ExperimentSpec build_spec(const ExperimentArgs& args) {
  ExperimentSpec spec = load_experiment(args.config);
  for (const auto& setting : args.settings) {
    const auto eq = setting.find('=');
    if (eq == std::string::npos) throw ConfigError(setting, "expected KEY=VALUE");
    apply_setting(spec, setting.substr(0, eq), setting.substr(eq + 1));
  }
  if (!args.populations.empty()) spec.populations = parse_int_list("sweep.n", args.populations);
  if (!args.learners.empty()) spec.learners = parse_learner_list("sweep.learners", args.learners);
  if (!args.seeds.empty()) spec.seeds = parse_seed_list("sweep.seeds", args.seeds);
  if (args.seed_given) {
    spec.base.seed = args.seed;
    spec.seeds.clear();
  }
  if (args.threads) spec.base.threads = *args.threads;
  if (spec.base.threads < 1) throw ConfigError("threads", "must be at least 1");
  return spec;
}

int run_experiment(const ExperimentArgs& args) {
  const ExperimentSpec spec = build_spec(args);
  const int threads = spec.base.threads;
  const fs::path out_dir = args.out;
  ensure_directory(out_dir);

  const auto points = spec.expand();
  // Resolve every point before touching the output directory.
  for (const auto& p : points) resolve(p);

  auto write_run = [&](const RunTrace& trace) {
    const std::string stem = run_stem(trace.config);
    if (args.traces) {
      write_file_atomic(out_dir / (stem + ".trace.csv"),
                        render([&](std::ostream& o) { write_trace_csv(o, trace); }));
    }
    write_file_atomic(out_dir / (stem + ".stages.csv"),
                      render([&](std::ostream& o) { write_stages_csv(o, trace); }));
    write_file_atomic(out_dir / (stem + ".summary.txt"),
                      render([&](std::ostream& o) { write_summary(o, trace); }));
  };

  SweepOutcome outcome;
  if (points.size() == 1) {
    RunConfig single = points.front();
    single.threads = threads;
    const RunTrace trace = run(single);
    write_run(trace);
    outcome.runs.push_back(summarize(trace));
    outcome.table = aggregate(outcome.runs);
  } else {
    outcome = run_sweep(spec, threads, write_run);
  }

  write_file_atomic(out_dir / "runs.csv",
                    render([&](std::ostream& o) { write_runs_csv(o, spec, outcome.runs); }));
  write_file_atomic(out_dir / "aggregate.csv",
                    render([&](std::ostream& o) { write_aggregate_csv(o, spec, outcome.table); }));

  std::cout << "n,learner,seeds,mean_final_distance\n";
  for (const int n : spec.population_axis()) {
    for (const LearnerKind kind : spec.learner_axis()) {
      double sum = 0.0;
      std::size_t count = 0;
      for (const auto& r : outcome.runs) {
        if (r.config.n == n && r.config.learner.kind == kind) {
          sum += r.final_distance;
          ++count;
        }
      }
      std::cout << n << ',' << to_string(kind) << ',' << count << ','
                << format_double(sum / static_cast<double>(count)) << '\n';
    }
  }
  std::cout << "wrote " << outcome.runs.size() << " run(s) to " << out_dir.string() << '\n';
  return kExitOk;
}

std::unique_ptr<AnonymousGame> analysis_game(const AnalyzeArgs& args) {
  const PayoffMode mode = [&] {
    try {
      return parse_payoff_mode(args.payoff);
    } catch (const ContractViolation& err) {
      throw ConfigError("payoff", err.what());
    }
  }();
  if (args.game == "contribution") return std::make_unique<ContributionGame>(args.penalty_n, mode);
  if (auto m = matrices::bundled(args.game)) {
    return std::make_unique<MatrixGame>(*m, mode, args.game, matrices::bundled_labels(args.game));
  }
  if (!fs::exists(args.game)) {
    throw ConfigError("game", "'" + args.game + "' is neither a bundled game nor an existing file");
  }
  try {
    return std::make_unique<MatrixGame>(PayoffMatrix::load(args.game), mode,
                                        fs::path(args.game).stem().string());
  } catch (const ContractViolation& err) {
    throw ConfigError("game", err.what());
  }
}

ActionDistribution analysis_rho(const AnalyzeArgs& args, int k) {
  if (args.action >= 0 && !args.rho.empty()) throw ConfigError("rho", "give either --rho or --action");
  if (args.action >= 0) {
    if (args.action >= k) throw ConfigError("action", "must be below " + std::to_string(k));
    return ActionDistribution::degenerate(k, args.action);
  }
  if (args.rho.empty()) return ActionDistribution::uniform(k);
  std::vector<double> weights;
  std::stringstream in(args.rho);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      weights.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("rho", "bad weight '" + item + "'");
    }
  }
  if (static_cast<int>(weights.size()) != k) {
    throw ConfigError("rho", "expected " + std::to_string(k) + " weights");
  }
  try {
    return ActionDistribution(weights);
  } catch (const ContractViolation& err) {
    throw ConfigError("rho", err.what());
  }
}

std::string describe(const ActionDistribution& rho) {
  const auto support = rho.support();
  if (support.size() == 1) return "degenerate at " + std::to_string(support.front());
  std::string out;
  for (Action a : support) out += (out.empty() ? "" : " ") + std::to_string(a) + ":" + format_double(rho[a]);
  return "{" + out + "}";
}

int run_analyze(const AnalyzeArgs& args) {
  const auto game = analysis_game(args);
  const int k = game->num_actions();
  if (args.eta < 0.0) throw ConfigError("eta", "must be nonnegative");

  if (args.mode == "brs") {
    if (args.max_steps < 1) throw ConfigError("max-steps", "must be at least 1");
    const ReplyRule rule = [&] {
      try {
        return parse_reply_rule(args.rule);
      } catch (const ContractViolation& err) {
        throw ConfigError("rule", err.what());
      }
    }();
    const auto seq = br_sequence(analysis_rho(args, k), args.eta, *game, args.max_steps, rule);
    const std::string csv = render([&](std::ostream& o) { write_sequence_csv(o, seq); });
    if (!args.out.empty()) {
      write_file_atomic(args.out, csv);
    } else {
      std::cout << csv;
    }
    for (std::size_t i = 0; i < seq.steps.size(); ++i) {
      std::cout << "step " << i << ": " << describe(seq.steps[i]) << '\n';
    }
    if (seq.converged) {
      std::cout << "converged: fixed point at step " << *seq.fixed_point_index << ", "
                << describe(seq.steps[*seq.fixed_point_index]) << '\n';
    } else {
      std::cout << "converged: false after " << seq.steps.size() - 1 << " steps\n";
    }
    return kExitOk;
  }
  if (args.mode == "nash") {
    const auto rho = analysis_rho(args, k);
    const auto replies = best_reply_set(rho, args.eta, *game);
    std::cout << "rho: " << describe(rho) << '\n';
    std::cout << "best replies:";
    for (Action a : replies) std::cout << ' ' << game->actions().label(a);
    std::cout << '\n';
    std::cout << "eta_nash(" << format_double(args.eta) << "): "
              << (is_eta_nash(rho, args.eta, *game) ? "true" : "false") << '\n';
    return kExitOk;
  }
  if (args.mode == "lipschitz") {
    if (args.samples < 2) throw ConfigError("samples", "must be at least 2");
    const double estimate = estimate_lipschitz(*game, args.samples, args.seed);
    std::cout << "estimate: " << format_double(estimate) << '\n';
    if (const auto bound = game->lipschitz_constant()) {
      std::cout << "bound: " << format_double(*bound) << '\n';
    } else {
      std::cout << "bound: unknown\n";
    }
    return kExitOk;
  }
  throw ConfigError("mode", "expected brs, nash or lipschitz, got '" + args.mode + "'");
}

int run_plotdata(const PlotArgs& args) {
  std::ifstream in(args.in);
  if (!in) throw IoError("cannot open " + args.in);
  std::vector<AggregateRow> rows;
  try {
    rows = read_aggregate_csv(in);
  } catch (const std::exception& err) {
    throw ConfigError("in", std::string("malformed aggregate table: ") + err.what());
  }
  const std::string table = render([&](std::ostream& o) { write_gnuplot_table(o, rows); });
  if (args.out.empty()) {
    std::cout << table;
  } else {
    write_file_atomic(args.out, table);
  }
  return kExitOk;
}

void add_experiment_options(CLI::App& cmd, ExperimentArgs& args) {
  cmd.add_option("--config", args.config, "Experiment config file")->required();
  cmd.add_option("--out", args.out, "Output directory")->required();
  cmd.add_option_function<std::uint64_t>(
      "--seed",
      [&args](const std::uint64_t& s) {
        args.seed = s;
        args.seed_given = true;
      },
      "Master seed; replaces any seed sweep");
  cmd.add_option("--threads", args.threads, "Worker threads (default: sim.threads)");
  cmd.add_option("--set", args.settings, "Override a config key, KEY=VALUE");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stage learning in large anonymous games"};
  app.require_subcommand(1);

  ExperimentArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Run every point of a config, writing per-run CSVs");
  add_experiment_options(*run_cmd, run_args);

  ExperimentArgs sweep_args;
  sweep_args.traces = false;
  auto* sweep_cmd = app.add_subcommand("sweep", "Population/seed/learner sweep; per-stage output only");
  add_experiment_options(*sweep_cmd, sweep_args);
  sweep_cmd->add_option("--n", sweep_args.populations, "Population sizes, e.g. 2,10,100");
  sweep_cmd->add_option("--seeds", sweep_args.seeds, "Seeds, e.g. 1-10");
  sweep_cmd->add_option("--learners", sweep_args.learners, "Learner kinds, e.g. stage,regret");
  sweep_cmd->add_flag("--traces", sweep_args.traces, "Also write per-round traces");

  AnalyzeArgs analyze_args;
  auto* analyze_cmd = app.add_subcommand("analyze", "Best-reply sequences, eta-Nash checks, Lipschitz estimates");
  analyze_cmd->add_option("--game", analyze_args.game,
                          "contribution, pd, climbing, cycle or a matrix file");
  analyze_cmd->add_option("--mode", analyze_args.mode, "brs, nash or lipschitz");
  analyze_cmd->add_option("--payoff", analyze_args.payoff, "meanfield or matching");
  analyze_cmd->add_option("--rho", analyze_args.rho, "Comma-separated action weights");
  analyze_cmd->add_option("--action", analyze_args.action, "Degenerate distribution at this action");
  analyze_cmd->add_option("--eta", analyze_args.eta, "Best-reply slack");
  analyze_cmd->add_option("--rule", analyze_args.rule, "uniform or pointmass");
  analyze_cmd->add_option("--max-steps", analyze_args.max_steps, "Best-reply steps");
  analyze_cmd->add_option("--penalty-n", analyze_args.penalty_n, "Contribution cost penalty");
  analyze_cmd->add_option("--samples", analyze_args.samples, "Distributions sampled for Lipschitz");
  analyze_cmd->add_option("--seed", analyze_args.seed, "Sampling seed");
  analyze_cmd->add_option("--out", analyze_args.out, "Write the sequence CSV here");

  PlotArgs plot_args;
  auto* plot_cmd = app.add_subcommand("plotdata", "Aggregate CSV to gnuplot columns");
  plot_cmd->add_option("--in", plot_args.in, "aggregate.csv")->required();
  plot_cmd->add_option("--out", plot_args.out, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run_cmd) return run_experiment(run_args);
    if (*sweep_cmd) return run_experiment(sweep_args);
    if (*analyze_cmd) return run_analyze(analyze_args);
    if (*plot_cmd) return run_plotdata(plot_args);
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what() << '\n';
    return kExitConfig;
  } catch (const IoError& err) {
    std::cerr << "io error: " << err.what() << '\n';
    return kExitIo;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}
