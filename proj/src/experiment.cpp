#include "stagelearn/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

namespace stagelearn {

RunSummary summarize(const RunTrace& trace) {
  RunSummary s;
  s.config = trace.config;
  s.final_distance = trace.final_distance();
  s.final_br_fraction = trace.stages.back().br_fraction;
  s.rounds_to_threshold = trace.rounds_to_threshold(trace.config.threshold);
  for (const auto& stage : trace.stages) {
    s.stage_end_rounds.push_back(stage.end_round);
    s.stage_distances.push_back(stage.distance);
    s.stage_br_fractions.push_back(stage.br_fraction);
  }
  return s;
}

std::vector<AggregateRow> aggregate(std::span<const RunSummary> runs) {
  struct Series {
    int n;
    LearnerKind learner;
    std::vector<const RunSummary*> members;
  };
  std::vector<Series> series;
  for (const auto& run : runs) {
    auto it = std::find_if(series.begin(), series.end(), [&](const Series& s) {
      return s.n == run.config.n && s.learner == run.config.learner.kind;
    });
    if (it == series.end()) {
      series.push_back({run.config.n, run.config.learner.kind, {}});
      it = std::prev(series.end());
    }
    it->members.push_back(&run);
  }

  std::vector<AggregateRow> rows;
  for (const auto& s : series) {
    std::size_t stages = s.members.front()->stage_distances.size();
    for (const auto* m : s.members) stages = std::min(stages, m->stage_distances.size());
    for (std::size_t i = 0; i < stages; ++i) {
      AggregateRow row;
      row.n = s.n;
      row.learner = s.learner;
      row.stage = static_cast<std::int64_t>(i);
      row.end_round = s.members.front()->stage_end_rounds[i];
      for (const auto* m : s.members) {
        row.mean_distance += m->stage_distances[i];
        row.mean_br_fraction += m->stage_br_fractions[i];
      }
      row.runs = s.members.size();
      row.mean_distance /= static_cast<double>(row.runs);
      row.mean_br_fraction /= static_cast<double>(row.runs);
      rows.push_back(row);
    }
  }
  return rows;
}

SweepOutcome run_sweep(const ExperimentSpec& spec, int threads,
                       const std::function<void(const RunTrace&)>& on_trace) {
  std::vector<RunConfig> points = spec.expand();
  // Resolve up front so a bad point fails before any simulation starts.
  for (auto& p : points) {
    p.threads = 1;
    p = resolve(p);
  }
  std::vector<std::optional<RunSummary>> slots(points.size());
  auto body = [&](std::size_t i) {
    const RunTrace trace = run(points[i]);
    if (on_trace) on_trace(trace);
    slots[i] = summarize(trace);
  };
  if (threads <= 1) {
    for (std::size_t i = 0; i < points.size(); ++i) body(i);
  } else {
    tbb::task_arena arena(threads);
    arena.execute([&] {
      tbb::parallel_for(std::size_t{0}, points.size(), [&](std::size_t i) { body(i); });
    });
  }
  SweepOutcome out;
  for (auto& s : slots) out.runs.push_back(std::move(*s));
  out.table = aggregate(out.runs);
  return out;
}

namespace {

void write_echo(std::ostream& out, const RunConfig& config) {
  for (const auto& [key, value] : config_entries(config)) out << "# " << key << " = " << value << '\n';
}

void write_sweep_echo(std::ostream& out, const ExperimentSpec& spec) {
  const RunConfig resolved = resolve(spec.expand().front());
  for (const auto& [key, value] : config_entries(resolved)) {
    // The swept keys are listed separately below.
    if (key == "sim.n" || key == "sim.seed" || key == "learner.kind") continue;
    if (key == "game.penalty_n" && spec.base.game.penalty_n == kPenaltyFromPopulation) {
      out << "# " << key << " = agents\n";
      continue;
    }
    out << "# " << key << " = " << value << '\n';
  }
  for (const auto& [key, value] : sweep_entries(spec)) out << "# " << key << " = " << value << '\n';
}

void write_distribution(std::ostream& out, const ActionDistribution& rho) {
  for (double w : rho.weights()) out << ',' << format_double(w);
}

void write_columns(std::ostream& out, const char* prefix, int k) {
  for (int a = 0; a < k; ++a) out << ',' << prefix << a;
}

}  // namespace

void write_trace_csv(std::ostream& out, const RunTrace& trace) {
  write_echo(out, trace.config);
  out << "round,stage,distance,br_fraction";
  write_columns(out, "rho_", trace.num_actions);
  out << '\n';
  for (const auto& r : trace.rounds) {
    out << r.round << ',' << r.stage << ',' << format_double(r.distance) << ','
        << format_double(r.br_fraction);
    write_distribution(out, r.realized);
    out << '\n';
  }
}

void write_stages_csv(std::ostream& out, const RunTrace& trace) {
  write_echo(out, trace.config);
  out << "stage,end_round,distance,base_distance,br_fraction,churned";
  write_columns(out, "rho_", trace.num_actions);
  write_columns(out, "base_", trace.num_actions);
  out << '\n';
  for (const auto& s : trace.stages) {
    out << s.stage << ',' << s.end_round << ',' << format_double(s.distance) << ','
        << format_double(s.base_distance) << ',' << format_double(s.br_fraction) << ','
        << s.churned;
    write_distribution(out, s.rho);
    write_distribution(out, s.bases);
    out << '\n';
  }
}

void write_summary(std::ostream& out, const RunTrace& trace) {
  for (const auto& [key, value] : config_entries(trace.config)) out << key << " = " << value << '\n';
  const auto reached = trace.rounds_to_threshold(trace.config.threshold);
  out << "result.final_distance = " << format_double(trace.final_distance()) << '\n';
  out << "result.final_base_distance = " << format_double(trace.stages.back().base_distance) << '\n';
  out << "result.final_br_fraction = " << format_double(trace.stages.back().br_fraction) << '\n';
  out << "result.rounds_to_threshold = " << (reached ? std::to_string(*reached) : "none") << '\n';
  out << "result.stages = " << trace.stages.size() << '\n';
  out << "result.rounds = " << trace.rounds.size() << '\n';
}

void write_aggregate_csv(std::ostream& out, const ExperimentSpec& spec,
                         std::span<const AggregateRow> rows) {
  write_sweep_echo(out, spec);
  out << "n,learner,stage,end_round,mean_distance,mean_br_fraction,runs\n";
  for (const auto& r : rows) {
    out << r.n << ',' << to_string(r.learner) << ',' << r.stage << ',' << r.end_round << ','
        << format_double(r.mean_distance) << ',' << format_double(r.mean_br_fraction) << ','
        << r.runs << '\n';
  }
}

void write_runs_csv(std::ostream& out, const ExperimentSpec& spec, std::span<const RunSummary> runs) {
  write_sweep_echo(out, spec);
  out << "n,learner,seed,final_distance,final_br_fraction,rounds_to_threshold\n";
  for (const auto& r : runs) {
    out << r.config.n << ',' << to_string(r.config.learner.kind) << ',' << r.config.seed << ','
        << format_double(r.final_distance) << ',' << format_double(r.final_br_fraction) << ','
        << (r.rounds_to_threshold ? std::to_string(*r.rounds_to_threshold) : "") << '\n';
  }
}

void write_sequence_csv(std::ostream& out, const BestReplySequence& sequence) {
  out << "# converged = " << (sequence.converged ? "true" : "false") << '\n';
  if (sequence.fixed_point_index) out << "# fixed_point_index = " << *sequence.fixed_point_index << '\n';
  out << "step";
  write_columns(out, "rho_", sequence.steps.front().size());
  out << '\n';
  for (std::size_t i = 0; i < sequence.steps.size(); ++i) {
    out << i;
    write_distribution(out, sequence.steps[i]);
    out << '\n';
  }
}

void write_gnuplot_table(std::ostream& out, std::span<const AggregateRow> rows) {
  std::vector<std::pair<int, LearnerKind>> series;
  std::map<std::int64_t, std::map<std::size_t, double>> by_round;
  for (const auto& r : rows) {
    const auto key = std::make_pair(r.n, r.learner);
    auto it = std::find(series.begin(), series.end(), key);
    if (it == series.end()) {
      series.push_back(key);
      it = std::prev(series.end());
    }
    by_round[r.end_round][static_cast<std::size_t>(it - series.begin())] = r.mean_distance;
  }
  out << "# end_round";
  for (const auto& [n, learner] : series) out << ' ' << to_string(learner) << "_n" << n;
  out << '\n';
  for (const auto& [round, values] : by_round) {
    out << round;
    for (std::size_t i = 0; i < series.size(); ++i) {
      const auto v = values.find(i);
      out << ' ' << (v == values.end() ? std::string("NaN") : format_double(v->second));
    }
    out << '\n';
  }
}

std::vector<AggregateRow> read_aggregate_csv(std::istream& in) {
  std::vector<AggregateRow> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::stringstream fields(line);
    std::string f[7];
    for (auto& x : f) std::getline(fields, x, ',');
    AggregateRow r;
    r.n = std::stoi(f[0]);
    r.learner = parse_learner_kind(f[1]);
    r.stage = std::stoll(f[2]);
    r.end_round = std::stoll(f[3]);
    r.mean_distance = std::stod(f[4]);
    r.mean_br_fraction = std::stod(f[5]);
    r.runs = std::stoul(f[6]);
    rows.push_back(r);
  }
  return rows;
}

std::string run_stem(const RunConfig& config) {
  return "n" + std::to_string(config.n) + "_" + std::string(to_string(config.learner.kind)) +
         "_seed" + std::to_string(config.seed);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    out.flush();
    if (!out) {
      std::error_code ignored;
      fs::remove(tmp, ignored);
      throw IoError("failed writing " + path.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
  }
}

}  // namespace stagelearn
