#pragma once

// Seed and population sweeps plus the text formats they emit.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "stagelearn/config.hpp"
#include "stagelearn/dynamics.hpp"
#include "stagelearn/sim.hpp"

namespace stagelearn {

struct RunSummary {
  RunConfig config;  // resolved
  double final_distance = 0.0;
  double final_br_fraction = 0.0;
  std::optional<std::int64_t> rounds_to_threshold;
  std::vector<std::int64_t> stage_end_rounds;
  std::vector<double> stage_distances;
  std::vector<double> stage_br_fractions;
};

RunSummary summarize(const RunTrace& trace);

/// Mean over seeds of one stage, for one (n, learner) point.
struct AggregateRow {
  int n = 0;
  LearnerKind learner = LearnerKind::stage;
  std::int64_t stage = 0;
  std::int64_t end_round = 0;
  double mean_distance = 0.0;
  double mean_br_fraction = 0.0;
  std::size_t runs = 0;
};

/// Groups by (n, learner) in first-seen order and averages each stage over
/// the runs in input order.
std::vector<AggregateRow> aggregate(std::span<const RunSummary> runs);

struct SweepOutcome {
  std::vector<RunSummary> runs;  // in ExperimentSpec::expand order
  std::vector<AggregateRow> table;
};

/// Runs every point of the spec, up to `threads` at once. Each run is
/// single-threaded. `on_trace` may be called concurrently from several
/// threads, once per run.
SweepOutcome run_sweep(const ExperimentSpec& spec, int threads,
                       const std::function<void(const RunTrace&)>& on_trace = {});

// Text formats. CSV files open with `# key = value` lines echoing the
// resolved config, followed by a header row.

/// round,stage,distance,br_fraction,rho_0..rho_{k-1} (realized actions).
void write_trace_csv(std::ostream& out, const RunTrace& trace);
/// stage,end_round,distance,base_distance,br_fraction,churned,rho_*,base_*.
void write_stages_csv(std::ostream& out, const RunTrace& trace);
/// key = value record: config echo plus final_distance, rounds_to_threshold, ...
void write_summary(std::ostream& out, const RunTrace& trace);
/// n,learner,stage,end_round,mean_distance,mean_br_fraction,runs.
void write_aggregate_csv(std::ostream& out, const ExperimentSpec& spec,
                         std::span<const AggregateRow> rows);
/// n,learner,seed,final_distance,final_br_fraction,rounds_to_threshold.
void write_runs_csv(std::ostream& out, const ExperimentSpec& spec, std::span<const RunSummary> runs);
/// step,rho_0..rho_{k-1}.
void write_sequence_csv(std::ostream& out, const BestReplySequence& sequence);
/// Whitespace columns for gnuplot: end_round, then one mean-distance column
/// per (n, learner) series; blocks missing a stage hold NaN.
void write_gnuplot_table(std::ostream& out, std::span<const AggregateRow> rows);

/// Parses an aggregate CSV written by write_aggregate_csv.
std::vector<AggregateRow> read_aggregate_csv(std::istream& in);

/// `n100_stage_seed7`.
std::string run_stem(const RunConfig& config);

/// Writes to a sibling temporary file and renames it into place, so readers
/// never see a partial file. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace stagelearn
