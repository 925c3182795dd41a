#pragma once

// Experiment configuration files.
//
// A config is a flat key/value text file. Keys are grouped by prefix
// (game.*, learner.*, sim.*, sweep.*); an INI-style `[section]` line prefixes
// the keys that follow it. `#` starts a comment. Unknown and repeated keys
// are errors. Every key has a default, see config_entries.

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <utility>
#include <vector>

#include "stagelearn/sim.hpp"

namespace stagelearn {

/// A base RunConfig plus the axes a sweep varies. Empty axes fall back to
/// the base config's value.
struct ExperimentSpec {
  RunConfig base;
  std::vector<int> populations;
  std::vector<std::uint64_t> seeds;
  std::vector<LearnerKind> learners;

  bool has_sweep() const { return !populations.empty() || !seeds.empty() || !learners.empty(); }
  std::vector<int> population_axis() const;
  std::vector<std::uint64_t> seed_axis() const;
  std::vector<LearnerKind> learner_axis() const;

  /// One config per (n, learner, seed), in that nesting order.
  std::vector<RunConfig> expand() const;
};

ExperimentSpec parse_experiment(std::istream& in);
ExperimentSpec load_experiment(const std::filesystem::path& path);

/// Applies one `key = value` setting. Throws ConfigError naming the key.
void apply_setting(ExperimentSpec& spec, const std::string& key, const std::string& value);

/// Every key that affects a run's outcome, with its current value, in a
/// stable order. sim.threads is omitted: results do not depend on it.
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& config);
std::vector<std::pair<std::string, std::string>> sweep_entries(const ExperimentSpec& spec);

// Value lists used by the sweep axes and the CLI.
std::vector<int> parse_int_list(const std::string& key, const std::string& text);
/// Comma-separated values and inclusive ranges such as "1-10".
std::vector<std::uint64_t> parse_seed_list(const std::string& key, const std::string& text);
std::vector<LearnerKind> parse_learner_list(const std::string& key, const std::string& text);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

}  // namespace stagelearn
