#pragma once

// Round loop over a finite population of learners.
//
// Each round every agent acts, payoffs are realized (mean-field or random
// matching) and every agent observes its own payoff. Stages are globally
// synchronized: after every tau-th round stage learners switch bases, the
// stage metrics are snapshotted and churn is applied. A run is a pure
// function of its RunConfig, independent of the thread count.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stagelearn/games.hpp"
#include "stagelearn/learners.hpp"

namespace stagelearn {

enum class LearnerKind { stage, regret };

LearnerKind parse_learner_kind(std::string_view text);
std::string_view to_string(LearnerKind kind);

/// penalty_n value that resolves to the population size.
inline constexpr int kPenaltyFromPopulation = -1;

struct GameConfig {
  std::string kind = "contribution";  // contribution | matrix
  int penalty_n = kDefaultPenaltyN;   // or kPenaltyFromPopulation
  std::string matrix = "pd";          // bundled name (pd, climbing, cycle) or file path
  PayoffMode mode = PayoffMode::mean_field;
};

struct LearnerConfig {
  LearnerKind kind = LearnerKind::stage;
  double epsilon = 0.05;
  int tau = 0;             // 0 selects ceil(1 / epsilon^2)
  double inertia = 0.0;    // regret matcher mu; 0 selects 2 * payoff range * (k - 1)
  double exploration = 0.05;  // regret matcher delta
};

struct RunConfig {
  GameConfig game;
  LearnerConfig learner;
  int n = 100;
  std::int64_t rounds = 3000;
  double churn_rate = 0.0;
  double fixed_fraction = 0.0;
  Action fixed_action = 0;
  double fixed_explore = 0.0;
  std::uint64_t seed = 1;
  Action target = -1;      // -1 selects the fixed point of pure best-reply dynamics
  double eta = 1.0;        // slack for best-reply fractions
  double threshold = 0.5;  // distance that counts as converged
  int threads = 1;

  int stage_length() const;
};

std::unique_ptr<AnonymousGame> make_game(const GameConfig& config);

/// Fills in every derived default (tau, inertia, target) and validates all
/// fields; throws ConfigError naming the first offending key.
RunConfig resolve(const RunConfig& config);

/// A finite population plus each agent's private random stream.
class Population {
 public:
  /// Builds n agents for a resolved config: learners first, then
  /// round(fixed_fraction * n) fixed agents at the end.
  Population(const RunConfig& config, const AnonymousGame& game);

  std::size_t size() const noexcept { return agents_.size(); }
  std::span<Agent> agents() noexcept { return agents_; }
  std::span<const Agent> agents() const noexcept { return agents_; }
  Rng& rng(std::size_t i) { return rngs_[i]; }
  bool is_fixed(std::size_t i) const { return std::holds_alternative<FixedAgent>(agents_[i]); }
  std::uint64_t incarnation(std::size_t i) const { return incarnations_[i]; }

  /// Replaces agent i with a fresh learner of the configured kind holding
  /// `base`, and gives it a new private stream.
  void replace(std::size_t i, Action base);

 private:
  Agent make_learner(std::size_t i, Action base) const;

  RunConfig config_;
  int k_;
  double inertia_;
  std::vector<Agent> agents_;
  std::vector<Rng> rngs_;
  std::vector<std::uint64_t> incarnations_;
};

/// Payoff of each agent: the exact expected payoff against the empirical
/// distribution of the other n - 1 agents' actions.
std::vector<double> realize_meanfield(std::span<const Action> actions, const AnonymousGame& game);

/// Payoffs from a uniform random perfect matching; n must be even.
std::vector<double> realize_matching(std::span<const Action> actions, const PayoffMatrix& matrix,
                                     Rng& rng);

/// Each learner is replaced independently with probability `rate` by a
/// fresh learner with a uniformly random base. Fixed agents stay. Returns
/// the number replaced.
std::size_t apply_churn(Population& population, double rate, Rng& rng);

/// sum_a rho(a) |a - target|.
double distance_from_equilibrium(const ActionDistribution& rho, Action target);

/// Action counts over a window of rounds.
class StageWindow {
 public:
  explicit StageWindow(int k);
  void add(std::span<const Action> actions);
  void reset();
  std::uint64_t samples() const noexcept { return samples_; }
  ActionDistribution rho() const;

 private:
  std::vector<std::uint64_t> counts_;
  std::uint64_t samples_ = 0;
};

/// Empirical frequency of the actions realized over a window of rounds.
ActionDistribution measure_stage_rho(std::span<const std::vector<Action>> window, int k);

/// Fraction of agents whose nominal action lies in ABR_eta(rho).
double best_reply_fraction(std::span<const Agent> agents, const ActionDistribution& rho,
                           double eta, const AnonymousGame& game);

struct RoundRecord {
  std::int64_t round = 0;      // 0-based
  std::int64_t stage = 0;
  double distance = 0.0;       // of this round's realized distribution
  double br_fraction = 0.0;    // nominal actions in ABR_eta of this round's distribution
  ActionDistribution realized;
  ActionDistribution bases;    // nominal actions while playing this round
};

struct StageRecord {
  std::int64_t stage = 0;
  std::int64_t end_round = 0;  // rounds completed when the stage closed
  double distance = 0.0;       // of the realized distribution over the stage
  double base_distance = 0.0;  // of the post-update nominal actions
  double br_fraction = 0.0;    // post-update nominal actions in ABR_eta(stage rho)
  std::size_t churned = 0;
  ActionDistribution rho;
  ActionDistribution bases;
};

struct RunTrace {
  RunConfig config;  // resolved
  int num_actions = 0;
  std::vector<RoundRecord> rounds;
  std::vector<StageRecord> stages;

  /// Distance of the last completed stage.
  double final_distance() const;
  /// end_round of the first stage whose distance is below `threshold`.
  std::optional<std::int64_t> rounds_to_threshold(double threshold) const;
};

RunTrace run(const RunConfig& config);

}  // namespace stagelearn
