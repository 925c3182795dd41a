#pragma once

// Per-agent learning state machines. Each sees only its own actions and
// payoffs; none holds shared mutable state, so distinct agents can be
// advanced on different threads.

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "stagelearn/game_core.hpp"
#include "stagelearn/rng.hpp"

namespace stagelearn {

/// Per-action play counts and payoff sums over one stage.
class StageTally {
 public:
  explicit StageTally(int k);

  void record(Action a, double payoff);
  void reset();

  std::uint64_t count(Action a) const { return counts_.at(static_cast<std::size_t>(a)); }
  /// Average observed payoff of `a`; 0 when `a` was not played.
  double value(Action a) const;
  /// argmax_a value(a). Keeps `incumbent` when it ties for the maximum,
  /// otherwise the lowest index wins.
  Action best(Action incumbent) const;

  int size() const noexcept { return static_cast<int>(counts_.size()); }

 private:
  std::vector<std::uint64_t> counts_;
  std::vector<double> sums_;
};

/// eps-stage learner: plays base_eps for a stage of tau rounds, then moves
/// its base to the action with the best average payoff in that stage.
class StageLearner {
 public:
  StageLearner(int k, Action base, double explore, int stage_length);

  /// ceil(1 / eps^2).
  static int default_stage_length(double explore);

  /// Samples this round's action (one engine draw). Counters advance in observe.
  Action act(Rng& rng);
  /// Records the payoff for the action returned by the preceding act; ends
  /// the stage automatically after the tau-th observation.
  void observe(Action played, double payoff);
  /// Moves the base to the stage's best action and clears the tallies.
  /// Only valid once round_in_stage() == stage_length().
  void end_stage();

  Action base() const noexcept { return base_; }
  double explore() const noexcept { return explore_; }
  int stage_length() const noexcept { return stage_length_; }
  int round_in_stage() const noexcept { return round_in_stage_; }
  int num_actions() const noexcept { return tally_.size(); }
  std::uint64_t stages_completed() const noexcept { return stages_completed_; }
  const StageTally& tally() const noexcept { return tally_; }
  MixedAction strategy() const { return MixedAction(base_, explore_); }

 private:
  Action base_;
  double explore_;
  int stage_length_;
  int round_in_stage_ = 0;
  std::uint64_t stages_completed_ = 0;
  std::optional<Action> pending_;
  StageTally tally_;
};

/// Hart and Mas-Colell's payoff-only regret-based procedure. With previous
/// action j, switch to k != j with probability
///   (1 - delta) * min(C(j,k)^+ / mu, 1/(m-1)) + delta / m,
/// where C(j,k) is the importance-weighted estimate of the gain from having
/// played k whenever j was played; stay on j with the remaining mass.
class RegretMatcher {
 public:
  RegretMatcher(int k, double inertia, double exploration);

  /// 2 * payoff_range * (k - 1).
  static double default_inertia(double payoff_range, int k);

  /// Distribution the next act will sample from.
  std::vector<double> play_probabilities() const;
  Action act(Rng& rng);
  void observe(Action played, double payoff);

  /// Current estimate C(from, to); zero before any observation.
  double regret(Action from, Action to) const;

  std::optional<Action> last_action() const noexcept { return last_; }
  std::uint64_t rounds() const noexcept { return rounds_; }
  int num_actions() const noexcept { return k_; }
  double inertia() const noexcept { return inertia_; }
  double exploration() const noexcept { return exploration_; }

 private:
  int k_;
  double inertia_;
  double exploration_;
  std::uint64_t rounds_ = 0;
  std::optional<Action> last_;
  std::optional<Action> pending_;
  std::vector<double> pending_probs_;
  std::vector<double> weighted_;  // k x k: sum over rounds playing b of p(a)/p(b) * payoff, at [a*k+b]
  std::vector<double> direct_;    // sum over rounds playing a of payoff
};

/// Agent that keeps one mixed action forever.
class FixedAgent {
 public:
  FixedAgent(int k, MixedAction strategy);

  Action act(Rng& rng) const { return strategy_.sample(k_, rng); }
  void observe(Action, double) const noexcept {}

  const MixedAction& strategy() const noexcept { return strategy_; }
  int num_actions() const noexcept { return k_; }

 private:
  int k_;
  MixedAction strategy_;
};

using Agent = std::variant<StageLearner, RegretMatcher, FixedAgent>;

/// The action the agent currently intends to play most: the stage learner's
/// base, the regret matcher's last action, or the fixed agent's base.
Action nominal_action(const Agent& agent);

}  // namespace stagelearn
