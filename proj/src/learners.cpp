#include "stagelearn/learners.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <type_traits>

namespace stagelearn {

StageTally::StageTally(int k)
    : counts_(static_cast<std::size_t>(k), 0), sums_(static_cast<std::size_t>(k), 0.0) {
  if (k < 2) throw ContractViolation("StageTally: at least two actions required");
}

void StageTally::record(Action a, double payoff) {
  if (a < 0 || a >= size()) throw ContractViolation("StageTally::record: action out of range");
  ++counts_[static_cast<std::size_t>(a)];
  sums_[static_cast<std::size_t>(a)] += payoff;
}

void StageTally::reset() {
  std::fill(counts_.begin(), counts_.end(), 0);
  std::fill(sums_.begin(), sums_.end(), 0.0);
}

double StageTally::value(Action a) const {
  const auto i = static_cast<std::size_t>(a);
  if (counts_.at(i) == 0) return 0.0;
  return sums_[i] / static_cast<double>(counts_[i]);
}

Action StageTally::best(Action incumbent) const {
  Action arg = 0;
  double top = value(0);
  for (Action a = 1; a < size(); ++a) {
    if (value(a) > top) {
      top = value(a);
      arg = a;
    }
  }
  if (incumbent >= 0 && incumbent < size() && value(incumbent) == top) return incumbent;
  return arg;
}

StageLearner::StageLearner(int k, Action base, double explore, int stage_length)
    : base_(base), explore_(explore), stage_length_(stage_length), tally_(k) {
  if (base < 0 || base >= k) throw ContractViolation("StageLearner: base out of range");
  if (!(explore >= 0.0 && explore < 1.0)) {
    throw ContractViolation("StageLearner: exploration rate must lie in [0, 1)");
  }
  if (stage_length < 1) throw ContractViolation("StageLearner: stage length must be >= 1");
}

int StageLearner::default_stage_length(double explore) {
  if (!(explore > 0.0 && explore < 1.0)) {
    throw ContractViolation("default_stage_length: exploration rate must lie in (0, 1)");
  }
  return static_cast<int>(std::ceil(1.0 / (explore * explore)));
}

Action StageLearner::act(Rng& rng) {
  pending_ = strategy().sample(num_actions(), rng);
  return *pending_;
}

void StageLearner::observe(Action played, double payoff) {
  if (!pending_) throw ContractViolation("StageLearner::observe: no preceding act");
  if (played != *pending_) {
    throw ContractViolation("StageLearner::observe: action differs from the one just played");
  }
  pending_.reset();
  tally_.record(played, payoff);
  if (++round_in_stage_ == stage_length_) end_stage();
}

void StageLearner::end_stage() {
  if (round_in_stage_ != stage_length_) {
    throw ContractViolation("StageLearner::end_stage: called mid-stage (round " +
                            std::to_string(round_in_stage_) + " of " +
                            std::to_string(stage_length_) + ")");
  }
  base_ = tally_.best(base_);
  tally_.reset();
  round_in_stage_ = 0;
  ++stages_completed_;
}

RegretMatcher::RegretMatcher(int k, double inertia, double exploration)
    : k_(k),
      inertia_(inertia),
      exploration_(exploration),
      weighted_(static_cast<std::size_t>(k * k), 0.0),
      direct_(static_cast<std::size_t>(k), 0.0) {
  if (k < 2) throw ContractViolation("RegretMatcher: at least two actions required");
  if (!(inertia > 0.0)) throw ContractViolation("RegretMatcher: inertia must be > 0");
  if (!(exploration > 0.0 && exploration < 1.0)) {
    throw ContractViolation("RegretMatcher: exploration must lie in (0, 1)");
  }
}

double RegretMatcher::default_inertia(double payoff_range, int k) {
  return 2.0 * payoff_range * (k - 1);
}

double RegretMatcher::regret(Action from, Action to) const {
  if (from < 0 || from >= k_ || to < 0 || to >= k_) {
    throw ContractViolation("RegretMatcher::regret: action out of range");
  }
  if (rounds_ == 0) return 0.0;
  const auto f = static_cast<std::size_t>(from);
  const auto t = static_cast<std::size_t>(to);
  return (weighted_[f * static_cast<std::size_t>(k_) + t] - direct_[f]) /
         static_cast<double>(rounds_);
}

std::vector<double> RegretMatcher::play_probabilities() const {
  const auto m = static_cast<std::size_t>(k_);
  if (!last_) return std::vector<double>(m, 1.0 / k_);
  const Action j = *last_;
  std::vector<double> p(m, 0.0);
  double moved = 0.0;
  for (Action b = 0; b < k_; ++b) {
    if (b == j) continue;
    const double pull = std::min(std::max(regret(j, b), 0.0) / inertia_, 1.0 / (k_ - 1));
    p[static_cast<std::size_t>(b)] = (1.0 - exploration_) * pull + exploration_ / k_;
    moved += p[static_cast<std::size_t>(b)];
  }
  p[static_cast<std::size_t>(j)] = 1.0 - moved;
  return p;
}

Action RegretMatcher::act(Rng& rng) {
  pending_probs_ = play_probabilities();
  const double u = uniform01(rng);
  double acc = 0.0;
  Action chosen = k_ - 1;
  for (Action a = 0; a < k_; ++a) {
    acc += pending_probs_[static_cast<std::size_t>(a)];
    if (u < acc) {
      chosen = a;
      break;
    }
  }
  // Rounding can leave acc a hair below 1; never land on a zero-probability tail.
  while (pending_probs_[static_cast<std::size_t>(chosen)] == 0.0 && chosen > 0) --chosen;
  pending_ = chosen;
  return chosen;
}

void RegretMatcher::observe(Action played, double payoff) {
  if (!pending_) throw ContractViolation("RegretMatcher::observe: no preceding act");
  if (played != *pending_) {
    throw ContractViolation("RegretMatcher::observe: action differs from the one just played");
  }
  const auto b = static_cast<std::size_t>(played);
  const auto m = static_cast<std::size_t>(k_);
  const double p_played = pending_probs_[b];
  for (std::size_t a = 0; a < m; ++a) {
    weighted_[a * m + b] += pending_probs_[a] / p_played * payoff;
  }
  direct_[b] += payoff;
  ++rounds_;
  last_ = played;
  pending_.reset();
}

FixedAgent::FixedAgent(int k, MixedAction strategy) : k_(k), strategy_(strategy) {
  if (k < 2 || strategy.base() >= k) throw ContractViolation("FixedAgent: base out of range");
}

Action nominal_action(const Agent& agent) {
  return std::visit(
      [](const auto& a) -> Action {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, StageLearner>) {
          return a.base();
        } else if constexpr (std::is_same_v<T, RegretMatcher>) {
          return a.last_action().value_or(0);
        } else {
          return a.strategy().base();
        }
      },
      agent);
}

}  // namespace stagelearn
