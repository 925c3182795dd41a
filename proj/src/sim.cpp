#include "stagelearn/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#include "stagelearn/dynamics.hpp"

namespace stagelearn {

LearnerKind parse_learner_kind(std::string_view text) {
  if (text == "stage") return LearnerKind::stage;
  if (text == "regret") return LearnerKind::regret;
  throw ContractViolation("unknown learner kind '" + std::string(text) + "'");
}

std::string_view to_string(LearnerKind kind) {
  return kind == LearnerKind::stage ? "stage" : "regret";
}

int RunConfig::stage_length() const {
  return learner.tau > 0 ? learner.tau : StageLearner::default_stage_length(learner.epsilon);
}

std::unique_ptr<AnonymousGame> make_game(const GameConfig& config) {
  if (config.kind == "contribution") {
    if (config.penalty_n < 0) throw ConfigError("game.penalty_n", "must be >= 0");
    return std::make_unique<ContributionGame>(config.penalty_n, config.mode);
  }
  if (config.kind == "matrix") {
    if (config.matrix.empty()) throw ConfigError("game.matrix", "a matrix name or file is required");
    if (auto bundled = matrices::bundled(config.matrix)) {
      return std::make_unique<MatrixGame>(*bundled, config.mode, config.matrix,
                                          matrices::bundled_labels(config.matrix));
    }
    try {
      return std::make_unique<MatrixGame>(PayoffMatrix::load(config.matrix), config.mode,
                                          config.matrix);
    } catch (const ContractViolation& err) {
      throw ConfigError("game.matrix", err.what());
    }
  }
  throw ConfigError("game.kind", "expected 'contribution' or 'matrix', got '" + config.kind + "'");
}

namespace {

void check(bool ok, const char* key, const std::string& message) {
  if (!ok) throw ConfigError(key, message);
}

bool unit_interval(double x) { return x >= 0.0 && x <= 1.0; }

// Spread of u(a, b) over pure pairs; equals max - min of the matrix for matrix games.
double payoff_range(const AnonymousGame& game) {
  const int k = game.num_actions();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (Action b = 0; b < k; ++b) {
    const auto rho = ActionDistribution::degenerate(k, b);
    for (Action a = 0; a < k; ++a) {
      const double u = game.expected_payoff(a, rho);
      lo = std::min(lo, u);
      hi = std::max(hi, u);
    }
  }
  return hi - lo;
}

Action pure_dynamics_fixed_point(const AnonymousGame& game) {
  const int k = game.num_actions();
  const auto seq = br_sequence(ActionDistribution::uniform(k), 0.0, game, 4 * k);
  if (!seq.converged) return 0;
  return seq.steps.back().support().front();
}

}  // namespace

RunConfig resolve(const RunConfig& config) {
  RunConfig out = config;
  check(out.n >= 2, "sim.n", "population must have at least 2 agents");
  if (out.game.penalty_n == kPenaltyFromPopulation) out.game.penalty_n = out.n;
  const auto game = make_game(out.game);
  const int k = game->num_actions();

  check(std::isfinite(out.learner.epsilon) && out.learner.epsilon > 0.0 && out.learner.epsilon < 1.0,
        "learner.epsilon", "must lie in (0, 1)");
  check(out.learner.tau >= 0, "learner.tau", "must be >= 1 (or 0 for the default)");
  if (out.learner.tau == 0) out.learner.tau = StageLearner::default_stage_length(out.learner.epsilon);
  check(std::isfinite(out.learner.exploration) && out.learner.exploration > 0.0 &&
            out.learner.exploration < 1.0,
        "learner.exploration", "must lie in (0, 1)");
  check(std::isfinite(out.learner.inertia) && out.learner.inertia >= 0.0, "learner.inertia",
        "must be > 0 (or 0 for the default)");
  if (out.learner.inertia == 0.0) {
    out.learner.inertia = RegretMatcher::default_inertia(payoff_range(*game), k);
    check(out.learner.inertia > 0.0, "learner.inertia", "default is 0 for a constant game; set it");
  }

  if (out.game.mode == PayoffMode::matching) {
    check(out.n % 2 == 0, "sim.n", "random matching needs an even population");
    check(game->pairwise_matrix() != nullptr, "game.mode", "game has no pairwise matrix");
  }
  check(out.rounds >= out.learner.tau, "sim.rounds",
        "must be at least one stage (" + std::to_string(out.learner.tau) + " rounds)");
  check(unit_interval(out.churn_rate), "sim.churn_rate", "must lie in [0, 1]");
  check(unit_interval(out.fixed_fraction), "sim.fixed_fraction", "must lie in [0, 1]");
  check(out.fixed_action >= 0 && out.fixed_action < k, "sim.fixed_action",
        "must be an action index below " + std::to_string(k));
  check(std::isfinite(out.fixed_explore) && out.fixed_explore >= 0.0 && out.fixed_explore < 1.0,
        "sim.fixed_explore", "must lie in [0, 1)");
  if (out.target < 0) out.target = pure_dynamics_fixed_point(*game);
  check(out.target < k, "sim.target", "must be an action index below " + std::to_string(k));
  check(std::isfinite(out.eta) && out.eta >= 0.0, "sim.eta", "must be >= 0");
  check(std::isfinite(out.threshold) && out.threshold >= 0.0, "sim.threshold", "must be >= 0");
  check(out.threads >= 1, "sim.threads", "must be >= 1");
  return out;
}

Population::Population(const RunConfig& config, const AnonymousGame& game)
    : config_(config), k_(game.num_actions()), inertia_(config.learner.inertia) {
  const auto n = static_cast<std::size_t>(config.n);
  const auto fixed = static_cast<std::size_t>(std::llround(config.fixed_fraction * config.n));
  agents_.reserve(n);
  rngs_.reserve(n);
  incarnations_.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    rngs_.push_back(make_stream(config.seed, StreamKind::agent, i));
    if (i < n - fixed) {
      const auto base = static_cast<Action>(uniform_index(rngs_[i], static_cast<std::uint64_t>(k_)));
      agents_.push_back(make_learner(i, base));
    } else {
      agents_.emplace_back(FixedAgent(k_, MixedAction(config.fixed_action, config.fixed_explore)));
    }
  }
}

Agent Population::make_learner(std::size_t, Action base) const {
  if (config_.learner.kind == LearnerKind::stage) {
    return StageLearner(k_, base, config_.learner.epsilon, config_.stage_length());
  }
  // A fresh regret matcher has no history; its first move is uniform.
  (void)base;
  return RegretMatcher(k_, inertia_, config_.learner.exploration);
}

void Population::replace(std::size_t i, Action base) {
  ++incarnations_[i];
  rngs_[i] = make_stream(config_.seed, StreamKind::agent, i, incarnations_[i]);
  agents_[i] = make_learner(i, base);
}

std::vector<double> realize_meanfield(std::span<const Action> actions, const AnonymousGame& game) {
  const int k = game.num_actions();
  if (actions.size() < 2) throw ContractViolation("realize_meanfield: need at least two agents");
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(k), 0);
  for (Action a : actions) {
    if (a < 0 || a >= k) throw ContractViolation("realize_meanfield: action out of range");
    ++counts[static_cast<std::size_t>(a)];
  }
  // An agent's payoff depends only on its own action, so evaluate once per action played.
  std::vector<double> by_action(static_cast<std::size_t>(k), 0.0);
  for (Action a = 0; a < k; ++a) {
    auto& c = counts[static_cast<std::size_t>(a)];
    if (c == 0) continue;
    --c;
    by_action[static_cast<std::size_t>(a)] =
        game.expected_payoff(a, ActionDistribution::from_counts(counts));
    ++c;
  }
  std::vector<double> payoffs(actions.size());
  for (std::size_t i = 0; i < actions.size(); ++i) {
    payoffs[i] = by_action[static_cast<std::size_t>(actions[i])];
  }
  return payoffs;
}

std::vector<double> realize_matching(std::span<const Action> actions, const PayoffMatrix& matrix,
                                     Rng& rng) {
  if (actions.size() % 2 != 0) throw ContractViolation("realize_matching: odd population");
  for (Action a : actions) {
    if (a < 0 || a >= matrix.size()) throw ContractViolation("realize_matching: action out of range");
  }
  std::vector<std::size_t> order(actions.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<double> payoffs(actions.size());
  for (std::size_t p = 0; p < order.size(); p += 2) {
    const std::size_t i = order[p];
    const std::size_t j = order[p + 1];
    payoffs[i] = matrix(actions[i], actions[j]);
    payoffs[j] = matrix(actions[j], actions[i]);
  }
  return payoffs;
}

std::size_t apply_churn(Population& population, double rate, Rng& rng) {
  if (!unit_interval(rate)) throw ContractViolation("apply_churn: rate must lie in [0, 1]");
  std::size_t replaced = 0;
  if (rate == 0.0) return replaced;
  for (std::size_t i = 0; i < population.size(); ++i) {
    if (population.is_fixed(i)) continue;
    if (uniform01(rng) < rate) {
      const int k = std::visit([](const auto& a) { return a.num_actions(); },
                               population.agents()[i]);
      population.replace(i, static_cast<Action>(uniform_index(rng, static_cast<std::uint64_t>(k))));
      ++replaced;
    }
  }
  return replaced;
}

double distance_from_equilibrium(const ActionDistribution& rho, Action target) {
  if (target < 0 || target >= rho.size()) {
    throw ContractViolation("distance_from_equilibrium: target out of range");
  }
  double d = 0.0;
  for (Action a = 0; a < rho.size(); ++a) d += rho[a] * std::abs(a - target);
  return d;
}

StageWindow::StageWindow(int k) : counts_(static_cast<std::size_t>(k), 0) {}

void StageWindow::add(std::span<const Action> actions) {
  for (Action a : actions) {
    if (a < 0 || a >= static_cast<int>(counts_.size())) {
      throw ContractViolation("StageWindow::add: action out of range");
    }
    ++counts_[static_cast<std::size_t>(a)];
  }
  samples_ += actions.size();
}

void StageWindow::reset() {
  std::fill(counts_.begin(), counts_.end(), 0);
  samples_ = 0;
}

ActionDistribution StageWindow::rho() const { return ActionDistribution::from_counts(counts_); }

ActionDistribution measure_stage_rho(std::span<const std::vector<Action>> window, int k) {
  StageWindow acc(k);
  for (const auto& round : window) acc.add(round);
  return acc.rho();
}

double best_reply_fraction(std::span<const Agent> agents, const ActionDistribution& rho,
                           double eta, const AnonymousGame& game) {
  if (agents.empty()) throw ContractViolation("best_reply_fraction: empty population");
  const auto replies = best_reply_set(rho, eta, game);
  std::size_t hits = 0;
  for (const Agent& agent : agents) {
    if (std::binary_search(replies.begin(), replies.end(), nominal_action(agent))) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(agents.size());
}

double RunTrace::final_distance() const {
  if (stages.empty()) throw ContractViolation("RunTrace::final_distance: no completed stage");
  return stages.back().distance;
}

std::optional<std::int64_t> RunTrace::rounds_to_threshold(double threshold) const {
  for (const auto& s : stages) {
    if (s.distance < threshold) return s.end_round;
  }
  return std::nullopt;
}

namespace {

ActionDistribution nominal_distribution(std::span<const Agent> agents, int k) {
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(k), 0);
  for (const Agent& a : agents) ++counts[static_cast<std::size_t>(nominal_action(a))];
  return ActionDistribution::from_counts(counts);
}

// Runs body(i) for every agent index. Each index touches only its own agent
// and stream, so the result does not depend on how the range is split.
template <class Body>
void for_each_agent(std::size_t n, int threads, tbb::task_arena* arena, Body&& body) {
  if (threads <= 1 || arena == nullptr) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  arena->execute([&] {
    tbb::parallel_for(
        tbb::blocked_range<std::size_t>(0, n, 16),
        [&](const tbb::blocked_range<std::size_t>& r) {
          for (std::size_t i = r.begin(); i != r.end(); ++i) body(i);
        },
        tbb::simple_partitioner());
  });
}

}  // namespace

RunTrace run(const RunConfig& requested) {
  const RunConfig config = resolve(requested);
  const auto game = make_game(config.game);
  const int k = game->num_actions();
  const std::int64_t tau = config.stage_length();
  const auto n = static_cast<std::size_t>(config.n);

  Population population(config, *game);
  Rng matching_rng = make_stream(config.seed, StreamKind::matching);
  Rng churn_rng = make_stream(config.seed, StreamKind::churn);

  std::optional<tbb::task_arena> arena;
  if (config.threads > 1) arena.emplace(config.threads);
  tbb::task_arena* arena_ptr = arena ? &*arena : nullptr;

  RunTrace trace;
  trace.config = config;
  trace.num_actions = k;
  trace.rounds.reserve(static_cast<std::size_t>(config.rounds));
  trace.stages.reserve(static_cast<std::size_t>(config.rounds / tau));

  std::vector<Action> actions(n);
  StageWindow window(k);
  for (std::int64_t t = 0; t < config.rounds; ++t) {
    const std::int64_t stage = t / tau;
    ActionDistribution bases = nominal_distribution(population.agents(), k);

    for_each_agent(n, config.threads, arena_ptr, [&](std::size_t i) {
      actions[i] = std::visit([&](auto& agent) { return agent.act(population.rng(i)); },
                              population.agents()[i]);
    });

    const std::vector<double> payoffs =
        config.game.mode == PayoffMode::mean_field
            ? realize_meanfield(actions, *game)
            : realize_matching(actions, *game->pairwise_matrix(), matching_rng);

    for_each_agent(n, config.threads, arena_ptr, [&](std::size_t i) {
      std::visit([&](auto& agent) { agent.observe(actions[i], payoffs[i]); },
                 population.agents()[i]);
    });

    window.add(actions);
    ActionDistribution realized = profile_distribution(std::span<const Action>(actions), k);
    const auto replies = best_reply_set(realized, config.eta, *game);
    double in_replies = 0.0;
    for (Action a : replies) in_replies += bases[a];
    trace.rounds.push_back(RoundRecord{
        .round = t,
        .stage = stage,
        .distance = distance_from_equilibrium(realized, config.target),
        .br_fraction = in_replies,
        .realized = std::move(realized),
        .bases = std::move(bases),
    });

    if ((t + 1) % tau == 0) {
      ActionDistribution stage_rho = window.rho();
      ActionDistribution new_bases = nominal_distribution(population.agents(), k);
      StageRecord record{
          .stage = stage,
          .end_round = t + 1,
          .distance = distance_from_equilibrium(stage_rho, config.target),
          .base_distance = distance_from_equilibrium(new_bases, config.target),
          .br_fraction = best_reply_fraction(population.agents(), stage_rho, config.eta, *game),
          .churned = 0,
          .rho = std::move(stage_rho),
          .bases = std::move(new_bases),
      };
      record.churned = apply_churn(population, config.churn_rate, churn_rng);
      trace.stages.push_back(std::move(record));
      window.reset();
    }
  }
  return trace;
}

}  // namespace stagelearn
