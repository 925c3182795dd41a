#include <doctest.h>

#include <algorithm>

#include "oracles.hpp"
#include "stagelearn/dynamics.hpp"
#include "stagelearn/games.hpp"
#include "stagelearn/sim.hpp"
#include "witness.hpp"

using namespace stagelearn;

namespace {

bool subset(const std::vector<Action>& small, const std::vector<Action>& big) {
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

}  // namespace

TEST_CASE("approximate best replies grow with eta") {
  Rng rng = make_stream(31, StreamKind::sampling);
  const ContributionGame contribution;
  const MatrixGame climbing(matrices::climbing_game());
  for (int trial = 0; trial < 300; ++trial) {
    const AnonymousGame& game = trial % 2 == 0 ? static_cast<const AnonymousGame&>(contribution) : climbing;
    const int k = game.actions().size();
    const ActionDistribution rho(oracle::random_simplex(k, rng));
    const double lo = uniform01(rng) * 30.0;
    const double hi = lo + uniform01(rng) * 30.0;
    const auto a = best_reply_set(rho, lo, game);
    const auto b = best_reply_set(rho, hi, game);
    CHECK_FALSE(a.empty());
    CHECK(subset(a, b));
  }
}

TEST_CASE("closeness implies the l1 bound") {
  Rng rng = make_stream(32, StreamKind::sampling);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = 1 + static_cast<int>(uniform_index(rng, 200));
    const int k = 2 + static_cast<int>(uniform_index(rng, 19));
    const double e = uniform01(rng);
    const double eps = uniform01(rng);
    const auto pair = oracle::random_close_pair(n, k, e, eps, rng);
    REQUIRE(verify_close(pair.witness, pair.rho, pair.rho_hat));
    CHECK(l1_distance(pair.rho, pair.rho_hat) <= close_l1_bound(e, eps) + 1e-9);
  }
}

TEST_CASE("close populations keep approximate best replies inside") {
  Rng rng = make_stream(33, StreamKind::sampling);
  const ContributionGame contribution;
  const MatrixGame pd(matrices::prisoners_dilemma(), PayoffMode::matching);
  for (int trial = 0; trial < 400; ++trial) {
    const AnonymousGame& game = trial % 2 == 0 ? static_cast<const AnonymousGame&>(contribution) : pd;
    const int k = game.actions().size();
    const double lipschitz = *game.lipschitz_constant();
    const double eta = 1.0 + uniform01(rng) * 200.0;
    const double budget = std::min(abr_containment_threshold(eta, lipschitz), 1.0) * 0.999;
    const double e = budget * uniform01(rng);
    const double eps = budget - e;
    const auto mix = oracle::random_simplex(k, rng);
    const auto pair = oracle::random_close_pair(200, k, e, eps, rng, &mix);
    REQUIRE(verify_close(pair.witness, pair.rho, pair.rho_hat));
    CHECK(subset(best_reply_set(pair.rho_hat, eta / 2.0, game), best_reply_set(pair.rho, eta, game)));
  }
}

TEST_CASE("converged best-reply sequences end at an equilibrium") {
  Rng rng = make_stream(34, StreamKind::sampling);
  const ContributionGame contribution;
  const MatrixGame climbing(matrices::climbing_game(), PayoffMode::matching);
  const MatrixGame pd(matrices::prisoners_dilemma(), PayoffMode::matching);
  const AnonymousGame* games[] = {&contribution, &climbing, &pd};
  for (int trial = 0; trial < 150; ++trial) {
    const AnonymousGame& game = *games[trial % 3];
    const int k = game.actions().size();
    const ActionDistribution start(oracle::random_simplex(k, rng));
    const auto seq = br_sequence(start, 0.0, game, 20);
    REQUIRE(seq.converged);
    CHECK(is_eta_nash(seq.steps[*seq.fixed_point_index], 0.0, game));
    CHECK(l1_distance(seq.steps.back(), seq.steps[*seq.fixed_point_index]) == 0.0);
  }
}

TEST_CASE("every best reply leaves no profitable deviation") {
  Rng rng = make_stream(35, StreamKind::sampling);
  const ContributionGame game(20, PayoffMode::matching);
  for (int trial = 0; trial < 100; ++trial) {
    const ActionDistribution rho(oracle::random_simplex(20, rng));
    const double eta = uniform01(rng) * 10.0;
    const auto replies = best_reply_set(rho, eta, game);
    double best = -1e300;
    for (Action x = 0; x < 20; ++x) best = std::max(best, game.expected_payoff(x, rho));
    for (Action x = 0; x < 20; ++x) {
      const bool in = std::find(replies.begin(), replies.end(), x) != replies.end();
      CHECK(in == (game.expected_payoff(x, rho) >= best - eta));
    }
  }
}

TEST_CASE("the exploration floor rises with epsilon") {
  double last = -1.0;
  for (int i = 0; i <= 50; ++i) {
    const double eps = i / 100.0;
    const double floor = distance_from_equilibrium(MixedAction(8, eps).distribution(20), 8);
    CHECK(floor > last);
    last = floor;
  }
}

TEST_CASE("less exploration puts more of a converged population on the best reply") {
  // Learners at base 8 in a static 8_eps environment: the realized best-reply
  // share is 1 - eps in expectation, so it falls as eps grows.
  const ContributionGame game;
  double last = 2.0;
  for (double eps : {0.01, 0.05, 0.2}) {
    const auto rho = MixedAction(8, eps).distribution(20);
    const auto replies = best_reply_set(rho, 0.0, game);
    REQUIRE(replies == std::vector<Action>{8});
    Rng rng = make_stream(36, StreamKind::agent);
    const MixedAction s(8, eps);
    int hits = 0;
    const int draws = 200'000;
    for (int i = 0; i < draws; ++i) hits += s.sample(20, rng) == 8;
    const double share = static_cast<double>(hits) / draws;
    CHECK(oracle::within_binomial(hits, draws, 1.0 - eps));
    CHECK(share < last);
    last = share;
  }
}
