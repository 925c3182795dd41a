#include <doctest.h>

#include "oracles.hpp"
#include "stagelearn/dynamics.hpp"
#include "stagelearn/errors.hpp"
#include "stagelearn/games.hpp"

using namespace stagelearn;

TEST_CASE("contribution cost") {
  CHECK(contribution_cost(0) == 0.0);
  CHECK(contribution_cost(1) == 1.0);
  CHECK(contribution_cost(5) == 16.0);
  CHECK(contribution_cost(8) == 49.0);
  CHECK(contribution_cost(9, 20) == 121.0);
  CHECK(contribution_cost(19, 0) == 361.0);
  for (int pen : {0, 1, 20, 100}) {
    for (int x = 0; x < kContributionActions; ++x) CHECK(contribution_cost(x, pen) == oracle::cost(x, pen));
  }
  CHECK_THROWS_AS(contribution_cost(20), ContractViolation);
  CHECK_THROWS_AS(contribution_cost(-1), ContractViolation);
}

TEST_CASE("contribution utility") {
  CHECK(contribution_utility(8, 8.0) == 79.0);
  CHECK(contribution_utility(0, 13.0) == 0.0);
  CHECK(contribution_utility(9, 8.0, 20) == 23.0);
}

TEST_CASE("contribution mean-field channel") {
  const auto at8 = contribution_meanfield_channel(8, ActionDistribution::degenerate(20, 8));
  REQUIRE(at8.payoffs().size() == 1);
  CHECK(at8.payoffs()[0] == 79.0);
  CHECK(contribution_meanfield_channel(8, ActionDistribution::uniform(20)).expectation() ==
        doctest::Approx(103.0).epsilon(1e-12));
  CHECK(contribution_meanfield_channel(0, ActionDistribution::degenerate(20, 0)).expectation() == 0.0);
}

TEST_CASE("contribution game modes agree in expectation") {
  Rng rng = make_stream(3, StreamKind::sampling);
  const ContributionGame mean_field(20, PayoffMode::mean_field);
  const ContributionGame matching(20, PayoffMode::matching);
  CHECK_FALSE(mean_field.payoff_set().has_value());
  REQUIRE(matching.payoff_set().has_value());
  CHECK(*mean_field.lipschitz_constant() == 361.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto w = oracle::random_simplex(20, rng);
    const ActionDistribution rho(w);
    for (Action x = 0; x < 20; ++x) {
      const double direct = oracle::matched(x, w, 20);
      CHECK(mean_field.expected_payoff(x, rho) == doctest::Approx(direct).epsilon(1e-12));
      CHECK(matching.expected_payoff(x, rho) == doctest::Approx(direct).epsilon(1e-12));
      CHECK(matching.payoff_channel(x, rho).expectation() == doctest::Approx(direct).epsilon(1e-12));
      CHECK(mean_field.payoff_channel(x, rho).expectation() ==
            doctest::Approx(oracle::contribution(x, oracle::mean_of(w), 20)).epsilon(1e-12));
    }
  }
}

TEST_CASE("eight is the unique best reply to degenerate-8 and to uniform for any penalty") {
  for (int pen : {0, 1, 2, 10, 20, 100, 1000}) {
    const ContributionGame game(pen);
    for (const auto& rho : {ActionDistribution::degenerate(20, 8), ActionDistribution::uniform(20)}) {
      const auto w = oracle::weights(rho);
      const auto brute =
          oracle::best_replies(20, 0.0, [&](int x) { return oracle::contribution(x, oracle::mean_of(w), pen); });
      CHECK(brute == std::vector<int>{8});
      CHECK(best_reply_set(rho, 0.0, game) == std::vector<Action>{8});
    }
  }
}

TEST_CASE("defect is the unique best reply in the prisoner's dilemma") {
  const MatrixGame game(matrices::prisoners_dilemma(), PayoffMode::matching);
  for (int i = 0; i <= 100; ++i) {
    const double c = i / 100.0;
    const ActionDistribution rho({c, 1.0 - c});
    CHECK(best_reply_set(rho, 0.0, game) == std::vector<Action>{1});
  }
}

TEST_CASE("matrix game mean-field utility equals matching utility") {
  Rng rng = make_stream(4, StreamKind::sampling);
  const auto matrix = matrices::climbing_game();
  const MatrixGame game(matrix, PayoffMode::mean_field);
  for (int trial = 0; trial < 100; ++trial) {
    const ActionDistribution s(oracle::random_simplex(3, rng));
    const ActionDistribution rho(oracle::random_simplex(3, rng));
    CHECK(std::abs(utility(s, rho, game) - matching_utility(s, rho, matrix)) <= 1e-12);
    const auto point = game.payoff_channel(0, rho);
    CHECK(point.payoffs().size() == 1);
  }
}

TEST_CASE("bundled matrices") {
  const auto pd = matrices::prisoners_dilemma();
  CHECK(pd(0, 0) == 3.0);
  CHECK(pd(0, 1) == 0.0);
  CHECK(pd(1, 0) == 5.0);
  CHECK(pd(1, 1) == 1.0);
  CHECK(matrices::climbing_game()(0, 0) == 11.0);
  CHECK(matrices::climbing_game()(1, 0) == -30.0);
  CHECK(matrices::bundled("cycle").has_value());
  CHECK_FALSE(matrices::bundled("nope").has_value());
  CHECK(matrices::bundled_labels("pd") == std::vector<std::string>{"C", "D"});
  CHECK(*MatrixGame(pd).lipschitz_constant() == 5.0);
}

TEST_CASE("payoff mode names") {
  CHECK(parse_payoff_mode("meanfield") == PayoffMode::mean_field);
  CHECK(parse_payoff_mode("average") == PayoffMode::mean_field);
  CHECK(parse_payoff_mode("matching") == PayoffMode::matching);
  CHECK(to_string(PayoffMode::matching) == "matching");
  CHECK_THROWS_AS(parse_payoff_mode("pairs"), ContractViolation);
}
