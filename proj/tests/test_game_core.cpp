#include <doctest.h>

#include <sstream>

#include "oracles.hpp"
#include "stagelearn/errors.hpp"
#include "stagelearn/games.hpp"

using namespace stagelearn;

namespace {

PayoffMatrix pd() { return matrices::prisoners_dilemma(); }

}  // namespace

TEST_CASE("action set") {
  ActionSet set(3, {"a", "b", "c"});
  CHECK(set.size() == 3);
  CHECK(set.contains(2));
  CHECK_FALSE(set.contains(3));
  CHECK(set.label(1) == "b");
  CHECK(ActionSet(4).label(3) == "3");
  CHECK_THROWS_AS(ActionSet(1), ContractViolation);
  CHECK_THROWS_AS(ActionSet(2, {"x"}), ContractViolation);
}

TEST_CASE("action distribution construction") {
  const auto u = ActionDistribution::uniform(20);
  CHECK(u[0] == 0.05);
  CHECK(u.mean() == doctest::Approx(9.5).epsilon(1e-12));
  CHECK(ActionDistribution::degenerate(5, 3).support() == std::vector<Action>{3});

  const std::uint64_t counts[] = {1, 0, 3};
  const auto c = ActionDistribution::from_counts(counts);
  CHECK(c[0] == 0.25);
  CHECK(c[2] == 0.75);

  // Within tolerance: accepted and renormalized.
  const ActionDistribution near({0.5 + 4e-10, 0.5});
  CHECK(near[0] + near[1] == doctest::Approx(1.0).epsilon(1e-15));

  CHECK_THROWS_AS(ActionDistribution({0.5, 0.6}), ContractViolation);
  CHECK_THROWS_AS(ActionDistribution({1.1, -0.1}), ContractViolation);
  CHECK_THROWS_AS(ActionDistribution(std::vector<double>{}), ContractViolation);
  const std::uint64_t none[] = {0, 0};
  CHECK_THROWS_AS(ActionDistribution::from_counts(none), ContractViolation);
}

TEST_CASE("mixed action probabilities") {
  const MixedAction a(8, 0.05);
  CHECK(a.probability(8, 20) == doctest::Approx(0.95));
  CHECK(a.probability(3, 20) == doctest::Approx(0.05 / 19));
  const auto d = a.distribution(20);
  double sum = 0.0;
  for (double w : d.weights()) sum += w;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(MixedAction(0, 0.5).distribution(2)[1] == 0.5);
  CHECK_THROWS_AS(MixedAction(0, 1.0), ContractViolation);
  CHECK_THROWS_AS(MixedAction(-1, 0.0), ContractViolation);
}

TEST_CASE("mixed action sampling matches a_eps within 3 sigma") {
  const MixedAction a(8, 0.05);
  Rng rng = make_stream(11, StreamKind::sampling);
  const int draws = 1'000'000;
  std::vector<int> counts(20, 0);
  for (int i = 0; i < draws; ++i) ++counts[static_cast<std::size_t>(a.sample(20, rng))];
  for (int x = 0; x < 20; ++x) {
    CHECK(oracle::within_binomial(counts[static_cast<std::size_t>(x)], draws, a.probability(x, 20)));
  }
}

TEST_CASE("payoff set and payoff distribution") {
  CHECK(PayoffSet({1.0, 2.0}).contains(2.0));
  CHECK_THROWS_AS(PayoffSet({1.0, 1.0}), ContractViolation);
  CHECK_THROWS_AS(PayoffSet({}), ContractViolation);

  const PayoffDistribution d({3.0, 1.0, 3.0, 5.0}, {0.25, 0.25, 0.25, 0.25});
  REQUIRE(d.payoffs().size() == 3);
  CHECK(d.payoffs()[0] == 1.0);
  CHECK(d.probs()[1] == 0.5);
  CHECK(d.expectation() == doctest::Approx(3.0));
  CHECK(PayoffDistribution::point_mass(7.0).expectation() == 7.0);
  CHECK_THROWS_AS(PayoffDistribution({1.0}, {0.5}), ContractViolation);
}

TEST_CASE("payoff matrix parsing") {
  std::istringstream in("# comment\n3 0\n\n5 1  # trailing\n");
  const auto m = PayoffMatrix::parse(in);
  CHECK(m.size() == 2);
  CHECK(m(1, 0) == 5.0);
  CHECK(m.max_abs() == 5.0);
  CHECK(m.min() == 0.0);

  std::istringstream round_trip(m.to_text());
  const auto again = PayoffMatrix::parse(round_trip);
  for (Action a = 0; a < 2; ++a) {
    for (Action b = 0; b < 2; ++b) CHECK(again(a, b) == m(a, b));
  }

  std::istringstream ragged("1 2\n3\n");
  CHECK_THROWS_AS(PayoffMatrix::parse(ragged), ContractViolation);
  std::istringstream junk("1 2\n3 x\n");
  try {
    PayoffMatrix::parse(junk);
    FAIL("expected a parse error");
  } catch (const ContractViolation& err) {
    CHECK(std::string(err.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(PayoffMatrix::load("/nonexistent/matrix.txt"), IoError);
}

TEST_CASE("utility examples") {
  const ConstantGame constant(3, 7.0);
  CHECK(utility(MixedAction(1, 0.3), ActionDistribution({0.2, 0.3, 0.5}), constant) == doctest::Approx(7.0).epsilon(1e-12));

  const MatrixGame game(pd(), PayoffMode::matching);
  const ActionDistribution half({0.5, 0.5});
  CHECK(utility(MixedAction::pure(1), half, game) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(utility(MixedAction(1, 0.0), half, game) == utility(MixedAction::pure(1), half, game));

  CHECK(matching_utility(MixedAction::pure(0), half, pd()) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(matching_utility(half, half, pd()) == doctest::Approx(2.25).epsilon(1e-12));
  const PayoffMatrix ones({{1.0, 1.0}, {1.0, 1.0}});
  CHECK(matching_utility(ActionDistribution({0.3, 0.7}), ActionDistribution({0.9, 0.1}), ones) ==
        doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(utility(MixedAction::pure(0), ActionDistribution::uniform(3), game),
                  ContractViolation);
}

TEST_CASE("l1 distance examples") {
  const auto rho = ActionDistribution({0.2, 0.8});
  CHECK(l1_distance(rho, rho) == 0.0);
  CHECK(l1_distance(ActionDistribution({1.0, 0.0}), ActionDistribution({0.0, 1.0})) == 2.0);
  CHECK(l1_distance(MixedAction(8, 0.05).distribution(20), ActionDistribution::degenerate(20, 8)) ==
        doctest::Approx(0.1).epsilon(1e-12));
  CHECK_THROWS_AS(l1_distance(ActionDistribution::uniform(2), ActionDistribution::uniform(3)),
                  ContractViolation);
}

TEST_CASE("lipschitz estimates") {
  CHECK(estimate_lipschitz(ConstantGame(4, 2.0), 20, 1) == 0.0);
  const MatrixGame game(pd(), PayoffMode::matching);
  const double est = estimate_lipschitz(game, 100, 3);
  CHECK(est > 0.0);
  CHECK(est <= 5.0);
  const ContributionGame contribution;
  const double c = estimate_lipschitz(contribution, 60, 5);
  CHECK(c > 0.0);
  CHECK(c <= 361.0 + 1e-9);
  CHECK_THROWS_AS(estimate_lipschitz(game, 1, 1), ContractViolation);
}

TEST_CASE("utility on a matching wrapper equals the bilinear form") {
  Rng rng = make_stream(5, StreamKind::sampling);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 2 + static_cast<int>(uniform_index(rng, 6));
    std::vector<std::vector<double>> p(static_cast<std::size_t>(k), std::vector<double>(k));
    for (auto& row : p) {
      for (auto& x : row) x = std::round((uniform01(rng) * 20.0 - 10.0) * 4.0) / 4.0;
    }
    const PayoffMatrix matrix(p);
    const MatrixGame game(matrix, PayoffMode::matching);
    const auto s = oracle::random_simplex(k, rng);
    const auto rho = oracle::random_simplex(k, rng);
    const ActionDistribution sd(s);
    const ActionDistribution rd(rho);
    const double expected = oracle::bilinear(p, oracle::weights(sd), oracle::weights(rd));
    CHECK(utility(sd, rd, game) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(matching_utility(sd, rd, matrix) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(std::abs(utility(sd, rd, game) - matching_utility(sd, rd, matrix)) <= 1e-12);
  }
}

TEST_CASE("utility is linear in the strategy") {
  Rng rng = make_stream(6, StreamKind::sampling);
  const ContributionGame contribution;
  const MatrixGame climbing(matrices::climbing_game(), PayoffMode::matching);
  for (int trial = 0; trial < 200; ++trial) {
    const AnonymousGame& game = trial % 2 ? static_cast<const AnonymousGame&>(contribution)
                                          : static_cast<const AnonymousGame&>(climbing);
    const int k = game.num_actions();
    const ActionDistribution s1(oracle::random_simplex(k, rng));
    const ActionDistribution s2(oracle::random_simplex(k, rng));
    const ActionDistribution rho(oracle::random_simplex(k, rng));
    const double alpha = uniform01(rng);
    std::vector<double> mix(static_cast<std::size_t>(k));
    for (int a = 0; a < k; ++a) mix[a] = alpha * s1[a] + (1.0 - alpha) * s2[a];
    const double lhs = utility(ActionDistribution(mix), rho, game);
    const double rhs = alpha * utility(s1, rho, game) + (1.0 - alpha) * utility(s2, rho, game);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("lipschitz estimate never exceeds the matrix bound") {
  Rng rng = make_stream(7, StreamKind::sampling);
  for (int trial = 0; trial < 20; ++trial) {
    const int k = 2 + static_cast<int>(uniform_index(rng, 4));
    std::vector<std::vector<double>> p(static_cast<std::size_t>(k), std::vector<double>(k));
    for (auto& row : p) {
      for (auto& x : row) x = uniform01(rng) * 10.0 - 5.0;
    }
    const MatrixGame game(PayoffMatrix(p), PayoffMode::matching);
    CHECK(estimate_lipschitz(game, 30, static_cast<std::uint64_t>(trial)) <=
          *game.lipschitz_constant() + 1e-12);
  }
}
