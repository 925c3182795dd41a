#include "stagelearn/games.hpp"

#include <algorithm>
#include <set>

namespace stagelearn {

PayoffMode parse_payoff_mode(std::string_view text) {
  if (text == "meanfield" || text == "mean_field" || text == "average") return PayoffMode::mean_field;
  if (text == "matching") return PayoffMode::matching;
  throw ContractViolation("unknown payoff mode '" + std::string(text) + "'");
}

std::string_view to_string(PayoffMode mode) {
  return mode == PayoffMode::mean_field ? "meanfield" : "matching";
}

double contribution_cost(Action x, int penalty_n) {
  if (x < 0 || x >= kContributionActions) {
    throw ContractViolation("contribution_cost: action " + std::to_string(x) + " out of range");
  }
  if (penalty_n < 0) throw ContractViolation("contribution_cost: penalty_n must be >= 0");
  if (x == 0) return 0.0;
  if (x == 1) return 1.0;
  if (x <= 8) return static_cast<double>((x - 1) * (x - 1));
  return static_cast<double>(x * x + 2 * penalty_n);
}

double contribution_utility(Action x, double y, int penalty_n) {
  return 2.0 * x * y - contribution_cost(x, penalty_n);
}

PayoffDistribution contribution_meanfield_channel(Action a, const ActionDistribution& rho,
                                                  int penalty_n) {
  if (rho.size() != kContributionActions) {
    throw ContractViolation("contribution_meanfield_channel: rho must cover 20 actions");
  }
  return PayoffDistribution::point_mass(contribution_utility(a, rho.mean(), penalty_n));
}

namespace {

PayoffMatrix contribution_matrix(int penalty_n) {
  std::vector<std::vector<double>> rows(kContributionActions,
                                        std::vector<double>(kContributionActions));
  for (Action x = 0; x < kContributionActions; ++x) {
    for (Action y = 0; y < kContributionActions; ++y) {
      rows[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] =
          contribution_utility(x, y, penalty_n);
    }
  }
  return PayoffMatrix(std::move(rows));
}

// Outcome law of a single random match: payoff matrix(a, b) with probability rho(b).
PayoffDistribution matched_outcome(const PayoffMatrix& matrix, Action a,
                                   const ActionDistribution& rho) {
  std::vector<double> payoffs;
  std::vector<double> probs;
  for (Action b = 0; b < matrix.size(); ++b) {
    payoffs.push_back(matrix(a, b));
    probs.push_back(rho[b]);
  }
  return PayoffDistribution(std::move(payoffs), std::move(probs));
}

PayoffSet distinct_entries(const PayoffMatrix& matrix) {
  std::set<double> values;
  for (Action a = 0; a < matrix.size(); ++a) {
    for (Action b = 0; b < matrix.size(); ++b) values.insert(matrix(a, b));
  }
  return PayoffSet(std::vector<double>(values.begin(), values.end()));
}

void check_action(const ActionSet& actions, Action a, const ActionDistribution& rho) {
  if (!actions.contains(a)) throw ContractViolation("payoff_channel: action out of range");
  if (rho.size() != actions.size()) throw ContractViolation("payoff_channel: dimension mismatch");
}

}  // namespace

ContributionGame::ContributionGame(int penalty_n, PayoffMode mode)
    : penalty_n_(penalty_n),
      mode_(mode),
      actions_(kContributionActions),
      matrix_(contribution_matrix(penalty_n)) {}

std::string ContributionGame::name() const { return "contribution"; }

PayoffDistribution ContributionGame::payoff_channel(Action a, const ActionDistribution& rho) const {
  check_action(actions_, a, rho);
  if (mode_ == PayoffMode::mean_field) return contribution_meanfield_channel(a, rho, penalty_n_);
  return matched_outcome(matrix_, a, rho);
}

std::optional<PayoffSet> ContributionGame::payoff_set() const {
  if (mode_ == PayoffMode::matching) return distinct_entries(matrix_);
  return std::nullopt;
}

std::optional<double> ContributionGame::lipschitz_constant() const {
  const double top = kContributionActions - 1;
  return top * top;
}

double ContributionGame::expected_payoff(Action a, const ActionDistribution& rho) const {
  check_action(actions_, a, rho);
  return contribution_utility(a, rho.mean(), penalty_n_);
}

MatrixGame::MatrixGame(PayoffMatrix matrix, PayoffMode mode, std::string name,
                       std::vector<std::string> labels)
    : matrix_(std::move(matrix)),
      mode_(mode),
      name_(std::move(name)),
      actions_(matrix_.size(), std::move(labels)) {}

PayoffDistribution MatrixGame::payoff_channel(Action a, const ActionDistribution& rho) const {
  check_action(actions_, a, rho);
  if (mode_ == PayoffMode::mean_field) {
    return PayoffDistribution::point_mass(matching_utility(MixedAction::pure(a), rho, matrix_));
  }
  return matched_outcome(matrix_, a, rho);
}

std::optional<PayoffSet> MatrixGame::payoff_set() const { return distinct_entries(matrix_); }

std::optional<double> MatrixGame::lipschitz_constant() const { return matrix_.max_abs(); }

double MatrixGame::expected_payoff(Action a, const ActionDistribution& rho) const {
  check_action(actions_, a, rho);
  double u = 0.0;
  for (Action b = 0; b < matrix_.size(); ++b) u += rho[b] * matrix_(a, b);
  return u;
}

namespace matrices {

PayoffMatrix prisoners_dilemma() { return PayoffMatrix({{3.0, 0.0}, {5.0, 1.0}}); }

PayoffMatrix climbing_game() {
  return PayoffMatrix({{11.0, -30.0, 0.0}, {-30.0, 7.0, 6.0}, {0.0, 0.0, 5.0}});
}

PayoffMatrix alternation_cycle() { return PayoffMatrix({{0.0, 1.0}, {1.0, 0.0}}); }

std::optional<PayoffMatrix> bundled(std::string_view name) {
  if (name == "pd") return prisoners_dilemma();
  if (name == "climbing") return climbing_game();
  if (name == "cycle") return alternation_cycle();
  return std::nullopt;
}

std::vector<std::string> bundled_labels(std::string_view name) {
  if (name == "pd") return {"C", "D"};
  if (name == "climbing") return {"a", "b", "c"};
  return {};
}

}  // namespace matrices

}  // namespace stagelearn
