#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "stagelearn/game_core.hpp"

namespace stagelearn {

/// How a round's payoffs are produced from the population's actions.
enum class PayoffMode {
  mean_field,  // exact expected payoff against the others' distribution
  matching,    // payoff from one uniformly drawn opponent
};

PayoffMode parse_payoff_mode(std::string_view text);
std::string_view to_string(PayoffMode mode);

inline constexpr int kContributionActions = 20;
inline constexpr int kDefaultPenaltyN = 20;

/// c(0)=0, c(1)=1, c(x)=(x-1)^2 for 2<=x<=8, c(x)=x^2+2*penalty_n above 8.
double contribution_cost(Action x, int penalty_n = kDefaultPenaltyN);

/// 2xy - c(x).
double contribution_utility(Action x, double y, int penalty_n = kDefaultPenaltyN);

/// Point mass at contribution_utility(a, E_rho[x]).
PayoffDistribution contribution_meanfield_channel(Action a, const ActionDistribution& rho,
                                                  int penalty_n = kDefaultPenaltyN);

/// Collective-effort game on contribution levels 0..19. In mean-field mode
/// the payoff is deterministic given rho; in matching mode it is
/// 2 x y - c(x) for a partner's y drawn from rho. Both share the same
/// expected utility.
class ContributionGame final : public AnonymousGame {
 public:
  explicit ContributionGame(int penalty_n = kDefaultPenaltyN,
                            PayoffMode mode = PayoffMode::mean_field);

  const ActionSet& actions() const override { return actions_; }
  std::string name() const override;
  PayoffDistribution payoff_channel(Action a, const ActionDistribution& rho) const override;
  std::optional<PayoffSet> payoff_set() const override;
  /// max_a 2a * (k-1)/2 = (k-1)^2, since |E_rho[x] - E_rho'[x]| <= (k-1)/2 ||rho - rho'||_1.
  std::optional<double> lipschitz_constant() const override;
  const PayoffMatrix* pairwise_matrix() const override { return &matrix_; }
  double expected_payoff(Action a, const ActionDistribution& rho) const override;

  int penalty_n() const noexcept { return penalty_n_; }
  PayoffMode mode() const noexcept { return mode_; }

 private:
  int penalty_n_;
  PayoffMode mode_;
  ActionSet actions_;
  PayoffMatrix matrix_;
};

/// Symmetric two-player matrix game played against a random opponent.
class MatrixGame final : public AnonymousGame {
 public:
  MatrixGame(PayoffMatrix matrix, PayoffMode mode = PayoffMode::mean_field,
             std::string name = "matrix", std::vector<std::string> labels = {});

  const ActionSet& actions() const override { return actions_; }
  std::string name() const override { return name_; }
  PayoffDistribution payoff_channel(Action a, const ActionDistribution& rho) const override;
  std::optional<PayoffSet> payoff_set() const override;
  /// max |p[a][b]|.
  std::optional<double> lipschitz_constant() const override;
  const PayoffMatrix* pairwise_matrix() const override { return &matrix_; }
  double expected_payoff(Action a, const ActionDistribution& rho) const override;

  const PayoffMatrix& matrix() const noexcept { return matrix_; }
  PayoffMode mode() const noexcept { return mode_; }

 private:
  PayoffMatrix matrix_;
  PayoffMode mode_;
  std::string name_;
  ActionSet actions_;
};

// Bundled tables. These come from the wider literature, not from the
// contribution-game experiments.
namespace matrices {

/// Actions (Cooperate, Defect); R=3, S=0, T=5, P=1.
PayoffMatrix prisoners_dilemma();

/// Three-action climbing game with the usual 11 / -30 / 7 / 6 / 5 / 0 entries.
PayoffMatrix climbing_game();

/// 2x2 anti-coordination table whose pure best replies alternate forever.
PayoffMatrix alternation_cycle();

/// Looks up a bundled table by name ("pd", "climbing", "cycle").
std::optional<PayoffMatrix> bundled(std::string_view name);
std::vector<std::string> bundled_labels(std::string_view name);

}  // namespace matrices

}  // namespace stagelearn
