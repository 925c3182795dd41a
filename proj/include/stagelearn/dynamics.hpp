#pragma once

// Approximate best-reply dynamics and the closeness machinery used to relate
// a noisy population to an exact best-reply sequence.

#include <optional>
#include <string_view>
#include <vector>

#include "stagelearn/game_core.hpp"

namespace stagelearn {

/// How br_step spreads mass over the eta-best replies.
enum class ReplyRule {
  uniform,    // equal weight on every member
  pointmass,  // all weight on the lowest-index member
};

ReplyRule parse_reply_rule(std::string_view text);
std::string_view to_string(ReplyRule rule);

/// ABR_eta(rho): actions a' with u(a', rho) + eta >= max_a u(a, rho), ascending.
std::vector<Action> best_reply_set(const ActionDistribution& rho, double eta,
                                   const AnonymousGame& game);

ActionDistribution br_step(const ActionDistribution& rho, double eta, const AnonymousGame& game,
                           ReplyRule rule);

struct BestReplySequence {
  /// steps[0] is the start; steps[i + 1] = br_step(steps[i]).
  std::vector<ActionDistribution> steps;
  bool converged = false;
  /// First index t whose successor equals it, when converged.
  std::optional<std::size_t> fixed_point_index;
};

/// Iterates br_step up to max_steps times, stopping at the first fixed point.
/// `tolerance` is the L1 distance under which two steps count as equal; the
/// default 0 demands exact equality.
BestReplySequence br_sequence(const ActionDistribution& rho0, double eta,
                              const AnonymousGame& game, int max_steps,
                              ReplyRule rule = ReplyRule::pointmass, double tolerance = 0.0);

/// True iff every action in the support of rho is an eta-best reply to rho.
bool is_eta_nash(const ActionDistribution& rho, double eta, const AnonymousGame& game);

/// Finite-population witness that rho_hat is (e, eps)-close to rho.
struct CloseWitness {
  std::vector<Action> g;             // pure profile realizing rho
  std::vector<Action> g_prime;       // profile after an e fraction changed
  std::vector<MixedAction> g_hat;    // g_prime(i) with common exploration eps' <= eps
  double e = 0.0;
  double eps = 0.0;
};

/// Empirical distribution of a pure profile.
ActionDistribution profile_distribution(std::span<const Action> profile, int k);
/// Average of the agents' mixed actions.
ActionDistribution profile_distribution(std::span<const MixedAction> profile, int k);

/// Checks every closeness condition against the witness's empirical
/// distributions. Distribution equality is tested to 1e-9 in L1.
bool verify_close(const CloseWitness& witness, const ActionDistribution& rho,
                  const ActionDistribution& rho_hat);

/// 2 (e + eps): the L1 radius that (e, eps)-closeness guarantees.
double close_l1_bound(double e, double eps);

/// eta / (8K): below this e + eps, ABR_{eta/2}(rho_hat) is inside ABR_eta(rho).
double abr_containment_threshold(double eta, double lipschitz);

}  // namespace stagelearn
