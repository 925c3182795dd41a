#include "stagelearn/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace stagelearn {

namespace {

constexpr double kDistributionMatch = 1e-9;
constexpr double kBoundSlack = 1e-12;

}  // namespace

ReplyRule parse_reply_rule(std::string_view text) {
  if (text == "uniform") return ReplyRule::uniform;
  if (text == "pointmass") return ReplyRule::pointmass;
  throw ContractViolation("unknown reply rule '" + std::string(text) + "'");
}

std::string_view to_string(ReplyRule rule) {
  return rule == ReplyRule::uniform ? "uniform" : "pointmass";
}

std::vector<Action> best_reply_set(const ActionDistribution& rho, double eta,
                                   const AnonymousGame& game) {
  if (!(eta >= 0.0)) throw ContractViolation("best_reply_set: eta must be >= 0");
  const int k = game.num_actions();
  if (rho.size() != k) throw ContractViolation("best_reply_set: dimension mismatch");
  std::vector<double> u(static_cast<std::size_t>(k));
  for (Action a = 0; a < k; ++a) u[static_cast<std::size_t>(a)] = game.expected_payoff(a, rho);
  const double best = *std::max_element(u.begin(), u.end());
  std::vector<Action> out;
  for (Action a = 0; a < k; ++a) {
    if (u[static_cast<std::size_t>(a)] + eta >= best) out.push_back(a);
  }
  return out;
}

ActionDistribution br_step(const ActionDistribution& rho, double eta, const AnonymousGame& game,
                           ReplyRule rule) {
  const auto replies = best_reply_set(rho, eta, game);
  const int k = game.num_actions();
  if (rule == ReplyRule::pointmass) return ActionDistribution::degenerate(k, replies.front());
  std::vector<double> w(static_cast<std::size_t>(k), 0.0);
  for (Action a : replies) w[static_cast<std::size_t>(a)] = 1.0 / static_cast<double>(replies.size());
  return ActionDistribution(std::move(w));
}

BestReplySequence br_sequence(const ActionDistribution& rho0, double eta,
                              const AnonymousGame& game, int max_steps, ReplyRule rule,
                              double tolerance) {
  if (max_steps < 1) throw ContractViolation("br_sequence: max_steps must be >= 1");
  if (!(tolerance >= 0.0)) throw ContractViolation("br_sequence: tolerance must be >= 0");
  BestReplySequence seq;
  seq.steps.push_back(rho0);
  for (int i = 0; i < max_steps; ++i) {
    ActionDistribution next = br_step(seq.steps.back(), eta, game, rule);
    const bool same = tolerance == 0.0 ? next == seq.steps.back()
                                       : l1_distance(next, seq.steps.back()) <= tolerance;
    seq.steps.push_back(std::move(next));
    if (same) {
      seq.converged = true;
      seq.fixed_point_index = seq.steps.size() - 2;
      break;
    }
  }
  return seq;
}

bool is_eta_nash(const ActionDistribution& rho, double eta, const AnonymousGame& game) {
  const auto replies = best_reply_set(rho, eta, game);
  for (Action a : rho.support()) {
    if (!std::binary_search(replies.begin(), replies.end(), a)) return false;
  }
  return true;
}

ActionDistribution profile_distribution(std::span<const Action> profile, int k) {
  if (profile.empty()) throw ContractViolation("profile_distribution: empty population");
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(k), 0);
  for (Action a : profile) {
    if (a < 0 || a >= k) throw ContractViolation("profile_distribution: action out of range");
    ++counts[static_cast<std::size_t>(a)];
  }
  return ActionDistribution::from_counts(counts);
}

ActionDistribution profile_distribution(std::span<const MixedAction> profile, int k) {
  if (profile.empty()) throw ContractViolation("profile_distribution: empty population");
  std::vector<double> w(static_cast<std::size_t>(k), 0.0);
  for (const MixedAction& s : profile) {
    for (Action a = 0; a < k; ++a) w[static_cast<std::size_t>(a)] += s.probability(a, k);
  }
  for (double& x : w) x /= static_cast<double>(profile.size());
  return ActionDistribution(std::move(w));
}

bool verify_close(const CloseWitness& witness, const ActionDistribution& rho,
                  const ActionDistribution& rho_hat) {
  const std::size_t n = witness.g.size();
  if (witness.g_prime.size() != n || witness.g_hat.size() != n) {
    throw ContractViolation("verify_close: population-size mismatch");
  }
  if (rho.size() != rho_hat.size()) throw ContractViolation("verify_close: dimension mismatch");
  if (n == 0) throw ContractViolation("verify_close: empty population");
  const int k = rho.size();

  // g(i) in A for all i; out-of-range actions make the witness invalid.
  auto in_range = [k](Action a) { return a >= 0 && a < k; };
  if (!std::all_of(witness.g.begin(), witness.g.end(), in_range)) return false;
  if (!std::all_of(witness.g_prime.begin(), witness.g_prime.end(), in_range)) return false;
  for (const MixedAction& s : witness.g_hat) {
    if (!in_range(s.base())) return false;
  }

  const ActionDistribution rho_g = profile_distribution(std::span<const Action>(witness.g), k);
  const ActionDistribution rho_g_prime =
      profile_distribution(std::span<const Action>(witness.g_prime), k);
  const ActionDistribution rho_g_hat =
      profile_distribution(std::span<const MixedAction>(witness.g_hat), k);

  if (l1_distance(rho, rho_g) > kDistributionMatch) return false;
  if (l1_distance(rho_hat, rho_g_hat) > kDistributionMatch) return false;
  if (l1_distance(rho_g, rho_g_prime) > 2.0 * witness.e + kBoundSlack) return false;

  const double common = witness.g_hat.front().explore();
  if (common > witness.eps) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if (witness.g_hat[i].base() != witness.g_prime[i]) return false;
    if (witness.g_hat[i].explore() != common) return false;
  }
  return true;
}

double close_l1_bound(double e, double eps) {
  if (!(e >= 0.0 && e <= 1.0 && eps >= 0.0 && eps <= 1.0)) {
    throw ContractViolation("close_l1_bound: e and eps must lie in [0, 1]");
  }
  return 2.0 * (e + eps);
}

double abr_containment_threshold(double eta, double lipschitz) {
  if (!(eta > 0.0)) throw ContractViolation("abr_containment_threshold: eta must be > 0");
  if (lipschitz == 0.0) {
    throw ContractViolation("abr_containment_threshold: K = 0 (constant game needs no threshold)");
  }
  if (!(lipschitz > 0.0)) throw ContractViolation("abr_containment_threshold: K must be > 0");
  return eta / (8.0 * lipschitz);
}

}  // namespace stagelearn
