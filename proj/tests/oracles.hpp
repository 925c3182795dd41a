#pragma once

// Reference computations written directly from the model definitions,
// independent of the library code paths they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <vector>

#include "stagelearn/game_core.hpp"
#include "stagelearn/rng.hpp"

namespace oracle {

inline double cost(int x, int penalty) {
  if (x == 0) return 0.0;
  if (x == 1) return 1.0;
  if (x <= 8) return static_cast<double>((x - 1) * (x - 1));
  return static_cast<double>(x * x + 2 * penalty);
}

inline double mean_of(const std::vector<double>& rho) {
  double m = 0.0;
  for (std::size_t y = 0; y < rho.size(); ++y) m += static_cast<double>(y) * rho[y];
  return m;
}

// Contribution game against the average contribution y.
inline double contribution(int x, double y, int penalty) { return 2.0 * x * y - cost(x, penalty); }

// Expected payoff of x against an opponent drawn from rho, element by element.
inline double matched(int x, const std::vector<double>& rho, int penalty) {
  double u = 0.0;
  for (std::size_t y = 0; y < rho.size(); ++y) {
    u += rho[y] * (2.0 * x * static_cast<double>(y) - cost(x, penalty));
  }
  return u;
}

inline double bilinear(const std::vector<std::vector<double>>& p, const std::vector<double>& s,
                       const std::vector<double>& rho) {
  double u = 0.0;
  for (std::size_t a = 0; a < s.size(); ++a) {
    for (std::size_t b = 0; b < rho.size(); ++b) u += s[a] * rho[b] * p[a][b];
  }
  return u;
}

// Brute-force eta-best replies given a per-action utility function.
inline std::vector<int> best_replies(int k, double eta, const std::function<double(int)>& u) {
  double best = -INFINITY;
  for (int a = 0; a < k; ++a) best = std::max(best, u(a));
  std::vector<int> out;
  for (int a = 0; a < k; ++a) {
    if (u(a) + eta >= best) out.push_back(a);
  }
  return out;
}

inline double distance(const std::vector<double>& rho, int target) {
  double d = 0.0;
  for (std::size_t a = 0; a < rho.size(); ++a) {
    d += rho[a] * std::abs(static_cast<int>(a) - target);
  }
  return d;
}

// Distance of target_eps from target: eps spread evenly over the other k-1 actions.
inline double exploration_floor(int k, int target, double eps) {
  double off = 0.0;
  for (int a = 0; a < k; ++a) off += std::abs(a - target);
  return eps * off / (k - 1);
}

// Regret-matching play probabilities recomputed from the full history of
// (probabilities used, action played, payoff received).
struct RegretHistoryEntry {
  std::vector<double> probs;
  int played;
  double payoff;
};

inline std::vector<double> regret_probabilities(const std::vector<RegretHistoryEntry>& history,
                                                int m, double mu, double delta) {
  if (history.empty()) return std::vector<double>(static_cast<std::size_t>(m), 1.0 / m);
  const int j = history.back().played;
  const double t = static_cast<double>(history.size());
  std::vector<double> p(static_cast<std::size_t>(m), 0.0);
  double off = 0.0;
  for (int k = 0; k < m; ++k) {
    if (k == j) continue;
    double c = 0.0;
    for (const auto& h : history) {
      if (h.played == k) c += h.probs[j] / h.probs[k] * h.payoff;
      if (h.played == j) c -= h.payoff;
    }
    c /= t;
    p[k] = (1.0 - delta) * std::min(std::max(c, 0.0) / mu, 1.0 / (m - 1)) + delta / m;
    off += p[k];
  }
  p[j] = 1.0 - off;
  return p;
}

// Random probability vector of length k (flat Dirichlet).
inline std::vector<double> random_simplex(int k, stagelearn::Rng& rng) {
  std::vector<double> w(static_cast<std::size_t>(k));
  double sum = 0.0;
  for (auto& x : w) {
    x = -std::log(1.0 - stagelearn::uniform01(rng));
    sum += x;
  }
  for (auto& x : w) x /= sum;
  return w;
}

inline std::vector<double> weights(const stagelearn::ActionDistribution& rho) {
  return {rho.weights().begin(), rho.weights().end()};
}

// |observed - p n| <= 3 sqrt(n p (1 - p)).
inline bool within_binomial(double observed, double n, double p, double sigmas = 3.0) {
  return std::abs(observed - p * n) <= sigmas * std::sqrt(n * p * (1.0 - p));
}

}  // namespace oracle

// Constant-payoff game used for degenerate cases.
class ConstantGame final : public stagelearn::AnonymousGame {
 public:
  ConstantGame(int k, double value) : actions_(k), value_(value) {}
  const stagelearn::ActionSet& actions() const override { return actions_; }
  std::string name() const override { return "constant"; }
  stagelearn::PayoffDistribution payoff_channel(stagelearn::Action,
                                                const stagelearn::ActionDistribution&) const override {
    return stagelearn::PayoffDistribution::point_mass(value_);
  }
  std::optional<stagelearn::PayoffSet> payoff_set() const override {
    return stagelearn::PayoffSet({value_});
  }
  std::optional<double> lipschitz_constant() const override { return 0.0; }

 private:
  stagelearn::ActionSet actions_;
  double value_;
};
