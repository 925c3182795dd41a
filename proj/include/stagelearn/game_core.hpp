#pragma once

// Core model of a large anonymous game: every agent shares the action set and
// the payoff law, and an agent's payoff depends only on its own action and the
// population's action distribution.

#include <cstdint>
#include <istream>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stagelearn/errors.hpp"
#include "stagelearn/rng.hpp"

namespace stagelearn {

using Action = int;

class ActionSet {
 public:
  explicit ActionSet(int size, std::vector<std::string> labels = {});

  int size() const noexcept { return size_; }
  bool contains(Action a) const noexcept { return a >= 0 && a < size_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  /// Display name; the index itself when no labels were given.
  std::string label(Action a) const;

 private:
  int size_;
  std::vector<std::string> labels_;
};

/// A point of the simplex over k actions. Validated and renormalized once at
/// construction, immutable afterwards.
class ActionDistribution {
 public:
  static constexpr double kTolerance = 1e-9;

  explicit ActionDistribution(std::vector<double> weights);

  static ActionDistribution degenerate(int k, Action a);
  static ActionDistribution uniform(int k);
  static ActionDistribution from_counts(std::span<const std::uint64_t> counts);

  int size() const noexcept { return static_cast<int>(weights_.size()); }
  double operator[](Action a) const { return weights_[static_cast<std::size_t>(a)]; }
  std::span<const double> weights() const noexcept { return weights_; }
  std::vector<Action> support() const;
  /// Sum over a of a * rho(a), reading action indices as numbers.
  double mean() const;

  friend bool operator==(const ActionDistribution&, const ActionDistribution&) = default;

 private:
  std::vector<double> weights_;
};

/// The strategy a_eps: play `base` with probability 1 - eps and every other
/// action with probability eps / (k - 1).
class MixedAction {
 public:
  MixedAction(Action base, double explore = 0.0);

  static MixedAction pure(Action a) { return MixedAction(a, 0.0); }

  Action base() const noexcept { return base_; }
  double explore() const noexcept { return explore_; }

  double probability(Action a, int k) const;
  ActionDistribution distribution(int k) const;

  /// Draws an action using exactly one engine draw.
  Action sample(int k, Rng& rng) const;

  friend bool operator==(const MixedAction&, const MixedAction&) = default;

 private:
  Action base_;
  double explore_;
};

class PayoffSet {
 public:
  explicit PayoffSet(std::vector<double> values);

  const std::vector<double>& values() const noexcept { return values_; }
  bool contains(double p) const;

 private:
  std::vector<double> values_;
};

/// Finite-support law over payoff values. Equal values are merged.
class PayoffDistribution {
 public:
  PayoffDistribution(std::vector<double> payoffs, std::vector<double> probs);

  static PayoffDistribution point_mass(double payoff);

  std::span<const double> payoffs() const noexcept { return payoffs_; }
  std::span<const double> probs() const noexcept { return probs_; }
  double expectation() const;

 private:
  std::vector<double> payoffs_;
  std::vector<double> probs_;
};

/// k x k payoff table; entry (a, b) is the payoff to a player choosing a
/// against an opponent choosing b.
class PayoffMatrix {
 public:
  explicit PayoffMatrix(std::vector<std::vector<double>> rows);

  /// Whitespace-separated rows, one per line; `#` starts a comment.
  static PayoffMatrix parse(std::istream& in);
  static PayoffMatrix load(const std::filesystem::path& path);

  int size() const noexcept { return size_; }
  double operator()(Action a, Action opponent) const {
    return entries_[static_cast<std::size_t>(a * size_ + opponent)];
  }
  double max_abs() const;
  double min() const;
  double max() const;
  std::string to_text() const;

 private:
  int size_;
  std::vector<double> entries_;
};

/// Interface for Pr: A x Delta(A) -> Delta(P). Implementations are immutable
/// and deterministic in (a, rho).
class AnonymousGame {
 public:
  virtual ~AnonymousGame() = default;

  virtual const ActionSet& actions() const = 0;
  virtual std::string name() const = 0;

  virtual PayoffDistribution payoff_channel(Action a, const ActionDistribution& rho) const = 0;

  /// The global finite payoff set, when the game has one independent of rho.
  virtual std::optional<PayoffSet> payoff_set() const = 0;

  /// Analytic Lipschitz constant of u(a, .) under L1; nullopt means the
  /// constant is only available through estimate_lipschitz.
  virtual std::optional<double> lipschitz_constant() const = 0;

  /// Two-player table when payoffs arise from pairwise random matching.
  virtual const PayoffMatrix* pairwise_matrix() const { return nullptr; }

  /// u(a, rho). Overrides must agree with the channel's expectation.
  virtual double expected_payoff(Action a, const ActionDistribution& rho) const {
    return payoff_channel(a, rho).expectation();
  }

  int num_actions() const { return actions().size(); }
};

/// u(s, rho) = sum_a sum_p p s(a) Pr_{a,rho}(p), evaluated exactly.
double utility(const ActionDistribution& s, const ActionDistribution& rho,
               const AnonymousGame& game);
double utility(const MixedAction& s, const ActionDistribution& rho, const AnonymousGame& game);

/// Bilinear form sum_{a,b} s(a) rho(b) p[a][b].
double matching_utility(const ActionDistribution& s, const ActionDistribution& rho,
                        const PayoffMatrix& matrix);
double matching_utility(const MixedAction& s, const ActionDistribution& rho,
                        const PayoffMatrix& matrix);

double l1_distance(const ActionDistribution& lhs, const ActionDistribution& rhs);

/// Largest observed |u(a,rho) - u(a,rho')| / ||rho - rho'||_1 over `samples`
/// random distributions (all pairs) and all actions. A lower bound on K.
double estimate_lipschitz(const AnonymousGame& game, int samples, std::uint64_t seed);

}  // namespace stagelearn
