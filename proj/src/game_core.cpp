#include "stagelearn/game_core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

namespace stagelearn {

namespace {

void require(bool ok, const char* message) {
  if (!ok) throw ContractViolation(message);
}

void require_same_size(int lhs, int rhs, const char* what) {
  if (lhs != rhs) {
    throw ContractViolation(std::string(what) + ": dimension mismatch (" + std::to_string(lhs) +
                            " vs " + std::to_string(rhs) + ")");
  }
}

}  // namespace

ActionSet::ActionSet(int size, std::vector<std::string> labels)
    : size_(size), labels_(std::move(labels)) {
  require(size_ >= 2, "ActionSet: at least two actions required");
  require(labels_.empty() || static_cast<int>(labels_.size()) == size_,
          "ActionSet: label count must equal action count");
}

std::string ActionSet::label(Action a) const {
  require(contains(a), "ActionSet::label: action out of range");
  return labels_.empty() ? std::to_string(a) : labels_[static_cast<std::size_t>(a)];
}

ActionDistribution::ActionDistribution(std::vector<double> weights) : weights_(std::move(weights)) {
  require(!weights_.empty(), "ActionDistribution: empty weight vector");
  double sum = 0.0;
  for (double w : weights_) {
    require(std::isfinite(w) && w >= 0.0, "ActionDistribution: weights must be finite and >= 0");
    sum += w;
  }
  require(std::abs(sum - 1.0) <= kTolerance, "ActionDistribution: weights must sum to 1");
  if (std::abs(sum - 1.0) > 1e-12) {
    for (double& w : weights_) w /= sum;
  }
}

ActionDistribution ActionDistribution::degenerate(int k, Action a) {
  require(k >= 1 && a >= 0 && a < k, "ActionDistribution::degenerate: action out of range");
  std::vector<double> w(static_cast<std::size_t>(k), 0.0);
  w[static_cast<std::size_t>(a)] = 1.0;
  return ActionDistribution(std::move(w));
}

ActionDistribution ActionDistribution::uniform(int k) {
  require(k >= 1, "ActionDistribution::uniform: k must be positive");
  return ActionDistribution(std::vector<double>(static_cast<std::size_t>(k), 1.0 / k));
}

ActionDistribution ActionDistribution::from_counts(std::span<const std::uint64_t> counts) {
  const std::uint64_t total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  require(total > 0, "ActionDistribution::from_counts: no observations");
  std::vector<double> w(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    w[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
  }
  return ActionDistribution(std::move(w));
}

std::vector<Action> ActionDistribution::support() const {
  std::vector<Action> out;
  for (int a = 0; a < size(); ++a) {
    if ((*this)[a] > 0.0) out.push_back(a);
  }
  return out;
}

double ActionDistribution::mean() const {
  double m = 0.0;
  for (int a = 0; a < size(); ++a) m += a * (*this)[a];
  return m;
}

MixedAction::MixedAction(Action base, double explore) : base_(base), explore_(explore) {
  require(base_ >= 0, "MixedAction: negative base action");
  require(std::isfinite(explore_) && explore_ >= 0.0 && explore_ < 1.0,
          "MixedAction: exploration rate must lie in [0, 1)");
}

double MixedAction::probability(Action a, int k) const {
  require(base_ < k && a >= 0 && a < k, "MixedAction::probability: action out of range");
  require(k >= 2 || explore_ == 0.0, "MixedAction: exploration needs at least two actions");
  if (a == base_) return 1.0 - explore_;
  return explore_ / (k - 1);
}

ActionDistribution MixedAction::distribution(int k) const {
  std::vector<double> w(static_cast<std::size_t>(k));
  for (int a = 0; a < k; ++a) w[static_cast<std::size_t>(a)] = probability(a, k);
  return ActionDistribution(std::move(w));
}

Action MixedAction::sample(int k, Rng& rng) const {
  require(base_ < k, "MixedAction::sample: base out of range");
  const double u = uniform01(rng);
  if (u >= explore_) return base_;
  // u / explore is uniform on [0, 1): spread it over the k - 1 other actions.
  auto j = static_cast<Action>(u / explore_ * (k - 1));
  j = std::min(j, k - 2);
  return j < base_ ? j : j + 1;
}

PayoffSet::PayoffSet(std::vector<double> values) : values_(std::move(values)) {
  require(!values_.empty(), "PayoffSet: empty");
  for (double v : values_) require(std::isfinite(v), "PayoffSet: non-finite payoff");
  std::vector<double> sorted = values_;
  std::sort(sorted.begin(), sorted.end());
  require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
          "PayoffSet: payoffs must be distinct");
}

bool PayoffSet::contains(double p) const {
  return std::find(values_.begin(), values_.end(), p) != values_.end();
}

PayoffDistribution::PayoffDistribution(std::vector<double> payoffs, std::vector<double> probs) {
  require(!payoffs.empty() && payoffs.size() == probs.size(),
          "PayoffDistribution: payoffs and probabilities must be nonempty and aligned");
  std::vector<std::size_t> order(payoffs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return payoffs[i] < payoffs[j]; });
  double sum = 0.0;
  for (std::size_t i : order) {
    require(std::isfinite(payoffs[i]), "PayoffDistribution: non-finite payoff");
    require(std::isfinite(probs[i]) && probs[i] >= 0.0,
            "PayoffDistribution: probabilities must be finite and >= 0");
    sum += probs[i];
    if (probs[i] == 0.0) continue;
    if (!payoffs_.empty() && payoffs_.back() == payoffs[i]) {
      probs_.back() += probs[i];
    } else {
      payoffs_.push_back(payoffs[i]);
      probs_.push_back(probs[i]);
    }
  }
  require(std::abs(sum - 1.0) <= ActionDistribution::kTolerance,
          "PayoffDistribution: probabilities must sum to 1");
  if (sum != 1.0) {
    for (double& q : probs_) q /= sum;
  }
}

PayoffDistribution PayoffDistribution::point_mass(double payoff) {
  return PayoffDistribution({payoff}, {1.0});
}

double PayoffDistribution::expectation() const {
  double e = 0.0;
  for (std::size_t i = 0; i < payoffs_.size(); ++i) e += payoffs_[i] * probs_[i];
  return e;
}

PayoffMatrix::PayoffMatrix(std::vector<std::vector<double>> rows)
    : size_(static_cast<int>(rows.size())) {
  require(size_ >= 2, "PayoffMatrix: at least two actions required");
  entries_.reserve(static_cast<std::size_t>(size_ * size_));
  for (const auto& row : rows) {
    require(static_cast<int>(row.size()) == size_, "PayoffMatrix: matrix must be square");
    for (double v : row) {
      require(std::isfinite(v), "PayoffMatrix: non-finite entry");
      entries_.push_back(v);
    }
  }
}

PayoffMatrix PayoffMatrix::parse(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::vector<double> row;
    std::string tok;
    while (tokens >> tok) {
      double v = 0.0;
      const auto* end = tok.data() + tok.size();
      auto [ptr, ec] = std::from_chars(tok.data(), end, v);
      if (ec != std::errc{} || ptr != end) {
        throw ContractViolation("matrix line " + std::to_string(line_no) + ": bad number '" + tok +
                                "'");
      }
      row.push_back(v);
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return PayoffMatrix(std::move(rows));
}

PayoffMatrix PayoffMatrix::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open matrix file " + path.string());
  return parse(in);
}

double PayoffMatrix::max_abs() const {
  double m = 0.0;
  for (double v : entries_) m = std::max(m, std::abs(v));
  return m;
}

double PayoffMatrix::min() const { return *std::min_element(entries_.begin(), entries_.end()); }

double PayoffMatrix::max() const { return *std::max_element(entries_.begin(), entries_.end()); }

std::string PayoffMatrix::to_text() const {
  std::ostringstream out;
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (int a = 0; a < size_; ++a) {
    for (int b = 0; b < size_; ++b) out << (b ? " " : "") << (*this)(a, b);
    out << '\n';
  }
  return out.str();
}

double utility(const ActionDistribution& s, const ActionDistribution& rho,
               const AnonymousGame& game) {
  const int k = game.num_actions();
  require_same_size(s.size(), k, "utility(s)");
  require_same_size(rho.size(), k, "utility(rho)");
  double u = 0.0;
  for (Action a = 0; a < k; ++a) {
    if (s[a] == 0.0) continue;
    const PayoffDistribution outcome = game.payoff_channel(a, rho);
    const auto payoffs = outcome.payoffs();
    const auto probs = outcome.probs();
    for (std::size_t i = 0; i < payoffs.size(); ++i) u += payoffs[i] * s[a] * probs[i];
  }
  return u;
}

double utility(const MixedAction& s, const ActionDistribution& rho, const AnonymousGame& game) {
  return utility(s.distribution(game.num_actions()), rho, game);
}

double matching_utility(const ActionDistribution& s, const ActionDistribution& rho,
                        const PayoffMatrix& matrix) {
  const int k = matrix.size();
  require_same_size(s.size(), k, "matching_utility(s)");
  require_same_size(rho.size(), k, "matching_utility(rho)");
  double u = 0.0;
  for (Action a = 0; a < k; ++a) {
    for (Action b = 0; b < k; ++b) u += s[a] * rho[b] * matrix(a, b);
  }
  return u;
}

double matching_utility(const MixedAction& s, const ActionDistribution& rho,
                        const PayoffMatrix& matrix) {
  return matching_utility(s.distribution(matrix.size()), rho, matrix);
}

double l1_distance(const ActionDistribution& lhs, const ActionDistribution& rhs) {
  require_same_size(lhs.size(), rhs.size(), "l1_distance");
  double d = 0.0;
  for (Action a = 0; a < lhs.size(); ++a) d += std::abs(lhs[a] - rhs[a]);
  return d;
}

namespace {

// Mixes interior points with vertices and edges of the simplex; the Lipschitz
// ratio of a linear utility is attained on the boundary.
ActionDistribution random_distribution(int k, Rng& rng) {
  std::vector<double> w(static_cast<std::size_t>(k), 0.0);
  switch (uniform_index(rng, 3)) {
    case 0: {
      double sum = 0.0;
      for (double& x : w) {
        x = -std::log1p(-uniform01(rng));
        sum += x;
      }
      for (double& x : w) x /= sum;
      break;
    }
    case 1:
      w[uniform_index(rng, static_cast<std::uint64_t>(k))] = 1.0;
      break;
    default: {
      const double t = uniform01(rng);
      w[uniform_index(rng, static_cast<std::uint64_t>(k))] += t;
      w[uniform_index(rng, static_cast<std::uint64_t>(k))] += 1.0 - t;
      break;
    }
  }
  return ActionDistribution(std::move(w));
}

}  // namespace

double estimate_lipschitz(const AnonymousGame& game, int samples, std::uint64_t seed) {
  require(samples >= 2, "estimate_lipschitz: need at least two samples");
  const int k = game.num_actions();
  Rng rng = make_stream(seed, StreamKind::sampling);

  std::vector<ActionDistribution> points;
  std::vector<std::vector<double>> values;
  points.reserve(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    points.push_back(random_distribution(k, rng));
    std::vector<double> u(static_cast<std::size_t>(k));
    for (Action a = 0; a < k; ++a) u[static_cast<std::size_t>(a)] = game.expected_payoff(a, points.back());
    values.push_back(std::move(u));
  }

  double best = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double d = l1_distance(points[i], points[j]);
      if (d < 1e-12) continue;
      for (std::size_t a = 0; a < values[i].size(); ++a) {
        best = std::max(best, std::abs(values[i][a] - values[j][a]) / d);
      }
    }
  }
  return best;
}

}  // namespace stagelearn
