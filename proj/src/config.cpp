#include "stagelearn/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace stagelearn {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

template <class T>
T parse_number(const std::string& key, const std::string& text, const char* what) {
  T value{};
  const std::string t = trim(text);
  const char* end = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(t.data(), end, value);
  if (t.empty() || ec != std::errc{} || ptr != end) {
    throw ConfigError(key, std::string("expected ") + what + ", got '" + text + "'");
  }
  return value;
}

int parse_int(const std::string& key, const std::string& text) {
  return parse_number<int>(key, text, "an integer");
}

double parse_double(const std::string& key, const std::string& text) {
  return parse_number<double>(key, text, "a number");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

template <class Fn>
auto wrap_contract(const std::string& key, Fn&& fn) {
  try {
    return fn();
  } catch (const ContractViolation& err) {
    throw ConfigError(key, err.what());
  }
}

using Setter = std::function<void(ExperimentSpec&, const std::string& key, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"game.kind", [](auto& s, auto&, auto& v) { s.base.game.kind = trim(v); }},
      {"game.penalty_n",
       [](auto& s, auto& k, auto& v) {
         s.base.game.penalty_n = trim(v) == "agents" ? kPenaltyFromPopulation : parse_int(k, v);
       }},
      {"game.matrix", [](auto& s, auto&, auto& v) { s.base.game.matrix = trim(v); }},
      {"game.mode",
       [](auto& s, auto& k, auto& v) {
         s.base.game.mode = wrap_contract(k, [&] { return parse_payoff_mode(trim(v)); });
       }},
      {"learner.kind",
       [](auto& s, auto& k, auto& v) {
         s.base.learner.kind = wrap_contract(k, [&] { return parse_learner_kind(trim(v)); });
       }},
      {"learner.epsilon",
       [](auto& s, auto& k, auto& v) { s.base.learner.epsilon = parse_double(k, v); }},
      {"learner.tau", [](auto& s, auto& k, auto& v) { s.base.learner.tau = parse_int(k, v); }},
      {"learner.inertia",
       [](auto& s, auto& k, auto& v) { s.base.learner.inertia = parse_double(k, v); }},
      {"learner.exploration",
       [](auto& s, auto& k, auto& v) { s.base.learner.exploration = parse_double(k, v); }},
      {"sim.n", [](auto& s, auto& k, auto& v) { s.base.n = parse_int(k, v); }},
      {"sim.rounds",
       [](auto& s, auto& k, auto& v) {
         s.base.rounds = parse_number<std::int64_t>(k, v, "an integer");
       }},
      {"sim.churn_rate", [](auto& s, auto& k, auto& v) { s.base.churn_rate = parse_double(k, v); }},
      {"sim.fixed_fraction",
       [](auto& s, auto& k, auto& v) { s.base.fixed_fraction = parse_double(k, v); }},
      {"sim.fixed_action", [](auto& s, auto& k, auto& v) { s.base.fixed_action = parse_int(k, v); }},
      {"sim.fixed_explore",
       [](auto& s, auto& k, auto& v) { s.base.fixed_explore = parse_double(k, v); }},
      {"sim.seed",
       [](auto& s, auto& k, auto& v) {
         s.base.seed = parse_number<std::uint64_t>(k, v, "an unsigned integer");
       }},
      {"sim.target", [](auto& s, auto& k, auto& v) { s.base.target = parse_int(k, v); }},
      {"sim.eta", [](auto& s, auto& k, auto& v) { s.base.eta = parse_double(k, v); }},
      {"sim.threshold", [](auto& s, auto& k, auto& v) { s.base.threshold = parse_double(k, v); }},
      {"sim.threads", [](auto& s, auto& k, auto& v) { s.base.threads = parse_int(k, v); }},
      {"sweep.n", [](auto& s, auto& k, auto& v) { s.populations = parse_int_list(k, v); }},
      {"sweep.seeds", [](auto& s, auto& k, auto& v) { s.seeds = parse_seed_list(k, v); }},
      {"sweep.learners", [](auto& s, auto& k, auto& v) { s.learners = parse_learner_list(k, v); }},
  };
  return table;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::vector<int> parse_int_list(const std::string& key, const std::string& text) {
  std::vector<int> out;
  for (const auto& item : split_list(text)) out.push_back(parse_int(key, item));
  if (out.empty()) throw ConfigError(key, "list must not be empty");
  return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& key, const std::string& text) {
  std::vector<std::uint64_t> out;
  for (const auto& item : split_list(text)) {
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      out.push_back(parse_number<std::uint64_t>(key, item, "an unsigned integer"));
      continue;
    }
    const auto lo = parse_number<std::uint64_t>(key, item.substr(0, dash), "an unsigned integer");
    const auto hi = parse_number<std::uint64_t>(key, item.substr(dash + 1), "an unsigned integer");
    if (hi < lo) throw ConfigError(key, "empty range '" + item + "'");
    if (hi - lo > 1'000'000) throw ConfigError(key, "range '" + item + "' is too large");
    for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
  }
  if (out.empty()) throw ConfigError(key, "list must not be empty");
  std::set<std::uint64_t> seen;
  for (auto s : out) {
    if (!seen.insert(s).second) throw ConfigError(key, "duplicate seed " + std::to_string(s));
  }
  return out;
}

std::vector<LearnerKind> parse_learner_list(const std::string& key, const std::string& text) {
  std::vector<LearnerKind> out;
  for (const auto& item : split_list(text)) {
    out.push_back(wrap_contract(key, [&] { return parse_learner_kind(item); }));
  }
  if (out.empty()) throw ConfigError(key, "list must not be empty");
  return out;
}

std::vector<int> ExperimentSpec::population_axis() const {
  return populations.empty() ? std::vector<int>{base.n} : populations;
}

std::vector<std::uint64_t> ExperimentSpec::seed_axis() const {
  return seeds.empty() ? std::vector<std::uint64_t>{base.seed} : seeds;
}

std::vector<LearnerKind> ExperimentSpec::learner_axis() const {
  return learners.empty() ? std::vector<LearnerKind>{base.learner.kind} : learners;
}

std::vector<RunConfig> ExperimentSpec::expand() const {
  std::vector<RunConfig> out;
  for (int n : population_axis()) {
    for (LearnerKind kind : learner_axis()) {
      for (std::uint64_t seed : seed_axis()) {
        RunConfig c = base;
        c.n = n;
        c.learner.kind = kind;
        c.seed = seed;
        out.push_back(c);
      }
    }
  }
  return out;
}

void apply_setting(ExperimentSpec& spec, const std::string& key, const std::string& value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError(key, "unknown key");
  it->second(spec, key, value);
}

ExperimentSpec parse_experiment(std::istream& in) {
  ExperimentSpec spec;
  std::set<std::string> seen;
  std::string section;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(line_no), "unterminated section header");
      }
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    if (!section.empty()) key = section + "." + key;
    if (!seen.insert(key).second) throw ConfigError(key, "repeated key");
    apply_setting(spec, key, trim(std::string_view(line).substr(eq + 1)));
  }
  return spec;
}

ExperimentSpec load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  return parse_experiment(in);
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& c) {
  return {
      {"game.kind", c.game.kind},
      {"game.penalty_n", std::to_string(c.game.penalty_n)},
      {"game.matrix", c.game.matrix},
      {"game.mode", std::string(to_string(c.game.mode))},
      {"learner.kind", std::string(to_string(c.learner.kind))},
      {"learner.epsilon", format_double(c.learner.epsilon)},
      {"learner.tau", std::to_string(c.learner.tau)},
      {"learner.inertia", format_double(c.learner.inertia)},
      {"learner.exploration", format_double(c.learner.exploration)},
      {"sim.n", std::to_string(c.n)},
      {"sim.rounds", std::to_string(c.rounds)},
      {"sim.churn_rate", format_double(c.churn_rate)},
      {"sim.fixed_fraction", format_double(c.fixed_fraction)},
      {"sim.fixed_action", std::to_string(c.fixed_action)},
      {"sim.fixed_explore", format_double(c.fixed_explore)},
      {"sim.seed", std::to_string(c.seed)},
      {"sim.target", std::to_string(c.target)},
      {"sim.eta", format_double(c.eta)},
      {"sim.threshold", format_double(c.threshold)},
  };
}

std::vector<std::pair<std::string, std::string>> sweep_entries(const ExperimentSpec& spec) {
  auto join = [](const auto& items, auto fmt) {
    std::string out;
    for (const auto& x : items) out += (out.empty() ? "" : ",") + fmt(x);
    return out;
  };
  return {
      {"sweep.n", join(spec.population_axis(), [](int n) { return std::to_string(n); })},
      {"sweep.seeds", join(spec.seed_axis(), [](std::uint64_t s) { return std::to_string(s); })},
      {"sweep.learners",
       join(spec.learner_axis(), [](LearnerKind k) { return std::string(to_string(k)); })},
  };
}

}  // namespace stagelearn
