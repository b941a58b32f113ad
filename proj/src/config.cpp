#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "cbsql/errors.hpp"
#include "cbsql/harness.hpp"

namespace cbsql::harness {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Tracks which keys were consumed so leftovers can be rejected.
class KeyValues {
 public:
  explicit KeyValues(std::string_view text) {
    std::size_t line_no = 0;
    while (!text.empty()) {
      const auto eol = text.find('\n');
      std::string_view line = text.substr(0, eol);
      text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
      ++line_no;
      line = trim(line);
      if (line.empty() || line.front() == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) {
        throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
      }
      std::string key(trim(line.substr(0, eq)));
      std::string value(trim(line.substr(eq + 1)));
      if (key.empty()) throw ConfigError("line " + std::to_string(line_no), "empty key");
      if (value.empty()) throw ConfigError(key, "empty value");
      if (!entries_.emplace(key, value).second) throw ConfigError(key, "given more than once");
    }
  }

  std::optional<std::string> take(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    std::string value = std::move(it->second);
    entries_.erase(it);
    return value;
  }

  std::string require(const std::string& key) {
    auto v = take(key);
    if (!v) throw ConfigError(key, "required key is missing");
    return *v;
  }

  void reject_leftovers() const {
    if (!entries_.empty()) {
      throw ConfigError(entries_.begin()->first, "unknown key, or not applicable to the selected kind");
    }
  }

 private:
  std::map<std::string, std::string> entries_;
};

double to_real(const std::string& key, const std::string& value) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) throw ConfigError(key, "not a number: " + value);
  return out;
}

template <typename Int>
Int to_integer(const std::string& key, const std::string& value) {
  Int out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) throw ConfigError(key, "not an integer: " + value);
  return out;
}

// Accepts "p/q" or a plain decimal such as "-0.1", kept exact.
env::Rational to_rational(const std::string& key, const std::string& value) {
  try {
    const auto slash = value.find('/');
    if (slash != std::string::npos) {
      return env::Rational(to_integer<std::int64_t>(key, value.substr(0, slash)),
                           to_integer<std::int64_t>(key, value.substr(slash + 1)));
    }
    std::string digits = value;
    std::int64_t denom = 1;
    const auto dot = digits.find('.');
    if (dot != std::string::npos) {
      const std::size_t decimals = digits.size() - dot - 1;
      if (decimals > 15) throw ConfigError(key, "too many decimals");
      for (std::size_t i = 0; i < decimals; ++i) denom *= 10;
      digits.erase(dot, 1);
    }
    return env::Rational(to_integer<std::int64_t>(key, digits), denom);
  } catch (const boost::bad_rational&) {
    throw ConfigError(key, "zero denominator");
  }
}

template <typename T>
void maybe(KeyValues& kv, const std::string& key, T& field) {
  auto v = kv.take(key);
  if (!v) return;
  if constexpr (std::is_same_v<T, double>) {
    field = to_real(key, *v);
  } else if constexpr (std::is_same_v<T, env::Rational>) {
    field = to_rational(key, *v);
  } else {
    field = to_integer<T>(key, *v);
  }
}

agents::CountedState to_counted_state(const std::string& key, const std::string& v) {
  if (v == "next") return agents::CountedState::Next;
  if (v == "current") return agents::CountedState::Current;
  throw ConfigError(key, "expected 'next' or 'current'");
}

// true when the horizon should be reported as terminal
bool to_time_limit(const std::string& v) {
  if (v == "truncate") return false;
  if (v == "terminate") return true;
  throw ConfigError("env.time_limit", "expected 'truncate' or 'terminate'");
}

std::vector<int> to_actions(const std::string& key, const std::string& v) {
  std::vector<int> actions;
  std::stringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) actions.push_back(to_integer<int>(key, std::string(trim(item))));
  if (actions.empty()) throw ConfigError(key, "empty action list");
  return actions;
}

void parse_env(KeyValues& kv, EnvConfig& env) {
  const std::string kind = kv.require("env.kind");
  if (kind == "chain") {
    env.kind = EnvKind::Chain;
    maybe(kv, "env.n_states", env.chain.n_states);
    maybe(kv, "env.horizon", env.chain.horizon);
    maybe(kv, "env.step_reward", env.chain.step_reward);
    maybe(kv, "env.goal_reward", env.chain.goal_reward);
    maybe(kv, "env.noise_std", env.chain.noise_std);
    if (auto v = kv.take("env.time_limit")) env.chain.horizon_terminal = to_time_limit(*v);
    try {
      env.chain.validate();
    } catch (const InvalidParameter& e) {
      throw ConfigError("env", e.what());
    }
  } else if (kind == "grid") {
    env.kind = EnvKind::Grid;
    maybe(kv, "env.width", env.grid.width);
    maybe(kv, "env.height", env.grid.height);
    maybe(kv, "env.horizon", env.grid.horizon);
    maybe(kv, "env.step_reward", env.grid.step_reward);
    maybe(kv, "env.goal_reward", env.grid.goal_reward);
    if (auto v = kv.take("env.time_limit")) env.grid.horizon_terminal = to_time_limit(*v);
    try {
      env.grid.validate();
    } catch (const InvalidParameter& e) {
      throw ConfigError("env", e.what());
    }
  } else {
    throw ConfigError("env.kind", "expected 'chain' or 'grid', got '" + kind + "'");
  }
}

counts::TemperatureSchedule parse_schedule(KeyValues& kv, AgentKind kind) {
  std::string schedule;
  switch (kind) {
    case AgentKind::Sql:
      schedule = kv.take("agent.schedule").value_or("constant");
      break;
    case AgentKind::Cbsql:
    case AgentKind::ReplayCbsql:
      schedule = kv.take("agent.schedule").value_or("count_based");
      break;
    default:
      return counts::TemperatureSchedule::count_based(0.01);
  }
  try {
    if (schedule == "constant" && kind == AgentKind::Sql) {
      return counts::TemperatureSchedule::constant(to_real("agent.beta", kv.require("agent.beta")));
    }
    if (schedule == "linear" && kind == AgentKind::Sql) {
      return counts::TemperatureSchedule::linear(to_real("agent.kappa", kv.require("agent.kappa")));
    }
    if (schedule == "count_based" && kind != AgentKind::Sql) {
      double kappa = 0.01;
      maybe(kv, "agent.kappa", kappa);
      return counts::TemperatureSchedule::count_based(kappa);
    }
  } catch (const InvalidParameter& e) {
    throw ConfigError("agent.schedule", e.what());
  }
  throw ConfigError("agent.schedule", "'" + schedule + "' is not valid for agent kind " + to_string(kind));
}

void parse_agent(KeyValues& kv, AgentSpec& spec) {
  const std::string kind = kv.require("agent.kind");
  if (kind == "q_learning") {
    spec.kind = AgentKind::QLearning;
  } else if (kind == "sql") {
    spec.kind = AgentKind::Sql;
  } else if (kind == "cbsql") {
    spec.kind = AgentKind::Cbsql;
  } else if (kind == "replay_cbsql") {
    spec.kind = AgentKind::ReplayCbsql;
  } else if (kind == "scripted") {
    spec.kind = AgentKind::Scripted;
  } else {
    throw ConfigError("agent.kind", "unknown agent kind '" + kind + "'");
  }
  if (auto label = kv.take("agent.label")) spec.label = *label;

  if (spec.kind == AgentKind::Scripted) {
    spec.script = to_actions("agent.actions", kv.require("agent.actions"));
    return;
  }

  auto& cfg = spec.config;
  cfg.schedule = parse_schedule(kv, spec.kind);
  maybe(kv, "agent.gamma", cfg.gamma);
  maybe(kv, "agent.epsilon", cfg.epsilon);
  maybe(kv, "agent.learning_rate", cfg.learning_rate);
  if (auto acting = kv.take("agent.acting")) {
    if (*acting == "epsilon_greedy") {
      cfg.acting = agents::ActingMode::EpsilonGreedy;
    } else if (*acting == "softmax" && spec.kind != AgentKind::QLearning && spec.kind != AgentKind::ReplayCbsql) {
      cfg.acting = agents::ActingMode::Softmax;
    } else {
      throw ConfigError("agent.acting", "unsupported acting mode '" + *acting + "' for " + kind);
    }
  }
  if (spec.kind == AgentKind::Cbsql) {
    if (auto v = kv.take("agent.count_state")) cfg.count_state = to_counted_state("agent.count_state", *v);
  }
  if (spec.kind == AgentKind::ReplayCbsql) {
    maybe(kv, "agent.batch_size", cfg.batch_size);
    maybe(kv, "agent.target_update_freq", cfg.target_update_freq);
    maybe(kv, "agent.replay_capacity", cfg.replay_capacity);
    cfg.epsilon_final = cfg.epsilon;
    maybe(kv, "agent.epsilon_final", cfg.epsilon_final);
    maybe(kv, "agent.epsilon_anneal_steps", cfg.epsilon_anneal_steps);
    if (auto v = kv.take("agent.density_state")) cfg.density_state = to_counted_state("agent.density_state", *v);
  }
  try {
    cfg.validate();
  } catch (const InvalidConfiguration& e) {
    throw ConfigError("agent", e.what());
  }
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  KeyValues kv(text);
  ExperimentConfig cfg;
  parse_env(kv, cfg.env);
  parse_agent(kv, cfg.agent);
  cfg.episodes = to_integer<int>("episodes", kv.require("episodes"));
  cfg.runs = to_integer<int>("runs", kv.require("runs"));
  cfg.base_seed = to_integer<std::uint64_t>("base_seed", kv.require("base_seed"));
  cfg.output = kv.require("output");
  if (cfg.episodes < 1) throw ConfigError("episodes", "must be positive");
  if (cfg.runs < 1) throw ConfigError("runs", "must be positive");
  kv.reject_leftovers();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

}  // namespace cbsql::harness
