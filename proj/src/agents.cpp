#include "cbsql/agents.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "cbsql/errors.hpp"
#include "cbsql/maxent.hpp"

namespace cbsql::agents {

namespace {

std::string format_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ValueTable::ValueTable(int action_count) : action_count_(action_count) {
  if (action_count < 1) throw InvalidParameter("value table needs at least one action");
  zeros_.assign(static_cast<std::size_t>(action_count), 0.0);
}

void ValueTable::check_action(int a) const {
  if (a < 0 || a >= action_count_) {
    throw InvalidParameter("action " + std::to_string(a) + " outside [0," + std::to_string(action_count_) + ")");
  }
}

std::span<const double> ValueTable::values(const Observation& s) const {
  auto it = rows_.find(s);
  return it == rows_.end() ? std::span<const double>(zeros_) : std::span<const double>(it->second);
}

double ValueTable::get(const Observation& s, int a) const {
  check_action(a);
  return values(s)[static_cast<std::size_t>(a)];
}

void ValueTable::set(const Observation& s, int a, double value) {
  check_action(a);
  if (!std::isfinite(value)) throw InvalidParameter("value table entries must be finite");
  auto [it, inserted] = rows_.try_emplace(s, zeros_);
  it->second[static_cast<std::size_t>(a)] = value;
}

double ValueTable::max_abs_diff(const ValueTable& other) const {
  if (other.action_count_ != action_count_) throw ShapeError("value tables have different action counts");
  double worst = 0.0;
  auto scan = [&](const ValueTable& lhs, const ValueTable& rhs) {
    for (const auto& [s, row] : lhs.rows_) {
      auto theirs = rhs.values(s);
      for (std::size_t a = 0; a < row.size(); ++a) worst = std::max(worst, std::abs(row[a] - theirs[a]));
    }
  };
  scan(*this, other);
  scan(other, *this);
  return worst;
}

void ValueTable::write(std::ostream& out) const {
  out << "values " << action_count_ << ' ' << rows_.size() << '\n';
  for (const auto& [s, row] : rows_) {
    out << state_key(s);
    for (double v : row) out << ' ' << format_g17(v);
    out << '\n';
  }
}

ValueTable ValueTable::read(std::istream& in) {
  std::string tag;
  int action_count = 0;
  std::size_t rows = 0;
  if (!(in >> tag >> action_count >> rows) || tag != "values") {
    throw InvalidParameter("malformed value table header");
  }
  ValueTable table(action_count);
  for (std::size_t i = 0; i < rows; ++i) {
    std::string key;
    if (!(in >> key)) throw InvalidParameter("value table truncated");
    const Observation s = parse_state_key(key);
    for (int a = 0; a < action_count; ++a) {
      double v = 0.0;
      if (!(in >> v)) throw InvalidParameter("value table row '" + key + "' truncated");
      table.set(s, a, v);
    }
  }
  return table;
}

void AgentConfig::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidConfiguration("gamma must lie in [0,1)");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InvalidConfiguration("epsilon must lie in [0,1]");
  if (!(epsilon_final >= 0.0 && epsilon_final <= 1.0)) {
    throw InvalidConfiguration("epsilon_final must lie in [0,1]");
  }
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
    throw InvalidConfiguration("learning rate must lie in (0,1]");
  }
  if (batch_size < 1) throw InvalidConfiguration("batch size must be positive");
  if (target_update_freq < 1) throw InvalidConfiguration("target update frequency must be positive");
  if (replay_capacity < batch_size) throw InvalidConfiguration("replay capacity must hold at least one batch");
}

double AgentConfig::epsilon_at(std::uint64_t step) const {
  if (epsilon_anneal_steps == 0) return epsilon;
  const double frac = std::min(1.0, static_cast<double>(step) / static_cast<double>(epsilon_anneal_steps));
  return epsilon + (epsilon_final - epsilon) * frac;
}

int greedy_action(std::span<const double> q) {
  if (q.empty()) throw InvalidParameter("no actions to choose from");
  return static_cast<int>(std::max_element(q.begin(), q.end()) - q.begin());
}

int act_epsilon_greedy(std::span<const double> q, double epsilon, Rng& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InvalidParameter("epsilon must lie in [0,1]");
  if (q.empty()) throw InvalidParameter("no actions to choose from");
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < epsilon) {
    std::uniform_int_distribution<int> pick(0, static_cast<int>(q.size()) - 1);
    return pick(rng);
  }
  return greedy_action(q);
}

int act_softmax(std::span<const double> q, double beta, Rng& rng) {
  const auto pi = maxent::softmax_policy(q, beta);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  double u = coin(rng);
  for (std::size_t a = 0; a + 1 < pi.action_count(); ++a) {
    if (u < pi[a]) return static_cast<int>(a);
    u -= pi[a];
  }
  return static_cast<int>(pi.action_count()) - 1;
}

void q_learning_update(ValueTable& table, const Transition& t, const AgentConfig& cfg) {
  double target = t.r;
  if (!t.done) {
    auto next = table.values(t.s_next);
    target += cfg.gamma * *std::max_element(next.begin(), next.end());
  }
  const double q = table.get(t.s, t.a);
  table.set(t.s, t.a, q + cfg.learning_rate * (target - q));
}

void sql_update(ValueTable& table, const Transition& t, double beta, const AgentConfig& cfg) {
  const double target = maxent::soft_backup_target(t.r, t.done ? 0.0 : cfg.gamma, table.values(t.s_next), beta,
                                                   maxent::OperatorMode::MellowmaxMean);
  const double q = table.get(t.s, t.a);
  table.set(t.s, t.a, q + cfg.learning_rate * (target - q));
}

double cbsql_tabular_step(ValueTable& table, counts::ExactCounter& counter, const Transition& t,
                          const AgentConfig& cfg) {
  if (cfg.schedule.kind() != counts::ScheduleKind::CountBased) {
    throw InvalidConfiguration("count-based SQL needs a count_based temperature schedule");
  }
  const double beta = cfg.schedule.beta_for(static_cast<double>(counter.count(t.s_next)), 0);
  sql_update(table, t, beta, cfg);
  counter.record(cfg.count_state == CountedState::Next ? t.s_next : t.s);
  return beta;
}

TabularAgent::TabularAgent(TabularKind kind, AgentConfig cfg, int action_count, Rng rng)
    : kind_(kind), cfg_(std::move(cfg)), table_(action_count), rng_(std::move(rng)) {
  cfg_.validate();
  const auto schedule = cfg_.schedule.kind();
  if (kind_ == TabularKind::Cbsql && schedule != counts::ScheduleKind::CountBased) {
    throw InvalidConfiguration("cbsql needs a count_based schedule");
  }
  if (kind_ == TabularKind::Sql && schedule == counts::ScheduleKind::CountBased) {
    throw InvalidConfiguration("sql takes a constant or linear schedule; use cbsql for count_based");
  }
}

double TabularAgent::beta_at(const Observation& s) const {
  return cfg_.schedule.beta_for(static_cast<double>(counter_.count(s)), updates_);
}

int TabularAgent::act(const Observation& s) {
  if (cfg_.acting == ActingMode::Softmax) return act_softmax(table_.values(s), beta_at(s), rng_);
  return act_epsilon_greedy(table_.values(s), cfg_.epsilon, rng_);
}

void TabularAgent::observe(const Transition& t) {
  switch (kind_) {
    case TabularKind::QLearning:
      q_learning_update(table_, t, cfg_);
      break;
    case TabularKind::Sql:
      sql_update(table_, t, cfg_.schedule.beta_for(0.0, updates_), cfg_);
      break;
    case TabularKind::Cbsql:
      cbsql_tabular_step(table_, counter_, t, cfg_);
      break;
  }
  ++updates_;
}

std::string TabularAgent::label() const {
  if (kind_ == TabularKind::Sql && cfg_.schedule.kind() == counts::ScheduleKind::Constant) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "sql_beta%g", cfg_.schedule.parameter());
    return buf;
  }
  return to_string(kind_);
}

void TabularAgent::write_snapshot(std::ostream& out) const {
  out << "cbsql-snapshot 1\n";
  out << "label " << label() << '\n';
  table_.write(out);
  out << "counts " << counter_.distinct_states() << '\n';
  counter_.write(out);
}

ScriptedAgent::ScriptedAgent(std::vector<int> actions, int action_count)
    : actions_(std::move(actions)), action_count_(action_count) {
  if (actions_.empty()) throw InvalidParameter("scripted agent needs at least one action");
  for (int a : actions_) {
    if (a < 0 || a >= action_count_) throw InvalidParameter("scripted action outside the action range");
  }
}

int ScriptedAgent::act(const Observation&) {
  return actions_[t_++ % actions_.size()];
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, Rng rng) : capacity_(capacity), rng_(std::move(rng)) {
  if (capacity == 0) throw InvalidParameter("replay capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
  if (entries_.size() == capacity_) entries_.pop_front();
  entries_.push_back(std::move(t));
}

std::vector<Transition> ReplayBuffer::sample(std::size_t batch_size) {
  if (batch_size == 0) throw InvalidParameter("batch size must be positive");
  if (!ready(batch_size)) throw NotReady("replay buffer holds fewer transitions than one batch");
  std::uniform_int_distribution<std::size_t> pick(0, entries_.size() - 1);
  std::vector<Transition> batch;
  batch.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) batch.push_back(entries_[pick(rng_)]);
  return batch;
}

ReplayCbsqlAgent::ReplayCbsqlAgent(AgentConfig cfg, int action_count, std::vector<int> observation_alphabet,
                                   Rng agent_rng, Rng replay_rng)
    : cfg_(std::move(cfg)),
      params_(action_count),
      target_(action_count),
      model_(std::move(observation_alphabet)),
      buffer_(static_cast<std::size_t>(std::max(cfg_.replay_capacity, 1)), std::move(replay_rng)),
      rng_(std::move(agent_rng)),
      min_beta_used_(std::numeric_limits<double>::infinity()) {
  cfg_.validate();
}

int ReplayCbsqlAgent::act(const Observation& s) {
  return act_epsilon_greedy(params_.values(s), cfg_.epsilon_at(env_steps_), rng_);
}

void ReplayCbsqlAgent::observe(const Transition& t) {
  buffer_.push(t);
  ++env_steps_;
  const auto batch_size = static_cast<std::size_t>(cfg_.batch_size);
  if (buffer_.ready(batch_size)) {
    const auto batch = buffer_.sample(batch_size);
    train_step(batch);
  }
}

double ReplayCbsqlAgent::beta_for_state(const Observation& s) const {
  return cfg_.schedule.beta_for(model_.pseudo_count(s), train_steps_);
}

double ReplayCbsqlAgent::train_step(std::span<const Transition> batch) {
  if (batch.empty()) throw InvalidParameter("training batch must not be empty");

  // Targets and residuals all use the parameters and density model as they
  // stood before this step.
  std::vector<double> residuals;
  residuals.reserve(batch.size());
  double loss = 0.0;
  for (const Transition& t : batch) {
    const double beta = beta_for_state(t.s_next);
    min_beta_used_ = std::min(min_beta_used_, beta);
    const double y = maxent::soft_backup_target(t.r, t.done ? 0.0 : cfg_.gamma, target_.values(t.s_next), beta,
                                                maxent::OperatorMode::MellowmaxMean);
    const double residual = y - params_.get(t.s, t.a);
    residuals.push_back(residual);
    loss += residual * residual;
  }
  const double scale = cfg_.learning_rate / static_cast<double>(batch.size());
  loss /= static_cast<double>(batch.size());

  // Gradient of (1/2B) sum (y - theta[s,a])^2 over one-hot features.
  std::map<std::pair<Observation, int>, double> step;
  for (std::size_t i = 0; i < batch.size(); ++i) step[{batch[i].s, batch[i].a}] += residuals[i];
  for (const auto& [key, sum] : step) {
    params_.set(key.first, key.second, params_.get(key.first, key.second) + scale * sum);
  }

  for (const Transition& t : batch) model_.update(cfg_.density_state == CountedState::Current ? t.s : t.s_next);

  ++train_steps_;
  if (train_steps_ % static_cast<std::uint64_t>(cfg_.target_update_freq) == 0) target_ = params_;
  return loss;
}

double run_episode(Agent& agent, env::Environment& env) {
  if (agent.action_count() != env.action_count()) {
    throw InvalidParameter("agent has " + std::to_string(agent.action_count()) + " actions, environment has " +
                           std::to_string(env.action_count()));
  }
  agent.begin_episode();
  Observation s = env.reset();
  double total = 0.0;
  while (true) {
    const int a = agent.act(s);
    env::EnvStep step = env.step(a);
    total += step.reward;
    const bool done = step.done;
    agent.observe(Transition{s, a, step.reward, step.next_state, done && !step.truncated});
    if (done) break;
    s = std::move(step.next_state);
  }
  return total;
}

std::string to_string(TabularKind kind) {
  switch (kind) {
    case TabularKind::QLearning:
      return "q_learning";
    case TabularKind::Sql:
      return "sql";
    case TabularKind::Cbsql:
      return "cbsql";
  }
  return "unknown";
}

}  // namespace cbsql::agents
