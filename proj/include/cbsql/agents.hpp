#pragma once

// Tabular Q-learning, fixed-temperature SQL, count-based SQL, and the
// replay agent with a target copy and pseudo-count temperatures.

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cbsql/counts.hpp"
#include "cbsql/environments.hpp"
#include "cbsql/observation.hpp"
#include "cbsql/rng.hpp"

namespace cbsql::agents {

// Q(s, a) with an implicit zero row for unseen states.
class ValueTable {
 public:
  explicit ValueTable(int action_count);

  int action_count() const noexcept { return action_count_; }
  std::size_t size() const noexcept { return rows_.size(); }

  std::span<const double> values(const Observation& s) const;
  double get(const Observation& s, int a) const;
  // Throws InvalidParameter for non-finite values or out-of-range actions.
  void set(const Observation& s, int a, double value);

  const std::map<Observation, std::vector<double>>& rows() const noexcept { return rows_; }

  // Max-norm distance over the union of stored states.
  double max_abs_diff(const ValueTable& other) const;

  // "values <action_count> <rows>" then one "<state_key> <q_0> ... <q_{A-1}>"
  // line per state in key order; values printed with 17 significant digits.
  void write(std::ostream& out) const;
  static ValueTable read(std::istream& in);

  bool operator==(const ValueTable&) const = default;

 private:
  void check_action(int a) const;

  int action_count_;
  std::vector<double> zeros_;
  std::map<Observation, std::vector<double>> rows_;
};

// `done` masks the bootstrap term: it is set for terminal states only, not
// for episodes cut by a step budget.
struct Transition {
  Observation s;
  int a = 0;
  double r = 0.0;
  Observation s_next;
  bool done = false;
};

// Which state's count is advanced by a value update.
enum class CountedState { Next, Current };

enum class ActingMode { EpsilonGreedy, Softmax };

struct AgentConfig {
  double gamma = 0.99;
  double epsilon = 0.01;
  double learning_rate = 1.0;
  counts::TemperatureSchedule schedule = counts::TemperatureSchedule::count_based(0.01);
  ActingMode acting = ActingMode::EpsilonGreedy;

  // Tabular CBSQL: the counted state is the one whose values enter the backup.
  CountedState count_state = CountedState::Next;

  // Replay agent only.
  int batch_size = 1;
  int target_update_freq = 1;
  int replay_capacity = 10000;
  // Density model is trained on s by default, as in the reference pseudocode.
  CountedState density_state = CountedState::Current;
  // Linear anneal from epsilon to epsilon_final over this many env steps;
  // 0 keeps epsilon constant.
  double epsilon_final = 0.01;
  std::uint64_t epsilon_anneal_steps = 0;

  void validate() const;
  double epsilon_at(std::uint64_t step) const;
};

int greedy_action(std::span<const double> q);
// Lowest-index argmax with probability 1 - epsilon, otherwise uniform.
int act_epsilon_greedy(std::span<const double> q, double epsilon, Rng& rng);
int act_softmax(std::span<const double> q, double beta, Rng& rng);

// Q(s,a) += alpha (r + gamma max_a' Q(s',a') [not done] - Q(s,a))
void q_learning_update(ValueTable& table, const Transition& t, const AgentConfig& cfg);

// Q(s,a) += alpha (r + gamma mellowmax_beta Q(s',.) [not done] - Q(s,a)),
// mean-form mellowmax.
void sql_update(ValueTable& table, const Transition& t, double beta, const AgentConfig& cfg);

// One count-based SQL update: beta = kappa * n(s') (clamped), sql_update,
// then n(counted state) += 1. Returns the beta used. The schedule must be
// count based (InvalidConfiguration otherwise).
double cbsql_tabular_step(ValueTable& table, counts::ExactCounter& counter, const Transition& t,
                          const AgentConfig& cfg);

class Agent {
 public:
  virtual ~Agent() = default;

  virtual int action_count() const = 0;
  virtual int act(const Observation& s) = 0;
  virtual void observe(const Transition& t) = 0;
  virtual void begin_episode() {}
  virtual std::string label() const = 0;
};

enum class TabularKind { QLearning, Sql, Cbsql };

class TabularAgent final : public Agent {
 public:
  TabularAgent(TabularKind kind, AgentConfig cfg, int action_count, Rng rng);

  int action_count() const override { return table_.action_count(); }
  int act(const Observation& s) override;
  void observe(const Transition& t) override;
  std::string label() const override;

  const ValueTable& table() const noexcept { return table_; }
  const counts::ExactCounter& counter() const noexcept { return counter_; }
  std::uint64_t updates() const noexcept { return updates_; }

  // Current inverse temperature at state s (clamped).
  double beta_at(const Observation& s) const;

  // Flat snapshot: "cbsql-snapshot 1", "label <label>", the value table, then
  // "counts <rows>" and one "<state_key> <count>" line per counted state.
  void write_snapshot(std::ostream& out) const;

 private:
  TabularKind kind_;
  AgentConfig cfg_;
  ValueTable table_;
  counts::ExactCounter counter_;
  Rng rng_;
  std::uint64_t updates_ = 0;
};

// Plays a fixed action sequence, indexed by the step within the episode and
// repeated cyclically. Does not learn.
class ScriptedAgent final : public Agent {
 public:
  ScriptedAgent(std::vector<int> actions, int action_count);

  int action_count() const override { return action_count_; }
  int act(const Observation&) override;
  void observe(const Transition&) override {}
  void begin_episode() override { t_ = 0; }
  std::string label() const override { return "scripted"; }

 private:
  std::vector<int> actions_;
  int action_count_;
  std::size_t t_ = 0;
};

// Bounded FIFO of transitions with seeded uniform sampling (with replacement).
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, Rng rng);

  void push(Transition t);
  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  bool ready(std::size_t batch_size) const noexcept { return entries_.size() >= batch_size; }
  const Transition& operator[](std::size_t i) const { return entries_.at(i); }

  // Throws NotReady when fewer than batch_size entries are stored.
  std::vector<Transition> sample(std::size_t batch_size);

 private:
  std::size_t capacity_;
  std::deque<Transition> entries_;
  Rng rng_;
};

// Replay-based count-based SQL. Values are a linear map over one-hot
// (state, action) features, trained by gradient descent on
// (1/2B) sum (y - Q(s,a))^2; targets use a periodically copied parameter set
// and beta = kappa * pseudo-count(s') from a factored KT density model.
class ReplayCbsqlAgent final : public Agent {
 public:
  ReplayCbsqlAgent(AgentConfig cfg, int action_count, std::vector<int> observation_alphabet, Rng agent_rng,
                   Rng replay_rng);

  int action_count() const override { return params_.action_count(); }
  int act(const Observation& s) override;
  // Stores t and runs one train_step once the buffer holds a full batch.
  void observe(const Transition& t) override;
  std::string label() const override { return "replay_cbsql"; }

  // One gradient step on `batch`. Returns the batch mean of (y - Q(s,a))^2
  // before the step. Throws InvalidParameter for an empty batch.
  double train_step(std::span<const Transition> batch);

  double beta_for_state(const Observation& s) const;

  const ValueTable& params() const noexcept { return params_; }
  const ValueTable& target_params() const noexcept { return target_; }
  const counts::FactoredKtModel& density_model() const noexcept { return model_; }
  const ReplayBuffer& buffer() const noexcept { return buffer_; }
  std::uint64_t train_steps() const noexcept { return train_steps_; }
  // Smallest beta handed to mellowmax so far (+inf before the first step).
  double min_beta_used() const noexcept { return min_beta_used_; }

 private:
  AgentConfig cfg_;
  ValueTable params_;
  ValueTable target_;
  counts::FactoredKtModel model_;
  ReplayBuffer buffer_;
  Rng rng_;
  std::uint64_t env_steps_ = 0;
  std::uint64_t train_steps_ = 0;
  double min_beta_used_;
};

// reset, then act/step/observe until the episode is over. Truncated endings
// reach the agent with done = false. Returns the undiscounted sum of raw
// rewards.
double run_episode(Agent& agent, env::Environment& env);

std::string to_string(TabularKind kind);

}  // namespace cbsql::agents
