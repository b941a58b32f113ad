#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "cbsql/observation.hpp"
#include "cbsql/rng.hpp"

namespace cbsql::env {

using Rational = boost::rational<std::int64_t>;

struct EnvStep {
  Observation next_state;
  double reward = 0.0;
  // The episode is over.
  bool done = false;
  // The episode was cut by its step budget rather than by reaching a terminal
  // state; learners keep bootstrapping from next_state.
  bool truncated = false;
};

class Environment {
 public:
  virtual ~Environment() = default;

  virtual Observation reset() = 0;
  // Throws EpisodeFinished once the episode has ended.
  virtual EnvStep step(int action) = 0;

  virtual int action_count() const = 0;
  // Alphabet size of each observation factor, for the density model.
  virtual std::vector<int> observation_alphabet() const = 0;
  virtual std::string name() const = 0;
};

// Noisy chain walk. Action 1 moves right, action 0 moves left, both clamped
// at the ends. Taking action 1 in the last state pays goal_reward, anything
// else pays step_reward; every reward is corrupted by N(0, noise_std^2).
// Episodes end after `horizon` steps and never earlier. The step index is
// not part of the observation, so by default the horizon is reported as a
// truncation; horizon_terminal = true reports it as a terminal state instead.
struct ChainSpec {
  int n_states = 5;
  int horizon = 5;
  Rational step_reward{-1, 10};
  Rational goal_reward{1};
  double noise_std = 1.0;
  bool horizon_terminal = false;

  void validate() const;
  Rational mean_reward(int state, int action) const;
  int next_state(int state, int action) const;
};

class ChainWalkEnv final : public Environment {
 public:
  ChainWalkEnv(ChainSpec spec, Rng rng);

  Observation reset() override;
  EnvStep step(int action) override;
  int action_count() const override { return 2; }
  std::vector<int> observation_alphabet() const override { return {spec_.n_states}; }
  std::string name() const override { return "chain"; }

  int state() const noexcept { return state_; }
  int steps_taken() const noexcept { return t_; }
  const ChainSpec& spec() const noexcept { return spec_; }

 private:
  ChainSpec spec_;
  Rng rng_;
  std::normal_distribution<double> noise_;
  double step_reward_;
  double goal_reward_;
  int state_ = 0;
  int t_ = 0;
};

// Best expected undiscounted return from state 0, by enumerating every
// open-loop action sequence of length `horizon`. Transitions are
// deterministic, so open-loop enumeration is exact. Exact rational result.
Rational optimal_return_oracle(const ChainSpec& spec);

// Open room. Start at (0,0), goal at (width-1, height-1). Actions:
// 0 = left (x-1), 1 = right (x+1), 2 = up (y-1), 3 = down (y+1); moves into
// a wall leave the position unchanged. Entering the goal pays goal_reward and
// ends the episode; every other step pays step_reward. The episode also ends
// after `horizon` steps (a truncation unless horizon_terminal). Observation
// is (x, y).
struct GridSpec {
  int width = 5;
  int height = 5;
  int horizon = 50;
  double step_reward = -0.01;
  double goal_reward = 1.0;
  bool horizon_terminal = false;

  void validate() const;
};

class GridEnv final : public Environment {
 public:
  explicit GridEnv(GridSpec spec);

  Observation reset() override;
  EnvStep step(int action) override;
  int action_count() const override { return 4; }
  std::vector<int> observation_alphabet() const override { return {spec_.width, spec_.height}; }
  std::string name() const override { return "grid"; }

  const GridSpec& spec() const noexcept { return spec_; }

 private:
  GridSpec spec_;
  int x_ = 0;
  int y_ = 0;
  int t_ = 0;
  bool done_ = false;
};

std::unique_ptr<Environment> grid_env(int width, int height, int horizon);

inline double to_double(const Rational& r) { return boost::rational_cast<double>(r); }

}  // namespace cbsql::env
