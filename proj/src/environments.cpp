#include "cbsql/environments.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "cbsql/errors.hpp"

namespace cbsql::env {

void ChainSpec::validate() const {
  if (n_states < 2) throw InvalidParameter("chain needs at least two states");
  if (horizon < 1) throw InvalidParameter("chain horizon must be positive");
  if (horizon > 30) throw InvalidParameter("chain horizon above 30 is not supported by the oracle");
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) throw InvalidParameter("noise std must be >= 0");
}

Rational ChainSpec::mean_reward(int state, int action) const {
  return (state == n_states - 1 && action == 1) ? goal_reward : step_reward;
}

int ChainSpec::next_state(int state, int action) const {
  return action == 1 ? std::min(state + 1, n_states - 1) : std::max(state - 1, 0);
}

ChainWalkEnv::ChainWalkEnv(ChainSpec spec, Rng rng)
    : spec_(spec), rng_(std::move(rng)), noise_(0.0, 1.0) {
  spec_.validate();
  step_reward_ = to_double(spec_.step_reward);
  goal_reward_ = to_double(spec_.goal_reward);
}

Observation ChainWalkEnv::reset() {
  state_ = 0;
  t_ = 0;
  return {state_};
}

EnvStep ChainWalkEnv::step(int action) {
  if (t_ >= spec_.horizon) throw EpisodeFinished("chain episode already finished; call reset()");
  if (action != 0 && action != 1) throw InvalidParameter("chain actions are 0 and 1");

  double reward = (state_ == spec_.n_states - 1 && action == 1) ? goal_reward_ : step_reward_;
  // Always draw, even with zero noise, so the stream position depends only on
  // the number of steps taken.
  reward += spec_.noise_std * noise_(rng_);
  state_ = spec_.next_state(state_, action);
  ++t_;
  const bool done = t_ >= spec_.horizon;
  return {{state_}, reward, done, done && !spec_.horizon_terminal};
}

Rational optimal_return_oracle(const ChainSpec& spec) {
  spec.validate();
  std::optional<Rational> best;
  const std::uint64_t sequences = std::uint64_t{1} << spec.horizon;
  for (std::uint64_t bits = 0; bits < sequences; ++bits) {
    int state = 0;
    Rational total{0};
    for (int t = 0; t < spec.horizon; ++t) {
      const int action = static_cast<int>((bits >> t) & 1U);
      total += spec.mean_reward(state, action);
      state = spec.next_state(state, action);
    }
    if (!best || total > *best) best = total;
  }
  return *best;
}

void GridSpec::validate() const {
  if (width < 2 || height < 2) throw InvalidParameter("grid width and height must be at least 2");
  if (horizon < 1) throw InvalidParameter("grid horizon must be positive");
}

GridEnv::GridEnv(GridSpec spec) : spec_(spec) {
  spec_.validate();
}

Observation GridEnv::reset() {
  x_ = 0;
  y_ = 0;
  t_ = 0;
  done_ = false;
  return {x_, y_};
}

EnvStep GridEnv::step(int action) {
  if (done_) throw EpisodeFinished("grid episode already finished; call reset()");
  switch (action) {
    case 0: x_ = std::max(x_ - 1, 0); break;
    case 1: x_ = std::min(x_ + 1, spec_.width - 1); break;
    case 2: y_ = std::max(y_ - 1, 0); break;
    case 3: y_ = std::min(y_ + 1, spec_.height - 1); break;
    default: throw InvalidParameter("grid actions are 0..3");
  }
  ++t_;
  const bool at_goal = x_ == spec_.width - 1 && y_ == spec_.height - 1;
  done_ = at_goal || t_ >= spec_.horizon;
  const bool truncated = !at_goal && done_ && !spec_.horizon_terminal;
  return {{x_, y_}, at_goal ? spec_.goal_reward : spec_.step_reward, done_, truncated};
}

std::unique_ptr<Environment> grid_env(int width, int height, int horizon) {
  GridSpec spec;
  spec.width = width;
  spec.height = height;
  spec.horizon = horizon;
  return std::make_unique<GridEnv>(spec);
}

}  // namespace cbsql::env
