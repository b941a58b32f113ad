#include <doctest.h>

#include <cmath>

#include "cbsql/environments.hpp"
#include "cbsql/errors.hpp"

using namespace cbsql;
using namespace cbsql::env;

namespace {

ChainSpec noiseless() {
  ChainSpec spec;
  spec.noise_std = 0.0;
  return spec;
}

}  // namespace

TEST_CASE("chain reset") {
  ChainWalkEnv chain(ChainSpec{}, Rng(1));
  CHECK(chain.reset() == Observation{0});
  chain.step(1);
  chain.step(1);
  CHECK(chain.state() == 2);
  CHECK(chain.reset() == Observation{0});
  CHECK(chain.steps_taken() == 0);
}

TEST_CASE("chain dynamics and mean rewards") {
  ChainWalkEnv chain(noiseless(), Rng(1));
  chain.reset();
  auto step = chain.step(0);
  CHECK(step.next_state == Observation{0});
  CHECK(step.reward == doctest::Approx(-0.1));
  step = chain.step(1);
  CHECK(step.next_state == Observation{1});
  CHECK(step.reward == doctest::Approx(-0.1));

  ChainSpec spec;
  CHECK(spec.mean_reward(4, 1) == Rational(1));
  CHECK(spec.mean_reward(4, 0) == Rational(-1, 10));
  CHECK(spec.mean_reward(0, 1) == Rational(-1, 10));
  CHECK(spec.next_state(4, 1) == 4);
  CHECK(spec.next_state(0, 0) == 0);
  CHECK(spec.next_state(3, 0) == 2);
}

TEST_CASE("chain episodes last exactly five steps") {
  ChainWalkEnv chain(ChainSpec{}, Rng(3));
  Rng policy(4);
  for (int episode = 0; episode < 200; ++episode) {
    chain.reset();
    int steps = 0;
    bool done = false;
    while (!done) {
      done = chain.step(static_cast<int>(policy() & 1U)).done;
      ++steps;
    }
    CHECK(steps == 5);
    CHECK_THROWS_AS(chain.step(1), EpisodeFinished);
  }
}

TEST_CASE("all-right noiseless episode reaches the goal") {
  ChainWalkEnv chain(noiseless(), Rng(0));
  chain.reset();
  double total = 0.0;
  EnvStep last;
  for (int t = 0; t < 5; ++t) {
    last = chain.step(1);
    total += last.reward;
  }
  CHECK(last.next_state == Observation{4});
  CHECK(last.reward == 1.0);
  CHECK(total == doctest::Approx(0.6));
}

TEST_CASE("reward noise is N(0,1) around the mean") {
  ChainWalkEnv chain(ChainSpec{}, Rng(12345));
  const int samples = 100000;
  double sum = 0.0;
  double sq = 0.0;
  for (int i = 0; i < samples; ++i) {
    chain.reset();
    const double r = chain.step(1).reward;
    sum += r;
    sq += r * r;
  }
  const double mean = sum / samples;
  const double sd = std::sqrt(sq / samples - mean * mean);
  CHECK(std::abs(mean + 0.1) < 0.02);
  CHECK(std::abs(sd - 1.0) < 0.02);
}

TEST_CASE("identical seeds give identical trajectories") {
  ChainWalkEnv a(ChainSpec{}, Rng(77));
  ChainWalkEnv b(ChainSpec{}, Rng(77));
  const int actions[] = {1, 0, 1, 1, 1};
  for (int episode = 0; episode < 50; ++episode) {
    a.reset();
    b.reset();
    for (int act : actions) {
      const auto sa = a.step(act);
      const auto sb = b.step(act);
      CHECK(sa.reward == sb.reward);
      CHECK(sa.next_state == sb.next_state);
    }
  }
  CHECK(make_rng(1, 2, Stream::Environment)() == make_rng(1, 2, Stream::Environment)());
  CHECK(make_rng(1, 2, Stream::Environment)() != make_rng(1, 3, Stream::Environment)());
  CHECK(make_rng(1, 2, Stream::Environment)() != make_rng(1, 2, Stream::Agent)());
}

TEST_CASE("optimal return oracle") {
  CHECK(optimal_return_oracle(ChainSpec{}) == Rational(3, 5));

  ChainSpec zero;
  zero.step_reward = 0;
  zero.goal_reward = 0;
  CHECK(optimal_return_oracle(zero) == Rational(0));

  ChainSpec one_step;
  one_step.horizon = 1;
  CHECK(optimal_return_oracle(one_step) == Rational(-1, 10));

  // Six steps: four moves, then two rewarding actions in the last state.
  ChainSpec six;
  six.horizon = 6;
  CHECK(optimal_return_oracle(six) == Rational(-4, 10) + 2);
}

TEST_CASE("chain spec validation") {
  ChainSpec bad;
  bad.n_states = 1;
  CHECK_THROWS_AS(ChainWalkEnv(bad, Rng(0)), InvalidParameter);
  ChainWalkEnv chain(ChainSpec{}, Rng(0));
  chain.reset();
  CHECK_THROWS_AS(chain.step(2), InvalidParameter);
}

TEST_CASE("grid dynamics") {
  auto grid = grid_env(3, 3, 20);
  CHECK(grid->reset() == Observation{0, 0});
  CHECK(grid->observation_alphabet() == std::vector<int>{3, 3});

  auto step = grid->step(1);
  CHECK(step.next_state == Observation{1, 0});
  CHECK(step.reward == doctest::Approx(-0.01));
  CHECK_FALSE(step.done);

  step = grid->step(2);  // up into the wall
  CHECK(step.next_state == Observation{1, 0});

  grid->step(1);
  grid->step(3);
  step = grid->step(3);
  CHECK(step.next_state == Observation{2, 2});
  CHECK(step.reward == 1.0);
  CHECK(step.done);
  CHECK_THROWS_AS(grid->step(0), EpisodeFinished);

  CHECK_THROWS_AS(grid_env(1, 4, 10), InvalidParameter);
  CHECK_THROWS_AS(grid_env(4, 4, 0), InvalidParameter);
}

TEST_CASE("grid horizon ends the episode") {
  auto grid = grid_env(4, 4, 3);
  grid->reset();
  CHECK_FALSE(grid->step(0).done);
  CHECK_FALSE(grid->step(0).done);
  CHECK(grid->step(0).done);
}
