#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "trajshield/agent.hpp"
#include "trajshield/envs.hpp"

using namespace trajshield;

TEST_SUITE_BEGIN("envs");

TEST_CASE("factory and minimum rewards") {
  CHECK(make_env("cliff2d")->spec().state_dim == 4);
  CHECK(make_env("polebalance")->spec().action_dim == 1);
  CHECK(env_min_reward("cliff2d") == doctest::Approx(-std::sqrt(2.0)));
  CHECK(env_min_reward("polebalance") == doctest::Approx(-1.0));
  CHECK_THROWS_AS(make_env("mountaincar"), std::invalid_argument);
}

TEST_CASE("reset is deterministic and near the nominal start") {
  CliffWorld2D cliff;
  const FeatureVector s1 = cliff.reset(99);
  const FeatureVector s2 = CliffWorld2D().reset(99);
  CHECK(s1 == s2);
  CHECK(std::abs(s1[0] - 0.1) <= 0.02);
  CHECK(std::abs(s1[1] - 0.5) <= 0.02);
  CHECK(std::abs(s1[2]) <= 0.02);
  CHECK(std::abs(s1[3]) <= 0.02);

  PoleBalance pole;
  const FeatureVector p1 = pole.reset(7);
  CHECK(p1 == PoleBalance().reset(7));
  for (double v : p1) CHECK(std::abs(v) <= 0.05);
}

TEST_CASE("cliff2d integrates the stated dynamics") {
  CliffWorld2D env;
  env.reset(0);
  // overwrite noise with a crafted first step from a known state: reset noise
  // is bounded, so derive expectations from the returned state instead
  const FeatureVector s0 = env.reset(123);
  const FeatureVector a{1.0, -0.5};
  const StepResult r = env.step(a);
  const double vx = std::clamp(0.9 * s0[2] + 0.1 * 1.0, -1.0, 1.0);
  const double vy = std::clamp(0.9 * s0[3] + 0.1 * -0.5, -1.0, 1.0);
  CHECK(r.next_state[2] == doctest::Approx(vx).epsilon(1e-15));
  CHECK(r.next_state[3] == doctest::Approx(vy).epsilon(1e-15));
  CHECK(r.next_state[0] == doctest::Approx(s0[0] + 0.05 * vx).epsilon(1e-15));
  CHECK(r.next_state[1] == doctest::Approx(s0[1] + 0.05 * vy).epsilon(1e-15));
  const double dist = std::hypot(r.next_state[0] - 0.9, r.next_state[1] - 0.5);
  CHECK(r.reward == doctest::Approx(-dist));
  CHECK_FALSE(r.done);
}

TEST_CASE("cliff2d terminal rules") {
  // actions are clamped into the unit box of forces, so drive the mass
  // straight into the hazard to crash
  CliffWorld2D env;
  env.reset(5);
  bool crashed = false;
  for (int i = 0; i < 200 && !crashed; ++i) {
    const StepResult r = env.step({1.0, 0.0});
    crashed = r.crashed;
    if (r.done) break;
  }
  CHECK(crashed);
  CHECK_THROWS_AS(env.step({0.0, 0.0}), std::runtime_error);

  // steering around the hazard reaches the goal
  CliffWorld2D detour;
  FeatureVector s = detour.reset(5);
  bool success = false;
  for (int i = 0; i < 200; ++i) {
    const double target_y = s[0] < 0.7 ? 0.85 : 0.5;
    const FeatureVector a{std::clamp(4.0 * (0.9 - s[0]) - s[2], -1.0, 1.0),
                          std::clamp(8.0 * (target_y - s[1]) - s[3], -1.0, 1.0)};
    const StepResult r = detour.step(a);
    s = r.next_state;
    if (r.done) {
      success = !r.crashed;
      break;
    }
  }
  CHECK(success);
}

TEST_CASE("cliff2d rewards respect the declared floor") {
  CliffWorld2D env;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> act(-1.0, 1.0);
  for (int episode = 0; episode < 5; ++episode) {
    env.reset(episode);
    for (int i = 0; i < 200; ++i) {
      const StepResult r = env.step({act(rng), act(rng)});
      CHECK(r.reward >= env.spec().min_reward);
      if (r.done) break;
    }
  }
}

TEST_CASE("polebalance holds the exact upright equilibrium") {
  PoleBalance env;
  FeatureVector s = env.reset_nominal();
  for (int i = 0; i < 50; ++i) {
    const StepResult r = env.step({0.0});
    s = r.next_state;
    REQUIRE_FALSE(r.done);
  }
  CHECK(s == FeatureVector{0.0, 0.0, 0.0, 0.0});
}

TEST_CASE("the scripted balancer survives the full horizon") {
  PoleBalance env;
  FeatureVector s = env.reset(11);
  int survived = 0;
  for (int i = 0; i < 500; ++i) {
    const StepResult r = env.step(scripted_action("polebalance", s));
    s = r.next_state;
    ++survived;
    if (r.done) {
      CHECK_FALSE(r.crashed);
      break;
    }
  }
  CHECK(survived >= 500);
}

TEST_CASE("polebalance crashes when uncontrolled") {
  PoleBalance env;
  FeatureVector s = env.reset(3);
  bool crashed = false;
  int steps = 0;
  for (int i = 0; i < 500; ++i) {
    const StepResult r = env.step({0.0});
    ++steps;
    s = r.next_state;
    if (r.done) {
      crashed = r.crashed;
      break;
    }
  }
  CHECK(crashed);
  CHECK(steps < 500);
  CHECK(std::abs(s[2]) > 0.2095);
}

TEST_CASE("out-of-range actions clamp to the unit box") {
  for (const char* id : {"cliff2d", "polebalance"}) {
    auto a = make_env(id);
    auto b = make_env(id);
    a->reset(4);
    b->reset(4);
    FeatureVector wild(a->spec().action_dim, 5.0);
    FeatureVector edge(a->spec().action_dim, 1.0);
    const StepResult ra = a->step(wild);
    const StepResult rb = b->step(edge);
    CHECK(ra.next_state == rb.next_state);
    CHECK(ra.reward == rb.reward);
  }
}

TEST_CASE("identical seed and actions give bit-identical rollouts") {
  for (const char* id : {"cliff2d", "polebalance"}) {
    auto env1 = make_env(id);
    auto env2 = make_env(id);
    std::mt19937_64 rng1(8), rng2(8);
    std::uniform_real_distribution<double> act(-1.0, 1.0);
    env1->reset(21);
    env2->reset(21);
    for (int i = 0; i < 50; ++i) {
      FeatureVector a(env1->spec().action_dim);
      for (auto& v : a) v = act(rng1);
      FeatureVector b(env2->spec().action_dim);
      for (auto& v : b) v = act(rng2);
      const StepResult r1 = env1->step(a);
      const StepResult r2 = env2->step(b);
      CHECK(r1.next_state == r2.next_state);
      CHECK(r1.reward == r2.reward);
      CHECK(r1.done == r2.done);
      if (r1.done) break;
    }
  }
}

TEST_CASE("the straight-to-goal script reaches the hazard quickly") {
  CliffWorld2D env;
  FeatureVector s = env.reset(1);
  bool crashed = false;
  int steps = 0;
  while (steps < 60) {
    const StepResult r = env.step(scripted_action("cliff2d", s));
    ++steps;
    s = r.next_state;
    if (r.done) {
      crashed = r.crashed;
      break;
    }
  }
  CHECK(crashed);
  CHECK(steps <= 60);
}

TEST_SUITE_END();
