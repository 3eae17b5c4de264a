#ifndef TRAJSHIELD_ENVS_HPP
#define TRAJSHIELD_ENVS_HPP

#include <memory>
#include <string>

#include "trajshield/core_types.hpp"

namespace trajshield {

struct EnvSpec {
  std::string id;
  int state_dim = 0;
  int action_dim = 0;
  int horizon = 1;
  double min_reward = 0.0;  // the shield's penalty reward source
};

struct StepResult {
  FeatureVector next_state;
  double reward = 0.0;
  bool done = false;
  bool crashed = false;
};

// Deterministic continuous-control environment with genuine unsafe terminal
// states. Actions live in [-1,1]^action_dim and are clamped.
class Env {
 public:
  virtual ~Env() = default;
  virtual const EnvSpec& spec() const = 0;
  virtual FeatureVector reset(std::uint64_t seed) = 0;
  virtual FeatureVector reset_nominal() = 0;  // exact noise-free start
  virtual StepResult step(const FeatureVector& action) = 0;  // throws after done
};

// Point mass in the unit box: start (0.1, 0.5), goal (0.9, 0.5), hazard disc
// at (0.5, 0.5) radius 0.15 directly on the way. Crash on entering the
// hazard or leaving the box.
class CliffWorld2D final : public Env {
 public:
  CliffWorld2D();
  const EnvSpec& spec() const override { return spec_; }
  FeatureVector reset(std::uint64_t seed) override;
  FeatureVector reset_nominal() override;
  StepResult step(const FeatureVector& action) override;

 private:
  EnvSpec spec_;
  FeatureVector state_;  // x, y, vx, vy
  int steps_ = 0;
  bool done_ = true;
};

// Cart-pole with continuous force, Euler integration. Crash when the pole
// falls past ~12 degrees or the cart leaves the track.
class PoleBalance final : public Env {
 public:
  PoleBalance();
  const EnvSpec& spec() const override { return spec_; }
  FeatureVector reset(std::uint64_t seed) override;
  FeatureVector reset_nominal() override;
  StepResult step(const FeatureVector& action) override;

 private:
  EnvSpec spec_;
  FeatureVector state_;  // x, x_dot, theta, theta_dot
  int steps_ = 0;
  bool done_ = true;
};

std::unique_ptr<Env> make_env(const std::string& id);  // "cliff2d" | "polebalance"
double env_min_reward(const std::string& id);

}  // namespace trajshield

#endif  // TRAJSHIELD_ENVS_HPP
