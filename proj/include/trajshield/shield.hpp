#ifndef TRAJSHIELD_SHIELD_HPP
#define TRAJSHIELD_SHIELD_HPP

#include <optional>

#include "trajshield/agent.hpp"
#include "trajshield/core_types.hpp"
#include "trajshield/dynamics.hpp"
#include "trajshield/envs.hpp"
#include "trajshield/filters.hpp"

namespace trajshield {

struct ShieldConfig {
  StrategySpec strategy;
  TrajectoryMode mode = TrajectoryMode::StateOnly;
  double r_task = 0.0;  // penalty reward: the task's minimum reward
  bool enabled = true;
};

struct ShieldStats {
  long episodes = 0;
  long crashes = 0;            // real unsafe terminals
  long filtered_episodes = 0;  // terminated by the shield
  long env_steps = 0;          // real environment calls
  double shield_ms = 0.0;      // time inside filter evaluation
  double total_ms = 0.0;
};

// One row of the per-episode metrics CSV.
struct EpisodeMetrics {
  long episode = 0;
  double acc_reward = 0.0;
  bool crashed = false;
  bool filtered = false;
  long steps = 0;
  double shield_ms = 0.0;
  double total_ms = 0.0;
};

// One intervention step. The trajectory is extended with the encoded
// (state, action) before the decision. On Pass the real environment step
// runs; on Filter the episode ends with the penalty reward and a
// model-predicted next state, and the environment is never touched.
Transition shield_step(const ShieldConfig& cfg, const PreparedDemos& demos,
                       const DynamicsModel& dynamics, Env& env, Trajectory& traj,
                       const FeatureVector& state, const FeatureVector& action);

struct EpisodeResult {
  EpisodeRecord record;
  EpisodeMetrics metrics;
};

// Runs episodes of the intervention loop around an environment and agent.
// Every transition (real or fabricated) is pushed to replay; the agent and
// the dynamics model each get one optimize call per loop iteration when
// learning is on. demos/dynamics may be null only when the shield is
// disabled.
class ShieldRunner {
 public:
  ShieldRunner(ShieldConfig cfg, const PreparedDemos* demos, Env& env, Agent& agent,
               ReplayMemory& memory, DynamicsModel* dynamics, DynamicsTrainer* dynamics_trainer,
               std::uint64_t seed);

  EpisodeResult run_episode(std::uint64_t episode_seed, bool learn = true);

  const ShieldStats& stats() const { return stats_; }

 private:
  ShieldConfig cfg_;
  const PreparedDemos* demos_;
  Env* env_;
  Agent* agent_;
  ReplayMemory* memory_;
  DynamicsModel* dynamics_;
  DynamicsTrainer* dynamics_trainer_;
  std::mt19937_64 dyn_rng_;
  ShieldStats stats_;
  long episode_index_ = 0;
};

}  // namespace trajshield

#endif  // TRAJSHIELD_SHIELD_HPP
