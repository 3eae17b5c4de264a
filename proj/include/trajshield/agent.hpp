#ifndef TRAJSHIELD_AGENT_HPP
#define TRAJSHIELD_AGENT_HPP

#include <optional>
#include <random>
#include <string>

#include "trajshield/core_types.hpp"
#include "trajshield/neural.hpp"

namespace trajshield {

enum class AgentKind { Random, Scripted, ActorCritic };

AgentKind agent_kind_from_string(const std::string& name);  // random|scripted|ac

struct AgentConfig {
  AgentKind kind = AgentKind::Random;
  std::string env_id;  // scripted policies are env-specific
  double gamma = 0.99;
  double noise_std = 0.1;
  bool twin_critics = true;
  double tau_target = 0.005;
  double lr = 3e-4;
  int batch_size = 256;
  int hidden = 256;
  int actor_delay = 2;  // critic updates per actor/target update
  std::uint64_t seed = 0;
};

struct AgentLosses {
  std::optional<double> critic;
  std::optional<double> actor;
};

// Action source plus, for the actor-critic kind, deterministic-policy
// learning with twin critics, delayed actor updates and soft target nets.
class Agent {
 public:
  Agent(const AgentConfig& cfg, int state_dim, int action_dim);

  // Always within [-1,1]^action_dim. explore adds Gaussian noise for the
  // actor-critic kind; random/scripted ignore it.
  FeatureVector act(const FeatureVector& state, bool explore);

  // One optimization call: a critic update toward
  // r + gamma * (1-done) * min target-Q(s', actor_target(s')), plus an actor
  // and soft target update every actor_delay calls. Skips (empty losses)
  // when the memory holds fewer than batch_size transitions or the agent
  // does not learn.
  AgentLosses optimize(ReplayMemory& memory);

  // Critic regression targets for a batch; done transitions bootstrap to
  // zero, which is how the shield's penalty reward propagates.
  std::vector<double> td_targets(const std::vector<const Transition*>& batch) const;

  // Live critic estimate (min over the twin critics).
  double q_value(const FeatureVector& state, const FeatureVector& action) const;

  const AgentConfig& config() const { return cfg_; }
  void save(const std::string& path) const;
  void load(const std::string& path);

 private:
  FeatureVector actor_action(const Mlp& actor, const FeatureVector& state) const;
  void soft_update(Mlp& target, const Mlp& net) const;

  AgentConfig cfg_;
  int state_dim_ = 0;
  int action_dim_ = 0;
  std::mt19937_64 rng_;

  Mlp actor_, actor_target_;
  Mlp q1_, q2_, q1_target_, q2_target_;
  OptimState actor_opt_, q1_opt_, q2_opt_;
  std::int64_t critic_updates_ = 0;
};

// Hand policies: cliff2d steers straight for the goal (through the hazard
// that sits on the way); polebalance applies a linear balancing feedback.
FeatureVector scripted_action(const std::string& env_id, const FeatureVector& state);

}  // namespace trajshield

#endif  // TRAJSHIELD_AGENT_HPP
