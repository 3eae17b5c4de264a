#include "trajshield/agent.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace trajshield {

namespace {

double clamp_unit(double v) { return v < -1.0 ? -1.0 : (v > 1.0 ? 1.0 : v); }

std::vector<double> concat(const FeatureVector& a, const FeatureVector& b) {
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace

AgentKind agent_kind_from_string(const std::string& name) {
  if (name == "random") return AgentKind::Random;
  if (name == "scripted") return AgentKind::Scripted;
  if (name == "ac") return AgentKind::ActorCritic;
  throw std::invalid_argument("unknown agent kind '" + name +
                              "' (expected random, scripted or ac)");
}

FeatureVector scripted_action(const std::string& env_id, const FeatureVector& state) {
  if (env_id == "cliff2d") {
    // Proportional steering toward the goal at (0.9, 0.5).
    const double gx = 0.9, gy = 0.5;
    return {clamp_unit(4.0 * (gx - state[0]) - state[2]),
            clamp_unit(4.0 * (gy - state[1]) - state[3])};
  }
  if (env_id == "polebalance") {
    // Linear balancing feedback; gains checked against the integrator in
    // the env tests.
    return {clamp_unit(0.9 * state[0] + 1.4 * state[1] + 10.0 * state[2] + 2.0 * state[3])};
  }
  throw std::invalid_argument("no scripted policy for env '" + env_id + "'");
}

Agent::Agent(const AgentConfig& cfg, int state_dim, int action_dim)
    : cfg_(cfg), state_dim_(state_dim), action_dim_(action_dim), rng_(cfg.seed) {
  if (state_dim_ < 1 || action_dim_ < 1)
    throw std::invalid_argument("agent dimensions must be >= 1");
  if (cfg_.gamma <= 0.0 || cfg_.gamma > 1.0)
    throw std::invalid_argument("gamma must be in (0, 1]");
  if (cfg_.noise_std < 0.0) throw std::invalid_argument("noise stddev must be >= 0");
  if (cfg_.kind == AgentKind::ActorCritic) {
    const int h = cfg_.hidden;
    actor_ = mlp_init({state_dim_, h, h, action_dim_}, mix_seed(cfg_.seed, 1), Mlp::Output::Tanh);
    q1_ = mlp_init({state_dim_ + action_dim_, h, h, 1}, mix_seed(cfg_.seed, 2));
    q2_ = mlp_init({state_dim_ + action_dim_, h, h, 1}, mix_seed(cfg_.seed, 3));
    actor_target_ = actor_;
    q1_target_ = q1_;
    q2_target_ = q2_;
    AdamConfig adam;
    adam.lr = cfg_.lr;
    actor_opt_ = OptimState::make(actor_, adam);
    q1_opt_ = OptimState::make(q1_, adam);
    q2_opt_ = OptimState::make(q2_, adam);
  }
}

FeatureVector Agent::actor_action(const Mlp& actor, const FeatureVector& state) const {
  std::vector<double> y = forward(actor, state);
  for (auto& v : y) v = clamp_unit(v);
  return y;
}

FeatureVector Agent::act(const FeatureVector& state, bool explore) {
  if (state.size() != static_cast<std::size_t>(state_dim_))
    throw std::invalid_argument("agent act: state dimension mismatch");
  switch (cfg_.kind) {
    case AgentKind::Random: {
      std::uniform_real_distribution<double> uni(-1.0, 1.0);
      FeatureVector a(action_dim_);
      for (auto& v : a) v = uni(rng_);
      return a;
    }
    case AgentKind::Scripted:
      return scripted_action(cfg_.env_id, state);
    case AgentKind::ActorCritic: {
      FeatureVector a = actor_action(actor_, state);
      if (explore && cfg_.noise_std > 0.0) {
        std::normal_distribution<double> noise(0.0, cfg_.noise_std);
        for (auto& v : a) v = clamp_unit(v + noise(rng_));
      }
      return a;
    }
  }
  throw std::logic_error("unreachable agent kind");
}

std::vector<double> Agent::td_targets(const std::vector<const Transition*>& batch) const {
  std::vector<double> targets;
  targets.reserve(batch.size());
  for (const Transition* t : batch) {
    double boot = 0.0;
    if (!t->done) {
      const FeatureVector a_next = actor_action(actor_target_, t->next_state);
      const std::vector<double> in = concat(t->next_state, a_next);
      double q = forward(q1_target_, in)[0];
      if (cfg_.twin_critics) q = std::min(q, forward(q2_target_, in)[0]);
      boot = cfg_.gamma * q;
    }
    targets.push_back(t->reward + boot);
  }
  return targets;
}

double Agent::q_value(const FeatureVector& state, const FeatureVector& action) const {
  if (cfg_.kind != AgentKind::ActorCritic)
    throw std::runtime_error("q_value needs an actor-critic agent");
  const std::vector<double> in = concat(state, action);
  double q = forward(q1_, in)[0];
  if (cfg_.twin_critics) q = std::min(q, forward(q2_, in)[0]);
  return q;
}

AgentLosses Agent::optimize(ReplayMemory& memory) {
  AgentLosses losses;
  if (cfg_.kind != AgentKind::ActorCritic) return losses;
  if (memory.size() < static_cast<std::size_t>(cfg_.batch_size)) return losses;

  const auto batch = memory.sample(cfg_.batch_size, rng_);
  const std::vector<double> targets = td_targets(batch);

  std::vector<TrainPair> q_batch(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    q_batch[i].input = concat(batch[i]->state, batch[i]->action);
    q_batch[i].target = {targets[i]};
  }
  double critic_loss = train_step(q1_, q1_opt_, q_batch);
  if (cfg_.twin_critics) critic_loss += train_step(q2_, q2_opt_, q_batch);
  losses.critic = critic_loss;
  ++critic_updates_;

  if (critic_updates_ % cfg_.actor_delay == 0) {
    // Deterministic policy gradient: push actor outputs up the critic's
    // action-gradient; critic parameters stay fixed here.
    MlpGrads actor_grads = make_grads(actor_);
    MlpGrads scratch = make_grads(q1_);
    const double scale = 1.0 / static_cast<double>(batch.size());
    double actor_loss = 0.0;
    const std::vector<double> dq = {1.0};
    for (const Transition* t : batch) {
      ForwardCache actor_cache = forward_cached(actor_, t->state);
      FeatureVector a = actor_cache.y;
      for (auto& v : a) v = clamp_unit(v);
      ForwardCache q_cache = forward_cached(q1_, concat(t->state, a));
      actor_loss -= q_cache.y[0] * scale;
      const std::vector<double> dinput = backward(q1_, q_cache, dq, scratch);
      std::vector<double> da(dinput.end() - action_dim_, dinput.end());
      for (auto& v : da) v *= -scale;  // minimize -Q
      backward(actor_, actor_cache, da, actor_grads);
    }
    apply_adam(actor_, actor_opt_, actor_grads);
    losses.actor = actor_loss;

    soft_update(actor_target_, actor_);
    soft_update(q1_target_, q1_);
    if (cfg_.twin_critics) soft_update(q2_target_, q2_);
  }
  return losses;
}

void Agent::soft_update(Mlp& target, const Mlp& net) const {
  const double tau = cfg_.tau_target;
  for (int l = 0; l < 3; ++l) {
    for (std::size_t i = 0; i < net.w[l].size(); ++i)
      target.w[l][i] = (1.0 - tau) * target.w[l][i] + tau * net.w[l][i];
    for (std::size_t i = 0; i < net.b[l].size(); ++i)
      target.b[l][i] = (1.0 - tau) * target.b[l][i] + tau * net.b[l][i];
  }
}

namespace {

nlohmann::ordered_json mlp_to_json(const Mlp& net) {
  nlohmann::ordered_json j;
  j["dims"] = net.dims;
  j["output"] = net.output == Mlp::Output::Tanh ? "tanh" : "identity";
  j["w"] = net.w;
  j["b"] = net.b;
  return j;
}

Mlp mlp_from_json(const nlohmann::ordered_json& j) {
  Mlp net;
  net.dims = j.at("dims").get<std::vector<int>>();
  net.output = j.at("output").get<std::string>() == "tanh" ? Mlp::Output::Tanh
                                                           : Mlp::Output::Identity;
  net.w = j.at("w").get<std::array<std::vector<double>, 3>>();
  net.b = j.at("b").get<std::array<std::vector<double>, 3>>();
  return net;
}

}  // namespace

void Agent::save(const std::string& path) const {
  if (cfg_.kind != AgentKind::ActorCritic)
    throw std::runtime_error("only actor-critic agents have checkpoints");
  nlohmann::ordered_json j;
  j["actor"] = mlp_to_json(actor_);
  j["actor_target"] = mlp_to_json(actor_target_);
  j["q1"] = mlp_to_json(q1_);
  j["q2"] = mlp_to_json(q2_);
  j["q1_target"] = mlp_to_json(q1_target_);
  j["q2_target"] = mlp_to_json(q2_target_);
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write agent checkpoint: " + path);
  file << j.dump() << '\n';
  if (!file) throw std::runtime_error("agent checkpoint write failed: " + path);
}

void Agent::load(const std::string& path) {
  if (cfg_.kind != AgentKind::ActorCritic)
    throw std::runtime_error("only actor-critic agents have checkpoints");
  std::ifstream file(path);
  if (!file) throw std::runtime_error("cannot open agent checkpoint: " + path);
  nlohmann::ordered_json j;
  try {
    file >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": malformed agent checkpoint: " + e.what());
  }
  actor_ = mlp_from_json(j.at("actor"));
  actor_target_ = mlp_from_json(j.at("actor_target"));
  q1_ = mlp_from_json(j.at("q1"));
  q2_ = mlp_from_json(j.at("q2"));
  q1_target_ = mlp_from_json(j.at("q1_target"));
  q2_target_ = mlp_from_json(j.at("q2_target"));
}

}  // namespace trajshield
