#include "trajshield/shield.hpp"

#include <chrono>
#include <stdexcept>

namespace trajshield {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

Transition filtered_transition(const ShieldConfig& cfg, const DynamicsModel& dynamics,
                               const FeatureVector& state, const FeatureVector& action) {
  Transition t;
  t.state = state;
  t.action = action;
  t.reward = cfg.r_task;
  t.next_state = dynamics.predict_next(state, action);
  t.done = true;
  t.crashed = false;
  t.filtered = true;
  return t;
}

Transition real_transition(Env& env, const FeatureVector& state, const FeatureVector& action) {
  const StepResult r = env.step(action);
  Transition t;
  t.state = state;
  t.action = action;
  t.reward = r.reward;
  t.next_state = r.next_state;
  t.done = r.done;
  t.crashed = r.crashed;
  t.filtered = false;
  return t;
}

}  // namespace

Transition shield_step(const ShieldConfig& cfg, const PreparedDemos& demos,
                       const DynamicsModel& dynamics, Env& env, Trajectory& traj,
                       const FeatureVector& state, const FeatureVector& action) {
  if (!cfg.enabled) return real_transition(env, state, action);
  traj.push_back(demos.encode(state, action));
  const FilterDecision decision = evaluate(cfg.strategy, traj, demos);
  if (decision.verdict == Verdict::Pass) return real_transition(env, state, action);
  return filtered_transition(cfg, dynamics, state, action);
}

ShieldRunner::ShieldRunner(ShieldConfig cfg, const PreparedDemos* demos, Env& env, Agent& agent,
                           ReplayMemory& memory, DynamicsModel* dynamics,
                           DynamicsTrainer* dynamics_trainer, std::uint64_t seed)
    : cfg_(cfg),
      demos_(demos),
      env_(&env),
      agent_(&agent),
      memory_(&memory),
      dynamics_(dynamics),
      dynamics_trainer_(dynamics_trainer),
      dyn_rng_(mix_seed(seed, 0x8d1e)) {
  if (cfg_.enabled) {
    if (demos_ == nullptr || dynamics_ == nullptr)
      throw std::invalid_argument("shield enabled but demos or dynamics missing");
    if (demos_->mode != cfg_.mode)
      throw std::invalid_argument("shield mode differs from prepared demo mode");
  }
}

EpisodeResult ShieldRunner::run_episode(std::uint64_t episode_seed, bool learn) {
  const auto t_total = Clock::now();
  double shield_ms = 0.0;

  EpisodeResult out;
  EpisodeRecord& rec = out.record;
  rec.env_id = env_->spec().id;
  rec.seed = episode_seed;

  FeatureVector state = env_->reset(episode_seed);
  rec.states.push_back(state);

  std::optional<StrategyEvaluator> evaluator;
  if (cfg_.enabled) evaluator.emplace(cfg_.strategy, *demos_);

  bool done = false;
  bool crashed = false;
  bool filtered = false;
  double acc_reward = 0.0;
  long steps = 0;

  while (!done) {
    const FeatureVector action = agent_->act(state, learn);

    Transition tr;
    if (cfg_.enabled) {
      const auto t_shield = Clock::now();
      const FilterDecision decision =
          evaluator->push_and_evaluate(demos_->encode(state, action));
      shield_ms += ms_since(t_shield);
      if (decision.verdict == Verdict::Pass) {
        tr = real_transition(*env_, state, action);
        ++stats_.env_steps;
      } else {
        tr = filtered_transition(cfg_, *dynamics_, state, action);
        filtered = true;
      }
    } else {
      tr = real_transition(*env_, state, action);
      ++stats_.env_steps;
    }

    memory_->push(tr);
    if (learn) {
      agent_->optimize(*memory_);
      if (cfg_.enabled && dynamics_trainer_ != nullptr)
        dynamics_trainer_->train_from_replay(*dynamics_, *memory_, dyn_rng_);
    }

    rec.actions.push_back(action);
    rec.rewards.push_back(tr.reward);
    rec.states.push_back(tr.next_state);
    acc_reward += tr.reward;
    ++steps;
    crashed = tr.crashed;
    done = tr.done;
    state = tr.next_state;
  }

  rec.crashed = crashed;

  ++stats_.episodes;
  if (crashed) ++stats_.crashes;
  if (filtered) ++stats_.filtered_episodes;
  const double total_ms = ms_since(t_total);
  stats_.shield_ms += shield_ms;
  stats_.total_ms += total_ms;

  out.metrics = EpisodeMetrics{episode_index_++, acc_reward, crashed, filtered,
                               steps,            shield_ms,  total_ms};
  return out;
}

}  // namespace trajshield
