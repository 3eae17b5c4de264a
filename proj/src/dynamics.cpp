#include "trajshield/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace trajshield {

DynamicsModel DynamicsModel::make(int state_dim, int action_dim, int hidden, std::uint64_t seed) {
  if (state_dim < 1 || action_dim < 1 || hidden < 1)
    throw std::invalid_argument("dynamics model dimensions must be >= 1");
  DynamicsModel m;
  m.state_dim = state_dim;
  m.action_dim = action_dim;
  m.net = mlp_init({state_dim + action_dim, hidden, hidden, state_dim}, seed);
  return m;
}

FeatureVector DynamicsModel::predict_next(const FeatureVector& state,
                                          const FeatureVector& action) const {
  if (state.size() != static_cast<std::size_t>(state_dim) ||
      action.size() != static_cast<std::size_t>(action_dim))
    throw std::invalid_argument("dynamics predict: dimension mismatch");
  FeatureVector input;
  input.reserve(state.size() + action.size());
  input.insert(input.end(), state.begin(), state.end());
  input.insert(input.end(), action.begin(), action.end());
  const std::vector<double> delta = forward(net, input);
  FeatureVector next(state.size());
  for (std::size_t k = 0; k < state.size(); ++k) {
    next[k] = state[k] + delta[k];
    if (!std::isfinite(next[k]))
      throw std::runtime_error("dynamics prediction is non-finite");
  }
  return next;
}

DynamicsTrainer DynamicsTrainer::make(const DynamicsModel& model, double lr,
                                      std::size_t batch_size, std::size_t warmup) {
  DynamicsTrainer t;
  AdamConfig cfg;
  cfg.lr = lr;
  t.optim = OptimState::make(model.net, cfg);
  t.batch_size = batch_size;
  t.warmup = warmup;
  return t;
}

std::optional<double> DynamicsTrainer::train_from_replay(DynamicsModel& model,
                                                         const ReplayMemory& memory,
                                                         std::mt19937_64& rng) {
  if (memory.unfiltered_count() < std::max(batch_size, warmup)) return std::nullopt;
  const auto batch = memory.sample_unfiltered(batch_size, rng);
  if (!batch) return std::nullopt;
  std::vector<TrainPair> pairs;
  pairs.reserve(batch->size());
  for (const Transition* t : *batch) {
    TrainPair p;
    p.input.reserve(t->state.size() + t->action.size());
    p.input.insert(p.input.end(), t->state.begin(), t->state.end());
    p.input.insert(p.input.end(), t->action.begin(), t->action.end());
    p.target.resize(t->state.size());
    for (std::size_t k = 0; k < t->state.size(); ++k)
      p.target[k] = t->next_state[k] - t->state[k];
    pairs.push_back(std::move(p));
  }
  return train_step(model.net, optim, pairs);
}

}  // namespace trajshield
