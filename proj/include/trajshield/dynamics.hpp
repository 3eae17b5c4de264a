#ifndef TRAJSHIELD_DYNAMICS_HPP
#define TRAJSHIELD_DYNAMICS_HPP

#include <optional>
#include <random>

#include "trajshield/core_types.hpp"
#include "trajshield/neural.hpp"

namespace trajshield {

// One-step model of the environment transition, used to fabricate the next
// state for filtered actions. Predicts the state delta, so a zero net is the
// identity transition.
struct DynamicsModel {
  int state_dim = 0;
  int action_dim = 0;
  Mlp net;  // in = state_dim + action_dim, out = state_dim

  static DynamicsModel make(int state_dim, int action_dim, int hidden, std::uint64_t seed);

  FeatureVector predict_next(const FeatureVector& state, const FeatureVector& action) const;
};

struct DynamicsTrainer {
  OptimState optim;
  std::size_t batch_size = 256;
  std::size_t warmup = 1000;  // real transitions required before training

  static DynamicsTrainer make(const DynamicsModel& model, double lr = 3e-4,
                              std::size_t batch_size = 256, std::size_t warmup = 1000);

  // One supervised minibatch on real (unfiltered) transitions only; model
  // outputs never train the model. Returns nullopt when too few real
  // transitions are available (skip, not an error).
  std::optional<double> train_from_replay(DynamicsModel& model, const ReplayMemory& memory,
                                          std::mt19937_64& rng);
};

}  // namespace trajshield

#endif  // TRAJSHIELD_DYNAMICS_HPP
