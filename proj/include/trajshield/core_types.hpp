#ifndef TRAJSHIELD_CORE_TYPES_HPP
#define TRAJSHIELD_CORE_TYPES_HPP

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace trajshield {

using FeatureVector = std::vector<double>;

enum class TrajectoryMode { StateOnly, StateAction };

std::string to_string(TrajectoryMode mode);
TrajectoryMode mode_from_string(const std::string& name);

// Per-step feature sequence of one in-progress or recorded episode.
// All steps share one dimension; push_back enforces it.
struct Trajectory {
  TrajectoryMode mode = TrajectoryMode::StateOnly;
  std::vector<FeatureVector> steps;

  void push_back(FeatureVector step);
  std::size_t size() const { return steps.size(); }
  bool empty() const { return steps.empty(); }
  void clear() { steps.clear(); }
};

// StateOnly -> state unchanged, StateAction -> state ++ action.
FeatureVector encode_step(const FeatureVector& state, const FeatureVector& action,
                          TrajectoryMode mode);

struct EpisodeRecord {
  std::string env_id;
  std::uint64_t seed = 0;
  std::vector<FeatureVector> states;
  std::vector<FeatureVector> actions;
  std::vector<double> rewards;
  bool crashed = false;

  // Count laws (|actions| = |rewards| = |states| - 1), uniform dimensions,
  // finite entries. Throws std::invalid_argument on violation.
  void validate() const;
};

// StateOnly keeps every state; StateAction pairs states with actions and
// drops the terminal state (it has no action). Empty result is an error.
Trajectory episode_to_trajectory(const EpisodeRecord& rec, TrajectoryMode mode);

struct DemoSet {
  TrajectoryMode mode = TrajectoryMode::StateOnly;
  std::vector<EpisodeRecord> safe;    // crashed == false
  std::vector<EpisodeRecord> unsafe;  // crashed == true

  void validate() const;
};

struct Transition {
  FeatureVector state;
  FeatureVector action;
  double reward = 0.0;
  FeatureVector next_state;
  bool done = false;
  bool crashed = false;
  bool filtered = false;

  void validate() const;
};

// FIFO ring of transitions with uniform minibatch sampling.
class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity = 1'000'000);

  void push(Transition t);
  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t unfiltered_count() const { return n_unfiltered_; }
  const Transition& at(std::size_t i) const;  // i = 0 is the oldest entry

  // Uniform sampling with replacement.
  std::vector<const Transition*> sample(std::size_t batch, std::mt19937_64& rng) const;

  // Uniform over entries with filtered == false. Returns nullopt when fewer
  // than batch such entries exist (skip signal, not an error).
  std::optional<std::vector<const Transition*>> sample_unfiltered(
      std::size_t batch, std::mt19937_64& rng) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // next slot to overwrite once full
  std::size_t n_unfiltered_ = 0;
  std::vector<Transition> entries_;
};

// Optional per-dimension z-score. Statistics come from the demonstration
// steps; dimensions with ~zero spread are left unscaled.
class Normalizer {
 public:
  static Normalizer fit(const std::vector<Trajectory>& trajs);

  FeatureVector apply(const FeatureVector& x) const;
  Trajectory apply(const Trajectory& t) const;
  std::size_t dim() const { return mean_.size(); }

 private:
  std::vector<double> mean_;
  std::vector<double> inv_std_;
};

// Seed mixing for derived deterministic streams (splitmix64 finalizer).
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace trajshield

#endif  // TRAJSHIELD_CORE_TYPES_HPP
