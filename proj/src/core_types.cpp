#include "trajshield/core_types.hpp"

#include <cmath>
#include <stdexcept>

namespace trajshield {

std::string to_string(TrajectoryMode mode) {
  return mode == TrajectoryMode::StateOnly ? "state" : "state-action";
}

TrajectoryMode mode_from_string(const std::string& name) {
  if (name == "state") return TrajectoryMode::StateOnly;
  if (name == "state-action") return TrajectoryMode::StateAction;
  throw std::invalid_argument("unknown trajectory mode '" + name +
                              "' (expected 'state' or 'state-action')");
}

void Trajectory::push_back(FeatureVector step) {
  if (step.empty()) throw std::invalid_argument("trajectory step must not be empty");
  if (!steps.empty() && step.size() != steps.front().size()) {
    throw std::invalid_argument("trajectory step dimension mismatch: got " +
                                std::to_string(step.size()) + ", expected " +
                                std::to_string(steps.front().size()));
  }
  steps.push_back(std::move(step));
}

FeatureVector encode_step(const FeatureVector& state, const FeatureVector& action,
                          TrajectoryMode mode) {
  if (mode == TrajectoryMode::StateOnly) return state;
  FeatureVector out;
  out.reserve(state.size() + action.size());
  out.insert(out.end(), state.begin(), state.end());
  out.insert(out.end(), action.begin(), action.end());
  return out;
}

namespace {

bool all_finite(const FeatureVector& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

void EpisodeRecord::validate() const {
  if (states.empty()) throw std::invalid_argument("episode has no states");
  if (actions.size() != states.size() - 1 || rewards.size() != actions.size()) {
    throw std::invalid_argument(
        "episode count laws violated: |states|=" + std::to_string(states.size()) +
        " |actions|=" + std::to_string(actions.size()) +
        " |rewards|=" + std::to_string(rewards.size()));
  }
  const std::size_t sdim = states.front().size();
  if (sdim == 0) throw std::invalid_argument("episode state dimension is zero");
  for (const auto& s : states) {
    if (s.size() != sdim) throw std::invalid_argument("episode has mixed state dimensions");
    if (!all_finite(s)) throw std::invalid_argument("episode contains non-finite state entries");
  }
  if (!actions.empty()) {
    const std::size_t adim = actions.front().size();
    if (adim == 0) throw std::invalid_argument("episode action dimension is zero");
    for (const auto& a : actions) {
      if (a.size() != adim) throw std::invalid_argument("episode has mixed action dimensions");
      if (!all_finite(a)) throw std::invalid_argument("episode contains non-finite action entries");
    }
  }
  for (double r : rewards)
    if (!std::isfinite(r)) throw std::invalid_argument("episode contains non-finite rewards");
}

Trajectory episode_to_trajectory(const EpisodeRecord& rec, TrajectoryMode mode) {
  Trajectory traj;
  traj.mode = mode;
  if (mode == TrajectoryMode::StateOnly) {
    for (const auto& s : rec.states) traj.push_back(s);
  } else {
    for (std::size_t i = 0; i < rec.actions.size(); ++i)
      traj.push_back(encode_step(rec.states[i], rec.actions[i], mode));
  }
  if (traj.empty())
    throw std::invalid_argument("episode yields an empty trajectory in mode " + to_string(mode));
  return traj;
}

void DemoSet::validate() const {
  if (safe.empty()) throw std::invalid_argument("demo set has no safe demonstrations");
  if (unsafe.empty()) throw std::invalid_argument("demo set has no unsafe demonstrations");
  for (const auto& r : safe) {
    r.validate();
    if (r.crashed) throw std::invalid_argument("crashed record in the safe partition");
  }
  for (const auto& r : unsafe) {
    r.validate();
    if (!r.crashed) throw std::invalid_argument("non-crashed record in the unsafe partition");
  }
  const std::size_t sdim = safe.front().states.front().size();
  for (const auto* group : {&safe, &unsafe})
    for (const auto& r : *group)
      if (r.states.front().size() != sdim)
        throw std::invalid_argument("demo set has mixed state dimensions");
}

void Transition::validate() const {
  if (filtered && (!done || crashed))
    throw std::invalid_argument("filtered transition must have done=true, crashed=false");
  if (crashed && !done) throw std::invalid_argument("crashed transition must have done=true");
}

ReplayMemory::ReplayMemory(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw std::invalid_argument("replay capacity must be positive");
}

void ReplayMemory::push(Transition t) {
  t.validate();
  if (entries_.size() < capacity_) {
    if (!t.filtered) ++n_unfiltered_;
    entries_.push_back(std::move(t));
    return;
  }
  if (!entries_[head_].filtered) --n_unfiltered_;
  if (!t.filtered) ++n_unfiltered_;
  entries_[head_] = std::move(t);
  head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayMemory::at(std::size_t i) const {
  if (i >= entries_.size()) throw std::out_of_range("replay index out of range");
  if (entries_.size() < capacity_) return entries_[i];
  return entries_[(head_ + i) % capacity_];
}

std::vector<const Transition*> ReplayMemory::sample(std::size_t batch,
                                                    std::mt19937_64& rng) const {
  if (entries_.empty()) throw std::invalid_argument("cannot sample from empty replay memory");
  std::uniform_int_distribution<std::size_t> pick(0, entries_.size() - 1);
  std::vector<const Transition*> out;
  out.reserve(batch);
  for (std::size_t i = 0; i < batch; ++i) out.push_back(&entries_[pick(rng)]);
  return out;
}

std::optional<std::vector<const Transition*>> ReplayMemory::sample_unfiltered(
    std::size_t batch, std::mt19937_64& rng) const {
  if (n_unfiltered_ < batch) return std::nullopt;
  std::uniform_int_distribution<std::size_t> pick(0, entries_.size() - 1);
  std::vector<const Transition*> out;
  out.reserve(batch);
  while (out.size() < batch) {
    const Transition& t = entries_[pick(rng)];
    if (!t.filtered) out.push_back(&t);
  }
  return out;
}

Normalizer Normalizer::fit(const std::vector<Trajectory>& trajs) {
  Normalizer n;
  std::size_t dim = 0;
  for (const auto& t : trajs)
    if (!t.empty()) {
      dim = t.steps.front().size();
      break;
    }
  if (dim == 0) throw std::invalid_argument("cannot fit normalizer on empty trajectories");
  std::vector<double> sum(dim, 0.0);
  std::size_t count = 0;
  for (const auto& t : trajs)
    for (const auto& s : t.steps) {
      if (s.size() != dim) throw std::invalid_argument("normalizer input dimension mismatch");
      for (std::size_t k = 0; k < dim; ++k) sum[k] += s[k];
      ++count;
    }
  n.mean_.assign(dim, 0.0);
  for (std::size_t k = 0; k < dim; ++k) n.mean_[k] = sum[k] / static_cast<double>(count);
  std::vector<double> sq(dim, 0.0);
  for (const auto& t : trajs)
    for (const auto& s : t.steps)
      for (std::size_t k = 0; k < dim; ++k) {
        const double d = s[k] - n.mean_[k];
        sq[k] += d * d;
      }
  n.inv_std_.assign(dim, 1.0);
  for (std::size_t k = 0; k < dim; ++k) {
    const double sd = std::sqrt(sq[k] / static_cast<double>(count));
    if (sd > 1e-12) n.inv_std_[k] = 1.0 / sd;
  }
  return n;
}

FeatureVector Normalizer::apply(const FeatureVector& x) const {
  if (x.size() != mean_.size())
    throw std::invalid_argument("normalizer dimension mismatch");
  FeatureVector out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = (x[k] - mean_[k]) * inv_std_[k];
  return out;
}

Trajectory Normalizer::apply(const Trajectory& t) const {
  Trajectory out;
  out.mode = t.mode;
  out.steps.reserve(t.steps.size());
  for (const auto& s : t.steps) out.steps.push_back(apply(s));
  return out;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace trajshield
