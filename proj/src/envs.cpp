#include "trajshield/envs.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace trajshield {

namespace {

double clamp_unit(double v) { return v < -1.0 ? -1.0 : (v > 1.0 ? 1.0 : v); }

void check_action(const FeatureVector& a, int dim) {
  if (a.size() != static_cast<std::size_t>(dim))
    throw std::invalid_argument("action dimension mismatch: got " + std::to_string(a.size()) +
                                ", expected " + std::to_string(dim));
}

constexpr double kGoalX = 0.9, kGoalY = 0.5;
constexpr double kHazardX = 0.5, kHazardY = 0.5, kHazardR = 0.15;
constexpr double kSuccessR = 0.05;
constexpr double kVelDecay = 0.9, kAccelGain = 0.1, kPosGain = 0.05;

constexpr double kGravity = 9.8, kCartMass = 1.0, kPoleMass = 0.1, kHalfLength = 0.5;
constexpr double kForceGain = 10.0, kDt = 0.02;
constexpr double kThetaLimit = 0.2095, kTrackLimit = 2.4;

}  // namespace

CliffWorld2D::CliffWorld2D() {
  spec_ = EnvSpec{"cliff2d", 4, 2, 200, -std::sqrt(2.0)};
}

FeatureVector CliffWorld2D::reset(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> noise(-0.02, 0.02);
  state_ = {0.1 + noise(rng), 0.5 + noise(rng), noise(rng), noise(rng)};
  steps_ = 0;
  done_ = false;
  return state_;
}

FeatureVector CliffWorld2D::reset_nominal() {
  state_ = {0.1, 0.5, 0.0, 0.0};
  steps_ = 0;
  done_ = false;
  return state_;
}

StepResult CliffWorld2D::step(const FeatureVector& action) {
  if (done_) throw std::runtime_error("cliff2d: step() after episode end");
  check_action(action, spec_.action_dim);
  for (int k = 0; k < 2; ++k) {
    const double a = clamp_unit(action[k]);
    state_[2 + k] = clamp_unit(kVelDecay * state_[2 + k] + kAccelGain * a);
    state_[k] += kPosGain * state_[2 + k];
  }
  const double dx = state_[0] - kGoalX;
  const double dy = state_[1] - kGoalY;
  const double goal_dist = std::sqrt(dx * dx + dy * dy);
  const double hx = state_[0] - kHazardX;
  const double hy = state_[1] - kHazardY;
  const bool in_hazard = std::sqrt(hx * hx + hy * hy) < kHazardR;
  const bool out_of_box =
      state_[0] < 0.0 || state_[0] > 1.0 || state_[1] < 0.0 || state_[1] > 1.0;

  StepResult r;
  r.reward = -goal_dist;
  r.crashed = in_hazard || out_of_box;
  ++steps_;
  r.done = r.crashed || goal_dist < kSuccessR || steps_ >= spec_.horizon;
  r.next_state = state_;
  done_ = r.done;
  return r;
}

PoleBalance::PoleBalance() {
  spec_ = EnvSpec{"polebalance", 4, 1, 500, -1.0};
}

FeatureVector PoleBalance::reset(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> noise(-0.05, 0.05);
  state_ = {noise(rng), noise(rng), noise(rng), noise(rng)};
  steps_ = 0;
  done_ = false;
  return state_;
}

FeatureVector PoleBalance::reset_nominal() {
  state_ = {0.0, 0.0, 0.0, 0.0};
  steps_ = 0;
  done_ = false;
  return state_;
}

StepResult PoleBalance::step(const FeatureVector& action) {
  if (done_) throw std::runtime_error("polebalance: step() after episode end");
  check_action(action, spec_.action_dim);
  const double force = kForceGain * clamp_unit(action[0]);
  const double total_mass = kCartMass + kPoleMass;
  const double pole_mass_length = kPoleMass * kHalfLength;

  double x = state_[0], x_dot = state_[1], theta = state_[2], theta_dot = state_[3];
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);
  const double temp = (force + pole_mass_length * theta_dot * theta_dot * sin_t) / total_mass;
  const double theta_acc = (kGravity * sin_t - cos_t * temp) /
                           (kHalfLength * (4.0 / 3.0 - kPoleMass * cos_t * cos_t / total_mass));
  const double x_acc = temp - pole_mass_length * theta_acc * cos_t / total_mass;

  x += kDt * x_dot;
  x_dot += kDt * x_acc;
  theta += kDt * theta_dot;
  theta_dot += kDt * theta_acc;
  state_ = {x, x_dot, theta, theta_dot};

  StepResult r;
  r.crashed = std::abs(theta) > kThetaLimit || std::abs(x) > kTrackLimit;
  r.reward = r.crashed ? 0.0 : 1.0;
  ++steps_;
  r.done = r.crashed || steps_ >= spec_.horizon;
  r.next_state = state_;
  done_ = r.done;
  return r;
}

std::unique_ptr<Env> make_env(const std::string& id) {
  if (id == "cliff2d") return std::make_unique<CliffWorld2D>();
  if (id == "polebalance") return std::make_unique<PoleBalance>();
  throw std::invalid_argument("unknown env id '" + id + "' (expected cliff2d or polebalance)");
}

double env_min_reward(const std::string& id) {
  return make_env(id)->spec().min_reward;
}

}  // namespace trajshield
