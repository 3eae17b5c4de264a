#ifndef TRAJSHIELD_FILTERS_HPP
#define TRAJSHIELD_FILTERS_HPP

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "trajshield/core_types.hpp"

namespace trajshield {

// Which suffixes of the running trajectory and of a demonstration are
// compared. Eight shapes: Full, EqualLength, and Traj/Demo/Both windows at
// widths 5 and 10.
enum class WindowKind { Full, EqualLength, FixedTraj, FixedDemo, FixedBoth };

struct WindowShape {
  WindowKind kind = WindowKind::Full;
  int width = 0;  // 5 or 10 for the Fixed* kinds, 0 otherwise

  bool operator==(const WindowShape&) const = default;
};

enum class Aggregation { Min, Max, Mean };

// One of the 24 ways to score a trajectory against a demonstration group.
// Canonical id grammar: <Agg><Shape>[W<width>], e.g. MinFull, MaxEqual,
// MeanDemoW10, MinBothW5.
struct MethodSpec {
  WindowShape shape;
  Aggregation agg = Aggregation::Min;
  std::string id;
};

// Ordered pair: one method scores similarity to the safe group, the other
// to the unsafe group. 24 x 24 = 576 strategies.
struct StrategySpec {
  MethodSpec safe_method;
  MethodSpec unsafe_method;
};

enum class Verdict { Pass, Filter };

struct FilterDecision {
  Verdict verdict = Verdict::Filter;
  double safe_cost = 0.0;
  double unsafe_cost = 0.0;
};

// All 24 methods in canonical order (shape-major, aggregation-minor).
const std::vector<MethodSpec>& enumerate_methods();
// All 576 ordered pairs, safe-method-major.
std::vector<StrategySpec> enumerate_strategies();

MethodSpec parse_method(const std::string& id);
std::string strategy_id(const StrategySpec& s);  // "<safe>/<unsafe>"

// Applies the window rule; windows are trailing suffixes and clamp to the
// available length.
std::pair<std::span<const FeatureVector>, std::span<const FeatureVector>> apply_window(
    const Trajectory& traj, const Trajectory& demo, WindowShape shape);

double aggregate(Aggregation agg, std::span<const double> values);

// DTW cost of the windowed trajectory against every demo, reduced per the
// method's aggregation.
double group_cost(const Trajectory& traj, const std::vector<Trajectory>& demos,
                  const MethodSpec& method);

// Demonstration trajectories materialized once per demo set (optionally
// z-score normalized); read-only and safe to share across workers.
struct PreparedDemos {
  TrajectoryMode mode = TrajectoryMode::StateOnly;
  std::vector<Trajectory> safe;
  std::vector<Trajectory> unsafe;
  std::optional<Normalizer> normalizer;

  static PreparedDemos from(const DemoSet& demos, bool normalize = false);

  // Encodes (and normalizes, when configured) one step for comparison.
  FeatureVector encode(const FeatureVector& state, const FeatureVector& action) const;
};

// Pass iff safe_cost < unsafe_cost (strict); ties filter.
FilterDecision evaluate(const StrategySpec& strategy, const Trajectory& traj,
                        const PreparedDemos& demos);
FilterDecision evaluate(const StrategySpec& strategy, const Trajectory& traj,
                        const DemoSet& demos);

// Incrementally maintained per-demo costs for one (shape, demo group) as the
// trajectory grows step by step. Equivalent to recomputing group costs from
// scratch at every step, without the quadratic blowup for the shapes whose
// trajectory side is the whole prefix. The referenced demos must outlive the
// tracker.
class GroupCostTracker {
 public:
  GroupCostTracker(WindowShape shape, const std::vector<Trajectory>& demos);

  void push(const FeatureVector& step);
  const std::vector<double>& per_demo_costs() const { return costs_; }
  std::size_t steps() const { return t_; }

 private:
  WindowShape shape_;
  const std::vector<Trajectory>* demos_;
  std::size_t t_ = 0;
  std::vector<std::vector<double>> rows_;   // Full / FixedDemo / EqualLength DP rows
  std::vector<FeatureVector> window_;       // FixedTraj / FixedBoth trailing window
  std::vector<FeatureVector> all_steps_;    // EqualLength, while shorter than a demo
  std::vector<double> costs_;
};

// Per-step filter decisions for one strategy over one growing trajectory.
class StrategyEvaluator {
 public:
  StrategyEvaluator(const StrategySpec& strategy, const PreparedDemos& demos);

  FilterDecision push_and_evaluate(const FeatureVector& encoded_step);
  std::size_t steps() const { return safe_.steps(); }

 private:
  StrategySpec strategy_;
  GroupCostTracker safe_;
  GroupCostTracker unsafe_;
};

}  // namespace trajshield

#endif  // TRAJSHIELD_FILTERS_HPP
