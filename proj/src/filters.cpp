#include "trajshield/filters.hpp"

#include <algorithm>
#include <stdexcept>

#include "trajshield/dtw.hpp"

namespace trajshield {

namespace {

std::string shape_name(WindowShape s) {
  switch (s.kind) {
    case WindowKind::Full:
      return "Full";
    case WindowKind::EqualLength:
      return "Equal";
    case WindowKind::FixedTraj:
      return "TrajW" + std::to_string(s.width);
    case WindowKind::FixedDemo:
      return "DemoW" + std::to_string(s.width);
    case WindowKind::FixedBoth:
      return "BothW" + std::to_string(s.width);
  }
  throw std::logic_error("unreachable window kind");
}

std::string agg_name(Aggregation a) {
  switch (a) {
    case Aggregation::Min:
      return "Min";
    case Aggregation::Max:
      return "Max";
    case Aggregation::Mean:
      return "Mean";
  }
  throw std::logic_error("unreachable aggregation");
}

std::span<const FeatureVector> suffix(const std::vector<FeatureVector>& v, std::size_t n) {
  n = std::min(n, v.size());
  return {v.data() + (v.size() - n), n};
}

}  // namespace

const std::vector<MethodSpec>& enumerate_methods() {
  static const std::vector<MethodSpec> methods = [] {
    const WindowShape shapes[] = {
        {WindowKind::Full, 0},       {WindowKind::EqualLength, 0},
        {WindowKind::FixedTraj, 5},  {WindowKind::FixedTraj, 10},
        {WindowKind::FixedDemo, 5},  {WindowKind::FixedDemo, 10},
        {WindowKind::FixedBoth, 5},  {WindowKind::FixedBoth, 10},
    };
    const Aggregation aggs[] = {Aggregation::Min, Aggregation::Max, Aggregation::Mean};
    std::vector<MethodSpec> out;
    out.reserve(24);
    for (const auto& shape : shapes)
      for (const auto& agg : aggs)
        out.push_back(MethodSpec{shape, agg, agg_name(agg) + shape_name(shape)});
    return out;
  }();
  return methods;
}

std::vector<StrategySpec> enumerate_strategies() {
  const auto& methods = enumerate_methods();
  std::vector<StrategySpec> out;
  out.reserve(methods.size() * methods.size());
  for (const auto& safe : methods)
    for (const auto& unsafe : methods) out.push_back(StrategySpec{safe, unsafe});
  return out;
}

MethodSpec parse_method(const std::string& id) {
  for (const auto& m : enumerate_methods())
    if (m.id == id) return m;
  throw std::invalid_argument("unknown method id '" + id +
                              "' (expected <Min|Max|Mean><Full|Equal|TrajW5|TrajW10|DemoW5|"
                              "DemoW10|BothW5|BothW10>)");
}

std::string strategy_id(const StrategySpec& s) {
  return s.safe_method.id + "/" + s.unsafe_method.id;
}

std::pair<std::span<const FeatureVector>, std::span<const FeatureVector>> apply_window(
    const Trajectory& traj, const Trajectory& demo, WindowShape shape) {
  if (traj.empty() || demo.empty())
    throw std::invalid_argument("apply_window: empty sequence");
  const auto& ts = traj.steps;
  const auto& ds = demo.steps;
  const std::size_t w = static_cast<std::size_t>(shape.width);
  switch (shape.kind) {
    case WindowKind::Full:
      return {suffix(ts, ts.size()), suffix(ds, ds.size())};
    case WindowKind::EqualLength:
      return {suffix(ts, ts.size()), suffix(ds, ts.size())};
    case WindowKind::FixedTraj:
      return {suffix(ts, w), suffix(ds, ds.size())};
    case WindowKind::FixedDemo:
      return {suffix(ts, ts.size()), suffix(ds, w)};
    case WindowKind::FixedBoth:
      return {suffix(ts, w), suffix(ds, w)};
  }
  throw std::logic_error("unreachable window kind");
}

double aggregate(Aggregation agg, std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("aggregate: empty value set");
  switch (agg) {
    case Aggregation::Min:
      return *std::min_element(values.begin(), values.end());
    case Aggregation::Max:
      return *std::max_element(values.begin(), values.end());
    case Aggregation::Mean: {
      double sum = 0.0;
      for (double v : values) sum += v;
      return sum / static_cast<double>(values.size());
    }
  }
  throw std::logic_error("unreachable aggregation");
}

double group_cost(const Trajectory& traj, const std::vector<Trajectory>& demos,
                  const MethodSpec& method) {
  if (demos.empty()) throw std::invalid_argument("group_cost: empty demo group");
  if (traj.empty()) throw std::invalid_argument("group_cost: empty trajectory");
  std::vector<double> costs;
  costs.reserve(demos.size());
  for (const auto& demo : demos) {
    auto [tw, dw] = apply_window(traj, demo, method.shape);
    costs.push_back(dtw_cost(tw, dw));
  }
  return aggregate(method.agg, costs);
}

PreparedDemos PreparedDemos::from(const DemoSet& demos, bool normalize) {
  demos.validate();
  PreparedDemos out;
  out.mode = demos.mode;
  for (const auto& rec : demos.safe) out.safe.push_back(episode_to_trajectory(rec, demos.mode));
  for (const auto& rec : demos.unsafe)
    out.unsafe.push_back(episode_to_trajectory(rec, demos.mode));
  if (normalize) {
    std::vector<Trajectory> all = out.safe;
    all.insert(all.end(), out.unsafe.begin(), out.unsafe.end());
    out.normalizer = Normalizer::fit(all);
    for (auto& t : out.safe) t = out.normalizer->apply(t);
    for (auto& t : out.unsafe) t = out.normalizer->apply(t);
  }
  return out;
}

FeatureVector PreparedDemos::encode(const FeatureVector& state, const FeatureVector& action) const {
  FeatureVector enc = encode_step(state, action, mode);
  if (normalizer) enc = normalizer->apply(enc);
  return enc;
}

FilterDecision evaluate(const StrategySpec& strategy, const Trajectory& traj,
                        const PreparedDemos& demos) {
  if (traj.empty()) throw std::invalid_argument("evaluate: empty trajectory");
  if (traj.mode != demos.mode) throw std::invalid_argument("evaluate: trajectory mode mismatch");
  FilterDecision d;
  d.safe_cost = group_cost(traj, demos.safe, strategy.safe_method);
  d.unsafe_cost = group_cost(traj, demos.unsafe, strategy.unsafe_method);
  d.verdict = d.safe_cost < d.unsafe_cost ? Verdict::Pass : Verdict::Filter;
  return d;
}

FilterDecision evaluate(const StrategySpec& strategy, const Trajectory& traj,
                        const DemoSet& demos) {
  return evaluate(strategy, traj, PreparedDemos::from(demos));
}

GroupCostTracker::GroupCostTracker(WindowShape shape, const std::vector<Trajectory>& demos)
    : shape_(shape), demos_(&demos) {
  if (demos.empty()) throw std::invalid_argument("GroupCostTracker: empty demo group");
  costs_.assign(demos.size(), 0.0);
  if (shape_.kind == WindowKind::Full || shape_.kind == WindowKind::FixedDemo ||
      shape_.kind == WindowKind::EqualLength) {
    rows_.reserve(demos.size());
    for (const auto& demo : demos) {
      const std::size_t cols = shape_.kind == WindowKind::FixedDemo
                                   ? std::min<std::size_t>(shape_.width, demo.size())
                                   : demo.size();
      rows_.push_back(detail::dtw_init_row(cols));
    }
  }
}

void GroupCostTracker::push(const FeatureVector& step) {
  ++t_;
  const auto& demos = *demos_;
  const std::size_t w = static_cast<std::size_t>(shape_.width);
  switch (shape_.kind) {
    case WindowKind::Full:
    case WindowKind::FixedDemo: {
      for (std::size_t d = 0; d < demos.size(); ++d) {
        const auto cols = shape_.kind == WindowKind::Full
                              ? suffix(demos[d].steps, demos[d].size())
                              : suffix(demos[d].steps, w);
        detail::dtw_extend_row(rows_[d], step, cols);
        costs_[d] = rows_[d].back();
      }
      break;
    }
    case WindowKind::EqualLength: {
      all_steps_.push_back(step);
      for (std::size_t d = 0; d < demos.size(); ++d) {
        const auto& demo = demos[d].steps;
        detail::dtw_extend_row(rows_[d], step, std::span<const FeatureVector>(demo));
        if (t_ >= demo.size()) {
          // The equal-length demo window is the whole demo from here on, so
          // the running full-demo DP row already holds the answer.
          costs_[d] = rows_[d].back();
        } else {
          costs_[d] = dtw_cost(std::span<const FeatureVector>(all_steps_), suffix(demo, t_));
        }
      }
      break;
    }
    case WindowKind::FixedTraj:
    case WindowKind::FixedBoth: {
      window_.push_back(step);
      if (window_.size() > w) window_.erase(window_.begin());
      const std::span<const FeatureVector> tw(window_);
      for (std::size_t d = 0; d < demos.size(); ++d) {
        const auto cols = shape_.kind == WindowKind::FixedTraj
                              ? suffix(demos[d].steps, demos[d].size())
                              : suffix(demos[d].steps, w);
        costs_[d] = dtw_cost(tw, cols);
      }
      break;
    }
  }
}

StrategyEvaluator::StrategyEvaluator(const StrategySpec& strategy, const PreparedDemos& demos)
    : strategy_(strategy),
      safe_(strategy.safe_method.shape, demos.safe),
      unsafe_(strategy.unsafe_method.shape, demos.unsafe) {}

FilterDecision StrategyEvaluator::push_and_evaluate(const FeatureVector& encoded_step) {
  safe_.push(encoded_step);
  unsafe_.push(encoded_step);
  FilterDecision d;
  d.safe_cost = aggregate(strategy_.safe_method.agg, safe_.per_demo_costs());
  d.unsafe_cost = aggregate(strategy_.unsafe_method.agg, unsafe_.per_demo_costs());
  d.verdict = d.safe_cost < d.unsafe_cost ? Verdict::Pass : Verdict::Filter;
  return d;
}

}  // namespace trajshield
