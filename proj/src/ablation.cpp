#include "trajshield/ablation.hpp"

#include <algorithm>
#include <atomic>
#include <stdexcept>
#include <thread>

namespace trajshield {

namespace {

// Number of comparison steps a recorded episode replays: one per action.
std::size_t replay_length(const EpisodeRecord& episode) {
  if (episode.actions.empty())
    throw std::invalid_argument("cannot replay an episode with no actions");
  return episode.actions.size();
}

EpisodeOutcome outcome_from_filter_step(const EpisodeRecord& episode, std::size_t length,
                                        std::size_t first_filter_step /* 0 = never */) {
  EpisodeOutcome out;
  const bool filtered = first_filter_step > 0;
  const std::size_t cut = filtered ? first_filter_step : length;
  out.length_ratio = static_cast<double>(cut) / static_cast<double>(length);
  out.safe = !episode.crashed || (filtered && first_filter_step < length);
  return out;
}

}  // namespace

EpisodeOutcome episode_outcome(const StrategySpec& strategy, const EpisodeRecord& episode,
                               const PreparedDemos& demos, TrajectoryMode mode) {
  if (demos.mode != mode) throw std::invalid_argument("episode_outcome: mode mismatch");
  episode.validate();
  const std::size_t length = replay_length(episode);
  StrategyEvaluator evaluator(strategy, demos);
  std::size_t first_filter_step = 0;
  for (std::size_t i = 0; i < length; ++i) {
    const FilterDecision d =
        evaluator.push_and_evaluate(demos.encode(episode.states[i], episode.actions[i]));
    if (d.verdict == Verdict::Filter) {
      first_filter_step = i + 1;
      break;
    }
  }
  return outcome_from_filter_step(episode, length, first_filter_step);
}

StrategyScore score_strategy(const StrategySpec& strategy,
                             const std::vector<EpisodeRecord>& corpus,
                             const PreparedDemos& demos, TrajectoryMode mode) {
  if (corpus.empty()) throw std::invalid_argument("score_strategy: empty corpus");
  StrategyScore s;
  s.strategy = strategy;
  double ratio_sum = 0.0;
  long safe_count = 0;
  for (const auto& episode : corpus) {
    const EpisodeOutcome o = episode_outcome(strategy, episode, demos, mode);
    ratio_sum += o.length_ratio;
    if (o.safe) ++safe_count;
  }
  s.mean_length_ratio = ratio_sum / static_cast<double>(corpus.size());
  s.safe_rate = static_cast<double>(safe_count) / static_cast<double>(corpus.size());
  s.score = s.mean_length_ratio * s.safe_rate;
  return s;
}

namespace {

// Per-episode first-filter step for every strategy, from the 24 method cost
// curves computed in one pass over the episode.
std::vector<std::uint32_t> first_filter_steps(const EpisodeRecord& episode,
                                              const PreparedDemos& demos,
                                              const std::vector<MethodSpec>& methods,
                                              const std::vector<StrategySpec>& strategies) {
  const std::size_t length = replay_length(episode);
  const std::size_t n_methods = methods.size();

  // curve[m * length + i] = group cost of method m at step i+1
  std::vector<double> safe_curves(n_methods * length);
  std::vector<double> unsafe_curves(n_methods * length);
  {
    // One tracker per distinct shape and group; aggregations share them.
    std::vector<GroupCostTracker> safe_track;
    std::vector<GroupCostTracker> unsafe_track;
    std::vector<std::size_t> shape_of_method(n_methods);
    std::vector<WindowShape> shapes;
    for (std::size_t m = 0; m < n_methods; ++m) {
      const WindowShape shape = methods[m].shape;
      std::size_t idx = shapes.size();
      for (std::size_t k = 0; k < shapes.size(); ++k)
        if (shapes[k] == shape) {
          idx = k;
          break;
        }
      if (idx == shapes.size()) {
        shapes.push_back(shape);
        safe_track.emplace_back(shape, demos.safe);
        unsafe_track.emplace_back(shape, demos.unsafe);
      }
      shape_of_method[m] = idx;
    }
    for (std::size_t i = 0; i < length; ++i) {
      const FeatureVector step = demos.encode(episode.states[i], episode.actions[i]);
      for (auto& t : safe_track) t.push(step);
      for (auto& t : unsafe_track) t.push(step);
      for (std::size_t m = 0; m < n_methods; ++m) {
        const std::size_t k = shape_of_method[m];
        safe_curves[m * length + i] =
            aggregate(methods[m].agg, safe_track[k].per_demo_costs());
        unsafe_curves[m * length + i] =
            aggregate(methods[m].agg, unsafe_track[k].per_demo_costs());
      }
    }
  }

  std::vector<std::uint32_t> first(strategies.size(), 0);
  std::vector<std::size_t> method_index(strategies.size() * 2);
  for (std::size_t s = 0; s < strategies.size(); ++s) {
    // strategies enumerate safe-major over the same canonical method order
    method_index[2 * s] = s / n_methods;
    method_index[2 * s + 1] = s % n_methods;
  }
  for (std::size_t s = 0; s < strategies.size(); ++s) {
    const double* sc = safe_curves.data() + method_index[2 * s] * length;
    const double* uc = unsafe_curves.data() + method_index[2 * s + 1] * length;
    for (std::size_t i = 0; i < length; ++i) {
      if (!(sc[i] < uc[i])) {
        first[s] = static_cast<std::uint32_t>(i + 1);
        break;
      }
    }
  }
  return first;
}

struct EnvScores {
  std::vector<double> mean_ratio;  // per strategy
  std::vector<double> safe_rate;
};

EnvScores score_env(const RankInput& input, TrajectoryMode mode, int workers, bool normalize,
                    const std::vector<MethodSpec>& methods,
                    const std::vector<StrategySpec>& strategies) {
  if (input.corpus.empty())
    throw std::invalid_argument("rank: empty corpus for env " + input.env_id);
  DemoSet demos = input.demos;
  demos.mode = mode;
  const PreparedDemos prepared = PreparedDemos::from(demos, normalize);
  for (const auto& episode : input.corpus) episode.validate();

  const std::size_t n_episodes = input.corpus.size();
  std::vector<std::vector<std::uint32_t>> per_episode(n_episodes);

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    while (true) {
      const std::size_t e = next.fetch_add(1);
      if (e >= n_episodes) break;
      per_episode[e] = first_filter_steps(input.corpus[e], prepared, methods, strategies);
    }
  };
  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  // Ordered reduction over episodes keeps results worker-count independent.
  EnvScores scores;
  scores.mean_ratio.assign(strategies.size(), 0.0);
  scores.safe_rate.assign(strategies.size(), 0.0);
  for (std::size_t s = 0; s < strategies.size(); ++s) {
    double ratio_sum = 0.0;
    long safe_count = 0;
    for (std::size_t e = 0; e < n_episodes; ++e) {
      const EpisodeOutcome o = outcome_from_filter_step(
          input.corpus[e], replay_length(input.corpus[e]), per_episode[e][s]);
      ratio_sum += o.length_ratio;
      if (o.safe) ++safe_count;
    }
    scores.mean_ratio[s] = ratio_sum / static_cast<double>(n_episodes);
    scores.safe_rate[s] = static_cast<double>(safe_count) / static_cast<double>(n_episodes);
  }
  return scores;
}

}  // namespace

std::vector<StrategyScore> score_all_strategies(const std::vector<RankInput>& inputs,
                                                TrajectoryMode mode, int workers,
                                                bool normalize) {
  if (inputs.empty()) throw std::invalid_argument("rank: no env corpora given");
  const auto& methods = enumerate_methods();
  const auto strategies = enumerate_strategies();

  std::vector<EnvScores> env_scores;
  env_scores.reserve(inputs.size());
  for (const auto& input : inputs)
    env_scores.push_back(score_env(input, mode, workers, normalize, methods, strategies));

  std::vector<StrategyScore> out(strategies.size());
  for (std::size_t s = 0; s < strategies.size(); ++s) {
    StrategyScore& sc = out[s];
    sc.strategy = strategies[s];
    double score_sum = 0.0, ratio_sum = 0.0, safe_sum = 0.0;
    for (std::size_t e = 0; e < inputs.size(); ++e) {
      const double score = env_scores[e].mean_ratio[s] * env_scores[e].safe_rate[s];
      sc.per_env[inputs[e].env_id] = score;
      score_sum += score;
      ratio_sum += env_scores[e].mean_ratio[s];
      safe_sum += env_scores[e].safe_rate[s];
    }
    const double n = static_cast<double>(inputs.size());
    sc.score = score_sum / n;
    sc.mean_length_ratio = ratio_sum / n;
    sc.safe_rate = safe_sum / n;
  }

  std::sort(out.begin(), out.end(), [](const StrategyScore& a, const StrategyScore& b) {
    if (a.score != b.score) return a.score > b.score;
    return strategy_id(a.strategy) < strategy_id(b.strategy);
  });
  return out;
}

std::vector<StrategyScore> rank_all(const std::vector<RankInput>& inputs, TrajectoryMode mode,
                                    int top_k, int workers, bool normalize) {
  if (top_k < 1) throw std::invalid_argument("rank: top_k must be >= 1");
  std::vector<StrategyScore> all = score_all_strategies(inputs, mode, workers, normalize);
  if (static_cast<std::size_t>(top_k) < all.size()) all.resize(top_k);
  return all;
}

}  // namespace trajshield
