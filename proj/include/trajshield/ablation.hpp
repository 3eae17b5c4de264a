#ifndef TRAJSHIELD_ABLATION_HPP
#define TRAJSHIELD_ABLATION_HPP

#include <map>
#include <string>
#include <vector>

#include "trajshield/core_types.hpp"
#include "trajshield/filters.hpp"

namespace trajshield {

struct EpisodeOutcome {
  double length_ratio = 1.0;  // filtered length / original length, in (0,1]
  bool safe = true;           // crash prevented (or no crash to prevent)
};

// Replays a recorded episode through the filter step by step. The filtered
// length is the first step with a Filter verdict (the full length when none
// filters). A crashed episode counts as safe iff the filter triggers
// strictly before its final step.
EpisodeOutcome episode_outcome(const StrategySpec& strategy, const EpisodeRecord& episode,
                               const PreparedDemos& demos, TrajectoryMode mode);

struct StrategyScore {
  StrategySpec strategy;
  double mean_length_ratio = 0.0;
  double safe_rate = 0.0;
  double score = 0.0;  // mean_length_ratio * safe_rate, averaged across envs
  std::map<std::string, double> per_env;
};

StrategyScore score_strategy(const StrategySpec& strategy,
                             const std::vector<EpisodeRecord>& corpus,
                             const PreparedDemos& demos, TrajectoryMode mode);

struct RankInput {
  std::string env_id;
  std::vector<EpisodeRecord> corpus;
  DemoSet demos;
};

// Scores all 576 strategies on every env corpus. Costs for the 24 methods
// are computed once per episode and shared across strategies; episodes fan
// out over worker threads with a deterministic ordered reduction, so results
// are identical for any worker count. Sorted by mean score descending, ties
// by strategy id.
std::vector<StrategyScore> score_all_strategies(const std::vector<RankInput>& inputs,
                                                TrajectoryMode mode, int workers = 0,
                                                bool normalize = false);

std::vector<StrategyScore> rank_all(const std::vector<RankInput>& inputs, TrajectoryMode mode,
                                    int top_k, int workers = 0, bool normalize = false);

}  // namespace trajshield

#endif  // TRAJSHIELD_ABLATION_HPP
