#ifndef TRAJSHIELD_CLI_HPP
#define TRAJSHIELD_CLI_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "trajshield/core_types.hpp"

namespace trajshield {

struct RunConfig {
  std::string env_id = "cliff2d";
  TrajectoryMode mode = TrajectoryMode::StateOnly;
  std::string safe_method_id;
  std::string unsafe_method_id;
  bool shield = true;
  bool normalize = false;

  std::string agent_kind = "random";  // random | scripted | ac
  long episodes = 5000;
  std::vector<std::uint64_t> seeds = {1};

  int demo_count = 50;     // per group, gen-demos
  long max_episodes = 0;   // gen-demos search budget (0 = auto)

  std::string demos_path;
  std::vector<std::string> corpus_paths;  // rank: paired with demo_paths
  std::vector<std::string> demo_paths;
  std::string out_path;
  std::string baseline_timing_path;
  std::string model_in;
  std::string model_out;

  int top_k = 5;
  int workers = 0;

  // network / training knobs
  int hidden = 256;
  int batch_size = 256;
  double lr = 3e-4;
  double gamma = 0.99;
  double noise_std = 0.1;
  std::size_t replay_capacity = 1'000'000;
  int dynamics_hidden = 0;  // 0 = same as hidden
  int dynamics_warmup = 1000;
};

struct TrainSummary {
  long episodes = 0;
  double acc_reward_mean = 0.0;  // over the final 100 episodes (mean across seeds)
  double acc_reward_std = 0.0;   // across seeds when several, else within the window
  double crash_pct = 0.0;        // cumulative
  double crash_pct_trailing = 0.0;  // trailing 100 episodes
  double filtered_pct = 0.0;
  double time_pct = 100.0;  // 100 * total wall / baseline wall
  double total_ms = 0.0;    // mean across seeds
};

// Runs an unshielded agent, keeps the most recent N crashed and N safe
// episodes, writes the JSONL demo corpus to out_path.
void cmd_gen_demos(const RunConfig& cfg);

// Scores all 576 strategies over the given corpora, writes the full ranking
// CSV to out_path and prints the top-k table.
void cmd_rank(const RunConfig& cfg);

// Shielded (or baseline) training; writes per-episode metrics CSV, a
// .timing.json sidecar and a .summary.json next to out_path.
TrainSummary cmd_train(const RunConfig& cfg);

// Same loop without learning; useful for checkpoints and baselines.
TrainSummary cmd_eval(const RunConfig& cfg);

// Offline replay of one strategy over a corpus; per-episode outcomes CSV
// plus the strategy score.
void cmd_replay(const RunConfig& cfg);

}  // namespace trajshield

#endif  // TRAJSHIELD_CLI_HPP
