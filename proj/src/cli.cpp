#include "trajshield/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "json.hpp"
#include "trajshield/ablation.hpp"
#include "trajshield/agent.hpp"
#include "trajshield/dataset.hpp"
#include "trajshield/dynamics.hpp"
#include "trajshield/envs.hpp"
#include "trajshield/filters.hpp"
#include "trajshield/neural.hpp"
#include "trajshield/shield.hpp"

namespace trajshield {

namespace {

Agent make_agent(const RunConfig& cfg, const EnvSpec& spec, std::uint64_t seed) {
  AgentConfig ac;
  ac.kind = agent_kind_from_string(cfg.agent_kind);
  ac.env_id = spec.id;
  ac.gamma = cfg.gamma;
  ac.noise_std = cfg.noise_std;
  ac.lr = cfg.lr;
  ac.batch_size = cfg.batch_size;
  ac.hidden = cfg.hidden;
  ac.seed = seed;
  return Agent(ac, spec.state_dim, spec.action_dim);
}

StrategySpec parse_strategy(const RunConfig& cfg) {
  if (cfg.safe_method_id.empty() || cfg.unsafe_method_id.empty())
    throw std::runtime_error("a strategy needs both --safe-method and --unsafe-method");
  return StrategySpec{parse_method(cfg.safe_method_id), parse_method(cfg.unsafe_method_id)};
}

std::string seed_suffixed(const std::string& path, std::uint64_t seed, bool multi) {
  if (!multi) return path;
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || path.find('/', dot) != std::string::npos)
    return path + "_seed" + std::to_string(seed);
  return path.substr(0, dot) + "_seed" + std::to_string(seed) + path.substr(dot);
}

void write_metrics_csv(const std::string& path, const std::vector<EpisodeMetrics>& rows) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write metrics file: " + path);
  file << "episode,acc_reward,crashed,filtered,steps,shield_time_ms,total_time_ms\n";
  char line[256];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "%ld,%.6f,%d,%d,%ld,%.3f,%.3f\n", r.episode, r.acc_reward,
                  r.crashed ? 1 : 0, r.filtered ? 1 : 0, r.steps, r.shield_ms, r.total_ms);
    file << line;
  }
  if (!file) throw std::runtime_error("metrics write failed: " + path);
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

struct SeedRunStats {
  std::uint64_t seed = 0;
  double acc_reward_final_mean = 0.0;
  double acc_reward_final_std = 0.0;
  double crash_pct = 0.0;
  double crash_pct_trailing = 0.0;
  double filtered_pct = 0.0;
  double total_ms = 0.0;
  double shield_ms = 0.0;
};

SeedRunStats summarize_rows(std::uint64_t seed, const std::vector<EpisodeMetrics>& rows) {
  SeedRunStats s;
  s.seed = seed;
  const std::size_t n = rows.size();
  const std::size_t window = std::min<std::size_t>(100, n);
  std::vector<double> final_rewards;
  final_rewards.reserve(window);
  for (std::size_t i = n - window; i < n; ++i) final_rewards.push_back(rows[i].acc_reward);
  s.acc_reward_final_mean = mean_of(final_rewards);
  s.acc_reward_final_std = std_of(final_rewards);
  long crashes = 0, filtered = 0, crashes_trailing = 0;
  for (const auto& r : rows) {
    if (r.crashed) ++crashes;
    if (r.filtered) ++filtered;
  }
  for (std::size_t i = n - window; i < n; ++i)
    if (rows[i].crashed) ++crashes_trailing;
  s.crash_pct = 100.0 * static_cast<double>(crashes) / static_cast<double>(n);
  s.crash_pct_trailing = 100.0 * static_cast<double>(crashes_trailing) / static_cast<double>(window);
  s.filtered_pct = 100.0 * static_cast<double>(filtered) / static_cast<double>(n);
  for (const auto& r : rows) {
    s.total_ms += r.total_ms;
    s.shield_ms += r.shield_ms;
  }
  return s;
}

double read_baseline_total_ms(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("cannot open baseline timing file: " + path);
  nlohmann::json j;
  try {
    file >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": malformed timing file: " + e.what());
  }
  return j.at("total_ms").get<double>();
}

TrainSummary run_training(const RunConfig& cfg, bool learn) {
  if (cfg.out_path.empty()) throw std::runtime_error("--out is required");
  if (cfg.episodes < 1) throw std::runtime_error("--episodes must be >= 1");

  std::optional<StrategySpec> strategy;
  std::optional<DemoSet> demo_set;
  std::optional<PreparedDemos> prepared;
  if (cfg.shield) {
    strategy = parse_strategy(cfg);
    if (cfg.demos_path.empty()) throw std::runtime_error("--demos is required with the shield on");
    demo_set = load_demo_set(cfg.demos_path, cfg.mode);
    prepared = PreparedDemos::from(*demo_set, cfg.normalize);
  }

  const bool multi_seed = cfg.seeds.size() > 1;
  std::vector<SeedRunStats> per_seed;

  for (const std::uint64_t seed : cfg.seeds) {
    auto env = make_env(cfg.env_id);
    Agent agent = make_agent(cfg, env->spec(), seed);
    if (!cfg.model_in.empty()) agent.load(cfg.model_in);
    ReplayMemory memory(cfg.replay_capacity);

    std::optional<DynamicsModel> dynamics;
    std::optional<DynamicsTrainer> dyn_trainer;
    if (cfg.shield) {
      const int hidden = cfg.dynamics_hidden > 0 ? cfg.dynamics_hidden : cfg.hidden;
      dynamics = DynamicsModel::make(env->spec().state_dim, env->spec().action_dim, hidden,
                                     mix_seed(seed, 0xd1));
      dyn_trainer = DynamicsTrainer::make(*dynamics, cfg.lr, cfg.batch_size,
                                          static_cast<std::size_t>(cfg.dynamics_warmup));
    }

    ShieldConfig scfg;
    scfg.enabled = cfg.shield;
    scfg.mode = cfg.mode;
    scfg.r_task = env->spec().min_reward;
    if (strategy) scfg.strategy = *strategy;

    ShieldRunner runner(scfg, prepared ? &*prepared : nullptr, *env, agent, memory,
                        dynamics ? &*dynamics : nullptr, dyn_trainer ? &*dyn_trainer : nullptr,
                        seed);

    std::vector<EpisodeMetrics> rows;
    rows.reserve(cfg.episodes);
    for (long e = 0; e < cfg.episodes; ++e)
      rows.push_back(runner.run_episode(mix_seed(seed, static_cast<std::uint64_t>(e)), learn).metrics);

    write_metrics_csv(seed_suffixed(cfg.out_path, seed, multi_seed), rows);
    per_seed.push_back(summarize_rows(seed, rows));

    if (!cfg.model_out.empty() && agent_kind_from_string(cfg.agent_kind) == AgentKind::ActorCritic) {
      agent.save(seed_suffixed(cfg.model_out, seed, multi_seed));
      if (dynamics)
        save_mlp(seed_suffixed(cfg.model_out, seed, multi_seed) + ".dynamics.json", dynamics->net);
    }
  }

  TrainSummary summary;
  summary.episodes = cfg.episodes;
  std::vector<double> reward_means, crash, crash_trailing, filtered, totals;
  for (const auto& s : per_seed) {
    reward_means.push_back(s.acc_reward_final_mean);
    crash.push_back(s.crash_pct);
    crash_trailing.push_back(s.crash_pct_trailing);
    filtered.push_back(s.filtered_pct);
    totals.push_back(s.total_ms);
  }
  summary.acc_reward_mean = mean_of(reward_means);
  summary.acc_reward_std = multi_seed ? std_of(reward_means) : per_seed.front().acc_reward_final_std;
  summary.crash_pct = mean_of(crash);
  summary.crash_pct_trailing = mean_of(crash_trailing);
  summary.filtered_pct = mean_of(filtered);
  summary.total_ms = mean_of(totals);

  double baseline_ms = summary.total_ms;
  if (!cfg.baseline_timing_path.empty()) baseline_ms = read_baseline_total_ms(cfg.baseline_timing_path);
  summary.time_pct = baseline_ms > 0.0 ? 100.0 * summary.total_ms / baseline_ms : 100.0;

  nlohmann::ordered_json timing;
  timing["total_ms"] = summary.total_ms;
  {
    std::vector<double> per;
    for (const auto& s : per_seed) per.push_back(s.total_ms);
    timing["per_seed_ms"] = per;
  }
  std::ofstream tf(cfg.out_path + ".timing.json", std::ios::binary);
  if (!tf) throw std::runtime_error("cannot write timing file: " + cfg.out_path + ".timing.json");
  tf << timing.dump() << '\n';

  nlohmann::ordered_json sj;
  sj["episodes"] = summary.episodes;
  sj["acc_reward_mean"] = summary.acc_reward_mean;
  sj["acc_reward_std"] = summary.acc_reward_std;
  sj["crash_pct"] = summary.crash_pct;
  sj["crash_pct_trailing100"] = summary.crash_pct_trailing;
  sj["filtered_pct"] = summary.filtered_pct;
  sj["time_pct"] = summary.time_pct;
  sj["total_ms"] = summary.total_ms;
  {
    nlohmann::ordered_json per = nlohmann::ordered_json::array();
    for (const auto& s : per_seed) {
      nlohmann::ordered_json row;
      row["seed"] = s.seed;
      row["acc_reward_mean"] = s.acc_reward_final_mean;
      row["acc_reward_std"] = s.acc_reward_final_std;
      row["crash_pct"] = s.crash_pct;
      row["crash_pct_trailing100"] = s.crash_pct_trailing;
      row["filtered_pct"] = s.filtered_pct;
      row["total_ms"] = s.total_ms;
      row["shield_ms"] = s.shield_ms;
      per.push_back(row);
    }
    sj["per_seed"] = per;
  }
  std::ofstream sf(cfg.out_path + ".summary.json", std::ios::binary);
  if (!sf) throw std::runtime_error("cannot write summary file: " + cfg.out_path + ".summary.json");
  sf << sj.dump() << '\n';

  std::printf("episodes=%ld acc_reward=%.2f±%.2f crash%%=%.1f (trailing %.1f) filtered%%=%.1f time%%=%.1f\n",
              summary.episodes, summary.acc_reward_mean, summary.acc_reward_std, summary.crash_pct,
              summary.crash_pct_trailing, summary.filtered_pct, summary.time_pct);
  return summary;
}

}  // namespace

void cmd_gen_demos(const RunConfig& cfg) {
  if (cfg.demo_count < 1) throw std::runtime_error("--count must be >= 1");
  if (cfg.out_path.empty()) throw std::runtime_error("--out is required");

  auto env = make_env(cfg.env_id);
  const std::uint64_t seed = cfg.seeds.front();
  Agent agent = make_agent(cfg, env->spec(), seed);
  ReplayMemory memory(cfg.replay_capacity);
  const bool learn = agent_kind_from_string(cfg.agent_kind) == AgentKind::ActorCritic;

  ShieldConfig scfg;
  scfg.enabled = false;
  ShieldRunner runner(scfg, nullptr, *env, agent, memory, nullptr, nullptr, seed);

  const long budget = cfg.max_episodes > 0
                          ? cfg.max_episodes
                          : std::max<long>(1000, 100L * cfg.demo_count);
  std::vector<EpisodeRecord> safe, unsafe;
  const std::size_t need = static_cast<std::size_t>(cfg.demo_count);
  long ran = 0;
  for (; ran < budget; ++ran) {
    EpisodeResult r = runner.run_episode(mix_seed(seed, static_cast<std::uint64_t>(ran)), learn);
    if (r.record.crashed)
      unsafe.push_back(std::move(r.record));
    else
      safe.push_back(std::move(r.record));
    if (safe.size() >= need && unsafe.size() >= need) {
      ++ran;
      break;
    }
  }
  if (safe.size() < need || unsafe.size() < need)
    throw std::runtime_error("gen-demos: collected " + std::to_string(safe.size()) + " safe / " +
                             std::to_string(unsafe.size()) + " crashed episodes, need " +
                             std::to_string(need) + " of each within " + std::to_string(budget) +
                             " episodes");

  // keep the most recent N of each class
  std::vector<EpisodeRecord> out(safe.end() - cfg.demo_count, safe.end());
  out.insert(out.end(), unsafe.end() - cfg.demo_count, unsafe.end());
  save_episodes(cfg.out_path, out);
  std::printf("gen-demos: wrote %zu records (%d safe + %d unsafe) to %s after %ld episodes\n",
              out.size(), cfg.demo_count, cfg.demo_count, cfg.out_path.c_str(), ran);
}

void cmd_rank(const RunConfig& cfg) {
  if (cfg.corpus_paths.empty()) throw std::runtime_error("--corpus is required");
  if (cfg.out_path.empty()) throw std::runtime_error("--out is required");
  std::vector<std::string> demo_paths = cfg.demo_paths;
  if (demo_paths.empty() && !cfg.demos_path.empty()) demo_paths.push_back(cfg.demos_path);
  if (demo_paths.size() == 1 && cfg.corpus_paths.size() > 1)
    demo_paths.assign(cfg.corpus_paths.size(), demo_paths.front());
  if (demo_paths.size() != cfg.corpus_paths.size())
    throw std::runtime_error("need one --demos per --corpus (or a single shared one)");

  std::vector<RankInput> inputs;
  for (std::size_t i = 0; i < cfg.corpus_paths.size(); ++i) {
    RankInput in;
    in.corpus = load_episodes(cfg.corpus_paths[i]);
    in.demos = load_demo_set(demo_paths[i], cfg.mode);
    in.env_id = in.corpus.front().env_id;
    inputs.push_back(std::move(in));
  }

  const std::vector<StrategyScore> scores =
      score_all_strategies(inputs, cfg.mode, cfg.workers, cfg.normalize);

  std::ofstream file(cfg.out_path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write ranking file: " + cfg.out_path);
  file << "strategy_id_safe,strategy_id_unsafe";
  for (const auto& in : inputs) file << ",score_" << in.env_id;
  file << ",mean_score\n";
  char buf[64];
  for (const auto& s : scores) {
    file << s.strategy.safe_method.id << ',' << s.strategy.unsafe_method.id;
    for (const auto& in : inputs) {
      std::snprintf(buf, sizeof(buf), ",%.17g", s.per_env.at(in.env_id));
      file << buf;
    }
    std::snprintf(buf, sizeof(buf), ",%.17g\n", s.score);
    file << buf;
  }
  if (!file) throw std::runtime_error("ranking write failed: " + cfg.out_path);

  const int k = std::min<int>(cfg.top_k, static_cast<int>(scores.size()));
  std::printf("%-14s %-14s %10s %10s %10s\n", "safe_method", "unsafe_method", "mean_score",
              "len_ratio", "safe_rate");
  for (int i = 0; i < k; ++i) {
    const auto& s = scores[i];
    std::printf("%-14s %-14s %10.4f %10.4f %10.4f\n", s.strategy.safe_method.id.c_str(),
                s.strategy.unsafe_method.id.c_str(), s.score, s.mean_length_ratio, s.safe_rate);
  }
}

TrainSummary cmd_train(const RunConfig& cfg) { return run_training(cfg, true); }

TrainSummary cmd_eval(const RunConfig& cfg) { return run_training(cfg, false); }

void cmd_replay(const RunConfig& cfg) {
  if (cfg.corpus_paths.empty()) throw std::runtime_error("--corpus is required");
  if (cfg.demos_path.empty()) throw std::runtime_error("--demos is required");
  const StrategySpec strategy = parse_strategy(cfg);
  const std::vector<EpisodeRecord> corpus = load_episodes(cfg.corpus_paths.front());
  const DemoSet demos = load_demo_set(cfg.demos_path, cfg.mode);
  const PreparedDemos prepared = PreparedDemos::from(demos, cfg.normalize);

  std::ofstream file;
  if (!cfg.out_path.empty()) {
    file.open(cfg.out_path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write replay file: " + cfg.out_path);
    file << "episode,length_ratio,safe\n";
  }
  double ratio_sum = 0.0;
  long safe_count = 0;
  for (std::size_t e = 0; e < corpus.size(); ++e) {
    const EpisodeOutcome o = episode_outcome(strategy, corpus[e], prepared, cfg.mode);
    ratio_sum += o.length_ratio;
    if (o.safe) ++safe_count;
    if (file.is_open()) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%zu,%.6f,%d\n", e, o.length_ratio, o.safe ? 1 : 0);
      file << buf;
    }
  }
  const double n = static_cast<double>(corpus.size());
  const double mean_ratio = ratio_sum / n;
  const double safe_rate = static_cast<double>(safe_count) / n;
  std::printf("%s: mean_length_ratio=%.4f safe_rate=%.4f score=%.4f over %zu episodes\n",
              strategy_id(strategy).c_str(), mean_ratio, safe_rate, mean_ratio * safe_rate,
              corpus.size());
}

}  // namespace trajshield
