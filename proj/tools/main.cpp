#include <cstdio>
#include <exception>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "trajshield/cli.hpp"

namespace {

using trajshield::RunConfig;

std::vector<std::uint64_t> parse_seeds(const std::string& arg) {
  std::vector<std::uint64_t> seeds;
  std::size_t pos = 0;
  while (pos <= arg.size()) {
    const std::size_t comma = arg.find(',', pos);
    const std::string tok =
        arg.substr(pos, comma == std::string::npos ? arg.size() - pos : comma - pos);
    if (tok.empty()) throw std::runtime_error("empty entry in --seed list");
    seeds.push_back(std::stoull(tok));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (seeds.empty()) throw std::runtime_error("no seeds given");
  return seeds;
}

// Optional JSON config file; explicit flags win.
void load_config_file(const std::string& path, RunConfig& cfg) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json j;
  file >> j;
  auto get = [&](const char* key, auto& target) {
    if (j.contains(key)) target = j.at(key).get<std::decay_t<decltype(target)>>();
  };
  get("env", cfg.env_id);
  if (j.contains("mode")) cfg.mode = trajshield::mode_from_string(j.at("mode").get<std::string>());
  get("safe-method", cfg.safe_method_id);
  get("unsafe-method", cfg.unsafe_method_id);
  get("shield", cfg.shield);
  get("normalize", cfg.normalize);
  get("agent", cfg.agent_kind);
  get("episodes", cfg.episodes);
  if (j.contains("seed")) {
    if (j.at("seed").is_string())
      cfg.seeds = parse_seeds(j.at("seed").get<std::string>());
    else
      cfg.seeds = {j.at("seed").get<std::uint64_t>()};
  }
  get("count", cfg.demo_count);
  get("max-episodes", cfg.max_episodes);
  get("demos", cfg.demos_path);
  if (j.contains("corpus")) cfg.corpus_paths = j.at("corpus").get<std::vector<std::string>>();
  get("out", cfg.out_path);
  get("baseline-timing", cfg.baseline_timing_path);
  get("model-in", cfg.model_in);
  get("model-out", cfg.model_out);
  get("top-k", cfg.top_k);
  get("workers", cfg.workers);
  get("hidden", cfg.hidden);
  get("batch", cfg.batch_size);
  get("lr", cfg.lr);
  get("gamma", cfg.gamma);
  get("noise-std", cfg.noise_std);
  get("replay-capacity", cfg.replay_capacity);
  get("dynamics-hidden", cfg.dynamics_hidden);
  get("dynamics-warmup", cfg.dynamics_warmup);
}

void add_shared_flags(CLI::App* cmd, RunConfig& cfg, std::string& seed_arg, std::string& mode_arg,
                      std::string& config_path) {
  cmd->add_option("--config", config_path, "JSON config file (flags win)");
  cmd->add_option("--env", cfg.env_id, "environment id (cliff2d | polebalance)");
  cmd->add_option("--mode", mode_arg, "trajectory mode: state | state-action");
  cmd->add_option("--seed", seed_arg, "seed or comma-separated seed list");
  cmd->add_flag("--normalize", cfg.normalize, "z-score features with demo statistics");
  cmd->add_option("--out", cfg.out_path, "output path");
  cmd->add_option("--workers", cfg.workers, "worker threads (0 = hardware)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DTW-based trajectory filtering shield for RL agents"};
  app.require_subcommand(1);

  RunConfig cfg;
  cfg.agent_kind.clear();  // resolved per command after parsing
  std::string seed_arg, mode_arg, config_path;

  auto* gen = app.add_subcommand("gen-demos", "run an unshielded agent and save demonstrations");
  add_shared_flags(gen, cfg, seed_arg, mode_arg, config_path);
  gen->add_option("--count", cfg.demo_count, "demonstrations per group");
  gen->add_option("--max-episodes", cfg.max_episodes, "episode budget (0 = auto)");
  gen->add_option("--agent", cfg.agent_kind, "random | scripted | ac (default random)");
  gen->add_option("--hidden", cfg.hidden);
  gen->add_option("--batch", cfg.batch_size);
  gen->add_option("--lr", cfg.lr);
  gen->add_option("--noise-std", cfg.noise_std);

  auto* rank = app.add_subcommand("rank", "score all 576 filtering strategies offline");
  add_shared_flags(rank, cfg, seed_arg, mode_arg, config_path);
  rank->add_option("--corpus", cfg.corpus_paths, "episode corpus JSONL (repeat per env)");
  rank->add_option("--demos", cfg.demo_paths, "demo JSONL (one per corpus, or one shared)");
  rank->add_option("--top-k", cfg.top_k, "rows in the printed table");

  auto* train = app.add_subcommand("train", "run the shielded (or baseline) training loop");
  add_shared_flags(train, cfg, seed_arg, mode_arg, config_path);
  train->add_option("--safe-method", cfg.safe_method_id, "method id for the safe group");
  train->add_option("--unsafe-method", cfg.unsafe_method_id, "method id for the unsafe group");
  train->add_option("--demos", cfg.demos_path, "demo JSONL path");
  train->add_option("--episodes", cfg.episodes, "episodes per seed");
  train->add_flag("--shield,!--no-shield", cfg.shield, "toggle the filter (default on)");
  train->add_option("--agent", cfg.agent_kind, "random | scripted | ac (default ac)");
  train->add_option("--baseline-timing", cfg.baseline_timing_path,
                    "timing sidecar of a baseline run");
  train->add_option("--model-out", cfg.model_out, "write agent checkpoint here");
  train->add_option("--model-in", cfg.model_in, "load agent checkpoint");
  train->add_option("--hidden", cfg.hidden);
  train->add_option("--batch", cfg.batch_size);
  train->add_option("--lr", cfg.lr);
  train->add_option("--gamma", cfg.gamma);
  train->add_option("--noise-std", cfg.noise_std);
  train->add_option("--replay-capacity", cfg.replay_capacity);
  train->add_option("--dynamics-hidden", cfg.dynamics_hidden);
  train->add_option("--dynamics-warmup", cfg.dynamics_warmup);

  auto* eval = app.add_subcommand("eval", "run episodes without learning");
  add_shared_flags(eval, cfg, seed_arg, mode_arg, config_path);
  eval->add_option("--safe-method", cfg.safe_method_id);
  eval->add_option("--unsafe-method", cfg.unsafe_method_id);
  eval->add_option("--demos", cfg.demos_path);
  eval->add_option("--episodes", cfg.episodes);
  eval->add_flag("--shield,!--no-shield", cfg.shield);
  eval->add_option("--agent", cfg.agent_kind, "random | scripted | ac (default ac)");
  eval->add_option("--baseline-timing", cfg.baseline_timing_path);
  eval->add_option("--model-in", cfg.model_in);
  eval->add_option("--hidden", cfg.hidden);

  auto* replay = app.add_subcommand("replay", "replay one strategy over a recorded corpus");
  add_shared_flags(replay, cfg, seed_arg, mode_arg, config_path);
  replay->add_option("--corpus", cfg.corpus_paths, "episode corpus JSONL");
  replay->add_option("--demos", cfg.demos_path, "demo JSONL path");
  replay->add_option("--safe-method", cfg.safe_method_id);
  replay->add_option("--unsafe-method", cfg.unsafe_method_id);

  CLI11_PARSE(app, argc, argv);

  try {
    if (!config_path.empty()) {
      // Config supplies the baseline; a second parse puts explicit flags back
      // on top of it.
      RunConfig file_cfg;
      file_cfg.agent_kind.clear();
      load_config_file(config_path, file_cfg);
      cfg = file_cfg;
      app.clear();
      app.parse(argc, argv);
    }
    if (!mode_arg.empty()) cfg.mode = trajshield::mode_from_string(mode_arg);
    if (!seed_arg.empty()) cfg.seeds = parse_seeds(seed_arg);
    if (cfg.agent_kind.empty())
      cfg.agent_kind = (app.got_subcommand("train") || app.got_subcommand("eval")) ? "ac" : "random";

    if (app.got_subcommand("gen-demos"))
      trajshield::cmd_gen_demos(cfg);
    else if (app.got_subcommand("rank"))
      trajshield::cmd_rank(cfg);
    else if (app.got_subcommand("train"))
      trajshield::cmd_train(cfg);
    else if (app.got_subcommand("eval"))
      trajshield::cmd_eval(cfg);
    else if (app.got_subcommand("replay"))
      trajshield::cmd_replay(cfg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
