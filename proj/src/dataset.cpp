#include "trajshield/dataset.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace trajshield {

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<FeatureVector> parse_vector_list(const ordered_json& j, const char* key) {
  if (!j.is_array()) throw std::invalid_argument(std::string(key) + " must be an array of arrays");
  std::vector<FeatureVector> out;
  out.reserve(j.size());
  for (const auto& row : j) {
    if (!row.is_array()) throw std::invalid_argument(std::string(key) + " rows must be arrays");
    FeatureVector v;
    v.reserve(row.size());
    for (const auto& x : row) {
      if (!x.is_number()) throw std::invalid_argument(std::string(key) + " entries must be numbers");
      v.push_back(x.get<double>());
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace

std::string episode_to_jsonl(const EpisodeRecord& rec) {
  rec.validate();  // canonical form requires finite entries
  ordered_json j;
  j["env_id"] = rec.env_id;
  j["seed"] = rec.seed;
  j["states"] = rec.states;
  j["actions"] = rec.actions;
  j["rewards"] = rec.rewards;
  j["crashed"] = rec.crashed;
  return j.dump();
}

EpisodeRecord episode_from_jsonl(const std::string& line) {
  ordered_json j = ordered_json::parse(line);
  if (!j.is_object()) throw std::invalid_argument("record is not a JSON object");
  static const char* kKeys[] = {"env_id", "seed", "states", "actions", "rewards", "crashed"};
  for (const char* key : kKeys)
    if (!j.contains(key)) throw std::invalid_argument(std::string("missing key '") + key + "'");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : kKeys) known = known || item.key() == key;
    if (!known) throw std::invalid_argument("unknown key '" + item.key() + "'");
  }

  EpisodeRecord rec;
  if (!j["env_id"].is_string()) throw std::invalid_argument("env_id must be a string");
  rec.env_id = j["env_id"].get<std::string>();
  const auto& seed = j["seed"];
  if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<std::int64_t>() < 0))
    throw std::invalid_argument("seed must be a non-negative integer");
  rec.seed = seed.get<std::uint64_t>();
  rec.states = parse_vector_list(j["states"], "states");
  rec.actions = parse_vector_list(j["actions"], "actions");
  if (!j["rewards"].is_array()) throw std::invalid_argument("rewards must be an array");
  for (const auto& x : j["rewards"]) {
    if (!x.is_number()) throw std::invalid_argument("rewards entries must be numbers");
    rec.rewards.push_back(x.get<double>());
  }
  if (!j["crashed"].is_boolean()) throw std::invalid_argument("crashed must be a boolean");
  rec.crashed = j["crashed"].get<bool>();
  rec.validate();
  return rec;
}

std::vector<EpisodeRecord> load_episodes(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("cannot open episode file: " + path);
  std::vector<EpisodeRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(file, line)) {
    ++line_no;
    try {
      records.push_back(episode_from_jsonl(line));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": malformed record: " + e.what());
    }
  }
  if (records.empty()) throw std::runtime_error("episode file is empty: " + path);
  const std::size_t sdim = records.front().states.front().size();
  std::size_t adim = 0;
  for (const auto& r : records)
    if (!r.actions.empty()) {
      adim = r.actions.front().size();
      break;
    }
  for (const auto& r : records) {
    if (r.states.front().size() != sdim)
      throw std::runtime_error(path + ": mixed state dimensions across records");
    if (!r.actions.empty() && r.actions.front().size() != adim)
      throw std::runtime_error(path + ": mixed action dimensions across records");
  }
  return records;
}

void save_episodes(const std::string& path, const std::vector<EpisodeRecord>& records) {
  std::ofstream file(path, std::ios::binary);  // LF line endings on every platform
  if (!file) throw std::runtime_error("cannot write episode file: " + path);
  for (const auto& rec : records) file << episode_to_jsonl(rec) << '\n';
  file.flush();
  if (!file) throw std::runtime_error("write failed: " + path);
}

DemoSet load_demo_set(const std::string& path, TrajectoryMode mode) {
  DemoSet demos;
  demos.mode = mode;
  for (auto& rec : load_episodes(path)) {
    if (rec.crashed)
      demos.unsafe.push_back(std::move(rec));
    else
      demos.safe.push_back(std::move(rec));
  }
  try {
    demos.validate();
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return demos;
}

}  // namespace trajshield
