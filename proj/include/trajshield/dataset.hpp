#ifndef TRAJSHIELD_DATASET_HPP
#define TRAJSHIELD_DATASET_HPP

#include <string>
#include <vector>

#include "trajshield/core_types.hpp"

namespace trajshield {

// Episode corpus interchange format: one JSON object per line, keys in the
// order env_id, seed, states, actions, rewards, crashed, no whitespace,
// floats in shortest round-trip form. save(load(x)) is the identity on
// canonical files.

std::string episode_to_jsonl(const EpisodeRecord& rec);
EpisodeRecord episode_from_jsonl(const std::string& line);

std::vector<EpisodeRecord> load_episodes(const std::string& path);
void save_episodes(const std::string& path, const std::vector<EpisodeRecord>& records);

// Loads a corpus and partitions it by the crashed flag. Both partitions must
// be non-empty and dimensions uniform across records.
DemoSet load_demo_set(const std::string& path, TrajectoryMode mode);

}  // namespace trajshield

#endif  // TRAJSHIELD_DATASET_HPP
