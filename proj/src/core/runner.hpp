#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/log_io.hpp"

namespace forage::run {

struct EpisodeSpec {
  int index = 0;
  double distance = 0.0;
  std::uint64_t seed = 0;
};

// Expands the evaluation protocol into the episode list: either the distance
// grid repeated episodes-per-distance times, or per-episode distances drawn
// uniformly from the configured range. Seeds are base + global index.
std::vector<EpisodeSpec> make_episode_specs(const io::RunConfig& config);

io::EpisodeLog simulate_episode(const io::RunConfig& config,
                                const EpisodeSpec& spec);

// Runs the batch across min(workers, episodes) threads; order of results is
// by episode index regardless of scheduling.
std::vector<io::EpisodeLog> simulate_batch(const io::RunConfig& config);

// Batch + persistence: writes ep_00000.jsonl ... plus manifest.json listing
// every log with its content hash, seed, distance, and score. Returns the
// manifest document.
nlohmann::json simulate_to_dir(const io::RunConfig& config,
                               const std::string& out_dir);

}  // namespace forage::run
