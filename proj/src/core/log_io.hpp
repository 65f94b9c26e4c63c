#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "core/agents.hpp"
#include "core/env.hpp"

namespace forage::io {

// File open/read/write failures. Malformed content inside a readable file
// throws plain std::runtime_error instead.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --- hashing --------------------------------------------------------------

// FNV-1a, 64 bit. Used for manifest entries so reruns can be compared
// without shipping the full logs around.
std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t value);
std::uint64_t hash_file(const std::string& path);  // throws on open failure

// --- logging --------------------------------------------------------------

enum class LogLevel { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

// Resolved once per process from FORAGE_LOG_LEVEL (error|warn|info|debug,
// case-insensitive; unknown values fall back to info).
LogLevel log_level();
void log(LogLevel level, const std::string& message);

// --- config serialization ---------------------------------------------------

nlohmann::json to_json(const env::WorldConfig& config);
nlohmann::json to_json(const agents::AgentParams& params);

// Strict parsers: unknown keys are rejected so config typos fail loudly;
// missing keys keep the documented defaults. All throw env::ConfigError.
env::WorldConfig world_config_from_json(const nlohmann::json& j);
agents::AgentParams agent_params_from_json(const nlohmann::json& j);

// Evaluation protocol: a batch sweeps the listed patch distances with a fixed
// number of episodes each (seed = base + global episode index), or samples
// each episode's distance uniformly from [uniform_min, uniform_max] instead.
struct EvaluationConfig {
  std::vector<double> distances = {6.0, 8.0, 10.0, 12.0};
  int episodes = 50;  // per distance (total when uniform_distances)
  std::uint64_t seed = 1;
  bool uniform_distances = false;
  double uniform_min = 5.0;
  double uniform_max = 12.0;
};

struct RunConfig {
  env::WorldConfig world;
  agents::AgentParams agent;
  EvaluationConfig evaluation;
  int workers = 1;

  void validate() const;
};

nlohmann::json to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

// --- episode logs (JSONL) ---------------------------------------------------

struct EpisodeLog {
  env::WorldConfig config;
  std::uint64_t seed = 0;
  std::vector<env::StepRecord> records;
};

// First line is a header object {"config": ..., "seed": ...}; every further
// line is one step record. Numeric formatting is nlohmann's shortest
// round-trip form, so identical runs produce byte-identical files.
void write_episode_jsonl(std::ostream& out, const env::WorldConfig& config,
                         std::uint64_t seed,
                         const std::vector<env::StepRecord>& records);
void save_episode_jsonl(const std::string& path, const env::WorldConfig& config,
                        std::uint64_t seed,
                        const std::vector<env::StepRecord>& records);

EpisodeLog read_episode_jsonl(std::istream& in);
EpisodeLog load_episode_jsonl(const std::string& path);

nlohmann::json step_record_to_json(const env::StepRecord& record);
env::StepRecord step_record_from_json(const nlohmann::json& j);

nlohmann::json observation_to_json(const env::Observation& obs);
env::Observation observation_from_json(const nlohmann::json& j);

}  // namespace forage::io
