#include "core/log_io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

namespace forage::io {

namespace {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!j.is_object())
    throw env::ConfigError(where + " must be a JSON object");
  for (const auto& item : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
          return item.key() == k;
        }) == allowed.end()) {
      throw env::ConfigError("unknown key in " + where + ": " + item.key());
    }
  }
}

template <typename T>
void read_field(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw env::ConfigError("bad value for " + where + "." + key);
  }
}

const char* log_level_name(LogLevel level) {
  switch (level) {
    case LogLevel::kError: return "error";
    case LogLevel::kWarn: return "warn";
    case LogLevel::kInfo: return "info";
    case LogLevel::kDebug: return "debug";
  }
  return "info";
}

LogLevel parse_log_level(const char* value) {
  if (value == nullptr) return LogLevel::kInfo;
  std::string s(value);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (s == "error") return LogLevel::kError;
  if (s == "warn" || s == "warning") return LogLevel::kWarn;
  if (s == "info") return LogLevel::kInfo;
  if (s == "debug") return LogLevel::kDebug;
  return LogLevel::kInfo;
}

std::mutex log_mutex;

}  // namespace

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[value & 0xf];
    value >>= 4;
  }
  return out;
}

std::uint64_t hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for hashing: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string data = buf.str();
  return fnv1a64(data);
}

LogLevel log_level() {
  static const LogLevel level = parse_log_level(std::getenv("FORAGE_LOG_LEVEL"));
  return level;
}

void log(LogLevel level, const std::string& message) {
  if (static_cast<int>(level) > static_cast<int>(log_level())) return;
  std::lock_guard<std::mutex> lock(log_mutex);
  std::cerr << "[forage][" << log_level_name(level) << "] " << message << "\n";
}

nlohmann::json to_json(const env::WorldConfig& c) {
  return json{
      {"world_size", c.world_size},
      {"patch_radius", c.patch_radius},
      {"patch_distance", c.patch_distance},
      {"n0", c.n0},
      {"lambda", c.lambda},
      {"episode_steps", c.episode_steps},
      {"sensor",
       {{"rays", c.sensor.rays},
        {"azimuth_min_deg", c.sensor.azimuth_min_deg},
        {"azimuth_max_deg", c.sensor.azimuth_max_deg},
        {"max_range", c.sensor.max_range}}},
      {"motion",
       {{"max_speed", c.motion.max_speed},
        {"max_turn", c.motion.max_turn},
        {"inertia", c.motion.inertia},
        {"gain", c.motion.gain}}},
  };
}

env::WorldConfig world_config_from_json(const nlohmann::json& j) {
  check_keys(j,
             {"world_size", "patch_radius", "patch_distance", "n0", "lambda",
              "episode_steps", "sensor", "motion"},
             "world");
  env::WorldConfig c;
  read_field(j, "world_size", c.world_size, "world");
  read_field(j, "patch_radius", c.patch_radius, "world");
  read_field(j, "patch_distance", c.patch_distance, "world");
  read_field(j, "n0", c.n0, "world");
  read_field(j, "lambda", c.lambda, "world");
  read_field(j, "episode_steps", c.episode_steps, "world");
  if (j.contains("sensor")) {
    const auto& s = j.at("sensor");
    check_keys(s, {"rays", "azimuth_min_deg", "azimuth_max_deg", "max_range"},
               "world.sensor");
    read_field(s, "rays", c.sensor.rays, "world.sensor");
    read_field(s, "azimuth_min_deg", c.sensor.azimuth_min_deg, "world.sensor");
    read_field(s, "azimuth_max_deg", c.sensor.azimuth_max_deg, "world.sensor");
    read_field(s, "max_range", c.sensor.max_range, "world.sensor");
  }
  if (j.contains("motion")) {
    const auto& m = j.at("motion");
    check_keys(m, {"max_speed", "max_turn", "inertia", "gain"}, "world.motion");
    read_field(m, "max_speed", c.motion.max_speed, "world.motion");
    read_field(m, "max_turn", c.motion.max_turn, "world.motion");
    read_field(m, "inertia", c.motion.inertia, "world.motion");
    read_field(m, "gain", c.motion.gain, "world.motion");
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const agents::AgentParams& p) {
  return json{
      {"kind", agents::to_string(p.kind)},
      {"theta", p.theta},
      {"ema_alpha", p.ema_alpha},
      {"rate_init", p.rate_init},
      {"accum_gain", p.accum_gain},
      {"accum_threshold", p.accum_threshold},
      {"accum_noise_sd", p.accum_noise_sd},
      {"gamma", p.gamma},
      {"horizon", p.horizon},
  };
}

agents::AgentParams agent_params_from_json(const nlohmann::json& j) {
  check_keys(j,
             {"kind", "theta", "ema_alpha", "rate_init", "accum_gain",
              "accum_threshold", "accum_noise_sd", "gamma", "horizon"},
             "agent");
  agents::AgentParams p;
  if (j.contains("kind")) {
    if (!j.at("kind").is_string())
      throw env::ConfigError("agent.kind must be a string");
    p.kind = agents::agent_kind_from_string(j.at("kind").get<std::string>());
  }
  read_field(j, "theta", p.theta, "agent");
  read_field(j, "ema_alpha", p.ema_alpha, "agent");
  read_field(j, "rate_init", p.rate_init, "agent");
  read_field(j, "accum_gain", p.accum_gain, "agent");
  read_field(j, "accum_threshold", p.accum_threshold, "agent");
  read_field(j, "accum_noise_sd", p.accum_noise_sd, "agent");
  read_field(j, "gamma", p.gamma, "agent");
  read_field(j, "horizon", p.horizon, "agent");
  p.validate();
  return p;
}

void RunConfig::validate() const {
  agent.validate();
  if (evaluation.episodes < 1)
    throw env::ConfigError("evaluation.episodes must be >= 1");
  if (workers < 1) throw env::ConfigError("workers must be >= 1");
  if (evaluation.uniform_distances) {
    if (!(evaluation.uniform_min > 0.0) ||
        !(evaluation.uniform_max >= evaluation.uniform_min))
      throw env::ConfigError("evaluation uniform range must be 0 < min <= max");
    env::WorldConfig probe = world;
    probe.patch_distance = evaluation.uniform_max;
    probe.validate();  // widest sampled distance must fit the world
  } else {
    if (evaluation.distances.empty())
      throw env::ConfigError("evaluation.distances must be non-empty");
    for (double d : evaluation.distances) {
      env::WorldConfig probe = world;
      probe.patch_distance = d;
      probe.validate();
    }
  }
}

nlohmann::json to_json(const RunConfig& c) {
  return json{
      {"world", to_json(c.world)},
      {"agent", to_json(c.agent)},
      {"evaluation",
       {{"distances", c.evaluation.distances},
        {"episodes", c.evaluation.episodes},
        {"seed", c.evaluation.seed},
        {"uniform_distances", c.evaluation.uniform_distances},
        {"uniform_min", c.evaluation.uniform_min},
        {"uniform_max", c.evaluation.uniform_max}}},
      {"workers", c.workers},
  };
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  check_keys(j, {"world", "agent", "evaluation", "workers"}, "run");
  RunConfig c;
  if (j.contains("world")) c.world = world_config_from_json(j.at("world"));
  if (j.contains("agent")) c.agent = agent_params_from_json(j.at("agent"));
  if (j.contains("evaluation")) {
    const auto& e = j.at("evaluation");
    check_keys(e,
               {"distances", "episodes", "seed", "uniform_distances",
                "uniform_min", "uniform_max"},
               "evaluation");
    read_field(e, "distances", c.evaluation.distances, "evaluation");
    read_field(e, "episodes", c.evaluation.episodes, "evaluation");
    read_field(e, "seed", c.evaluation.seed, "evaluation");
    read_field(e, "uniform_distances", c.evaluation.uniform_distances,
               "evaluation");
    read_field(e, "uniform_min", c.evaluation.uniform_min, "evaluation");
    read_field(e, "uniform_max", c.evaluation.uniform_max, "evaluation");
  }
  read_field(j, "workers", c.workers, "run");
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw env::ConfigError("cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw env::ConfigError("invalid JSON in " + path + ": " + e.what());
  }
  return run_config_from_json(j);
}

nlohmann::json step_record_to_json(const env::StepRecord& r) {
  json j;
  j["step"] = r.step;
  j["pos"] = {r.x, r.y};
  j["heading"] = r.heading;
  j["action"] = {r.action.forward, r.action.strafe, r.action.rotate,
                 r.action.pitch, r.action.jump};
  j["reward"] = r.reward;
  if (r.inside)
    j["inside"] = *r.inside;
  else
    j["inside"] = nullptr;
  j["depletion"] = {r.depletion[0], r.depletion[1]};
  j["agent_state"] = r.agent_state;
  return j;
}

env::StepRecord step_record_from_json(const nlohmann::json& j) {
  env::StepRecord r;
  try {
    r.step = j.at("step").get<int>();
    const auto& pos = j.at("pos");
    r.x = pos.at(0).get<double>();
    r.y = pos.at(1).get<double>();
    r.heading = j.at("heading").get<double>();
    const auto& a = j.at("action");
    r.action.forward = a.at(0).get<double>();
    r.action.strafe = a.at(1).get<double>();
    r.action.rotate = a.at(2).get<double>();
    r.action.pitch = a.at(3).get<double>();
    r.action.jump = a.at(4).get<double>();
    r.reward = j.at("reward").get<double>();
    if (!j.at("inside").is_null()) r.inside = j.at("inside").get<int>();
    const auto& d = j.at("depletion");
    r.depletion[0] = d.at(0).get<int>();
    r.depletion[1] = d.at(1).get<int>();
    r.agent_state = j.at("agent_state").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("malformed step record: ") + e.what());
  }
  return r;
}

nlohmann::json observation_to_json(const env::Observation& obs) {
  json rays = json::array();
  for (const auto& ray : obs.rays) {
    rays.push_back({{"hit", static_cast<int>(ray.hit)},
                    {"color", ray.color},
                    {"distance", ray.distance}});
  }
  return json{
      {"rays", std::move(rays)},
      {"prev_reward", obs.prev_reward},
      {"prev_action",
       {obs.prev_action.forward, obs.prev_action.strafe, obs.prev_action.rotate,
        obs.prev_action.pitch, obs.prev_action.jump}},
  };
}

env::Observation observation_from_json(const nlohmann::json& j) {
  env::Observation obs;
  try {
    for (const auto& rj : j.at("rays")) {
      env::Ray ray;
      const int hit = rj.at("hit").get<int>();
      if (hit < 0 || hit > 2) throw std::runtime_error("bad ray hit type");
      ray.hit = static_cast<env::RayHit>(hit);
      ray.color = rj.at("color").get<double>();
      ray.distance = rj.at("distance").get<double>();
      obs.rays.push_back(ray);
    }
    obs.prev_reward = j.at("prev_reward").get<double>();
    const auto& a = j.at("prev_action");
    obs.prev_action.forward = a.at(0).get<double>();
    obs.prev_action.strafe = a.at(1).get<double>();
    obs.prev_action.rotate = a.at(2).get<double>();
    obs.prev_action.pitch = a.at(3).get<double>();
    obs.prev_action.jump = a.at(4).get<double>();
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("malformed observation: ") + e.what());
  }
  return obs;
}

void write_episode_jsonl(std::ostream& out, const env::WorldConfig& config,
                         std::uint64_t seed,
                         const std::vector<env::StepRecord>& records) {
  json header;
  header["config"] = to_json(config);
  header["seed"] = seed;
  out << header.dump() << "\n";
  for (const auto& r : records) out << step_record_to_json(r).dump() << "\n";
}

void save_episode_jsonl(const std::string& path, const env::WorldConfig& config,
                        std::uint64_t seed,
                        const std::vector<env::StepRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  write_episode_jsonl(out, config, seed, records);
}

EpisodeLog read_episode_jsonl(std::istream& in) {
  EpisodeLog log;
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty episode log");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("malformed log header: ") + e.what());
  }
  if (!header.contains("config"))
    throw std::runtime_error("log header missing config");
  log.config = world_config_from_json(header.at("config"));
  if (header.contains("seed")) log.seed = header.at("seed").get<std::uint64_t>();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw std::runtime_error(std::string("malformed log line: ") + e.what());
    }
    log.records.push_back(step_record_from_json(j));
  }
  return log;
}

EpisodeLog load_episode_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open log: " + path);
  return read_episode_jsonl(in);
}

}  // namespace forage::io
