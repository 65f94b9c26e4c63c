#pragma once
// Two-patch foraging world: a square arena with two depleting reward discs,
// first-order velocity kinematics, and a planar ray sensor that reports
// object type, patch color (the current reward fraction), and range.

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace forage::env {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EpisodeComplete : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SensorConfig {
  int rays = 8;
  double azimuth_min_deg = -45.0;
  double azimuth_max_deg = 45.0;
  double max_range = 128.0;
};

struct MotionConfig {
  double max_speed = 0.15;   // m per step
  double max_turn = 0.2;     // rad per step
  double inertia = 0.8;      // velocity low-pass coefficient
  double gain = 0.05;        // command-to-velocity gain
};

struct WorldConfig {
  double world_size = 32.0;      // side length, arena spans [-size/2, size/2]^2
  double patch_radius = 2.0;
  double patch_distance = 8.0;   // center-to-center separation along x
  double n0 = 1.0 / 30.0;        // fresh-patch reward
  double lambda = 0.01;          // per-step depletion rate
  int episode_steps = 3600;
  SensorConfig sensor;
  MotionConfig motion;

  void validate() const;  // throws ConfigError naming the violated constraint
  std::array<std::array<double, 2>, 2> patch_centers() const {
    return {{{-patch_distance / 2.0, 0.0}, {patch_distance / 2.0, 0.0}}};
  }
};

// forward/back, strafe left/right, rotate left/right, rotate up/down
// (ignored), jump/crouch (ignored); all clamped to [-1, 1].
struct Action {
  double forward = 0.0;
  double strafe = 0.0;
  double rotate = 0.0;
  double pitch = 0.0;
  double jump = 0.0;
};

enum class RayHit : int { kPatch = 0, kBoundary = 1, kNone = 2 };

struct Ray {
  RayHit hit = RayHit::kNone;
  double color = 0.0;     // patch color in [0, 1]; 0 for non-patch hits
  double distance = 1.0;  // range / max_range, 1 when nothing within range
};

struct Observation {
  std::vector<Ray> rays;
  double prev_reward = 0.0;
  Action prev_action;

  // Per ray: one-hot {patch, boundary, none}, color RGB (grayscale), range;
  // then previous reward and the five previous action channels.
  std::vector<double> flatten() const;
};

struct WorldState {
  int step = 0;
  double x = 0.0, y = 0.0;
  double heading = 0.0;
  double vx = 0.0, vy = 0.0;
  std::array<int, 2> depletion = {0, 0};  // consumption counters n_i
  std::optional<int> inside;              // patch membership after the move
  double score = 0.0;
};

struct StepRecord {
  int step = 0;
  double x = 0.0, y = 0.0;
  double heading = 0.0;
  Action action;
  double reward = 0.0;
  std::optional<int> inside;
  std::array<int, 2> depletion = {0, 0};
  std::vector<double> agent_state;  // empty when the agent exposes none
};

// Current reward fraction of patch i: exp(-lambda * n_i).
double patch_color(const WorldState& state, const WorldConfig& config, int patch);

Observation lidar_scan(const WorldState& state, const WorldConfig& config);

class World {
 public:
  explicit World(WorldConfig config, std::uint64_t seed = 0);

  void reset(std::uint64_t seed);
  const WorldState& state() const { return state_; }
  const WorldConfig& config() const { return config_; }
  std::uint64_t seed() const { return seed_; }

  struct StepResult {
    double reward = 0.0;
    Observation observation;
  };
  // Order per step: clamp action; velocity/heading/position kinematics;
  // membership test; reward payout + depletion update (own counter up,
  // opposite counter refreshed to 0); score; observation from the post-move
  // state carrying this step's reward and action.
  StepResult step(const Action& action);

 private:
  WorldConfig config_;
  WorldState state_;
  std::uint64_t seed_ = 0;
};

}  // namespace forage::env

namespace forage::agents {
class Agent;  // agents.hpp
}

namespace forage::env {

// Runs a full episode (fresh world + agent reset with this seed) and returns
// one record per step.
std::vector<StepRecord> run_episode(const WorldConfig& config,
                                    forage::agents::Agent& agent,
                                    std::uint64_t seed);

}  // namespace forage::env
