#include "core/env.hpp"

#include <algorithm>
#include <cmath>

#include "core/agents.hpp"

namespace forage::env {

namespace {

constexpr double kPi = 3.14159265358979323846;

double clamp01sym(double v) { return std::clamp(v, -1.0, 1.0); }

double wrap_angle(double a) {
  while (a > kPi) a -= 2.0 * kPi;
  while (a <= -kPi) a += 2.0 * kPi;
  return a;
}

// Distance along (dx, dy) from (px, py) to the circle |q - c| = r, smallest
// positive root; negative when the ray misses.
double ray_circle(double px, double py, double dx, double dy, double cx,
                  double cy, double r) {
  const double ox = px - cx;
  const double oy = py - cy;
  const double b = ox * dx + oy * dy;
  const double c = ox * ox + oy * oy - r * r;
  const double disc = b * b - c;
  if (disc < 0.0) return -1.0;
  const double sq = std::sqrt(disc);
  const double t1 = -b - sq;
  if (t1 >= 0.0) return t1;
  const double t2 = -b + sq;
  if (t2 >= 0.0) return t2;  // origin inside the circle
  return -1.0;
}

// Distance to the arena boundary (axis-aligned square, origin inside).
double ray_boundary(double px, double py, double dx, double dy, double half) {
  double best = -1.0;
  const auto consider = [&](double t) {
    if (t >= 0.0 && (best < 0.0 || t < best)) best = t;
  };
  if (dx > 1e-300) consider((half - px) / dx);
  if (dx < -1e-300) consider((-half - px) / dx);
  if (dy > 1e-300) consider((half - py) / dy);
  if (dy < -1e-300) consider((-half - py) / dy);
  return best;
}

}  // namespace

void WorldConfig::validate() const {
  if (!(world_size > 0.0)) throw ConfigError("world_size must be positive");
  if (!(patch_radius > 0.0)) throw ConfigError("patch_radius must be positive");
  if (!(patch_distance > 0.0)) throw ConfigError("patch_distance must be positive");
  if (patch_distance / 2.0 + patch_radius > world_size / 2.0)
    throw ConfigError("patches must fit inside the arena: patch_distance/2 + patch_radius <= world_size/2");
  if (!(n0 > 0.0)) throw ConfigError("n0 must be positive");
  if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
  if (episode_steps < 1) throw ConfigError("episode_steps must be >= 1");
  if (sensor.rays < 1) throw ConfigError("sensor.rays must be >= 1");
  if (!(sensor.max_range > 0.0)) throw ConfigError("sensor.max_range must be positive");
  if (sensor.azimuth_min_deg > sensor.azimuth_max_deg)
    throw ConfigError("sensor azimuth window must be ordered");
  if (!(motion.max_speed > 0.0)) throw ConfigError("motion.max_speed must be positive");
  if (!(motion.max_turn > 0.0)) throw ConfigError("motion.max_turn must be positive");
  if (motion.inertia < 0.0 || motion.inertia >= 1.0)
    throw ConfigError("motion.inertia must be in [0, 1)");
  if (!(motion.gain > 0.0)) throw ConfigError("motion.gain must be positive");
}

std::vector<double> Observation::flatten() const {
  std::vector<double> out;
  out.reserve(rays.size() * 7 + 6);
  for (const Ray& r : rays) {
    out.push_back(r.hit == RayHit::kPatch ? 1.0 : 0.0);
    out.push_back(r.hit == RayHit::kBoundary ? 1.0 : 0.0);
    out.push_back(r.hit == RayHit::kNone ? 1.0 : 0.0);
    out.push_back(r.color);  // grayscale: R = G = B
    out.push_back(r.color);
    out.push_back(r.color);
    out.push_back(r.distance);
  }
  out.push_back(prev_reward);
  out.push_back(prev_action.forward);
  out.push_back(prev_action.strafe);
  out.push_back(prev_action.rotate);
  out.push_back(prev_action.pitch);
  out.push_back(prev_action.jump);
  return out;
}

double patch_color(const WorldState& state, const WorldConfig& config, int patch) {
  if (patch < 0 || patch > 1) throw ConfigError("patch index must be 0 or 1");
  return std::exp(-config.lambda * state.depletion[patch]);
}

Observation lidar_scan(const WorldState& state, const WorldConfig& config) {
  Observation obs;
  obs.rays.resize(config.sensor.rays);
  const auto centers = config.patch_centers();
  const double half = config.world_size / 2.0;
  const int n = config.sensor.rays;
  for (int i = 0; i < n; ++i) {
    const double frac = n == 1 ? 0.5 : static_cast<double>(i) / (n - 1);
    const double az_deg = config.sensor.azimuth_min_deg +
                          frac * (config.sensor.azimuth_max_deg - config.sensor.azimuth_min_deg);
    const double ang = state.heading + az_deg * kPi / 180.0;
    const double dx = std::cos(ang);
    const double dy = std::sin(ang);

    double best_t = -1.0;
    int best_patch = -1;
    for (int p = 0; p < 2; ++p) {
      const double t = ray_circle(state.x, state.y, dx, dy, centers[p][0],
                                  centers[p][1], config.patch_radius);
      if (t >= 0.0 && (best_t < 0.0 || t <= best_t)) {
        best_t = t;
        best_patch = p;
      }
    }
    const double tb = ray_boundary(state.x, state.y, dx, dy, half);
    Ray& ray = obs.rays[i];
    if (best_patch >= 0 && (tb < 0.0 || best_t <= tb)) {
      if (best_t <= config.sensor.max_range) {
        ray.hit = RayHit::kPatch;
        ray.color = patch_color(state, config, best_patch);
        ray.distance = best_t / config.sensor.max_range;
        continue;
      }
    } else if (tb >= 0.0 && tb <= config.sensor.max_range) {
      ray.hit = RayHit::kBoundary;
      ray.color = 0.0;
      ray.distance = tb / config.sensor.max_range;
      continue;
    }
    ray.hit = RayHit::kNone;
    ray.color = 0.0;
    ray.distance = 1.0;
  }
  return obs;
}

World::World(WorldConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  reset(seed);
}

void World::reset(std::uint64_t seed) {
  seed_ = seed;
  state_ = WorldState{};
  state_.heading = kPi / 2.0;  // perpendicular to the patch axis
  // Starting membership (patches may overlap the center when configured
  // close together); nearest patch wins ties, lower index first.
  const auto centers = config_.patch_centers();
  const double d0 = std::hypot(state_.x - centers[0][0], state_.y - centers[0][1]);
  const double d1 = std::hypot(state_.x - centers[1][0], state_.y - centers[1][1]);
  if (d0 <= config_.patch_radius && d0 <= d1)
    state_.inside = 0;
  else if (d1 <= config_.patch_radius)
    state_.inside = 1;
}

World::StepResult World::step(const Action& action_in) {
  if (state_.step >= config_.episode_steps)
    throw EpisodeComplete("episode already ran its configured step budget");

  Action a;
  a.forward = clamp01sym(action_in.forward);
  a.strafe = clamp01sym(action_in.strafe);
  a.rotate = clamp01sym(action_in.rotate);
  a.pitch = clamp01sym(action_in.pitch);
  a.jump = clamp01sym(action_in.jump);

  // Kinematics: velocity from the pre-turn heading, then heading, then
  // position clamped to the arena.
  const double hx = std::cos(state_.heading);
  const double hy = std::sin(state_.heading);
  const double px = -hy, py = hx;  // left-hand perpendicular
  const MotionConfig& mo = config_.motion;
  state_.vx = mo.inertia * state_.vx + mo.gain * (a.forward * hx + a.strafe * px);
  state_.vy = mo.inertia * state_.vy + mo.gain * (a.forward * hy + a.strafe * py);
  const double speed = std::hypot(state_.vx, state_.vy);
  if (speed > mo.max_speed) {
    state_.vx *= mo.max_speed / speed;
    state_.vy *= mo.max_speed / speed;
  }
  state_.heading = wrap_angle(state_.heading + a.rotate * mo.max_turn);
  const double half = config_.world_size / 2.0;
  state_.x = std::clamp(state_.x + state_.vx, -half, half);
  state_.y = std::clamp(state_.y + state_.vy, -half, half);

  // Membership: closed disc test, nearest patch wins ties.
  const auto centers = config_.patch_centers();
  const double d0 = std::hypot(state_.x - centers[0][0], state_.y - centers[0][1]);
  const double d1 = std::hypot(state_.x - centers[1][0], state_.y - centers[1][1]);
  state_.inside.reset();
  if (d0 <= config_.patch_radius && d0 <= d1)
    state_.inside = 0;
  else if (d1 <= config_.patch_radius)
    state_.inside = 1;

  // Reward before the counter update; entering patch i refreshes the other.
  double reward = 0.0;
  if (state_.inside) {
    const int i = *state_.inside;
    reward = config_.n0 * std::exp(-config_.lambda * state_.depletion[i]);
    state_.depletion[i] += 1;
    state_.depletion[1 - i] = 0;
  }
  state_.score += reward;
  state_.step += 1;

  StepResult result;
  result.reward = reward;
  result.observation = lidar_scan(state_, config_);
  result.observation.prev_reward = reward;
  result.observation.prev_action = a;
  return result;
}

std::vector<StepRecord> run_episode(const WorldConfig& config,
                                    forage::agents::Agent& agent,
                                    std::uint64_t seed) {
  World world(config, seed);
  agent.reset(config, seed);

  std::vector<StepRecord> records;
  records.reserve(config.episode_steps);
  Observation obs = lidar_scan(world.state(), config);
  for (int t = 0; t < config.episode_steps; ++t) {
    const agents::AgentInputs inputs{obs, world.state().x, world.state().y,
                                     world.state().heading};
    const Action action = agent.act(inputs);
    auto result = world.step(action);

    StepRecord rec;
    rec.step = t;
    rec.x = world.state().x;
    rec.y = world.state().y;
    rec.heading = world.state().heading;
    rec.action = action;
    rec.reward = result.reward;
    rec.inside = world.state().inside;
    rec.depletion = world.state().depletion;
    rec.agent_state = agent.exposed_state();
    records.push_back(std::move(rec));

    obs = std::move(result.observation);
  }
  return records;
}

}  // namespace forage::env
