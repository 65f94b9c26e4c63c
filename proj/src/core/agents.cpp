#include "core/agents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "core/optimal.hpp"

namespace forage::agents {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kRotateGain = 3.0;    // rad of error -> full turn command
constexpr double kAlignGate = 0.5;     // rad; drive forward only when aligned
constexpr double kArriveRadius = 1.5;  // m; start slowing down
constexpr double kHoldRadius = 0.4;    // m; switch to station keeping
constexpr int kDefaultExitLag = 30;    // steps, until the agent has measured one

double wrap_angle(double a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a < 0.0) a += 2.0 * kPi;
  return a - kPi;
}

double clamp1(double v) { return std::clamp(v, -1.0, 1.0); }

// Reward the agent would collect right now at the perceived patch color.
double perceived_reward(double color, double n0) { return n0 * color; }

}  // namespace

AgentKind agent_kind_from_string(const std::string& name) {
  if (name == "threshold") return AgentKind::kThreshold;
  if (name == "mvt_learner") return AgentKind::kMvtLearner;
  if (name == "accumulator") return AgentKind::kAccumulator;
  if (name == "planner") return AgentKind::kPlanner;
  if (name == "random") return AgentKind::kRandom;
  throw env::ConfigError("unknown agent kind: " + name);
}

std::string to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::kThreshold: return "threshold";
    case AgentKind::kMvtLearner: return "mvt_learner";
    case AgentKind::kAccumulator: return "accumulator";
    case AgentKind::kPlanner: return "planner";
    case AgentKind::kRandom: return "random";
  }
  throw env::ConfigError("unknown agent kind enum value");
}

void AgentParams::validate() const {
  if (!(theta > 0.0)) throw env::ConfigError("agent.theta must be > 0");
  if (!(ema_alpha > 0.0) || ema_alpha > 1.0)
    throw env::ConfigError("agent.ema_alpha must be in (0, 1]");
  if (!(accum_gain > 0.0)) throw env::ConfigError("agent.accum_gain must be > 0");
  if (!(accum_threshold > 0.0))
    throw env::ConfigError("agent.accum_threshold must be > 0");
  if (accum_noise_sd < 0.0)
    throw env::ConfigError("agent.accum_noise_sd must be >= 0");
  if (!(gamma > 0.0) || gamma > 1.0)
    throw env::ConfigError("agent.gamma must be in (0, 1]");
  if (horizon < 1) throw env::ConfigError("agent.horizon must be >= 1");
}

env::Action navigate(double x, double y, double heading, double tx, double ty) {
  const double bearing = std::atan2(ty - y, tx - x);
  const double error = wrap_angle(bearing - heading);
  env::Action a;
  a.rotate = clamp1(kRotateGain * error);
  a.forward = std::fabs(error) <= kAlignGate ? 1.0 : 0.0;
  return a;
}

double ema_update(double rate, double reward, double alpha) {
  return (1.0 - alpha) * rate + alpha * reward;
}

double accumulator_update(double dv, double perceived_reward,
                          double rate_estimate, double fresh_reward,
                          double gain, double noise, double floor) {
  const double drift = gain * (rate_estimate - perceived_reward) / fresh_reward;
  return std::max(floor, dv + drift + noise);
}

bool threshold_decide(double perceived_reward, double theta) {
  return perceived_reward < theta;
}

std::unique_ptr<Agent> make_agent(const AgentParams& params) {
  params.validate();
  return std::make_unique<ForagingAgent>(params);
}

ForagingAgent::ForagingAgent(const AgentParams& params) : params_(params) {
  params_.validate();
}

void ForagingAgent::reset(const env::WorldConfig& config, std::uint64_t seed) {
  config_ = config;
  rng_.seed(seed ^ 0x9e3779b97f4a7c15ULL);
  gauss_.reset();

  foraging_ = false;
  seen_patch_ = false;
  target_ = 0;
  visited_ = 0;
  travel_run_ = 0;
  nvisit_ = 0;
  decided_at_.reset();

  dv_ = 0.0;
  rate_ = params_.rate_init >= 0.0 ? params_.rate_init : config.n0 / 2.0;
  last_reward_ = 0.0;
  color_signal_ = 1.0;

  taus_.clear();
  lags_.clear();
  plan_.reset();
  plan_tau_count_ = 0;
  plan_tau_ = 0;

  have_prev_pos_ = false;
  prev_x_ = 0.0;
  prev_y_ = 0.0;
  vel_x_ = 0.0;
  vel_y_ = 0.0;
}

env::Action ForagingAgent::hover(const AgentInputs& in, double tx,
                                 double ty) const {
  const double dist = std::hypot(tx - in.x, ty - in.y);
  env::Action a = navigate(in.x, in.y, in.heading, tx, ty);
  if (dist < kHoldRadius) {
    // Station keeping: cancel the along-heading momentum instead of chasing
    // the centre point, otherwise the approach speed overshoots back out of
    // the patch. Velocity comes from dead reckoning (exact here: the world
    // moves by its velocity each step).
    const auto& m = config_.motion;
    const double along =
        vel_x_ * std::cos(in.heading) + vel_y_ * std::sin(in.heading);
    a.rotate = 0.0;
    a.forward = clamp1(-along / m.gain * (1.0 - m.inertia) * 4.0);
  } else if (dist < kArriveRadius) {
    a.forward *= dist / kArriveRadius;
  }
  return a;
}

bool ForagingAgent::decide(double reward_now) {
  switch (params_.kind) {
    case AgentKind::kThreshold:
      return threshold_decide(reward_now, params_.theta);
    case AgentKind::kMvtLearner:
      return threshold_decide(reward_now, rate_);
    case AgentKind::kAccumulator: {
      const double noise = params_.accum_noise_sd > 0.0
                               ? params_.accum_noise_sd * gauss_(rng_)
                               : 0.0;
      dv_ = accumulator_update(dv_, reward_now, rate_, config_.n0,
                               params_.accum_gain, noise);
      return dv_ >= params_.accum_threshold;
    }
    case AgentKind::kPlanner: {
      refresh_plan();
      const int lag =
          lags_.empty()
              ? kDefaultExitLag
              : static_cast<int>(std::lround(
                    std::accumulate(lags_.begin(), lags_.end(), 0.0) /
                    static_cast<double>(lags_.size())));
      return plan_ && nvisit_ >= *plan_ - lag;
    }
    case AgentKind::kRandom:
      return false;
  }
  return false;
}

void ForagingAgent::refresh_plan() {
  int tau = 0;
  if (taus_.empty()) {
    // Kinematic guess before any travel segment has been measured: straight
    // line between patch rims at top speed, plus turn-around slack.
    const double gap = config_.patch_distance - 2.0 * config_.patch_radius;
    tau = static_cast<int>(
              std::ceil(std::max(0.0, gap) / config_.motion.max_speed)) +
          2;
  } else {
    tau = static_cast<int>(std::lround(
        std::accumulate(taus_.begin(), taus_.end(), 0.0) /
        static_cast<double>(taus_.size())));
  }
  tau = std::max(1, tau);
  if (plan_ && plan_tau_ == tau && plan_tau_count_ == taus_.size()) return;

  if (params_.gamma >= 1.0) {
    plan_ = forage::optimal::mvt_leave_step(tau, config_.episode_steps,
                                            config_.n0, config_.lambda)
                .leave_step;
  } else {
    plan_ = forage::optimal::discounted_mvt_leave_step(
                tau, params_.gamma, params_.horizon, config_.n0,
                config_.lambda)
                .leave_step;
  }
  plan_tau_ = tau;
  plan_tau_count_ = taus_.size();
}

env::Action ForagingAgent::act(const AgentInputs& in) {
  if (have_prev_pos_) {
    vel_x_ = in.x - prev_x_;
    vel_y_ = in.y - prev_y_;
  } else {
    vel_x_ = 0.0;
    vel_y_ = 0.0;
  }
  prev_x_ = in.x;
  prev_y_ = in.y;
  have_prev_pos_ = true;

  const double prev_reward = in.observation.prev_reward;
  last_reward_ = prev_reward;
  rate_ = ema_update(rate_, prev_reward, params_.ema_alpha);
  const bool inside_prev = prev_reward > 0.0;

  const auto centers = config_.patch_centers();
  // Which patch the agent currently stands in, by geometry.
  const double d0 = std::hypot(in.x - centers[0][0], in.y - centers[0][1]);
  const double d1 = std::hypot(in.x - centers[1][0], in.y - centers[1][1]);
  const int nearest = d0 <= d1 ? 0 : 1;

  if (!foraging_) {
    if (inside_prev) {
      if (travel_run_ > 0 && seen_patch_) taus_.push_back(travel_run_);
      travel_run_ = 0;
      foraging_ = true;
      visited_ = nearest;
      target_ = nearest;
      nvisit_ = 1;
      dv_ = 0.0;
      decided_at_.reset();
    } else {
      ++travel_run_;
    }
  } else {
    if (inside_prev) {
      ++nvisit_;
    } else {
      if (decided_at_) lags_.push_back(nvisit_ - *decided_at_);
      foraging_ = false;
      travel_run_ = 1;
      target_ = 1 - visited_;
    }
  }
  seen_patch_ = seen_patch_ || inside_prev;

  // Perceived color of the nearest patch surface in view.
  double color = 1.0;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& ray : in.observation.rays) {
    if (ray.hit == env::RayHit::kPatch && ray.distance < best) {
      best = ray.distance;
      color = ray.color;
    }
  }
  color_signal_ = color;

  const double reward_now = perceived_reward(color, config_.n0);
  if (foraging_ && !decided_at_ && decide(reward_now)) decided_at_ = nvisit_;

  if (params_.kind == AgentKind::kRandom) {
    env::Action a;
    a.forward = uniform_(rng_);
    a.strafe = uniform_(rng_);
    a.rotate = uniform_(rng_);
    a.pitch = uniform_(rng_);
    a.jump = uniform_(rng_);
    return a;
  }

  if (foraging_ && !decided_at_) {
    return hover(in, centers[visited_][0], centers[visited_][1]);
  }
  const int goal = foraging_ ? 1 - visited_ : target_;
  return navigate(in.x, in.y, in.heading, centers[goal][0],
                  centers[goal][1]);
}

std::vector<double> ForagingAgent::exposed_state() const {
  std::vector<double> s(kAgentStateDim, 0.0);
  s[kStateDecisionVar] = dv_;
  s[kStateRateEstimate] = rate_;
  s[kStateLastReward] = last_reward_;
  s[kStateModeFlag] = foraging_ ? 1.0 : 0.0;
  s[kStateColorSignal] = color_signal_;
  s[kStateVisitSteps] = static_cast<double>(nvisit_);
  return s;
}

}  // namespace forage::agents
