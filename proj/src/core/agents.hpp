#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "core/env.hpp"

namespace forage::agents {

enum class AgentKind {
  kThreshold,    // leave when perceived reward drops below a fixed theta
  kMvtLearner,   // theta tracks a running average-rate estimate
  kAccumulator,  // noisy drift-to-bound on (rate - reward)
  kPlanner,      // solves for the target residence time from measured travel
  kRandom,       // uniform random actions, baseline
};

AgentKind agent_kind_from_string(const std::string& name);
std::string to_string(AgentKind kind);

struct AgentParams {
  AgentKind kind = AgentKind::kMvtLearner;

  // threshold
  double theta = 0.015;

  // rate estimator (mvt_learner, accumulator, planner telemetry)
  double ema_alpha = 1.0 / 500.0;
  double rate_init = -1.0;  // negative -> n0 / 2 at reset

  // accumulator
  double accum_gain = 40.0;
  double accum_threshold = 1.0;
  double accum_noise_sd = 0.02;

  // planner
  double gamma = 1.0;  // 1 -> undiscounted rate-maximising plan
  int horizon = 5000;

  void validate() const;  // throws env::ConfigError
};

// Everything an agent sees per step. Observation is the world's sensor
// output; the pose is provided because the scripted controllers are
// position-based (a learned policy would ignore it).
struct AgentInputs {
  const env::Observation& observation;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
};

class Agent {
 public:
  virtual ~Agent() = default;
  virtual void reset(const env::WorldConfig& config, std::uint64_t seed) = 0;
  virtual env::Action act(const AgentInputs& inputs) = 0;
  // Internal decision variables logged per step; layout is agent-defined but
  // must keep a stable width within an episode.
  virtual std::vector<double> exposed_state() const { return {}; }
};

std::unique_ptr<Agent> make_agent(const AgentParams& params);

// --- reusable controller/ops pieces -------------------------------------

// Proportional steering toward (tx, ty): rotate = clamp(3 * bearing_error),
// forward = 1 while roughly aligned (|error| <= 0.5 rad), else turn in place.
env::Action navigate(double x, double y, double heading, double tx, double ty);

// One exponential-moving-average update of a reward-rate estimate.
double ema_update(double rate, double reward, double alpha);

// Drift-diffusion step for the leave decision. The drift compares the rate
// estimate against the currently perceived reward, in units of the fresh
// patch reward so the gain is scale-free; the variable is floored at zero.
double accumulator_update(double dv, double perceived_reward,
                          double rate_estimate, double fresh_reward,
                          double gain, double noise, double floor = 0.0);

// Fixed-threshold leave rule.
bool threshold_decide(double perceived_reward, double theta);

// Indices into ForagingAgent::exposed_state().
inline constexpr int kStateDecisionVar = 0;
inline constexpr int kStateRateEstimate = 1;
inline constexpr int kStateLastReward = 2;
inline constexpr int kStateModeFlag = 3;   // 1 inside a patch, 0 travelling
inline constexpr int kStateColorSignal = 4;
inline constexpr int kStateVisitSteps = 5;
inline constexpr int kAgentStateDim = 6;

// The scripted forager: travels between the two patch centres, hovers at the
// occupied centre while feeding, and leaves when its decision rule fires.
class ForagingAgent : public Agent {
 public:
  explicit ForagingAgent(const AgentParams& params);

  void reset(const env::WorldConfig& config, std::uint64_t seed) override;
  env::Action act(const AgentInputs& inputs) override;
  std::vector<double> exposed_state() const override;

  const AgentParams& params() const { return params_; }
  // Telemetry for tests: travel segments and decision->exit lags seen so far.
  const std::vector<int>& measured_travel_steps() const { return taus_; }
  const std::vector<int>& measured_exit_lags() const { return lags_; }
  std::optional<int> current_plan() const { return plan_; }

 private:
  env::Action hover(const AgentInputs& inputs, double tx, double ty) const;
  bool decide(double perceived_reward);
  void refresh_plan();

  AgentParams params_;
  env::WorldConfig config_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> gauss_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{-1.0, 1.0};

  bool foraging_ = false;
  bool seen_patch_ = false;
  int target_ = 0;        // patch index currently navigated to
  int visited_ = 0;       // patch index of the current / last visit
  int travel_run_ = 0;    // consecutive unrewarded steps while travelling
  int nvisit_ = 0;        // rewarded steps so far in the current visit
  std::optional<int> decided_at_;  // nvisit_ when the leave rule fired

  double dv_ = 0.0;
  double rate_ = 0.0;
  double last_reward_ = 0.0;
  double color_signal_ = 1.0;

  bool have_prev_pos_ = false;
  double prev_x_ = 0.0;
  double prev_y_ = 0.0;
  double vel_x_ = 0.0;
  double vel_y_ = 0.0;

  std::vector<int> taus_;
  std::vector<int> lags_;
  std::optional<int> plan_;
  std::size_t plan_tau_count_ = 0;
  int plan_tau_ = 0;
};

}  // namespace forage::agents
