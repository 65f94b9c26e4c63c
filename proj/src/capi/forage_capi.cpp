#include "forage/forage.h"

#include <cstring>
#include <filesystem>
#include <memory>
#include <new>
#include <string>

#include <json.hpp>

#include "core/agents.hpp"
#include "core/analysis.hpp"
#include "core/env.hpp"
#include "core/log_io.hpp"
#include "core/optimal.hpp"
#include "core/report.hpp"
#include "core/runner.hpp"

using nlohmann::json;

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& message) { g_last_error = message; }

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(::operator new(s.size() + 1, std::nothrow));
  if (out == nullptr) return nullptr;
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

forage_status fill_string(char** out, const std::string& value) {
  if (out == nullptr) return FORAGE_OK;
  *out = dup_string(value);
  if (*out == nullptr) {
    set_error("out of memory");
    return FORAGE_ERR_INTERNAL;
  }
  return FORAGE_OK;
}

json parse_json(const char* text, const char* what) {
  if (text == nullptr || *text == '\0') return json::object();
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded())
    throw std::invalid_argument(std::string("invalid JSON for ") + what);
  return j;
}

// Maps C++ failures onto the status enum; every handler ends through here.
template <typename Fn>
forage_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const forage::env::EpisodeComplete& e) {
    set_error(e.what());
    return FORAGE_ERR_EPISODE_COMPLETE;
  } catch (const forage::env::ConfigError& e) {
    set_error(e.what());
    return FORAGE_ERR_CONFIG;
  } catch (const forage::optimal::SolverError& e) {
    set_error(e.what());
    return FORAGE_ERR_SOLVER;
  } catch (const forage::analysis::AnalysisError& e) {
    set_error(e.what());
    return FORAGE_ERR_ANALYSIS;
  } catch (const forage::io::IoError& e) {
    set_error(e.what());
    return FORAGE_ERR_IO;
  } catch (const std::filesystem::filesystem_error& e) {
    set_error(e.what());
    return FORAGE_ERR_IO;
  } catch (const std::invalid_argument& e) {
    set_error(e.what());
    return FORAGE_ERR_INVALID_ARGUMENT;
  } catch (const std::domain_error& e) {
    set_error(e.what());
    return FORAGE_ERR_ANALYSIS;
  } catch (const std::exception& e) {
    set_error(e.what());
    return FORAGE_ERR_INTERNAL;
  } catch (...) {
    set_error("unknown error");
    return FORAGE_ERR_INTERNAL;
  }
}

// Solver argument violations (negative tau, zero t_max, ...) surface as
// invalid arguments at the C edge; domain_error reaching guarded() is
// reserved for degenerate statistics inside the analysis pipeline.
template <typename Fn>
auto solver_args_checked(Fn&& fn) {
  try {
    return fn();
  } catch (const std::domain_error& e) {
    throw std::invalid_argument(e.what());
  }
}

forage::env::Action action_from_array(const double action[5]) {
  forage::env::Action a;
  a.forward = action[0];
  a.strafe = action[1];
  a.rotate = action[2];
  a.pitch = action[3];
  a.jump = action[4];
  return a;
}

}  // namespace

struct forage_world {
  forage::env::World world;
};

struct forage_agent {
  std::unique_ptr<forage::agents::Agent> agent;
};

extern "C" {

const char* forage_version(void) { return "1.0.0"; }

const char* forage_last_error(void) { return g_last_error.c_str(); }

void forage_string_free(char* s) { ::operator delete(s); }

forage_status forage_world_create(const char* config_json, uint64_t seed,
                                  forage_world** out_world) {
  return guarded([&]() -> forage_status {
    if (out_world == nullptr) {
      set_error("out_world is null");
      return FORAGE_ERR_INVALID_ARGUMENT;
    }
    const json j = parse_json(config_json, "world config");
    const auto config = forage::io::world_config_from_json(j);
    *out_world = new forage_world{forage::env::World(config, seed)};
    return FORAGE_OK;
  });
}

void forage_world_destroy(forage_world* world) { delete world; }

forage_status forage_world_reset(forage_world* world, uint64_t seed) {
  return guarded([&]() -> forage_status {
    if (world == nullptr) {
      set_error("world is null");
      return FORAGE_ERR_INVALID_ARGUMENT;
    }
    world->world.reset(seed);
    return FORAGE_OK;
  });
}

forage_status forage_world_step(forage_world* world, const double action[5],
                                double* reward_out,
                                char** observation_json_out) {
  return guarded([&]() -> forage_status {
    if (world == nullptr || action == nullptr) {
      set_error("world/action is null");
      return FORAGE_ERR_INVALID_ARGUMENT;
    }
    const auto result = world->world.step(action_from_array(action));
    if (reward_out != nullptr) *reward_out = result.reward;
    if (observation_json_out != nullptr)
      return fill_string(observation_json_out,
                         forage::io::observation_to_json(result.observation)
                             .dump());
    return FORAGE_OK;
  });
}

forage_status forage_world_state_json(const forage_world* world,
                                      char** state_json_out) {
  return guarded([&]() -> forage_status {
    if (world == nullptr || state_json_out == nullptr) {
      set_error("world/state_json_out is null");
      return FORAGE_ERR_INVALID_ARGUMENT;
    }
    const auto& s = world->world.state();
    json j = {
        {"step", s.step},
        {"pos", {s.x, s.y}},
        {"heading", s.heading},
        {"velocity", {s.vx, s.vy}},
        {"depletion", {s.depletion[0], s.depletion[1]}},
        {"score", s.score},
    };
    if (s.inside)
      j["inside"] = *s.inside;
    else
      j["inside"] = nullptr;
    return fill_string(state_json_out, j.dump());
  });
}

forage_status forage_agent_create(const char* params_json,
                                  forage_agent** out_agent) {
  return guarded([&]() -> forage_status {
    if (out_agent == nullptr) {
      set_error("out_agent is null");
      return FORAGE_ERR_INVALID_ARGUMENT;
    }
    const json j = parse_json(params_json, "agent params");
    const auto params = forage::io::agent_params_from_json(j);
    *out_agent = new forage_agent{forage::agents::make_agent(params)};
    return FORAGE_OK;
  });
}

void forage_agent_destroy(forage_agent* agent) { delete agent; }

forage_status forage_agent_reset(forage_agent* agent,
                                 const char* world_config_json, uint64_t seed) {
  return guarded([&]() -> forage_status {
    if (agent == nullptr) {
      set_error("agent is null");
      return FORAGE_ERR_INVALID_ARGUMENT;
    }
    const json j = parse_json(world_config_json, "world config");
    agent->agent->reset(forage::io::world_config_from_json(j), seed);
    return FORAGE_OK;
  });
}

forage_status forage_agent_act(forage_agent* agent,
                               const char* observation_json, double x, double y,
                               double heading, double action_out[5]) {
  return guarded([&]() -> forage_status {
    if (agent == nullptr || observation_json == nullptr ||
        action_out == nullptr) {
      set_error("agent/observation/action_out is null");
      return FORAGE_ERR_INVALID_ARGUMENT;
    }
    const json j = parse_json(observation_json, "observation");
    forage::env::Observation obs;
    try {
      obs = forage::io::observation_from_json(j);
    } catch (const std::runtime_error& e) {
      // a caller-supplied document with the wrong shape is an argument error
      throw std::invalid_argument(e.what());
    }
    const forage::agents::AgentInputs inputs{obs, x, y, heading};
    const auto a = agent->agent->act(inputs);
    action_out[0] = a.forward;
    action_out[1] = a.strafe;
    action_out[2] = a.rotate;
    action_out[3] = a.pitch;
    action_out[4] = a.jump;
    return FORAGE_OK;
  });
}

forage_status forage_agent_state(const forage_agent* agent, double* buf,
                                 size_t cap, size_t* len_out) {
  return guarded([&]() -> forage_status {
    if (agent == nullptr || len_out == nullptr) {
      set_error("agent/len_out is null");
      return FORAGE_ERR_INVALID_ARGUMENT;
    }
    const auto state = agent->agent->exposed_state();
    *len_out = state.size();
    if (buf != nullptr) {
      const size_t n = state.size() < cap ? state.size() : cap;
      for (size_t i = 0; i < n; ++i) buf[i] = state[i];
    }
    return FORAGE_OK;
  });
}

forage_status forage_simulate(const char* run_config_json, const char* out_dir,
                              int64_t seed_override, int workers_override,
                              char** manifest_json_out) {
  return guarded([&]() -> forage_status {
    if (out_dir == nullptr) {
      set_error("out_dir is null");
      return FORAGE_ERR_INVALID_ARGUMENT;
    }
    const json j = parse_json(run_config_json, "run config");
    auto config = forage::io::run_config_from_json(j);
    if (seed_override >= 0)
      config.evaluation.seed = static_cast<uint64_t>(seed_override);
    if (workers_override > 0) config.workers = workers_override;
    const auto manifest = forage::run::simulate_to_dir(config, out_dir);
    return fill_string(manifest_json_out, manifest.dump());
  });
}

forage_status forage_solve_mvt_json(int tau, int t_max, double n0,
                                    double lambda, char** json_out) {
  return guarded([&]() -> forage_status {
    if (json_out == nullptr) {
      set_error("json_out is null");
      return FORAGE_ERR_INVALID_ARGUMENT;
    }
    if (t_max <= 0) t_max = 3600;
    if (n0 <= 0) n0 = forage::optimal::kDefaultN0;
    if (lambda <= 0) lambda = forage::optimal::kDefaultLambda;
    const auto sol = solver_args_checked(
        [&] { return forage::optimal::mvt_leave_step(tau, t_max, n0, lambda); });
    const json j = {{"tau", tau},
                    {"leave_step", sol.leave_step},
                    {"rate", sol.rate},
                    {"rate_curve", sol.rate_curve}};
    return fill_string(json_out, j.dump());
  });
}

forage_status forage_solve_mvt_csv(int tau, int t_max, double n0, double lambda,
                                   char** csv_out) {
  return guarded([&]() -> forage_status {
    if (csv_out == nullptr) {
      set_error("csv_out is null");
      return FORAGE_ERR_INVALID_ARGUMENT;
    }
    if (t_max <= 0) t_max = 3600;
    if (n0 <= 0) n0 = forage::optimal::kDefaultN0;
    if (lambda <= 0) lambda = forage::optimal::kDefaultLambda;
    const auto sol = solver_args_checked(
        [&] { return forage::optimal::mvt_leave_step(tau, t_max, n0, lambda); });
    std::string csv = "t,rate\n";
    char buf[64];
    for (std::size_t k = 0; k < sol.rate_curve.size(); ++k) {
      std::snprintf(buf, sizeof(buf), "%zu,%.12g\n", k + 1, sol.rate_curve[k]);
      csv += buf;
    }
    return fill_string(csv_out, csv);
  });
}

forage_status forage_solve_dmvt_json(int tau, double gamma, int horizon,
                                     double n0, double lambda, int p_max,
                                     char** json_out) {
  return guarded([&]() -> forage_status {
    if (json_out == nullptr) {
      set_error("json_out is null");
      return FORAGE_ERR_INVALID_ARGUMENT;
    }
    if (horizon <= 0) horizon = 5000;
    if (p_max <= 0) p_max = 3600;
    if (n0 <= 0) n0 = forage::optimal::kDefaultN0;
    if (lambda <= 0) lambda = forage::optimal::kDefaultLambda;
    const auto sol = solver_args_checked([&] {
      return forage::optimal::discounted_mvt_leave_step(tau, gamma, horizon, n0,
                                                        lambda, p_max);
    });
    json curve = json::array();
    for (const auto& [p, m] : sol.indifference_curve)
      curve.push_back({{"patch_steps", p}, {"indifference_step", m}});
    const json j = {{"tau", sol.tau},
                    {"gamma", sol.gamma},
                    {"horizon", sol.horizon},
                    {"leave_step", sol.leave_step},
                    {"indifference_curve", curve}};
    return fill_string(json_out, j.dump());
  });
}

forage_status forage_solve_dmvt_csv(int tau, double gamma, int horizon,
                                    double n0, double lambda, int p_max,
                                    char** csv_out) {
  return guarded([&]() -> forage_status {
    if (csv_out == nullptr) {
      set_error("csv_out is null");
      return FORAGE_ERR_INVALID_ARGUMENT;
    }
    if (horizon <= 0) horizon = 5000;
    if (p_max <= 0) p_max = 3600;
    if (n0 <= 0) n0 = forage::optimal::kDefaultN0;
    if (lambda <= 0) lambda = forage::optimal::kDefaultLambda;
    const auto sol = solver_args_checked([&] {
      return forage::optimal::discounted_mvt_leave_step(tau, gamma, horizon, n0,
                                                        lambda, p_max);
    });
    std::string csv = "patch_steps,indifference_step\n";
    char buf[64];
    for (const auto& [p, m] : sol.indifference_curve) {
      std::snprintf(buf, sizeof(buf), "%d,%d\n", p, m);
      csv += buf;
    }
    return fill_string(csv_out, csv);
  });
}

forage_status forage_analyze(const char* logs_dir, const char* options_json,
                             const char* out_dir, char** summary_json_out) {
  return guarded([&]() -> forage_status {
    if (logs_dir == nullptr || out_dir == nullptr) {
      set_error("logs_dir/out_dir is null");
      return FORAGE_ERR_INVALID_ARGUMENT;
    }
    const json j = parse_json(options_json, "analysis options");
    forage::analysis::AnalysisOptions opt;
    if (j.contains("analyses"))
      opt.analyses = j.at("analyses").get<std::vector<std::string>>();
    if (j.contains("dynamics_state_index"))
      opt.dynamics_state_index = j.at("dynamics_state_index").get<int>();
    if (j.contains("range_state_index"))
      opt.range_state_index = j.at("range_state_index").get<int>();
    if (j.contains("in_patch_window"))
      opt.in_patch_window = j.at("in_patch_window").get<int>();
    if (j.contains("margin")) opt.margin = j.at("margin").get<int>();
    if (j.contains("alpha")) opt.alpha = j.at("alpha").get<double>();
    if (j.contains("gamma")) opt.gamma = j.at("gamma").get<double>();
    if (j.contains("discounted"))
      opt.discounted = j.at("discounted").get<bool>();
    if (j.contains("horizon")) opt.horizon = j.at("horizon").get<int>();
    const auto logs = forage::analysis::load_logs(logs_dir);
    const auto summary = forage::analysis::analyze_to_dir(logs, opt, out_dir);
    return fill_string(summary_json_out, summary.dump());
  });
}

forage_status forage_report(const char* analysis_dir, const char* out_dir,
                            int* figures_out) {
  return guarded([&]() -> forage_status {
    if (analysis_dir == nullptr || out_dir == nullptr) {
      set_error("analysis_dir/out_dir is null");
      return FORAGE_ERR_INVALID_ARGUMENT;
    }
    const int n = forage::report::render_reports(analysis_dir, out_dir);
    if (figures_out != nullptr) *figures_out = n;
    if (n == 0) {
      set_error("no analysis CSVs found in " + std::string(analysis_dir));
      return FORAGE_ERR_ANALYSIS;
    }
    return FORAGE_OK;
  });
}

}  // extern "C"
