#ifndef FORAGE_FORAGE_H
#define FORAGE_FORAGE_H

/* C interface to the foraging laboratory: a seedable two-patch depleting
 * world, scripted foraging agents, optimal leaving-time solvers, and the
 * log-analysis/report pipeline. All functions return forage_status; every
 * failure leaves a message retrievable with forage_last_error() on the
 * calling thread. Strings returned through char** are heap-allocated and
 * must be released with forage_string_free(). */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define FORAGE_API __declspec(dllexport)
#else
#define FORAGE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum forage_status {
  FORAGE_OK = 0,
  FORAGE_ERR_INVALID_ARGUMENT = 1, /* null pointer, bad JSON, bad flag */
  FORAGE_ERR_CONFIG = 2,           /* config violates an invariant */
  FORAGE_ERR_EPISODE_COMPLETE = 3, /* stepping a finished episode */
  FORAGE_ERR_IO = 4,               /* file read/write failure */
  FORAGE_ERR_SOLVER = 5,           /* no solution in the searched range */
  FORAGE_ERR_ANALYSIS = 6,         /* empty/malformed logs, degenerate stats */
  FORAGE_ERR_INTERNAL = 7
} forage_status;

FORAGE_API const char* forage_version(void);

/* Message from the most recent failing call on this thread ("" if none). */
FORAGE_API const char* forage_last_error(void);

FORAGE_API void forage_string_free(char* s);

/* ---- world ---------------------------------------------------------- */

typedef struct forage_world forage_world;

/* config_json: WorldConfig object, or NULL/"{}" for defaults. */
FORAGE_API forage_status forage_world_create(const char* config_json,
                                             uint64_t seed,
                                             forage_world** out_world);
FORAGE_API void forage_world_destroy(forage_world* world);
FORAGE_API forage_status forage_world_reset(forage_world* world, uint64_t seed);

/* action: [forward, strafe, rotate, pitch, jump], each clamped to [-1, 1].
 * reward_out may be NULL. observation_json_out (optional) receives the
 * post-move observation. */
FORAGE_API forage_status forage_world_step(forage_world* world,
                                           const double action[5],
                                           double* reward_out,
                                           char** observation_json_out);
FORAGE_API forage_status forage_world_state_json(const forage_world* world,
                                                 char** state_json_out);

/* ---- agents --------------------------------------------------------- */

typedef struct forage_agent forage_agent;

/* params_json: AgentParams object, or NULL/"{}" for defaults. */
FORAGE_API forage_status forage_agent_create(const char* params_json,
                                             forage_agent** out_agent);
FORAGE_API void forage_agent_destroy(forage_agent* agent);
FORAGE_API forage_status forage_agent_reset(forage_agent* agent,
                                            const char* world_config_json,
                                            uint64_t seed);
/* observation_json: as produced by forage_world_step. Pose is the agent's
 * post-move position/heading. action_out receives the 5 action channels. */
FORAGE_API forage_status forage_agent_act(forage_agent* agent,
                                          const char* observation_json,
                                          double x, double y, double heading,
                                          double action_out[5]);
/* Copies the exposed internal-state vector into buf (up to cap entries) and
 * stores the full length in len_out. */
FORAGE_API forage_status forage_agent_state(const forage_agent* agent,
                                            double* buf, size_t cap,
                                            size_t* len_out);

/* ---- batch pipeline -------------------------------------------------- */

/* run_config_json: {world, agent, evaluation, workers}. seed_override < 0 and
 * workers_override <= 0 keep the config values. Writes one JSONL log per
 * episode plus manifest.json into out_dir; optionally returns the manifest. */
FORAGE_API forage_status forage_simulate(const char* run_config_json,
                                         const char* out_dir,
                                         int64_t seed_override,
                                         int workers_override,
                                         char** manifest_json_out);

/* Undiscounted optimal leaving time for travel time tau; t_max <= 0 uses
 * 3600, n0/lambda <= 0 use the defaults (1/30, 0.01). JSON: {tau, leave_step,
 * rate, rate_curve}. CSV variant: t,rate rows. */
FORAGE_API forage_status forage_solve_mvt_json(int tau, int t_max, double n0,
                                               double lambda, char** json_out);
FORAGE_API forage_status forage_solve_mvt_csv(int tau, int t_max, double n0,
                                              double lambda, char** csv_out);

/* Discounted solver: horizon <= 0 uses 5000, p_max <= 0 uses 3600. JSON:
 * {tau, gamma, horizon, leave_step, indifference_curve}. CSV variant:
 * patch_steps,indifference_step rows. */
FORAGE_API forage_status forage_solve_dmvt_json(int tau, double gamma,
                                                int horizon, double n0,
                                                double lambda, int p_max,
                                                char** json_out);
FORAGE_API forage_status forage_solve_dmvt_csv(int tau, double gamma,
                                               int horizon, double n0,
                                               double lambda, int p_max,
                                               char** csv_out);

/* Runs the analysis pipeline over every *.jsonl in logs_dir, writing one CSV
 * per analysis plus summary.json into out_dir. options_json (nullable):
 * {analyses: [names...], dynamics_state_index, range_state_index,
 *  in_patch_window, margin, alpha, gamma, discounted, horizon}. */
FORAGE_API forage_status forage_analyze(const char* logs_dir,
                                        const char* options_json,
                                        const char* out_dir,
                                        char** summary_json_out);

/* Renders SVG figures from analysis CSVs; stores the count written. */
FORAGE_API forage_status forage_report(const char* analysis_dir,
                                       const char* out_dir, int* figures_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* FORAGE_FORAGE_H */
