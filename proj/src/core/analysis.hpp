#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "core/log_io.hpp"
#include "core/stats.hpp"

namespace forage::analysis {

struct AnalysisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One visit from the first entry into a freshly refreshed patch to the first
// exit. Re-entries into a partially depleted patch never open an encounter.
// Visits still open at episode end are kept but flagged truncated; every
// analysis skips truncated encounters.
struct PatchEncounter {
  int episode = 0;
  int patch = 0;
  double distance = 0.0;  // patch separation of the episode's config
  int entry_step = 0;     // step index of the first rewarded record
  int exit_step = 0;      // step index of the first record after the visit
  int leave_step = 0;     // in-patch steps = exit_step - entry_step
  bool truncated = false;
  int quartile = -1;      // 0..3 once quartile_split has run

  std::vector<double> rewards;  // one per in-patch step
  // Agent state rows from (entry - margin) to (exit + margin), clipped to the
  // episode; trace_entry is the row index of the entry step.
  std::vector<std::vector<double>> state_trace;
  int trace_entry = 0;
};

inline constexpr const char* kQuartileNames[4] = {"Earliest", "Early", "Late",
                                                  "Latest"};

std::vector<PatchEncounter> extract_encounters(const io::EpisodeLog& log,
                                               int episode = 0, int margin = 10);
std::vector<PatchEncounter> extract_encounters(
    const std::vector<io::EpisodeLog>& logs, int margin = 10);

// Mean out-of-patch steps between consecutive encounters, per patch distance.
// Throws AnalysisError when no completed travel segment exists.
std::map<double, double> estimate_travel_steps(
    const std::vector<io::EpisodeLog>& logs);

double episode_score(const io::EpisodeLog& log);

// OLS of per-distance mean leave step against distance (meters).
stats::RegressionResult leaving_time_regression(
    const std::vector<PatchEncounter>& encounters);

// OLS of per-distance mean episode score against distance (meters).
stats::RegressionResult score_regression(const std::vector<io::EpisodeLog>& logs);

struct DistanceGap {
  double distance = 0.0;
  double tau_bar = 0.0;
  int optimal_step = 0;
  double observed_mean = 0.0;
  double gap = 0.0;  // observed_mean - optimal_step
  stats::TTestResult test;  // per-encounter gaps vs zero within this distance
  int n = 0;
};

struct OptimalityGapResult {
  std::vector<DistanceGap> per_distance;
  stats::TTestResult overall;  // per-distance mean gaps vs zero
  double alpha_corrected = 0.0;  // Bonferroni for the per-distance tests
  double gamma = 1.0;
  bool discounted = false;
};

// Gap between observed and solver-optimal leaving times, one solver call per
// distance using that distance's measured mean travel time.
OptimalityGapResult optimality_gap(const std::vector<PatchEncounter>& encounters,
                                   const std::map<double, double>& tau_bar,
                                   double gamma, bool discounted, double n0,
                                   double lambda, int t_max = 3600,
                                   int horizon = 5000, double alpha = 0.05);

// Linear-interpolation percentile of an unsorted sample, p in [0, 1].
double percentile(std::vector<double> values, double p);

// Assigns leave-step quartiles within each distance (ties to the lower
// quartile). Throws AnalysisError when a distance has < 4 usable encounters.
void quartile_split(std::vector<PatchEncounter>& encounters);

enum class Alignment { kEntry, kExit };

struct SlidingSlopeStep {
  int offset = 0;  // steps relative to entry (>=0 in patch) or exit (<0 in patch)
  stats::RegressionResult reg;
  bool valid = false;  // enough non-degenerate data at this offset
  bool significant = false;
};

struct SlidingSlopeResult {
  std::vector<SlidingSlopeStep> steps;
  double alpha_corrected = 0.0;
  Alignment alignment = Alignment::kEntry;
  int state_index = 0;
};

// Per aligned step, regress the per-encounter one-step first difference of
// the chosen state coordinate on quartile index (1..4). Entry-aligned in-patch
// steps include only encounters still in the patch (leave_step > offset) and
// run only up to the encounter quartile's median leave step. Significance at
// alpha / (in_patch_window + margin).
SlidingSlopeResult sliding_slope_regression(
    const std::vector<PatchEncounter>& encounters, Alignment alignment,
    int state_index, int in_patch_window = 40, int margin = 10,
    double alpha = 0.05);

std::vector<int> significant_offsets(const SlidingSlopeResult& result);
// Longest run of consecutive significant offsets: (first offset, length).
std::pair<int, int> longest_significant_run(const SlidingSlopeResult& result);

// Per-encounter mean first difference of a state coordinate over the given
// entry-aligned offsets (restricted to the encounter's own in-patch span);
// empty when no offset applies.
std::optional<double> encounter_mean_slope(const PatchEncounter& encounter,
                                           const std::vector<int>& offsets,
                                           int state_index);

// OLS of (exit activity - entry activity) per encounter against distance.
stats::RegressionResult activity_range_regression(
    const std::vector<PatchEncounter>& encounters, int state_index);

// OLS of per-encounter mean slope over the significant window vs distance.
stats::RegressionResult slope_vs_distance_regression(
    const std::vector<PatchEncounter>& encounters,
    const std::vector<int>& window_offsets, int state_index);

struct ExitAnovaResult {
  stats::AnovaResult anova;
  struct Pair {
    int a = 0, b = 0;
    double t = 0.0, p = 1.0;
    bool significant = false;
  };
  std::vector<Pair> pairwise;
  double alpha_corrected = 0.0;
};

// One-way ANOVA of exit-step activity across the four quartiles plus
// Bonferroni-corrected pairwise comparisons.
ExitAnovaResult exit_activity_anova(const std::vector<PatchEncounter>& encounters,
                                    int state_index, double alpha = 0.05);

// PCA over the stacked in-patch state rows of all non-truncated encounters.
stats::PcaResult state_trace_pca(const std::vector<PatchEncounter>& encounters);

struct AnalysisOptions {
  int dynamics_state_index = 0;  // decision variable channel
  int range_state_index = 1;     // rate-estimate channel
  int in_patch_window = 40;
  int margin = 10;
  double alpha = 0.05;
  double gamma = 1.0;
  bool discounted = false;
  int horizon = 5000;
  // Empty -> run everything. Known names: travel, leaving_times, scores,
  // optimality_gap, quartiles, sliding_slope, activity_range,
  // slope_vs_distance, exit_anova, pca.
  std::vector<std::string> analyses;
};

// Loads every *.jsonl in the directory, sorted by filename.
std::vector<io::EpisodeLog> load_logs(const std::string& dir);

// Runs the selected analyses, writes one CSV per analysis plus summary.json
// into out_dir, and returns the summary document.
nlohmann::json analyze_to_dir(const std::vector<io::EpisodeLog>& logs,
                              const AnalysisOptions& options,
                              const std::string& out_dir);

}  // namespace forage::analysis
