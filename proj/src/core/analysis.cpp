#include "core/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "core/optimal.hpp"

namespace forage::analysis {

namespace {

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Usable = finished visit with a state trace wide enough to index.
bool usable(const PatchEncounter& e) { return !e.truncated; }

std::map<double, std::vector<const PatchEncounter*>> by_distance(
    const std::vector<PatchEncounter>& encounters) {
  std::map<double, std::vector<const PatchEncounter*>> groups;
  for (const auto& e : encounters)
    if (usable(e)) groups[e.distance].push_back(&e);
  return groups;
}

double state_at(const PatchEncounter& e, int row, int index) {
  return e.state_trace[static_cast<std::size_t>(row)][static_cast<std::size_t>(index)];
}

bool row_has_index(const PatchEncounter& e, int row, int index) {
  return row >= 0 && row < static_cast<int>(e.state_trace.size()) &&
         index >= 0 &&
         index < static_cast<int>(e.state_trace[static_cast<std::size_t>(row)].size());
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

nlohmann::json reg_to_json(const stats::RegressionResult& r) {
  return {{"slope", r.slope},       {"intercept", r.intercept},
          {"slope_se", r.slope_se}, {"t", r.t},
          {"p", r.p},               {"n", r.n}};
}

nlohmann::json ttest_to_json(const stats::TTestResult& r) {
  return {{"t", r.t}, {"p", r.p}, {"df", r.df}, {"mean", r.mean}};
}

}  // namespace

std::vector<PatchEncounter> extract_encounters(const io::EpisodeLog& log,
                                               int episode, int margin) {
  const auto& recs = log.records;
  const int n = static_cast<int>(recs.size());
  std::vector<PatchEncounter> out;

  int i = 0;
  while (i < n) {
    if (!recs[i].inside) {
      ++i;
      continue;
    }
    const int patch = *recs[i].inside;
    int j = i;
    while (j < n && recs[j].inside && *recs[j].inside == patch) ++j;
    // Fresh entry iff this visit's first rewarded step consumed n = 0; the
    // logged counter is post-increment, so fresh shows as exactly 1.
    const bool fresh = recs[i].depletion[static_cast<std::size_t>(patch)] == 1;
    if (fresh) {
      PatchEncounter e;
      e.episode = episode;
      e.patch = patch;
      e.distance = log.config.patch_distance;
      e.entry_step = i;
      e.exit_step = j;
      e.leave_step = j - i;
      e.truncated = j == n;
      for (int k = i; k < j; ++k) e.rewards.push_back(recs[k].reward);
      const int lo = std::max(0, i - margin);
      const int hi = std::min(n, j + margin);
      for (int k = lo; k < hi; ++k) e.state_trace.push_back(recs[k].agent_state);
      e.trace_entry = i - lo;
      out.push_back(std::move(e));
    }
    i = j;
  }
  return out;
}

std::vector<PatchEncounter> extract_encounters(
    const std::vector<io::EpisodeLog>& logs, int margin) {
  std::vector<PatchEncounter> out;
  for (std::size_t k = 0; k < logs.size(); ++k) {
    auto enc = extract_encounters(logs[k], static_cast<int>(k), margin);
    out.insert(out.end(), std::make_move_iterator(enc.begin()),
               std::make_move_iterator(enc.end()));
  }
  return out;
}

std::map<double, double> estimate_travel_steps(
    const std::vector<io::EpisodeLog>& logs) {
  std::map<double, std::vector<double>> segments;
  for (const auto& log : logs) {
    const auto enc = extract_encounters(log, 0, 0);
    for (std::size_t k = 1; k < enc.size(); ++k) {
      segments[log.config.patch_distance].push_back(
          static_cast<double>(enc[k].entry_step - enc[k - 1].exit_step));
    }
  }
  std::map<double, double> out;
  for (auto& [d, v] : segments)
    if (!v.empty()) out[d] = mean(v);
  if (out.empty())
    throw AnalysisError("no completed travel segments between encounters");
  return out;
}

double episode_score(const io::EpisodeLog& log) {
  double s = 0.0;
  for (const auto& r : log.records) s += r.reward;
  return s;
}

stats::RegressionResult leaving_time_regression(
    const std::vector<PatchEncounter>& encounters) {
  const auto groups = by_distance(encounters);
  std::vector<double> xs, ys;
  for (const auto& [d, group] : groups) {
    std::vector<double> ls;
    for (const auto* e : group) ls.push_back(static_cast<double>(e->leave_step));
    xs.push_back(d);
    ys.push_back(mean(ls));
  }
  if (xs.size() < 2)
    throw AnalysisError("leaving-time regression needs >= 2 patch distances");
  return stats::linear_regression(xs, ys);
}

stats::RegressionResult score_regression(const std::vector<io::EpisodeLog>& logs) {
  std::map<double, std::vector<double>> scores;
  for (const auto& log : logs)
    scores[log.config.patch_distance].push_back(episode_score(log));
  std::vector<double> xs, ys;
  for (const auto& [d, v] : scores) {
    xs.push_back(d);
    ys.push_back(mean(v));
  }
  if (xs.size() < 2)
    throw AnalysisError("score regression needs >= 2 patch distances");
  return stats::linear_regression(xs, ys);
}

OptimalityGapResult optimality_gap(const std::vector<PatchEncounter>& encounters,
                                   const std::map<double, double>& tau_bar,
                                   double gamma, bool discounted, double n0,
                                   double lambda, int t_max, int horizon,
                                   double alpha) {
  const auto groups = by_distance(encounters);
  OptimalityGapResult result;
  result.gamma = gamma;
  result.discounted = discounted;

  std::vector<double> mean_gaps;
  for (const auto& [d, group] : groups) {
    const auto it = tau_bar.find(d);
    if (it == tau_bar.end())
      throw AnalysisError("no mean travel time available for distance " +
                          format_double(d));
    const int tau = static_cast<int>(std::lround(it->second));

    DistanceGap g;
    g.distance = d;
    g.tau_bar = it->second;
    if (discounted) {
      g.optimal_step = forage::optimal::discounted_mvt_leave_step(
                           tau, gamma, horizon, n0, lambda, t_max)
                           .leave_step;
    } else {
      g.optimal_step =
          forage::optimal::mvt_leave_step(tau, t_max, n0, lambda).leave_step;
    }

    std::vector<double> gaps;
    for (const auto* e : group)
      gaps.push_back(static_cast<double>(e->leave_step) - g.optimal_step);
    g.n = static_cast<int>(gaps.size());
    g.observed_mean = mean(gaps) + g.optimal_step;
    g.gap = mean(gaps);
    g.test = gaps.size() >= 2 ? stats::one_sample_ttest(gaps, 0.0)
                              : stats::TTestResult{0.0, 1.0, 0, mean(gaps)};
    result.per_distance.push_back(g);
    mean_gaps.push_back(g.gap);
  }
  if (result.per_distance.empty())
    throw AnalysisError("optimality gap needs at least one distance");
  result.alpha_corrected =
      stats::bonferroni(alpha, static_cast<int>(result.per_distance.size()));
  result.overall = mean_gaps.size() >= 2
                       ? stats::one_sample_ttest(mean_gaps, 0.0)
                       : stats::TTestResult{0.0, 1.0, 0, mean_gaps.front()};
  return result;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw AnalysisError("percentile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= values.size()) return values.back();
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + (values[lo + 1] - values[lo]) * frac;
}

void quartile_split(std::vector<PatchEncounter>& encounters) {
  std::map<double, std::vector<PatchEncounter*>> groups;
  for (auto& e : encounters) {
    e.quartile = -1;
    if (usable(e)) groups[e.distance].push_back(&e);
  }
  if (groups.empty()) throw AnalysisError("quartile split on empty input");
  for (auto& [d, group] : groups) {
    if (group.size() < 4)
      throw AnalysisError("quartile split needs >= 4 encounters per distance");
    std::vector<double> ls;
    for (const auto* e : group) ls.push_back(static_cast<double>(e->leave_step));
    const double q25 = percentile(ls, 0.25);
    const double q50 = percentile(ls, 0.50);
    const double q75 = percentile(ls, 0.75);
    for (auto* e : group) {
      const auto v = static_cast<double>(e->leave_step);
      if (v <= q25)
        e->quartile = 0;
      else if (v <= q50)
        e->quartile = 1;
      else if (v <= q75)
        e->quartile = 2;
      else
        e->quartile = 3;
    }
  }
}

SlidingSlopeResult sliding_slope_regression(
    const std::vector<PatchEncounter>& encounters, Alignment alignment,
    int state_index, int in_patch_window, int margin, double alpha) {
  if (in_patch_window < 1 || margin < 0)
    throw AnalysisError("sliding slope window must have >= 1 in-patch step");

  std::vector<const PatchEncounter*> pool;
  for (const auto& e : encounters)
    if (usable(e) && e.quartile >= 0) pool.push_back(&e);
  if (pool.empty())
    throw AnalysisError("sliding slope regression needs quartile-labeled encounters");

  // Median leave step per quartile (pooled over distances), for the
  // entry-aligned plotting convention.
  std::array<double, 4> quartile_median{};
  for (int q = 0; q < 4; ++q) {
    std::vector<double> ls;
    for (const auto* e : pool)
      if (e->quartile == q) ls.push_back(static_cast<double>(e->leave_step));
    quartile_median[static_cast<std::size_t>(q)] =
        ls.empty() ? 0.0 : percentile(ls, 0.5);
  }

  SlidingSlopeResult result;
  result.alignment = alignment;
  result.state_index = state_index;
  const int window_count = in_patch_window + margin;
  result.alpha_corrected = stats::bonferroni(alpha, window_count);

  const int first_offset =
      alignment == Alignment::kEntry ? -margin : -in_patch_window;
  for (int w = 0; w < window_count; ++w) {
    const int offset = first_offset + w;
    SlidingSlopeStep step;
    step.offset = offset;

    std::vector<double> xs, ys;
    for (const auto* e : pool) {
      int row;
      if (alignment == Alignment::kEntry) {
        if (offset >= 0) {
          // Still inside the patch at this offset, and within the quartile's
          // median leaving time.
          if (e->leave_step <= offset) continue;
          if (static_cast<double>(offset) >
              quartile_median[static_cast<std::size_t>(e->quartile)])
            continue;
        }
        row = e->trace_entry + offset;
      } else {
        if (offset < 0 && e->leave_step < -offset) continue;
        row = e->trace_entry + e->leave_step + offset;
      }
      if (!row_has_index(*e, row, state_index) ||
          !row_has_index(*e, row - 1, state_index))
        continue;
      ys.push_back(state_at(*e, row, state_index) -
                   state_at(*e, row - 1, state_index));
      xs.push_back(static_cast<double>(e->quartile + 1));
    }

    step.reg.n = static_cast<int>(xs.size());
    const bool x_varies =
        !xs.empty() && *std::max_element(xs.begin(), xs.end()) >
                           *std::min_element(xs.begin(), xs.end());
    const bool y_varies =
        !ys.empty() && *std::max_element(ys.begin(), ys.end()) >
                           *std::min_element(ys.begin(), ys.end());
    if (xs.size() >= 3 && x_varies && y_varies) {
      step.reg = stats::linear_regression(xs, ys);
      step.valid = true;
      step.significant = step.reg.p < result.alpha_corrected;
    }
    result.steps.push_back(step);
  }
  return result;
}

std::vector<int> significant_offsets(const SlidingSlopeResult& result) {
  std::vector<int> out;
  for (const auto& s : result.steps)
    if (s.significant) out.push_back(s.offset);
  return out;
}

std::pair<int, int> longest_significant_run(const SlidingSlopeResult& result) {
  int best_start = 0, best_len = 0;
  int cur_start = 0, cur_len = 0;
  for (const auto& s : result.steps) {
    if (s.significant) {
      if (cur_len == 0) cur_start = s.offset;
      ++cur_len;
      if (cur_len > best_len) {
        best_len = cur_len;
        best_start = cur_start;
      }
    } else {
      cur_len = 0;
    }
  }
  return {best_start, best_len};
}

std::optional<double> encounter_mean_slope(const PatchEncounter& e,
                                           const std::vector<int>& offsets,
                                           int state_index) {
  double sum = 0.0;
  int count = 0;
  for (int offset : offsets) {
    if (offset >= 0 && e.leave_step <= offset) continue;
    const int row = e.trace_entry + offset;
    if (!row_has_index(e, row, state_index) ||
        !row_has_index(e, row - 1, state_index))
      continue;
    sum += state_at(e, row, state_index) - state_at(e, row - 1, state_index);
    ++count;
  }
  if (count == 0) return std::nullopt;
  return sum / count;
}

stats::RegressionResult activity_range_regression(
    const std::vector<PatchEncounter>& encounters, int state_index) {
  std::vector<double> xs, ys;
  for (const auto& e : encounters) {
    if (!usable(e)) continue;
    const int entry_row = e.trace_entry;
    const int exit_row = e.trace_entry + e.leave_step - 1;
    if (!row_has_index(e, entry_row, state_index) ||
        !row_has_index(e, exit_row, state_index))
      continue;
    xs.push_back(e.distance);
    ys.push_back(state_at(e, exit_row, state_index) -
                 state_at(e, entry_row, state_index));
  }
  if (xs.empty()) throw AnalysisError("activity range regression has no data");
  const std::set<double> distinct(xs.begin(), xs.end());
  if (distinct.size() < 2)
    throw AnalysisError("activity range regression needs >= 2 distances");
  return stats::linear_regression(xs, ys);
}

stats::RegressionResult slope_vs_distance_regression(
    const std::vector<PatchEncounter>& encounters,
    const std::vector<int>& window_offsets, int state_index) {
  if (window_offsets.empty())
    throw AnalysisError("slope-vs-distance regression needs a significant window");
  std::vector<double> xs, ys;
  for (const auto& e : encounters) {
    if (!usable(e)) continue;
    const auto slope = encounter_mean_slope(e, window_offsets, state_index);
    if (!slope) continue;
    xs.push_back(e.distance);
    ys.push_back(*slope);
  }
  if (xs.empty()) throw AnalysisError("slope-vs-distance regression has no data");
  const std::set<double> distinct(xs.begin(), xs.end());
  if (distinct.size() < 2)
    throw AnalysisError("slope-vs-distance regression needs >= 2 distances");
  return stats::linear_regression(xs, ys);
}

ExitAnovaResult exit_activity_anova(const std::vector<PatchEncounter>& encounters,
                                    int state_index, double alpha) {
  std::array<std::vector<double>, 4> groups;
  for (const auto& e : encounters) {
    if (!usable(e) || e.quartile < 0) continue;
    const int exit_row = e.trace_entry + e.leave_step - 1;
    if (!row_has_index(e, exit_row, state_index)) continue;
    groups[static_cast<std::size_t>(e.quartile)].push_back(
        state_at(e, exit_row, state_index));
  }
  std::vector<std::vector<double>> present;
  std::vector<int> labels;
  for (int q = 0; q < 4; ++q) {
    if (groups[static_cast<std::size_t>(q)].size() >= 2) {
      present.push_back(groups[static_cast<std::size_t>(q)]);
      labels.push_back(q);
    }
  }
  if (present.size() < 2)
    throw AnalysisError("exit activity ANOVA needs >= 2 quartiles with >= 2 values");

  ExitAnovaResult result;
  result.anova = stats::one_way_anova(present);
  const int pairs =
      static_cast<int>(present.size() * (present.size() - 1)) / 2;
  result.alpha_corrected = stats::bonferroni(alpha, pairs);
  for (std::size_t i = 0; i < present.size(); ++i) {
    for (std::size_t j = i + 1; j < present.size(); ++j) {
      const auto t = stats::two_sample_ttest(present[i], present[j]);
      ExitAnovaResult::Pair p;
      p.a = labels[i];
      p.b = labels[j];
      p.t = t.t;
      p.p = t.p;
      p.significant = t.p < result.alpha_corrected;
      result.pairwise.push_back(p);
    }
  }
  return result;
}

stats::PcaResult state_trace_pca(const std::vector<PatchEncounter>& encounters) {
  std::vector<std::vector<double>> rows;
  for (const auto& e : encounters) {
    if (!usable(e)) continue;
    for (int k = 0; k < e.leave_step; ++k) {
      const int row = e.trace_entry + k;
      if (row >= 0 && row < static_cast<int>(e.state_trace.size()) &&
          !e.state_trace[static_cast<std::size_t>(row)].empty())
        rows.push_back(e.state_trace[static_cast<std::size_t>(row)]);
    }
  }
  if (rows.size() < 2)
    throw AnalysisError("state trace PCA needs >= 2 in-patch state rows");
  return stats::pca(rows);
}

std::vector<io::EpisodeLog> load_logs(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir))
    throw AnalysisError("log directory does not exist: " + dir);
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl")
      paths.push_back(entry.path().string());
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) throw AnalysisError("no logs matched in " + dir);
  std::vector<io::EpisodeLog> logs;
  logs.reserve(paths.size());
  for (const auto& p : paths) {
    try {
      logs.push_back(io::load_episode_jsonl(p));
    } catch (const io::IoError&) {
      throw;
    } catch (const std::runtime_error& e) {
      throw AnalysisError("failed to load " + p + ": " + e.what());
    }
  }
  return logs;
}

namespace {

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw AnalysisError("cannot write " + path);
  out << content;
}

bool wants(const AnalysisOptions& opt, const std::string& name) {
  return opt.analyses.empty() ||
         std::find(opt.analyses.begin(), opt.analyses.end(), name) !=
             opt.analyses.end();
}

}  // namespace

nlohmann::json analyze_to_dir(const std::vector<io::EpisodeLog>& logs,
                              const AnalysisOptions& options,
                              const std::string& out_dir) {
  namespace fs = std::filesystem;
  if (logs.empty()) throw AnalysisError("no logs to analyze");
  fs::create_directories(out_dir);
  const auto path = [&](const char* name) {
    return (fs::path(out_dir) / name).string();
  };

  auto encounters = extract_encounters(logs, options.margin);
  nlohmann::json summary;
  summary["metadata"] = {
      {"episodes", logs.size()},
      {"encounters", encounters.size()},
      {"dynamics_state_index", options.dynamics_state_index},
      {"range_state_index", options.range_state_index},
      {"quartile_pooling", "pooled-across-distances"},
      {"gamma", options.gamma},
      {"discounted", options.discounted},
  };

  std::map<double, double> tau_bar;
  if (wants(options, "travel") || wants(options, "optimality_gap")) {
    tau_bar = estimate_travel_steps(logs);
    std::string csv = "distance,mean_travel_steps\n";
    nlohmann::json jt;
    for (const auto& [d, t] : tau_bar) {
      csv += format_double(d) + "," + format_double(t) + "\n";
      jt[format_double(d)] = t;
    }
    write_text(path("travel.csv"), csv);
    summary["travel"] = jt;
  }

  if (wants(options, "leaving_times")) {
    const auto groups = by_distance(encounters);
    std::string csv = "distance,mean_leave_step,n_encounters\n";
    for (const auto& [d, group] : groups) {
      std::vector<double> ls;
      for (const auto* e : group) ls.push_back(e->leave_step);
      csv += format_double(d) + "," + format_double(mean(ls)) + "," +
             std::to_string(group.size()) + "\n";
    }
    write_text(path("leaving_times.csv"), csv);
    summary["leaving_time_regression"] =
        reg_to_json(leaving_time_regression(encounters));
  }

  if (wants(options, "scores")) {
    std::map<double, std::vector<double>> scores;
    for (const auto& log : logs)
      scores[log.config.patch_distance].push_back(episode_score(log));
    std::string csv = "distance,mean_score,n_episodes\n";
    for (const auto& [d, v] : scores)
      csv += format_double(d) + "," + format_double(mean(v)) + "," +
             std::to_string(v.size()) + "\n";
    write_text(path("scores.csv"), csv);
    summary["score_regression"] = reg_to_json(score_regression(logs));
  }

  if (wants(options, "optimality_gap")) {
    const auto& cfg = logs.front().config;
    const auto gap =
        optimality_gap(encounters, tau_bar, options.gamma, options.discounted,
                       cfg.n0, cfg.lambda, cfg.episode_steps, options.horizon,
                       options.alpha);
    std::string csv =
        "distance,tau_bar,optimal_step,observed_mean_leave_step,gap,t,p,n\n";
    nlohmann::json per = nlohmann::json::array();
    for (const auto& g : gap.per_distance) {
      csv += format_double(g.distance) + "," + format_double(g.tau_bar) + "," +
             std::to_string(g.optimal_step) + "," +
             format_double(g.observed_mean) + "," + format_double(g.gap) + "," +
             format_double(g.test.t) + "," + format_double(g.test.p) + "," +
             std::to_string(g.n) + "\n";
      per.push_back({{"distance", g.distance},
                     {"tau_bar", g.tau_bar},
                     {"optimal_step", g.optimal_step},
                     {"observed_mean", g.observed_mean},
                     {"gap", g.gap},
                     {"test", ttest_to_json(g.test)},
                     {"n", g.n}});
    }
    write_text(path("optimality_gap.csv"), csv);
    summary["optimality_gap"] = {{"per_distance", per},
                                 {"overall", ttest_to_json(gap.overall)},
                                 {"alpha_corrected", gap.alpha_corrected},
                                 {"gamma", gap.gamma},
                                 {"discounted", gap.discounted}};

    // Solver curves per distance, for the report charts.
    const auto& c = logs.front().config;
    std::string rc = "distance,t,rate\n";
    for (const auto& [d, t] : tau_bar) {
      const auto sol = forage::optimal::mvt_leave_step(
          static_cast<int>(std::lround(t)), c.episode_steps, c.n0, c.lambda);
      for (std::size_t k = 0; k < sol.rate_curve.size(); ++k)
        rc += format_double(d) + "," + std::to_string(k + 1) + "," +
              format_double(sol.rate_curve[k]) + "\n";
    }
    write_text(path("rate_curve.csv"), rc);
    if (options.discounted) {
      std::string ic = "distance,patch_steps,indifference_step\n";
      for (const auto& [d, t] : tau_bar) {
        const auto sol = forage::optimal::discounted_mvt_leave_step(
            static_cast<int>(std::lround(t)), options.gamma, options.horizon,
            c.n0, c.lambda, c.episode_steps);
        for (const auto& [p, m] : sol.indifference_curve)
          ic += format_double(d) + "," + std::to_string(p) + "," +
                std::to_string(m) + "\n";
      }
      write_text(path("indifference_curve.csv"), ic);
    }
  }

  const bool needs_quartiles = wants(options, "quartiles") ||
                               wants(options, "sliding_slope") ||
                               wants(options, "exit_anova") ||
                               wants(options, "slope_vs_distance");
  if (needs_quartiles) {
    quartile_split(encounters);
    std::map<std::pair<double, int>, std::vector<double>> cells;
    for (const auto& e : encounters)
      if (usable(e) && e.quartile >= 0)
        cells[{e.distance, e.quartile}].push_back(e.leave_step);
    std::string csv = "distance,quartile,label,count,mean_leave_step\n";
    for (const auto& [key, v] : cells)
      csv += format_double(key.first) + "," + std::to_string(key.second) + "," +
             kQuartileNames[key.second] + "," + std::to_string(v.size()) + "," +
             format_double(mean(v)) + "\n";
    write_text(path("quartiles.csv"), csv);
  }

  std::vector<int> significant_window;
  if (wants(options, "sliding_slope")) {
    const auto write_sliding = [&](Alignment align, const char* csv_name,
                                   const char* key) {
      const auto res = sliding_slope_regression(
          encounters, align, options.dynamics_state_index,
          options.in_patch_window, options.margin, options.alpha);
      std::string csv = "offset,slope,slope_se,t,p,n,significant\n";
      for (const auto& s : res.steps)
        csv += std::to_string(s.offset) + "," + format_double(s.reg.slope) +
               "," + format_double(s.reg.slope_se) + "," +
               format_double(s.reg.t) + "," + format_double(s.reg.p) + "," +
               std::to_string(s.reg.n) + "," + (s.significant ? "1" : "0") +
               "\n";
      write_text(path(csv_name), csv);
      const auto run = longest_significant_run(res);
      summary[key] = {{"alpha_corrected", res.alpha_corrected},
                      {"n_significant", significant_offsets(res).size()},
                      {"longest_run_start", run.first},
                      {"longest_run_length", run.second}};
      return res;
    };
    const auto entry = write_sliding(Alignment::kEntry, "sliding_slope_entry.csv",
                                     "sliding_slope_entry");
    write_sliding(Alignment::kExit, "sliding_slope_exit.csv",
                  "sliding_slope_exit");
    significant_window = significant_offsets(entry);

    // Mean state traces per quartile for the report figure.
    std::string qt = "offset,quartile,mean_state,n\n";
    for (int offset = -options.margin; offset < options.in_patch_window;
         ++offset) {
      for (int q = 0; q < 4; ++q) {
        double sum = 0.0;
        int count = 0;
        for (const auto& e : encounters) {
          if (!usable(e) || e.quartile != q) continue;
          if (offset >= 0 && e.leave_step <= offset) continue;
          const int row = e.trace_entry + offset;
          if (!row_has_index(e, row, options.dynamics_state_index)) continue;
          sum += state_at(e, row, options.dynamics_state_index);
          ++count;
        }
        if (count > 0)
          qt += std::to_string(offset) + "," + std::to_string(q) + "," +
                format_double(sum / count) + "," + std::to_string(count) + "\n";
      }
    }
    write_text(path("quartile_traces.csv"), qt);
  }

  if (wants(options, "activity_range")) {
    std::string csv = "distance,range\n";
    for (const auto& e : encounters) {
      if (!usable(e)) continue;
      const int entry_row = e.trace_entry;
      const int exit_row = e.trace_entry + e.leave_step - 1;
      if (!row_has_index(e, entry_row, options.range_state_index) ||
          !row_has_index(e, exit_row, options.range_state_index))
        continue;
      csv += format_double(e.distance) + "," +
             format_double(state_at(e, exit_row, options.range_state_index) -
                           state_at(e, entry_row, options.range_state_index)) +
             "\n";
    }
    write_text(path("activity_range.csv"), csv);
    summary["activity_range_regression"] = reg_to_json(
        activity_range_regression(encounters, options.range_state_index));
  }

  if (wants(options, "slope_vs_distance")) {
    if (!significant_window.empty()) {
      summary["slope_vs_distance_regression"] =
          reg_to_json(slope_vs_distance_regression(
              encounters, significant_window, options.dynamics_state_index));
      std::string csv = "distance,mean_slope\n";
      for (const auto& e : encounters) {
        if (!usable(e)) continue;
        const auto s = encounter_mean_slope(e, significant_window,
                                            options.dynamics_state_index);
        if (s)
          csv += format_double(e.distance) + "," + format_double(*s) + "\n";
      }
      write_text(path("slope_vs_distance.csv"), csv);
    } else {
      summary["slope_vs_distance_regression"] = nullptr;
      io::log(io::LogLevel::kWarn,
              "slope-vs-distance skipped: no significant window");
    }
  }

  if (wants(options, "exit_anova")) {
    const auto res = exit_activity_anova(encounters,
                                         options.dynamics_state_index,
                                         options.alpha);
    std::string csv = "quartile_a,quartile_b,t,p,significant\n";
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : res.pairwise) {
      csv += std::to_string(p.a) + "," + std::to_string(p.b) + "," +
             format_double(p.t) + "," + format_double(p.p) + "," +
             (p.significant ? "1" : "0") + "\n";
      pairs.push_back({{"a", p.a},
                       {"b", p.b},
                       {"t", p.t},
                       {"p", p.p},
                       {"significant", p.significant}});
    }
    write_text(path("exit_anova.csv"), csv);
    summary["exit_activity_anova"] = {{"f", res.anova.f},
                                      {"p", res.anova.p},
                                      {"df_between", res.anova.df_between},
                                      {"df_within", res.anova.df_within},
                                      {"alpha_corrected", res.alpha_corrected},
                                      {"pairwise", pairs}};
  }

  if (wants(options, "pca")) {
    try {
      const auto res = state_trace_pca(encounters);
      std::string csv = "component,eigenvalue,explained_ratio\n";
      nlohmann::json ratios = nlohmann::json::array();
      for (std::size_t k = 0; k < res.eigenvalues.size(); ++k) {
        csv += std::to_string(k) + "," + format_double(res.eigenvalues[k]) +
               "," + format_double(res.explained_ratio[k]) + "\n";
        ratios.push_back(res.explained_ratio[k]);
      }
      write_text(path("pca.csv"), csv);
      summary["pca"] = {{"explained_ratio", ratios}};
    } catch (const std::exception& e) {
      summary["pca"] = nullptr;
      io::log(io::LogLevel::kWarn, std::string("pca skipped: ") + e.what());
    }
  }

  write_text(path("summary.json"), summary.dump(2) + "\n");
  return summary;
}

}  // namespace forage::analysis
