// Command-line front end. Talks to the core exclusively through the C API in
// forage/forage.h; subcommands mirror the pipeline stages: simulate -> analyze
// -> report, plus the standalone solvers.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "forage/forage.h"

namespace {

int fail(forage_status status, const std::string& where) {
  std::cerr << "forage: " << where << ": " << forage_last_error() << "\n";
  return static_cast<int>(status);
}

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream buf;
  buf << in.rdbuf();
  out = buf.str();
  return true;
}

bool write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return false;
  out << content;
  return static_cast<bool>(out);
}

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"forage: two-patch foraging simulation, solvers, and analysis"};
  app.require_subcommand(1);

  // --- simulate ---
  auto* sim = app.add_subcommand("simulate", "run an episode batch from a config");
  std::string sim_config, sim_out;
  std::int64_t sim_seed = -1;
  int sim_workers = 0;
  sim->add_option("--config", sim_config, "run config JSON file")->required();
  sim->add_option("--out", sim_out, "output directory")->required();
  sim->add_option("--seed", sim_seed, "override evaluation.seed");
  sim->add_option("--workers", sim_workers, "override worker count");

  // --- solve ---
  auto* solve = app.add_subcommand("solve", "optimal leaving-time solvers");
  std::string solve_kind, solve_out, solve_csv;
  int solve_tau = 58, solve_horizon = 0, solve_tmax = 0;
  double solve_gamma = 1.0, solve_n0 = 0.0, solve_lambda = 0.0;
  solve->add_option("kind", solve_kind, "mvt or dmvt")
      ->required()
      ->check(CLI::IsMember({"mvt", "dmvt"}));
  solve->add_option("--tau", solve_tau, "travel steps between patches");
  solve->add_option("--gamma", solve_gamma, "discount factor (dmvt)");
  solve->add_option("--horizon", solve_horizon, "simulated steps (dmvt)");
  solve->add_option("--t-max", solve_tmax, "residence sweep bound");
  solve->add_option("--n0", solve_n0, "fresh patch reward");
  solve->add_option("--lambda", solve_lambda, "depletion rate");
  solve->add_option("--out", solve_out, "write solution JSON here");
  solve->add_option("--csv", solve_csv, "write solution curve CSV here");

  // --- analyze ---
  auto* ana = app.add_subcommand("analyze", "compute statistics from logs");
  std::string ana_logs, ana_out, ana_list;
  int ana_dyn_idx = 0, ana_range_idx = 1, ana_window = 40, ana_margin = 10,
      ana_horizon = 5000;
  double ana_alpha = 0.05, ana_gamma = 1.0;
  bool ana_discounted = false;
  ana->add_option("--logs", ana_logs, "directory of episode .jsonl logs")
      ->required();
  ana->add_option("--out", ana_out, "output directory")->required();
  ana->add_option("--analyses", ana_list,
                  "comma-separated subset (default: all)");
  ana->add_option("--state-index", ana_dyn_idx, "dynamics state channel");
  ana->add_option("--range-index", ana_range_idx, "range state channel");
  ana->add_option("--window", ana_window, "in-patch regression window");
  ana->add_option("--margin", ana_margin, "pre/post margin steps");
  ana->add_option("--alpha", ana_alpha, "significance level");
  ana->add_option("--gamma", ana_gamma, "solver discount for gap analysis");
  ana->add_flag("--discounted", ana_discounted,
                "use the discounted solver for gap analysis");
  ana->add_option("--horizon", ana_horizon, "discounted solver horizon");

  // --- report ---
  auto* rep = app.add_subcommand("report", "render SVG figures from analysis CSVs");
  std::string rep_in, rep_out;
  rep->add_option("--analysis", rep_in, "analysis output directory")->required();
  rep->add_option("--out", rep_out, "figure output directory")->required();

  CLI11_PARSE(app, argc, argv);

  if (sim->parsed()) {
    std::string config;
    if (!read_file(sim_config, config)) {
      std::cerr << "forage: cannot read config: " << sim_config << "\n";
      return static_cast<int>(FORAGE_ERR_IO);
    }
    char* manifest = nullptr;
    const auto status = forage_simulate(config.c_str(), sim_out.c_str(),
                                        sim_seed, sim_workers, &manifest);
    if (status != FORAGE_OK) return fail(status, "simulate");
    forage_string_free(manifest);
    std::cout << "simulate: wrote logs and manifest to " << sim_out << "\n";
    return 0;
  }

  if (solve->parsed()) {
    char* json_text = nullptr;
    char* csv_text = nullptr;
    forage_status status;
    if (solve_kind == "mvt") {
      status = forage_solve_mvt_json(solve_tau, solve_tmax, solve_n0,
                                     solve_lambda, &json_text);
      if (status == FORAGE_OK && !solve_csv.empty())
        status = forage_solve_mvt_csv(solve_tau, solve_tmax, solve_n0,
                                      solve_lambda, &csv_text);
    } else {
      status = forage_solve_dmvt_json(solve_tau, solve_gamma, solve_horizon,
                                      solve_n0, solve_lambda, solve_tmax,
                                      &json_text);
      if (status == FORAGE_OK && !solve_csv.empty())
        status = forage_solve_dmvt_csv(solve_tau, solve_gamma, solve_horizon,
                                       solve_n0, solve_lambda, solve_tmax,
                                       &csv_text);
    }
    if (status != FORAGE_OK) {
      forage_string_free(json_text);
      return fail(status, "solve " + solve_kind);
    }
    if (!solve_out.empty()) {
      if (!write_file(solve_out, std::string(json_text) + "\n")) {
        forage_string_free(json_text);
        forage_string_free(csv_text);
        std::cerr << "forage: cannot write " << solve_out << "\n";
        return static_cast<int>(FORAGE_ERR_IO);
      }
    } else {
      std::cout << json_text << "\n";
    }
    if (csv_text != nullptr && !write_file(solve_csv, csv_text)) {
      forage_string_free(json_text);
      forage_string_free(csv_text);
      std::cerr << "forage: cannot write " << solve_csv << "\n";
      return static_cast<int>(FORAGE_ERR_IO);
    }
    forage_string_free(json_text);
    forage_string_free(csv_text);
    return 0;
  }

  if (ana->parsed()) {
    std::string options = "{";
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "\"dynamics_state_index\":%d,\"range_state_index\":%d,"
                  "\"in_patch_window\":%d,\"margin\":%d,\"alpha\":%.17g,"
                  "\"gamma\":%.17g,\"discounted\":%s,\"horizon\":%d",
                  ana_dyn_idx, ana_range_idx, ana_window, ana_margin, ana_alpha,
                  ana_gamma, ana_discounted ? "true" : "false", ana_horizon);
    options += buf;
    if (!ana_list.empty()) {
      options += ",\"analyses\":[";
      std::stringstream ss(ana_list);
      std::string name;
      bool first = true;
      while (std::getline(ss, name, ',')) {
        if (!first) options += ",";
        options += "\"" + json_escape(name) + "\"";
        first = false;
      }
      options += "]";
    }
    options += "}";

    char* summary = nullptr;
    const auto status =
        forage_analyze(ana_logs.c_str(), options.c_str(), ana_out.c_str(),
                       &summary);
    if (status != FORAGE_OK) return fail(status, "analyze");
    forage_string_free(summary);
    std::cout << "analyze: wrote CSV tables and summary.json to " << ana_out
              << "\n";
    return 0;
  }

  if (rep->parsed()) {
    int figures = 0;
    const auto status =
        forage_report(rep_in.c_str(), rep_out.c_str(), &figures);
    if (status != FORAGE_OK) return fail(status, "report");
    std::cout << "report: wrote " << figures << " figures to " << rep_out
              << "\n";
    return 0;
  }

  return 0;
}
