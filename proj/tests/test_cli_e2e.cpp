// End-to-end driver for the installed CLI. argv[1] is the forage binary;
// every case shells out, captures stdout/stderr, and checks exit codes and
// on-disk outputs. Exits nonzero when any check fails.

#include <sys/wait.h>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;
std::string g_cli;
fs::path g_work;

void check(bool ok, const std::string& what) {
  if (ok) {
    std::printf("ok   %s\n", what.c_str());
  } else {
    std::printf("FAIL %s\n", what.c_str());
    ++g_failures;
  }
}

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// args are appended verbatim after the binary; prefix may carry env settings.
RunResult run(const std::string& args, const std::string& prefix = "") {
  const fs::path out_path = g_work / "stdout.txt";
  const fs::path err_path = g_work / "stderr.txt";
  const std::string cmd = prefix + "\"" + g_cli + "\" " + args + " > \"" +
                          out_path.string() + "\" 2> \"" + err_path.string() +
                          "\"";
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.code = (raw != -1 && WIFEXITED(raw)) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  return r;
}

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

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

void solver_cases() {
  auto r = run("");
  check(r.code != 0, "bare invocation demands a subcommand");

  r = run("solve mvt --tau 0");
  check(r.code == 0, "solve mvt tau 0 exits 0");
  {
    const json j = json::parse(r.out, nullptr, false);
    check(!j.is_discarded() && j.at("leave_step") == 1,
          "zero travel keeps only the first step");
    check(std::abs(j.at("rate").get<double>() - 1.0 / 30.0) < 1e-12,
          "zero travel rate equals the fresh reward");
  }

  const fs::path sol = g_work / "mvt.json";
  const fs::path curve = g_work / "mvt.csv";
  r = run("solve mvt --tau 58 --t-max 120 --out \"" + sol.string() +
          "\" --csv \"" + curve.string() + "\"");
  check(r.code == 0, "solve mvt with outputs exits 0");
  {
    const json j = json::parse(slurp(sol), nullptr, false);
    check(!j.is_discarded() && j.at("leave_step") == 91,
          "solution file holds the leave step");
    const std::string csv = slurp(curve);
    check(csv.rfind("t,rate\n1,", 0) == 0, "curve csv header and first row");
    long rows = 0;
    for (char c : csv)
      if (c == '\n') ++rows;
    check(rows == 121, "curve csv row count follows t-max");
  }

  r = run("solve dmvt --tau 58");
  check(r.code == 0 &&
            json::parse(r.out, nullptr, false).at("leave_step") == 91,
        "undiscounted dmvt agrees with mvt");

  r = run("solve dmvt --tau 58 --gamma 0.995");
  check(r.code == 0 &&
            json::parse(r.out, nullptr, false).at("leave_step") == 104,
        "discounting below one lengthens the stay");

  r = run("solve mvt --tau -1");
  check(r.code == 1, "negative travel time is an argument error");
  check(contains(r.err, "forage: solve mvt"), "solver errors identify the stage");

  r = run("solve dmvt --tau 58 --gamma 0.0001 --horizon 2000 --t-max 50");
  check(r.code == 5, "unreachable fixed point is a solver error");

  r = run("solve newton --tau 58");
  check(r.code != 0, "unknown solver kind is rejected");
}

void pipeline_cases() {
  const fs::path config_path = g_work / "run.json";
  {
    std::ofstream out(config_path);
    out << R"({
      "agent": {"kind": "accumulator"},
      "evaluation": {"distances": [6, 8, 10], "episodes": 1, "seed": 3},
      "workers": 2
    })";
  }
  const fs::path logs1 = g_work / "logs1";
  const fs::path logs2 = g_work / "logs2";
  const fs::path logs3 = g_work / "logs3";

  auto r = run("simulate --config \"" + config_path.string() + "\" --out \"" +
               logs1.string() + "\"");
  check(r.code == 0, "simulate exits 0");
  check(contains(r.out, "simulate: wrote"), "simulate reports its output dir");
  check(fs::exists(logs1 / "manifest.json"), "simulate writes a manifest");
  const json manifest = json::parse(slurp(logs1 / "manifest.json"));
  check(manifest.at("episodes").size() == 3, "one log per episode");
  bool hashes_match = true;
  for (const auto& ep : manifest.at("episodes")) {
    const auto file = ep.at("file").get<std::string>();
    if (!fs::exists(logs1 / file)) hashes_match = false;
    else if (hex64(fnv1a64(slurp(logs1 / file))) !=
             ep.at("hash").get<std::string>())
      hashes_match = false;
  }
  check(hashes_match, "manifest hashes match the files on disk");

  r = run("simulate --config \"" + config_path.string() + "\" --out \"" +
          logs2.string() + "\"");
  check(r.code == 0, "simulate rerun exits 0");
  check(slurp(logs1 / "manifest.json") == slurp(logs2 / "manifest.json"),
        "reruns are byte-identical down to the manifest");
  check(slurp(logs1 / "ep_00000.jsonl") == slurp(logs2 / "ep_00000.jsonl"),
        "episode logs replay byte-identically");

  r = run("simulate --config \"" + config_path.string() + "\" --out \"" +
          logs3.string() + "\" --seed 9");
  check(r.code == 0, "simulate with a seed override exits 0");
  check(slurp(logs1 / "manifest.json") != slurp(logs3 / "manifest.json"),
        "a different seed changes the logs");

  const fs::path ana1 = g_work / "analysis1";
  const fs::path ana2 = g_work / "analysis2";
  r = run("analyze --logs \"" + logs1.string() + "\" --out \"" +
          ana1.string() + "\"");
  check(r.code == 0, "analyze exits 0");
  bool tables_present = true;
  for (const char* name :
       {"summary.json", "travel.csv", "leaving_times.csv", "scores.csv",
        "optimality_gap.csv", "rate_curve.csv", "quartiles.csv",
        "sliding_slope_entry.csv", "sliding_slope_exit.csv",
        "quartile_traces.csv", "activity_range.csv", "exit_anova.csv",
        "pca.csv"}) {
    if (!fs::exists(ana1 / name)) {
      tables_present = false;
      std::printf("     missing: %s\n", name);
    }
  }
  check(tables_present, "analyze writes the full table set");

  r = run("analyze --logs \"" + logs1.string() + "\" --out \"" +
          ana2.string() + "\"");
  check(r.code == 0, "analyze rerun exits 0");
  check(slurp(ana1 / "summary.json") == slurp(ana2 / "summary.json"),
        "analysis summaries are byte-identical across reruns");
  check(slurp(ana1 / "sliding_slope_entry.csv") ==
            slurp(ana2 / "sliding_slope_entry.csv"),
        "analysis tables are byte-identical across reruns");

  const fs::path few = g_work / "analysis_few";
  r = run("analyze --logs \"" + logs1.string() + "\" --out \"" + few.string() +
          "\" --analyses travel,scores");
  check(r.code == 0, "analyze subset exits 0");
  check(fs::exists(few / "travel.csv") && fs::exists(few / "scores.csv") &&
            !fs::exists(few / "quartiles.csv"),
        "analyze subset writes only the requested tables");

  const fs::path hollow = g_work / "hollow";
  fs::create_directories(hollow);
  r = run("analyze --logs \"" + hollow.string() + "\" --out \"" +
          (g_work / "nowhere").string() + "\"");
  check(r.code == 6, "analyzing an empty directory is an analysis error");

  const fs::path rep1 = g_work / "report1";
  const fs::path rep2 = g_work / "report2";
  r = run("report --analysis \"" + ana1.string() + "\" --out \"" +
          rep1.string() + "\"");
  check(r.code == 0, "report exits 0");
  check(contains(r.out, "report: wrote"), "report announces its figure count");
  check(contains(r.err, "[forage][info] wrote"),
        "figure writes are logged at info");
  int svg_count = 0;
  for (const auto& entry : fs::directory_iterator(rep1))
    if (entry.path().extension() == ".svg") ++svg_count;
  check(svg_count >= 4, "report renders at least four figures");

  r = run("report --analysis \"" + ana1.string() + "\" --out \"" +
          rep2.string() + "\"",
          "FORAGE_LOG_LEVEL=error ");
  check(r.code == 0, "report rerun exits 0");
  check(!contains(r.err, "[forage][info]"),
        "FORAGE_LOG_LEVEL=error silences info logging");
  bool figures_identical = true;
  for (const auto& entry : fs::directory_iterator(rep1)) {
    if (entry.path().extension() != ".svg") continue;
    if (slurp(entry.path()) != slurp(rep2 / entry.path().filename()))
      figures_identical = false;
  }
  check(figures_identical, "figures are byte-identical across reruns");

  r = run("report --analysis \"" + (g_work / "missing").string() +
          "\" --out \"" + rep2.string() + "\"");
  check(r.code == 4, "reporting from a missing directory is an io error");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <forage-cli>\n", argv[0]);
    return 2;
  }
  g_cli = argv[1];
  g_work = fs::absolute("cli_e2e_work");
  fs::remove_all(g_work);
  fs::create_directories(g_work);

  solver_cases();
  pipeline_cases();

  if (g_failures == 0) fs::remove_all(g_work);
  std::printf("%s: %d failure(s)\n", g_failures == 0 ? "SUCCESS" : "FAILURE",
              g_failures);
  return g_failures == 0 ? 0 : 1;
}
