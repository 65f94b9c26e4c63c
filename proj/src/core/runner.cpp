#include "core/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "core/agents.hpp"
#include "core/analysis.hpp"
#include "core/env.hpp"

namespace forage::run {

std::vector<EpisodeSpec> make_episode_specs(const io::RunConfig& config) {
  config.validate();
  const auto& ev = config.evaluation;
  std::vector<EpisodeSpec> specs;
  if (ev.uniform_distances) {
    // Distances are drawn up front from the base seed so the batch is
    // reproducible independently of worker scheduling.
    std::mt19937_64 rng(ev.seed);
    std::uniform_real_distribution<double> dist(ev.uniform_min, ev.uniform_max);
    for (int i = 0; i < ev.episodes; ++i)
      specs.push_back({i, dist(rng), ev.seed + static_cast<std::uint64_t>(i)});
  } else {
    int index = 0;
    for (double d : ev.distances) {
      for (int i = 0; i < ev.episodes; ++i, ++index)
        specs.push_back({index, d, ev.seed + static_cast<std::uint64_t>(index)});
    }
  }
  return specs;
}

io::EpisodeLog simulate_episode(const io::RunConfig& config,
                                const EpisodeSpec& spec) {
  io::EpisodeLog log;
  log.config = config.world;
  log.config.patch_distance = spec.distance;
  log.config.validate();
  log.seed = spec.seed;
  const auto agent = agents::make_agent(config.agent);
  log.records = env::run_episode(log.config, *agent, spec.seed);
  return log;
}

namespace {

void run_workers(const io::RunConfig& config,
                 const std::vector<EpisodeSpec>& specs,
                 std::vector<io::EpisodeLog>& out) {
  out.resize(specs.size());
  const int workers = std::max(
      1, std::min(config.workers, static_cast<int>(specs.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < specs.size(); ++i)
      out[i] = simulate_episode(config, specs[i]);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::atomic<bool> failed{false};
  std::string error;
  std::mutex error_mutex;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= specs.size() || failed.load()) return;
        try {
          out[i] = simulate_episode(config, specs[i]);
        } catch (const std::exception& e) {
          std::lock_guard<std::mutex> lock(error_mutex);
          error = e.what();
          failed.store(true);
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failed.load()) throw std::runtime_error("episode failed: " + error);
}

}  // namespace

std::vector<io::EpisodeLog> simulate_batch(const io::RunConfig& config) {
  const auto specs = make_episode_specs(config);
  std::vector<io::EpisodeLog> logs;
  run_workers(config, specs, logs);
  return logs;
}

nlohmann::json simulate_to_dir(const io::RunConfig& config,
                               const std::string& out_dir) {
  namespace fs = std::filesystem;
  const auto specs = make_episode_specs(config);
  fs::create_directories(out_dir);

  std::vector<io::EpisodeLog> logs;
  run_workers(config, specs, logs);

  nlohmann::json episodes = nlohmann::json::array();
  std::map<double, std::pair<double, int>> score_acc;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "ep_%05zu.jsonl", i);
    const std::string path = (fs::path(out_dir) / name).string();

    std::ostringstream buf;
    io::write_episode_jsonl(buf, logs[i].config, logs[i].seed, logs[i].records);
    const std::string data = buf.str();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io::IoError("cannot write " + path);
    out << data;
    out.close();

    const double score = analysis::episode_score(logs[i]);
    episodes.push_back({{"file", name},
                        {"seed", specs[i].seed},
                        {"distance", specs[i].distance},
                        {"score", score},
                        {"hash", io::hex64(io::fnv1a64(data))}});
    auto& acc = score_acc[specs[i].distance];
    acc.first += score;
    acc.second += 1;
  }

  nlohmann::json scores;
  for (const auto& [d, acc] : score_acc) {
    char key[32];
    std::snprintf(key, sizeof(key), "%.12g", d);
    scores[key] = {{"mean_score", acc.first / acc.second},
                   {"episodes", acc.second}};
  }

  const nlohmann::json config_json = io::to_json(config);
  nlohmann::json manifest = {
      {"config", config_json},
      {"config_hash", io::hex64(io::fnv1a64(config_json.dump()))},
      {"episodes", episodes},
      {"score_summary", scores},
  };
  const std::string manifest_path = (fs::path(out_dir) / "manifest.json").string();
  std::ofstream mout(manifest_path, std::ios::binary);
  if (!mout) throw io::IoError("cannot write " + manifest_path);
  mout << manifest.dump(2) << "\n";
  io::log(io::LogLevel::kInfo,
          "simulated " + std::to_string(logs.size()) + " episodes -> " + out_dir);
  return manifest;
}

}  // namespace forage::run
