#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "bbea/engine.hpp"
#include "bbea/trace.hpp"

namespace bbea {

struct AlgorithmSpec {
  std::string name;       // unique label, also the trace file prefix
  std::string algorithm;  // one of b2ea, gp_bo, rs, rea
  EngineConfig config;
};

/// One experiment: a benchmark, a set of algorithms, seeds, and exit
/// criteria. (algorithm, seed) pairs run independently and reproducibly.
struct ExperimentSpec {
  std::filesystem::path benchmark;
  std::vector<AlgorithmSpec> algorithms;
  std::vector<std::uint64_t> seeds;
  ExitCriteria exit_criteria;

  static ExperimentSpec from_json(const nlohmann::json& j);
  static ExperimentSpec load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  /// Hash over the semantically meaningful fields; guards resumed output
  /// directories against a different spec.
  std::string config_hash() const;

  void validate() const;
};

EngineConfig engine_config_from_json(const nlohmann::json& j);
nlohmann::json engine_config_to_json(const EngineConfig& cfg);

struct RunSummary {
  std::string algorithm;  // spec name (label)
  std::uint64_t seed = 0;
  std::string file;
  std::string status;
  std::uint64_t events = 0;
  double best_y = 0.0;
  double total_sim_time = 0.0;
  double total_train_time = 0.0;
  int fit_fallbacks = 0;
  std::vector<std::string> warnings;
};

struct ExperimentResult {
  std::vector<RunSummary> runs;  // sorted by (algorithm, seed)
  int executed = 0;
  int skipped = 0;
  std::filesystem::path manifest_path;
};

/// Runs every (algorithm, seed) pair, writing one JSON-lines trace file per
/// pair plus a manifest. Pairs already recorded in the manifest are skipped,
/// so interrupted experiments resume. Throws if the directory holds a
/// manifest with a different config hash.
ExperimentResult run_experiment(const ExperimentSpec& spec,
                                const std::filesystem::path& out_dir, int workers = 1);

void write_trace_file(const std::filesystem::path& path, const RunResult& result);
Trace load_trace_file(const std::filesystem::path& path, std::uint64_t seed);

/// Reads a run directory back: manifest plus all traces grouped by the
/// algorithm label.
struct LoadedRun {
  ExperimentSpec spec;  // benchmark + exit criteria recovered from the manifest
  std::map<std::string, std::vector<Trace>> traces;
};
LoadedRun load_run_dir(const std::filesystem::path& dir);

struct ReportOptions {
  double p_easy = 0.01;
  double p_difficult = 0.0005;
  double p_extreme = 0.0002;
  int grid_points = 128;
};

/// Emits metrics.csv / metrics.json (success rates, expected times, rank
/// aggregates) and regret_series.csv (time, median regret, quartiles, mean)
/// for one or more run directories; each directory is one task.
void write_report(const std::vector<std::filesystem::path>& run_dirs,
                  const std::filesystem::path& out_dir, const ReportOptions& options = {});

// 64-bit FNV-1a, hex-encoded.
std::string fnv1a64_hex(const std::string& data);

}  // namespace bbea
