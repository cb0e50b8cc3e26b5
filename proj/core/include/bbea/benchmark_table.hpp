#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "bbea/observation.hpp"
#include "bbea/rng.hpp"
#include "bbea/space.hpp"
#include "bbea/termination.hpp"

namespace bbea {

struct BenchRecord {
  Config config;
  std::vector<double> curve;  // length max_epochs when valid
  double train_time = 0.0;    // seconds for a full training run
  bool valid = true;

  double best_loss() const;  // min over the curve
};

/// Simulated wall clock; charged evaluation time and optimizer overhead
/// accumulate here.
class SimClock {
 public:
  double now() const { return seconds_; }
  void advance(double delta);

 private:
  double seconds_ = 0.0;
};

/// Pre-evaluated lookup-table objective. Stored as JSON lines: a header
/// carrying the space and max_epochs, then one record per line.
class BenchmarkTable {
 public:
  BenchmarkTable(SearchSpace space, int max_epochs,
                 std::map<std::string, BenchRecord> records);

  static BenchmarkTable load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;  // temp-and-rename

  const SearchSpace& space() const { return space_; }
  int max_epochs() const { return max_epochs_; }
  const std::map<std::string, BenchRecord>& records() const { return records_; }
  std::size_t n_valid() const { return n_valid_; }

  const std::string& optimum_key() const { return optimum_key_; }
  double optimum_value() const { return optimum_value_; }

  /// Sorted best losses of all valid records; target derivation input.
  std::vector<double> sorted_best_losses() const;

 private:
  SearchSpace space_;
  int max_epochs_;
  std::map<std::string, BenchRecord> records_;
  std::size_t n_valid_ = 0;
  std::string optimum_key_;
  double optimum_value_ = 0.0;
};

/// Looks up the config (invalid or missing records fail over to the nearest
/// valid record by config distance, ties to the lowest key), walks the
/// early-termination checkpoints, and advances the clock by the charged time
/// plus the caller's optimizer overhead.
Observation evaluate(const BenchmarkTable& table, SimClock& clock, const Config& config,
                     const TerminationRule& rule,
                     const std::vector<std::vector<double>>& completed_curves,
                     double overhead_seconds = 0.0);

struct SyntheticOptions {
  int max_epochs = 100;
  double noise_scale = 0.04;      // iid perturbation of the per-config loss
  double loss_floor = 0.05;       // best losses land near this value
  double loss_span = 0.90;
  double time_lo = 60.0;          // train_time log-uniform range, seconds
  double time_hi = 600.0;
};

/// Deterministic synthetic table over a finite space: a smooth multimodal
/// base loss plus per-config noise, exponentially decaying curves, and
/// log-uniform training times.
BenchmarkTable generate_synthetic(const SearchSpace& space, std::uint64_t n_configs,
                                  std::uint64_t seed, const SyntheticOptions& options = {});

}  // namespace bbea
