#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bbea/acquisition.hpp"
#include "bbea/benchmark_table.hpp"
#include "bbea/gp.hpp"
#include "bbea/observation.hpp"
#include "bbea/random_forest.hpp"
#include "bbea/rng.hpp"
#include "bbea/space.hpp"
#include "bbea/termination.hpp"
#include "bbea/trace.hpp"
#include "bbea/transform.hpp"

namespace bbea {

struct EngineSwitches {
  bool saea = true;              // off: plain single-model gp_ei optimization
  bool module_a = true;          // off: population is uniform random
  bool module_b = true;          // off: candidates are the top-M of the population
  bool module_c = true;          // off: uniform random pick from the candidates
  bool input_warping = true;     // off: warp pinned to identity
  bool output_transform = true;  // off: standardization only
  bool early_termination = true;
};

enum class OverheadMode {
  none,     // simulated clock charges evaluation time only (reproducible)
  measured  // adds the real elapsed modeling/selection time per iteration
};

struct EngineConfig {
  int k = 10;
  int m = 10;
  double mutation_prob = 0.5;
  std::uint64_t pool_cap = 20000;   // candidate-set cap for the populate step
  std::size_t subsample_cap = 200;  // surrogate fitting set cap
  int n_mc = 10;                    // GP hyperparameter samples
  double acq_epsilon = 1e-4;
  double ucb_kappa = 2.0;
  EngineSwitches switches;
  TerminationRule termination;  // applied when switches.early_termination
  OverheadMode overhead = OverheadMode::none;
  // Replaces the canonical six-model pool; ablation/testing knob.
  std::optional<SurrogatePool> pool_override;

  void validate() const;
};

struct ExitCriteria {
  enum class Mode { fixed_budget, fixed_target };
  Mode mode = Mode::fixed_budget;
  double target = 0.0;  // absolute objective value, fixed_target only
  double t_max = 0.0;   // simulated seconds
  std::uint64_t max_evals = 0;  // extra cap on evaluations; 0 = unlimited

  void validate() const;
};

struct RunResult {
  std::string algorithm;
  std::uint64_t seed = 0;
  std::vector<TraceEvent> events;
  RunStatus status = RunStatus::budget_exhausted;
  double total_sim_time = 0.0;
  double total_train_time = 0.0;  // charged evaluation time, overhead excluded
  double best_y = std::numeric_limits<double>::infinity();
  int fit_fallbacks = 0;
  std::vector<std::string> warnings;
  History history;
};

// ---- Module-level operations (the run loop composes these; exposed so the
// ---- tests can drive each stage in isolation).

/// Per-iteration modeling state shared by the populate and select steps:
/// the (subsampled) fit set, the fitted output transform, the transformed
/// targets, and the transformed incumbent.
struct FitContext {
  std::vector<std::vector<double>> X;
  std::vector<double> z;
  PowerTransform transform;
  double y_best = std::numeric_limits<double>::infinity();
};

FitContext make_fit_context(const History& history, const EngineConfig& cfg,
                            Rng& subsample_rng);

/// Candidate pool for the populate step: the whole finite space when it fits
/// under pool_cap, otherwise pool_cap uniform samples; already-evaluated
/// configs are dropped while at least k unevaluated ones remain.
std::vector<Config> build_candidate_pool(const SearchSpace& space, const History& history,
                                         const EngineConfig& cfg, Rng& pool_rng);

using FittedModel = std::variant<FittedGp, FittedRf>;

FittedModel fit_model(const SurrogateSpec& spec, const FitContext& ctx, const EngineConfig& cfg,
                      Rng& fit_rng);

/// Acquisition score per candidate; GP scores marginalize over the hyper
/// samples. Throws std::invalid_argument on family mismatch.
std::vector<double> score_candidates(const SurrogateSpec& spec, const FittedModel& model,
                                     const std::vector<std::vector<double>>& encoded,
                                     double y_best);

/// Top-k configs of the pool ranked by the first surrogate; falls back to a
/// uniform subset when fitting fails (fell_back reports it).
std::vector<Config> module_a_populate(const std::vector<Config>& pool, const SearchSpace& space,
                                      const FitContext& ctx, const SurrogateSpec& first,
                                      const EngineConfig& cfg, Rng& fit_rng, Rng& fallback_rng,
                                      bool* fell_back = nullptr);

/// m parents drawn without replacement, each mutated with mutation_prob;
/// mutated offspring colliding with evaluated configs are re-mutated (up to
/// 10 retries) on finite spaces.
std::vector<Config> module_b_vary(const std::vector<Config>& population,
                                  const SearchSpace& space,
                                  const std::vector<std::string>& evaluated_keys,
                                  const EngineConfig& cfg, Rng& mutate_rng);

/// Argmax of the second surrogate over the candidates (ties to the lowest
/// index); uniform random fallback when fitting fails.
Config module_c_select(const std::vector<Config>& candidates, const SearchSpace& space,
                       const FitContext& ctx, const SurrogateSpec& second,
                       const EngineConfig& cfg, Rng& fit_rng, Rng& fallback_rng,
                       bool* fell_back = nullptr);

// ---- Full optimizers.

RunResult run_b2ea(const BenchmarkTable& table, const EngineConfig& cfg,
                   const ExitCriteria& exit_criteria, std::uint64_t seed);

/// Single-model gp_ei optimization proposing the acquisition argmax over the
/// candidate pool; shares the b2ea fitting rules and per-iteration streams.
RunResult run_single_bo(const BenchmarkTable& table, const EngineConfig& cfg,
                        const ExitCriteria& exit_criteria, std::uint64_t seed);

/// Uniform random search; sampling is without replacement on finite spaces.
RunResult run_rs(const BenchmarkTable& table, const ExitCriteria& exit_criteria,
                 std::uint64_t seed);

/// Regularized evolution: population 10, tournament sample 3, mutate the
/// winner, evict the oldest.
RunResult run_rea(const BenchmarkTable& table, const ExitCriteria& exit_criteria,
                  std::uint64_t seed, int population_size = 10, int tournament_size = 3);

/// Dispatch by algorithm name: "b2ea", "gp_bo", "rs", "rea".
RunResult run_algorithm(const std::string& name, const BenchmarkTable& table,
                        const EngineConfig& cfg, const ExitCriteria& exit_criteria,
                        std::uint64_t seed);

}  // namespace bbea
