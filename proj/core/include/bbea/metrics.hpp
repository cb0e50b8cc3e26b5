#pragma once

#include <map>
#include <string>
#include <vector>

#include "bbea/benchmark_table.hpp"
#include "bbea/trace.hpp"

namespace bbea {

/// Best observed value by simulated time t; +infinity before the first event.
double best_so_far_at(const Trace& trace, double t);

/// |optimum - best-so-far at t|; +infinity before the first event.
double intermediate_regret(const Trace& trace, double optimum, double t);

/// First simulated time at which some observation reaches y <= target;
/// +infinity when the run never does.
double first_achievement_time(const Trace& trace, double target);

struct TargetSet {
  double optimum = 0.0;
  double c_easy = 0.0;       // absolute loss targets, easy >= difficult >= extreme
  double c_difficult = 0.0;
  double c_extreme = 0.0;

  double regret_easy() const { return c_easy - optimum; }
  double regret_difficult() const { return c_difficult - optimum; }
  double regret_extreme() const { return c_extreme - optimum; }
};

/// Loss of the rank ceil(p * N) record (1-indexed, floored at rank 1) among
/// the valid records sorted by best loss.
double target_at_percentile(const std::vector<double>& sorted_best_losses, double percentile);

/// The easy / difficult / extremely-difficult targets at the top 1%, 0.05%
/// and 0.02% of the table's performance distribution.
TargetSet derive_targets(const BenchmarkTable& table, double p_easy = 0.01,
                         double p_difficult = 0.0005, double p_extreme = 0.0002);

/// Fraction of traces achieving the target by time t.
double success_rate(const std::vector<Trace>& traces, double target, double t);

/// Failure-adjusted expected time to target:
/// (p * E_s + (1 - p) * t_max) / p with p the success rate within t_max and
/// E_s the mean time of the successful runs; +infinity when p = 0.
double expected_time(const std::vector<Trace>& traces, double target, double t_max);

/// Smallest time at which the success rate reaches `level`; +infinity when
/// the traces never do within t_max.
double time_to_success_rate(const std::vector<Trace>& traces, double target, double level,
                            double t_max);

/// Budget for success-rate reporting: the earliest time any algorithm's
/// success rate reaches 99%, falling back to t_max.
double derive_budget(const std::map<std::string, std::vector<Trace>>& traces_by_algorithm,
                     double target, double t_max, double level = 0.99);

// Ranks with ties averaged; 1 = best.
std::vector<double> rank_values(const std::vector<double>& values, bool lower_is_better);

struct AggregateStats {
  double mean_value = 0.0;
  double std_value = 0.0;
  double mean_rank = 0.0;
  double std_rank = 0.0;
};

/// Cross-task aggregation of one metric: per-task ranks (ties averaged) and
/// mean/std of values and ranks per algorithm. All tasks must cover the same
/// algorithm set.
std::map<std::string, AggregateStats> aggregate(
    const std::map<std::string, std::map<std::string, double>>& values_by_task,
    bool lower_is_better);

struct RegretSeries {
  std::vector<double> times;
  std::vector<double> median;
  std::vector<double> q25;
  std::vector<double> q75;
  std::vector<double> mean;
};

std::vector<double> log_time_grid(double t_lo, double t_hi, int n_points);

/// Regret-vs-time distribution across traces on a fixed time grid; the
/// plot-ready series behind the report output.
RegretSeries regret_series(const std::vector<Trace>& traces, double optimum,
                           const std::vector<double>& time_grid);

}  // namespace bbea
