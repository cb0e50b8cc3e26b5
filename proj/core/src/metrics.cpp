#include "bbea/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bbea/termination.hpp"

namespace bbea {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v, double m) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}
}  // namespace

double best_so_far_at(const Trace& trace, double t) {
  double best = kInf;
  for (const auto& e : trace.events) {
    if (e.sim_time > t) break;
    best = std::min(best, e.y);
  }
  return best;
}

double intermediate_regret(const Trace& trace, double optimum, double t) {
  const double best = best_so_far_at(trace, t);
  if (best == kInf) return kInf;
  return std::abs(optimum - best);
}

double first_achievement_time(const Trace& trace, double target) {
  for (const auto& e : trace.events)
    if (e.y <= target) return e.sim_time;
  return kInf;
}

double target_at_percentile(const std::vector<double>& sorted_best_losses, double percentile) {
  if (sorted_best_losses.empty()) throw std::invalid_argument("no losses to rank");
  const auto n = static_cast<double>(sorted_best_losses.size());
  auto rank = static_cast<std::size_t>(std::ceil(percentile * n));
  rank = std::max<std::size_t>(rank, 1);
  rank = std::min<std::size_t>(rank, sorted_best_losses.size());
  return sorted_best_losses[rank - 1];
}

TargetSet derive_targets(const BenchmarkTable& table, double p_easy, double p_difficult,
                         double p_extreme) {
  const auto losses = table.sorted_best_losses();
  TargetSet targets;
  targets.optimum = table.optimum_value();
  targets.c_easy = target_at_percentile(losses, p_easy);
  targets.c_difficult = target_at_percentile(losses, p_difficult);
  targets.c_extreme = target_at_percentile(losses, p_extreme);
  return targets;
}

double success_rate(const std::vector<Trace>& traces, double target, double t) {
  if (traces.empty()) throw std::invalid_argument("success_rate needs >= 1 trace");
  std::size_t hits = 0;
  for (const auto& trace : traces)
    if (first_achievement_time(trace, target) <= t) ++hits;
  return static_cast<double>(hits) / static_cast<double>(traces.size());
}

double expected_time(const std::vector<Trace>& traces, double target, double t_max) {
  if (traces.empty()) throw std::invalid_argument("expected_time needs >= 1 trace");
  std::vector<double> successes;
  for (const auto& trace : traces) {
    const double tau = first_achievement_time(trace, target);
    if (tau <= t_max) successes.push_back(tau);
  }
  if (successes.empty()) return kInf;
  const double p = static_cast<double>(successes.size()) / static_cast<double>(traces.size());
  const double expected_success = mean_of(successes);
  return (p * expected_success + (1.0 - p) * t_max) / p;
}

double time_to_success_rate(const std::vector<Trace>& traces, double target, double level,
                            double t_max) {
  if (traces.empty()) throw std::invalid_argument("time_to_success_rate needs >= 1 trace");
  std::vector<double> taus;
  for (const auto& trace : traces) {
    const double tau = first_achievement_time(trace, target);
    if (tau <= t_max) taus.push_back(tau);
  }
  const auto need =
      static_cast<std::size_t>(std::ceil(level * static_cast<double>(traces.size())));
  if (taus.size() < need || need == 0) return kInf;
  std::sort(taus.begin(), taus.end());
  return taus[need - 1];
}

double derive_budget(const std::map<std::string, std::vector<Trace>>& traces_by_algorithm,
                     double target, double t_max, double level) {
  double best = kInf;
  for (const auto& [name, traces] : traces_by_algorithm)
    best = std::min(best, time_to_success_rate(traces, target, level, t_max));
  return best == kInf ? t_max : best;
}

std::vector<double> rank_values(const std::vector<double>& values, bool lower_is_better) {
  const auto n = values.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return lower_is_better ? values[a] < values[b] : values[a] > values[b];
  });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // ties share the mean rank
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

std::map<std::string, AggregateStats> aggregate(
    const std::map<std::string, std::map<std::string, double>>& values_by_task,
    bool lower_is_better) {
  if (values_by_task.empty()) throw std::invalid_argument("aggregate needs >= 1 task");

  std::vector<std::string> algorithms;
  for (const auto& [name, value] : values_by_task.begin()->second)
    algorithms.push_back(name);
  for (const auto& [task, values] : values_by_task) {
    if (values.size() != algorithms.size())
      throw std::invalid_argument("task '" + task + "' has a mismatched algorithm set");
    for (const auto& name : algorithms)
      if (!values.count(name))
        throw std::invalid_argument("task '" + task + "' is missing algorithm '" + name + "'");
  }

  std::map<std::string, std::vector<double>> value_lists, rank_lists;
  for (const auto& [task, values] : values_by_task) {
    std::vector<double> row;
    row.reserve(algorithms.size());
    for (const auto& name : algorithms) row.push_back(values.at(name));
    const auto ranks = rank_values(row, lower_is_better);
    for (std::size_t i = 0; i < algorithms.size(); ++i) {
      value_lists[algorithms[i]].push_back(row[i]);
      rank_lists[algorithms[i]].push_back(ranks[i]);
    }
  }

  std::map<std::string, AggregateStats> out;
  for (const auto& name : algorithms) {
    AggregateStats stats;
    stats.mean_value = mean_of(value_lists[name]);
    stats.std_value = std_of(value_lists[name], stats.mean_value);
    stats.mean_rank = mean_of(rank_lists[name]);
    stats.std_rank = std_of(rank_lists[name], stats.mean_rank);
    out[name] = stats;
  }
  return out;
}

std::vector<double> log_time_grid(double t_lo, double t_hi, int n_points) {
  if (!(t_lo > 0.0) || !(t_hi > t_lo) || n_points < 2)
    throw std::invalid_argument("log grid needs 0 < t_lo < t_hi and >= 2 points");
  std::vector<double> grid(static_cast<std::size_t>(n_points));
  const double ratio = std::log(t_hi / t_lo) / static_cast<double>(n_points - 1);
  for (int i = 0; i < n_points; ++i)
    grid[static_cast<std::size_t>(i)] = t_lo * std::exp(ratio * i);
  grid.back() = t_hi;
  return grid;
}

RegretSeries regret_series(const std::vector<Trace>& traces, double optimum,
                           const std::vector<double>& time_grid) {
  RegretSeries series;
  series.times = time_grid;
  for (double t : time_grid) {
    std::vector<double> regrets;
    regrets.reserve(traces.size());
    for (const auto& trace : traces) regrets.push_back(intermediate_regret(trace, optimum, t));
    series.median.push_back(interpolated_quantile(regrets, 0.5));
    series.q25.push_back(interpolated_quantile(regrets, 0.25));
    series.q75.push_back(interpolated_quantile(regrets, 0.75));
    series.mean.push_back(mean_of(regrets));
  }
  return series;
}

}  // namespace bbea
