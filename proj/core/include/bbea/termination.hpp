#pragma once

#include <vector>

namespace bbea {

/// Conservative early-termination rule: at checkpoint epochs, a run whose
/// intermediate loss is strictly worse than the (1 - beta) quantile of the
/// completed runs' losses at the same epoch is stopped. beta = 0 disables
/// the rule; nothing terminates until `warmup` full runs have completed.
struct TerminationRule {
  double beta = 0.0;
  std::vector<double> checkpoint_fractions = {0.5, 0.75};
  int warmup = 10;

  bool enabled() const { return beta > 0.0; }
};

// Quantile with linear interpolation between order statistics (the rank
// p * (n - 1) convention). Values need not be sorted.
double interpolated_quantile(std::vector<double> values, double p);

/// Decision at checkpoint epoch e (1-indexed); curve_so_far holds losses for
/// epochs 1..e, completed_curves the full curves of non-terminated runs.
bool should_terminate(const TerminationRule& rule, const std::vector<double>& curve_so_far,
                      int epoch, const std::vector<std::vector<double>>& completed_curves);

}  // namespace bbea
