#include "bbea/termination.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bbea {

double interpolated_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  if (values.size() == 1) return values[0];
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  if (values[lo] == values[hi]) return values[lo];  // also covers +inf plateaus
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

bool should_terminate(const TerminationRule& rule, const std::vector<double>& curve_so_far,
                      int epoch, const std::vector<std::vector<double>>& completed_curves) {
  if (!rule.enabled()) return false;
  if (completed_curves.size() < static_cast<std::size_t>(rule.warmup)) return false;
  if (epoch < 1 || static_cast<std::size_t>(epoch) > curve_so_far.size())
    throw std::invalid_argument("checkpoint epoch outside the observed curve");

  std::vector<double> at_epoch;
  at_epoch.reserve(completed_curves.size());
  for (const auto& curve : completed_curves) {
    if (static_cast<std::size_t>(epoch) > curve.size())
      throw std::invalid_argument("completed curve shorter than checkpoint epoch");
    at_epoch.push_back(curve[static_cast<std::size_t>(epoch - 1)]);
  }
  const double threshold = interpolated_quantile(std::move(at_epoch), 1.0 - rule.beta);
  return curve_so_far[static_cast<std::size_t>(epoch - 1)] > threshold;
}

}  // namespace bbea
