#include "bbea/acquisition.hpp"

#include <cmath>
#include <stdexcept>

namespace bbea {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

}  // namespace

double acq_value(const AcquisitionKind& kind, double mean, double var, double y_best) {
  if (var < 0.0) throw std::invalid_argument("acquisition variance must be >= 0");
  const double sigma = std::sqrt(var);
  const double gap = y_best - kind.epsilon - mean;
  switch (kind.kind) {
    case AcqKind::ei:
      if (sigma == 0.0) return std::max(gap, 0.0);
      {
        const double z = gap / sigma;
        return sigma * (z * normal_cdf(z) + normal_pdf(z));
      }
    case AcqKind::pi:
      if (sigma == 0.0) return gap > 0.0 ? 1.0 : 0.0;
      return normal_cdf(gap / sigma);
    case AcqKind::ucb:
      return -mean + kind.kappa * sigma;
  }
  return 0.0;
}

double score_samples(const AcquisitionKind& kind, const std::vector<MeanVar>& posteriors,
                     double y_best) {
  if (posteriors.empty()) throw std::invalid_argument("score needs at least one posterior");
  double s = 0.0;
  for (const auto& mv : posteriors) s += acq_value(kind, mv.mean, mv.var, y_best);
  return s / static_cast<double>(posteriors.size());
}

SurrogatePool default_pool(double epsilon, double kappa) {
  SurrogatePool pool;
  const std::pair<AcqKind, const char*> acqs[] = {
      {AcqKind::ei, "ei"}, {AcqKind::pi, "pi"}, {AcqKind::ucb, "ucb"}};
  for (auto family : {ModelFamily::gp, ModelFamily::rf}) {
    for (const auto& [kind, suffix] : acqs) {
      SurrogateSpec spec;
      spec.family = family;
      spec.acquisition = {kind, epsilon, kappa};
      spec.name = std::string(family == ModelFamily::gp ? "gp_" : "rf_") + suffix;
      pool.push_back(std::move(spec));
    }
  }
  return pool;
}

std::size_t pick_first_index(std::size_t pool_size, std::uint64_t n) {
  if (pool_size == 0) throw std::invalid_argument("empty surrogate pool");
  return static_cast<std::size_t>(n % pool_size);
}

std::size_t pick_second_index(std::size_t pool_size, std::size_t first, Rng& rng) {
  if (pool_size < 2) throw std::invalid_argument("pick_second needs a pool of >= 2");
  if (first >= pool_size) throw std::invalid_argument("first index out of range");
  auto pick = static_cast<std::size_t>(rand_below(rng, pool_size - 1));
  if (pick >= first) ++pick;
  return pick;
}

}  // namespace bbea
