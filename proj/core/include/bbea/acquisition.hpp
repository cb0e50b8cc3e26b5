#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bbea/prediction.hpp"
#include "bbea/rng.hpp"

namespace bbea {

enum class AcqKind { ei, pi, ucb };
enum class ModelFamily { gp, rf };

struct AcquisitionKind {
  AcqKind kind = AcqKind::ei;
  double epsilon = 1e-4;  // improvement margin subtracted from the incumbent
  double kappa = 2.0;     // ucb only
};

/// Acquisition value under the minimization convention: y_best is the lowest
/// transformed observation, larger scores are better. With z =
/// (y_best - eps - mean)/sigma: EI = sigma*(z*Phi(z) + phi(z)), PI = Phi(z),
/// UCB = -mean + kappa*sigma.
double acq_value(const AcquisitionKind& kind, double mean, double var, double y_best);

// Monte Carlo marginalization: mean of acq_value over per-hyper-sample
// posteriors. A single-entry list reduces to acq_value exactly.
double score_samples(const AcquisitionKind& kind, const std::vector<MeanVar>& posteriors,
                     double y_best);

struct SurrogateSpec {
  ModelFamily family = ModelFamily::gp;
  AcquisitionKind acquisition;
  std::string name;  // e.g. "gp_ei"
};

using SurrogatePool = std::vector<SurrogateSpec>;

/// The six (model x acquisition) combinations, in fixed order:
/// gp_ei, gp_pi, gp_ucb, rf_ei, rf_pi, rf_ucb.
SurrogatePool default_pool(double epsilon = 1e-4, double kappa = 2.0);

/// Round-robin choice for the populate step: 0-based index mod(n, B)
/// (1-indexed entry mod(n, B) + 1) for iteration n >= 1.
std::size_t pick_first_index(std::size_t pool_size, std::uint64_t n);

/// Uniform choice among the entries other than `first`.
std::size_t pick_second_index(std::size_t pool_size, std::size_t first, Rng& rng);

}  // namespace bbea
