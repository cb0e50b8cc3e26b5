#pragma once

#include <string>
#include <vector>

#include "bbea/space.hpp"

namespace bbea {

/// One completed (or early-terminated) evaluation.
struct Observation {
  Config config;
  std::string key;
  std::vector<double> encoded;
  double y = 0.0;              // recorded objective (validation loss)
  std::vector<double> curve;   // per-epoch losses actually executed
  double charged_time = 0.0;   // simulated seconds charged for this evaluation
  bool terminated_early = false;
  bool substituted = false;    // result taken from the nearest valid record
};

using History = std::vector<Observation>;

}  // namespace bbea
