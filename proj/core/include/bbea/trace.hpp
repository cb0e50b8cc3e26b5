#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bbea {

enum class RunStatus { budget_exhausted, target_achieved, space_exhausted, evals_exhausted };

std::string to_string(RunStatus status);

struct TraceEvent {
  std::uint64_t n = 0;  // evaluation ordinal, 1-based
  double sim_time = 0.0;
  double y = 0.0;
  std::string config_key;
  bool terminated_early = false;
  bool substituted = false;
};

/// Timeline of one run as read back from a trace file.
struct Trace {
  std::uint64_t seed = 0;
  std::vector<TraceEvent> events;
};

}  // namespace bbea
