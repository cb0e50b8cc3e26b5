#pragma once

#include <stdexcept>
#include <string>

namespace bbea {

// Malformed input file (search space, benchmark table, run spec).
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Surrogate fitting failed beyond recovery (e.g. kernel matrix stayed
// singular after jitter escalation). Callers fall back to random choices.
class ModelFitError : public std::runtime_error {
 public:
  explicit ModelFitError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bbea
