#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "bbea/rng.hpp"

namespace bbea {

enum class ParamGroup { architecture, hyperparameter };

struct CategoricalKind {
  std::vector<std::string> values;
};
struct DiscreteKind {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  std::int64_t step = 1;
};
struct ContinuousKind {
  double lo = 0.0;
  double hi = 1.0;
};

/// One search dimension: categorical, discrete grid, or continuous interval.
struct ParamDim {
  std::string name;
  std::variant<CategoricalKind, DiscreteKind, ContinuousKind> kind;
  ParamGroup group = ParamGroup::hyperparameter;

  bool is_categorical() const { return std::holds_alternative<CategoricalKind>(kind); }
  bool is_discrete() const { return std::holds_alternative<DiscreteKind>(kind); }
  bool is_continuous() const { return std::holds_alternative<ContinuousKind>(kind); }

  // Number of distinct values; 0 means uncountable (continuous).
  std::uint64_t domain_size() const;
};

// Per-dimension assignment. Categorical dims store the category index,
// discrete dims the grid value, continuous dims the real value.
using ParamValue = std::variant<std::int64_t, double>;

struct Config {
  std::vector<ParamValue> values;

  bool operator==(const Config&) const = default;
};

// Declares which categorical dims form a cell graph for the adjacency-matrix
// encoding: `edges` lists binary dims in row-major upper-triangle order,
// `ops` lists node-operation dims encoded one-hot after the edge bits.
struct CellLayout {
  std::vector<std::string> edges;
  std::vector<std::string> ops;
};

enum class Encoding { one_hot, adjacency_matrix };

/// Immutable mixed-type search space with a fixed vector encoding.
class SearchSpace {
 public:
  SearchSpace(std::vector<ParamDim> dims, Encoding encoding = Encoding::one_hot,
              std::optional<CellLayout> cell = std::nullopt);

  const std::vector<ParamDim>& dims() const { return dims_; }
  Encoding encoding() const { return encoding_; }
  const std::optional<CellLayout>& cell() const { return cell_; }

  std::size_t encoded_width() const { return encoded_width_; }
  bool has_continuous() const { return has_continuous_; }

  // Total number of configurations; nullopt for continuous spaces or when the
  // product overflows 2^63.
  std::optional<std::uint64_t> cardinality() const { return cardinality_; }

  /// Independent uniform draw per dimension.
  Config sample_uniform(Rng& rng) const;

  /// Fixed-length real vector for surrogate models. One-hot expands
  /// categoricals; discrete/continuous map to [0,1]; the adjacency-matrix
  /// encoding emits edge bits then one-hot op labels then remaining dims.
  std::vector<double> encode(const Config& config) const;

  /// Resamples one uniformly chosen mutable dimension from its full domain
  /// (categorical and discrete draws exclude the current value). Spaces with
  /// no mutable dimension return the parent unchanged.
  Config mutate(const Config& parent, Rng& rng) const;

  // Canonical string form (a JSON array of values); used as table key and in
  // trace files. Round-trips through config_from_key.
  std::string key(const Config& config) const;
  Config config_from_key(const std::string& key) const;

  // Mixed-radix indexing of finite spaces; earlier dims vary slowest.
  Config config_at(std::uint64_t index) const;
  std::vector<Config> enumerate_all() const;

  /// Throws std::invalid_argument when the config does not match the space.
  void check(const Config& config) const;

  static SearchSpace from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

 private:
  std::vector<ParamDim> dims_;
  Encoding encoding_;
  std::optional<CellLayout> cell_;
  std::size_t encoded_width_ = 0;
  bool has_continuous_ = false;
  std::optional<std::uint64_t> cardinality_;
  std::vector<std::size_t> mutable_dims_;
  // Dim order used by encode(): cell edges, cell ops, then the rest.
  std::vector<std::size_t> encode_order_;
  std::vector<bool> is_edge_dim_;
};

// Count of differing non-continuous dims plus Euclidean distance over
// normalized continuous dims; the substitution metric for missing records.
double config_distance(const SearchSpace& space, const Config& a, const Config& b);

// Number of differing dims (any kind); test helper for mutation invariants.
int hamming_distance(const Config& a, const Config& b);

}  // namespace bbea
