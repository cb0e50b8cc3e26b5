#include "bbea/space.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace bbea {

namespace {

using json = nlohmann::json;

std::int64_t discrete_count(const DiscreteKind& d) {
  return (d.hi - d.lo) / d.step + 1;
}

void validate_dim(const ParamDim& dim) {
  if (dim.name.empty()) throw std::invalid_argument("dimension name must be non-empty");
  if (const auto* c = std::get_if<CategoricalKind>(&dim.kind)) {
    if (c->values.empty())
      throw std::invalid_argument("categorical dim '" + dim.name + "' has no values");
    std::set<std::string> uniq(c->values.begin(), c->values.end());
    if (uniq.size() != c->values.size())
      throw std::invalid_argument("categorical dim '" + dim.name + "' has duplicate values");
  } else if (const auto* d = std::get_if<DiscreteKind>(&dim.kind)) {
    if (d->lo >= d->hi)
      throw std::invalid_argument("discrete dim '" + dim.name + "' needs lo < hi");
    if (d->step <= 0)
      throw std::invalid_argument("discrete dim '" + dim.name + "' needs step > 0");
    if ((d->hi - d->lo) % d->step != 0)
      throw std::invalid_argument("discrete dim '" + dim.name + "' range not divisible by step");
  } else {
    const auto& c = std::get<ContinuousKind>(dim.kind);
    if (!(c.lo < c.hi))
      throw std::invalid_argument("continuous dim '" + dim.name + "' needs lo < hi");
  }
}

}  // namespace

std::uint64_t ParamDim::domain_size() const {
  if (const auto* c = std::get_if<CategoricalKind>(&kind)) return c->values.size();
  if (const auto* d = std::get_if<DiscreteKind>(&kind))
    return static_cast<std::uint64_t>(discrete_count(*d));
  return 0;
}

SearchSpace::SearchSpace(std::vector<ParamDim> dims, Encoding encoding,
                         std::optional<CellLayout> cell)
    : dims_(std::move(dims)), encoding_(encoding), cell_(std::move(cell)) {
  if (dims_.empty()) throw std::invalid_argument("search space needs at least one dimension");

  std::set<std::string> names;
  for (const auto& dim : dims_) {
    validate_dim(dim);
    if (!names.insert(dim.name).second)
      throw std::invalid_argument("duplicate dimension name '" + dim.name + "'");
  }

  std::uint64_t card = 1;
  bool overflow = false;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    const auto& dim = dims_[i];
    if (dim.is_continuous()) {
      has_continuous_ = true;
    } else {
      const std::uint64_t n = dim.domain_size();
      if (card > (1ULL << 62) / n) overflow = true;
      card *= n;
      if (n > 1) mutable_dims_.push_back(i);
    }
    if (dim.is_continuous()) mutable_dims_.push_back(i);
  }
  if (!has_continuous_ && !overflow) cardinality_ = card;

  is_edge_dim_.assign(dims_.size(), false);
  if (encoding_ == Encoding::adjacency_matrix) {
    if (!cell_)
      throw std::invalid_argument("adjacency_matrix encoding requires a cell declaration");
    auto index_of = [&](const std::string& name) {
      for (std::size_t i = 0; i < dims_.size(); ++i)
        if (dims_[i].name == name) return i;
      throw std::invalid_argument("cell references unknown dim '" + name + "'");
    };
    std::vector<bool> in_cell(dims_.size(), false);
    for (const auto& name : cell_->edges) {
      const std::size_t i = index_of(name);
      if (!dims_[i].is_categorical() || dims_[i].domain_size() != 2)
        throw std::invalid_argument("edge dim '" + name + "' must be binary categorical");
      encode_order_.push_back(i);
      is_edge_dim_[i] = true;
      in_cell[i] = true;
    }
    for (const auto& name : cell_->ops) {
      const std::size_t i = index_of(name);
      if (!dims_[i].is_categorical())
        throw std::invalid_argument("op dim '" + name + "' must be categorical");
      if (in_cell[i]) throw std::invalid_argument("dim '" + name + "' listed twice in cell");
      encode_order_.push_back(i);
      in_cell[i] = true;
    }
    for (std::size_t i = 0; i < dims_.size(); ++i)
      if (!in_cell[i]) encode_order_.push_back(i);
  } else {
    if (cell_) throw std::invalid_argument("cell declaration requires adjacency_matrix encoding");
    for (std::size_t i = 0; i < dims_.size(); ++i) encode_order_.push_back(i);
  }

  encoded_width_ = 0;
  for (std::size_t i : encode_order_) {
    if (is_edge_dim_[i])
      encoded_width_ += 1;
    else if (dims_[i].is_categorical())
      encoded_width_ += dims_[i].domain_size();
    else
      encoded_width_ += 1;
  }
}

Config SearchSpace::sample_uniform(Rng& rng) const {
  Config c;
  c.values.reserve(dims_.size());
  for (const auto& dim : dims_) {
    if (const auto* cat = std::get_if<CategoricalKind>(&dim.kind)) {
      c.values.emplace_back(static_cast<std::int64_t>(rand_below(rng, cat->values.size())));
    } else if (const auto* d = std::get_if<DiscreteKind>(&dim.kind)) {
      const std::uint64_t n = static_cast<std::uint64_t>(discrete_count(*d));
      c.values.emplace_back(d->lo + static_cast<std::int64_t>(rand_below(rng, n)) * d->step);
    } else {
      const auto& cont = std::get<ContinuousKind>(dim.kind);
      c.values.emplace_back(rand_range(rng, cont.lo, cont.hi));
    }
  }
  return c;
}

void SearchSpace::check(const Config& config) const {
  if (config.values.size() != dims_.size())
    throw std::invalid_argument("config has wrong number of values");
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    const auto& dim = dims_[i];
    const auto& v = config.values[i];
    if (const auto* cat = std::get_if<CategoricalKind>(&dim.kind)) {
      const auto* idx = std::get_if<std::int64_t>(&v);
      if (!idx || *idx < 0 || static_cast<std::size_t>(*idx) >= cat->values.size())
        throw std::invalid_argument("bad categorical value for dim '" + dim.name + "'");
    } else if (const auto* d = std::get_if<DiscreteKind>(&dim.kind)) {
      const auto* val = std::get_if<std::int64_t>(&v);
      if (!val || *val < d->lo || *val > d->hi || (*val - d->lo) % d->step != 0)
        throw std::invalid_argument("bad discrete value for dim '" + dim.name + "'");
    } else {
      const auto& cont = std::get<ContinuousKind>(dim.kind);
      const auto* val = std::get_if<double>(&v);
      if (!val || !(*val >= cont.lo && *val <= cont.hi))
        throw std::invalid_argument("bad continuous value for dim '" + dim.name + "'");
    }
  }
}

std::vector<double> SearchSpace::encode(const Config& config) const {
  check(config);
  std::vector<double> out;
  out.reserve(encoded_width_);
  for (std::size_t i : encode_order_) {
    const auto& dim = dims_[i];
    const auto& v = config.values[i];
    if (is_edge_dim_[i]) {
      out.push_back(static_cast<double>(std::get<std::int64_t>(v)));
    } else if (const auto* cat = std::get_if<CategoricalKind>(&dim.kind)) {
      const auto idx = static_cast<std::size_t>(std::get<std::int64_t>(v));
      for (std::size_t k = 0; k < cat->values.size(); ++k)
        out.push_back(k == idx ? 1.0 : 0.0);
    } else if (const auto* d = std::get_if<DiscreteKind>(&dim.kind)) {
      out.push_back(static_cast<double>(std::get<std::int64_t>(v) - d->lo) /
                    static_cast<double>(d->hi - d->lo));
    } else {
      const auto& cont = std::get<ContinuousKind>(dim.kind);
      out.push_back((std::get<double>(v) - cont.lo) / (cont.hi - cont.lo));
    }
  }
  return out;
}

Config SearchSpace::mutate(const Config& parent, Rng& rng) const {
  check(parent);
  if (mutable_dims_.empty()) return parent;
  Config child = parent;
  const std::size_t i = mutable_dims_[rand_below(rng, mutable_dims_.size())];
  const auto& dim = dims_[i];
  if (const auto* cat = std::get_if<CategoricalKind>(&dim.kind)) {
    // Uniform over the other k-1 categories: skip past the current one.
    const auto cur = std::get<std::int64_t>(parent.values[i]);
    auto pick = static_cast<std::int64_t>(rand_below(rng, cat->values.size() - 1));
    if (pick >= cur) ++pick;
    child.values[i] = pick;
  } else if (const auto* d = std::get_if<DiscreteKind>(&dim.kind)) {
    const std::int64_t n = discrete_count(*d);
    const std::int64_t cur_idx = (std::get<std::int64_t>(parent.values[i]) - d->lo) / d->step;
    auto pick = static_cast<std::int64_t>(rand_below(rng, static_cast<std::uint64_t>(n - 1)));
    if (pick >= cur_idx) ++pick;
    child.values[i] = d->lo + pick * d->step;
  } else {
    const auto& cont = std::get<ContinuousKind>(dim.kind);
    child.values[i] = rand_range(rng, cont.lo, cont.hi);
  }
  return child;
}

std::string SearchSpace::key(const Config& config) const {
  check(config);
  json arr = json::array();
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    const auto& dim = dims_[i];
    if (const auto* cat = std::get_if<CategoricalKind>(&dim.kind)) {
      arr.push_back(cat->values[static_cast<std::size_t>(std::get<std::int64_t>(config.values[i]))]);
    } else if (dim.is_discrete()) {
      arr.push_back(std::get<std::int64_t>(config.values[i]));
    } else {
      arr.push_back(std::get<double>(config.values[i]));
    }
  }
  return arr.dump();
}

Config SearchSpace::config_from_key(const std::string& key) const {
  json arr;
  try {
    arr = json::parse(key);
  } catch (const json::parse_error&) {
    throw std::invalid_argument("config key is not valid JSON: " + key);
  }
  if (!arr.is_array() || arr.size() != dims_.size())
    throw std::invalid_argument("config key has wrong arity: " + key);
  Config c;
  c.values.reserve(dims_.size());
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    const auto& dim = dims_[i];
    const auto& cell = arr[i];
    if (const auto* cat = std::get_if<CategoricalKind>(&dim.kind)) {
      if (!cell.is_string())
        throw std::invalid_argument("dim '" + dim.name + "': expected category string");
      const auto it = std::find(cat->values.begin(), cat->values.end(), cell.get<std::string>());
      if (it == cat->values.end())
        throw std::invalid_argument("dim '" + dim.name + "': unknown category " + cell.dump());
      c.values.emplace_back(static_cast<std::int64_t>(it - cat->values.begin()));
    } else if (dim.is_discrete()) {
      if (!cell.is_number_integer())
        throw std::invalid_argument("dim '" + dim.name + "': expected integer");
      c.values.emplace_back(cell.get<std::int64_t>());
    } else {
      if (!cell.is_number())
        throw std::invalid_argument("dim '" + dim.name + "': expected number");
      c.values.emplace_back(cell.get<double>());
    }
  }
  check(c);
  return c;
}

Config SearchSpace::config_at(std::uint64_t index) const {
  if (!cardinality_) throw std::invalid_argument("config_at requires a finite space");
  if (index >= *cardinality_) throw std::invalid_argument("config index out of range");
  Config c;
  c.values.resize(dims_.size());
  // Earlier dims vary slowest.
  for (std::size_t i = dims_.size(); i-- > 0;) {
    const auto& dim = dims_[i];
    const std::uint64_t n = dim.domain_size();
    const std::uint64_t digit = index % n;
    index /= n;
    if (dim.is_categorical()) {
      c.values[i] = static_cast<std::int64_t>(digit);
    } else {
      const auto& d = std::get<DiscreteKind>(dim.kind);
      c.values[i] = d.lo + static_cast<std::int64_t>(digit) * d.step;
    }
  }
  return c;
}

std::vector<Config> SearchSpace::enumerate_all() const {
  if (!cardinality_) throw std::invalid_argument("enumerate_all requires a finite space");
  std::vector<Config> out;
  out.reserve(static_cast<std::size_t>(*cardinality_));
  for (std::uint64_t i = 0; i < *cardinality_; ++i) out.push_back(config_at(i));
  return out;
}

SearchSpace SearchSpace::from_json(const json& j) {
  if (!j.is_object() || !j.contains("dims") || !j["dims"].is_array())
    throw std::invalid_argument("space spec must be an object with a 'dims' array");

  std::vector<ParamDim> dims;
  for (const auto& d : j["dims"]) {
    ParamDim dim;
    dim.name = d.at("name").get<std::string>();
    const auto kind = d.at("kind").get<std::string>();
    if (kind == "categorical") {
      dim.kind = CategoricalKind{d.at("values").get<std::vector<std::string>>()};
    } else if (kind == "discrete") {
      dim.kind = DiscreteKind{d.at("lo").get<std::int64_t>(), d.at("hi").get<std::int64_t>(),
                              d.value("step", std::int64_t{1})};
    } else if (kind == "continuous") {
      dim.kind = ContinuousKind{d.at("lo").get<double>(), d.at("hi").get<double>()};
    } else {
      throw std::invalid_argument("dim '" + dim.name + "': unknown kind '" + kind + "'");
    }
    const auto group = d.value("group", std::string("hyperparameter"));
    if (group == "architecture") {
      dim.group = ParamGroup::architecture;
    } else if (group == "hyperparameter") {
      dim.group = ParamGroup::hyperparameter;
    } else {
      throw std::invalid_argument("dim '" + dim.name + "': unknown group '" + group + "'");
    }
    dims.push_back(std::move(dim));
  }

  const auto enc_name = j.value("encoding", std::string("one_hot"));
  Encoding enc;
  if (enc_name == "one_hot") {
    enc = Encoding::one_hot;
  } else if (enc_name == "adjacency_matrix") {
    enc = Encoding::adjacency_matrix;
  } else {
    throw std::invalid_argument("unknown encoding '" + enc_name + "'");
  }

  std::optional<CellLayout> cell;
  if (j.contains("cell")) {
    CellLayout layout;
    layout.edges = j["cell"].value("edges", std::vector<std::string>{});
    layout.ops = j["cell"].value("ops", std::vector<std::string>{});
    cell = std::move(layout);
  }
  return SearchSpace(std::move(dims), enc, std::move(cell));
}

nlohmann::json SearchSpace::to_json() const {
  json j;
  j["encoding"] = encoding_ == Encoding::one_hot ? "one_hot" : "adjacency_matrix";
  json dims = json::array();
  for (const auto& dim : dims_) {
    json d;
    d["name"] = dim.name;
    if (const auto* cat = std::get_if<CategoricalKind>(&dim.kind)) {
      d["kind"] = "categorical";
      d["values"] = cat->values;
    } else if (const auto* disc = std::get_if<DiscreteKind>(&dim.kind)) {
      d["kind"] = "discrete";
      d["lo"] = disc->lo;
      d["hi"] = disc->hi;
      d["step"] = disc->step;
    } else {
      const auto& cont = std::get<ContinuousKind>(dim.kind);
      d["kind"] = "continuous";
      d["lo"] = cont.lo;
      d["hi"] = cont.hi;
    }
    d["group"] = dim.group == ParamGroup::architecture ? "architecture" : "hyperparameter";
    dims.push_back(std::move(d));
  }
  j["dims"] = std::move(dims);
  if (cell_) {
    j["cell"] = json{{"edges", cell_->edges}, {"ops", cell_->ops}};
  }
  return j;
}

double config_distance(const SearchSpace& space, const Config& a, const Config& b) {
  double hamming = 0.0;
  double sq = 0.0;
  const auto& dims = space.dims();
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (const auto* cont = std::get_if<ContinuousKind>(&dims[i].kind)) {
      const double da = (std::get<double>(a.values[i]) - cont->lo) / (cont->hi - cont->lo);
      const double db = (std::get<double>(b.values[i]) - cont->lo) / (cont->hi - cont->lo);
      sq += (da - db) * (da - db);
    } else if (a.values[i] != b.values[i]) {
      hamming += 1.0;
    }
  }
  return hamming + std::sqrt(sq);
}

int hamming_distance(const Config& a, const Config& b) {
  int d = 0;
  for (std::size_t i = 0; i < a.values.size() && i < b.values.size(); ++i)
    if (a.values[i] != b.values[i]) ++d;
  return d;
}

}  // namespace bbea
