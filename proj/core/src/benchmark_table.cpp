#include "bbea/benchmark_table.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "bbea/errors.hpp"

namespace bbea {

namespace {
using json = nlohmann::json;
}

double BenchRecord::best_loss() const {
  return *std::min_element(curve.begin(), curve.end());
}

void SimClock::advance(double delta) {
  if (delta < 0.0) throw std::invalid_argument("simulated clock cannot move backwards");
  seconds_ += delta;
}

BenchmarkTable::BenchmarkTable(SearchSpace space, int max_epochs,
                               std::map<std::string, BenchRecord> records)
    : space_(std::move(space)), max_epochs_(max_epochs), records_(std::move(records)) {
  if (max_epochs_ < 1) throw std::invalid_argument("max_epochs must be >= 1");
  optimum_value_ = std::numeric_limits<double>::infinity();
  for (const auto& [key, rec] : records_) {
    if (!rec.valid) continue;
    if (rec.curve.size() != static_cast<std::size_t>(max_epochs_))
      throw std::invalid_argument("record '" + key + "' curve length != max_epochs");
    if (!(rec.train_time > 0.0))
      throw std::invalid_argument("record '" + key + "' needs train_time > 0");
    ++n_valid_;
    const double best = rec.best_loss();
    if (best < optimum_value_) {
      optimum_value_ = best;
      optimum_key_ = key;
    }
  }
  if (n_valid_ == 0) throw std::invalid_argument("benchmark table has no valid records");
}

std::vector<double> BenchmarkTable::sorted_best_losses() const {
  std::vector<double> losses;
  losses.reserve(n_valid_);
  for (const auto& [key, rec] : records_)
    if (rec.valid) losses.push_back(rec.best_loss());
  std::sort(losses.begin(), losses.end());
  return losses;
}

BenchmarkTable BenchmarkTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open benchmark file: " + path.string());

  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& msg) -> ParseError {
    return ParseError(path.string() + ":" + std::to_string(line_no) + ": " + msg);
  };

  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
  ++line_no;
  json header;
  try {
    header = json::parse(line);
  } catch (const json::parse_error& e) {
    throw fail(std::string("bad header: ") + e.what());
  }
  if (!header.contains("space") || !header.contains("max_epochs"))
    throw fail("header must carry 'space' and 'max_epochs'");

  SearchSpace space = [&] {
    try {
      return SearchSpace::from_json(header["space"]);
    } catch (const std::exception& e) {
      throw fail(std::string("bad space spec: ") + e.what());
    }
  }();
  const int max_epochs = header["max_epochs"].get<int>();

  std::map<std::string, BenchRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::parse_error& e) {
      throw fail(std::string("bad record: ") + e.what());
    }
    BenchRecord rec;
    try {
      if (!row.contains("values")) throw std::invalid_argument("missing 'values'");
      rec.config = space.config_from_key(row["values"].dump());
      rec.curve = row.value("curve", std::vector<double>{});
      rec.train_time = row.value("train_time", 0.0);
      rec.valid = row.value("valid", true);
    } catch (const std::exception& e) {
      throw fail(e.what());
    }
    const std::string key = space.key(rec.config);
    if (row.contains("key") && row["key"].get<std::string>() != key)
      throw fail("record 'key' does not match its values");
    if (rec.valid && rec.curve.size() != static_cast<std::size_t>(max_epochs))
      throw fail("curve length " + std::to_string(rec.curve.size()) + " != max_epochs " +
                 std::to_string(max_epochs));
    if (rec.valid && !(rec.train_time > 0.0)) throw fail("train_time must be > 0");
    if (!records.emplace(key, std::move(rec)).second) throw fail("duplicate record " + key);
  }

  try {
    return BenchmarkTable(std::move(space), max_epochs, std::move(records));
  } catch (const std::invalid_argument& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void BenchmarkTable::save(const std::filesystem::path& path) const {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    json header;
    header["space"] = space_.to_json();
    header["max_epochs"] = max_epochs_;
    out << header.dump() << "\n";
    for (const auto& [key, rec] : records_) {
      json row;
      row["key"] = key;
      row["values"] = json::parse(key);
      row["curve"] = rec.curve;
      row["train_time"] = rec.train_time;
      row["valid"] = rec.valid;
      out << row.dump() << "\n";
    }
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Observation evaluate(const BenchmarkTable& table, SimClock& clock, const Config& config,
                     const TerminationRule& rule,
                     const std::vector<std::vector<double>>& completed_curves,
                     double overhead_seconds) {
  table.space().check(config);
  const std::string key = table.space().key(config);

  const BenchRecord* record = nullptr;
  bool substituted = false;
  if (const auto it = table.records().find(key);
      it != table.records().end() && it->second.valid) {
    record = &it->second;
  } else {
    // Nearest valid record by config distance; ties resolve to the lowest key
    // because the map iterates in key order.
    double best_dist = std::numeric_limits<double>::infinity();
    for (const auto& [rkey, rec] : table.records()) {
      if (!rec.valid) continue;
      const double d = config_distance(table.space(), config, rec.config);
      if (d < best_dist) {
        best_dist = d;
        record = &rec;
      }
    }
    substituted = true;
  }
  if (!record) throw std::runtime_error("benchmark table has no valid records");

  Observation obs;
  obs.config = config;
  obs.key = key;
  obs.encoded = table.space().encode(config);
  obs.substituted = substituted;

  const int max_epochs = table.max_epochs();
  obs.terminated_early = false;
  if (rule.enabled()) {
    for (double frac : rule.checkpoint_fractions) {
      const int e = static_cast<int>(std::ceil(frac * max_epochs));
      if (e < 1 || e >= max_epochs) continue;
      const std::vector<double> prefix(record->curve.begin(), record->curve.begin() + e);
      if (should_terminate(rule, prefix, e, completed_curves)) {
        obs.curve = prefix;
        obs.y = prefix.back();
        obs.charged_time = record->train_time * static_cast<double>(e) /
                           static_cast<double>(max_epochs);
        obs.terminated_early = true;
        break;
      }
    }
  }
  if (!obs.terminated_early) {
    obs.curve = record->curve;
    obs.y = record->best_loss();
    obs.charged_time = record->train_time;
  }

  clock.advance(obs.charged_time + overhead_seconds);
  return obs;
}

BenchmarkTable generate_synthetic(const SearchSpace& space, std::uint64_t n_configs,
                                  std::uint64_t seed, const SyntheticOptions& options) {
  const auto card = space.cardinality();
  if (!card) throw std::invalid_argument("synthetic tables need a finite space");
  if (n_configs == 0 || n_configs > *card)
    throw std::invalid_argument("n_configs must be in [1, |space|]");

  Rng rng = make_stream(seed, 0x5b7a11);

  // Floyd's algorithm: uniform distinct config indices without enumeration.
  std::set<std::uint64_t> chosen;
  for (std::uint64_t j = *card - n_configs; j < *card; ++j) {
    const std::uint64_t t = rand_below(rng, j + 1);
    if (!chosen.insert(t).second) chosen.insert(j);
  }

  const std::size_t width = space.encoded_width();
  std::vector<double> weight(width), phase(width), freq(width), center(width);
  for (std::size_t d = 0; d < width; ++d) {
    weight[d] = rand_range(rng, 0.5, 1.0);
    phase[d] = rand_range(rng, 0.0, 2.0 * M_PI);
    freq[d] = 1.0 + static_cast<double>(rand_below(rng, 3));
    center[d] = rand_unit(rng);
  }

  struct Row {
    Config config;
    double raw;
  };
  std::vector<Row> rows;
  rows.reserve(chosen.size());
  double raw_min = std::numeric_limits<double>::infinity();
  double raw_max = -std::numeric_limits<double>::infinity();
  for (std::uint64_t index : chosen) {
    Config c = space.config_at(index);
    const auto enc = space.encode(c);
    double ripple = 0.0, bowl = 0.0;
    for (std::size_t d = 0; d < width; ++d) {
      ripple += weight[d] * std::sin(freq[d] * 2.0 * M_PI * enc[d] + phase[d]);
      bowl += (enc[d] - center[d]) * (enc[d] - center[d]);
    }
    const double raw = ripple / static_cast<double>(width) + 2.0 * bowl / static_cast<double>(width);
    raw_min = std::min(raw_min, raw);
    raw_max = std::max(raw_max, raw);
    rows.push_back({std::move(c), raw});
  }
  const double raw_span = raw_max > raw_min ? raw_max - raw_min : 1.0;

  std::map<std::string, BenchRecord> records;
  for (auto& row : rows) {
    const double norm = (row.raw - raw_min) / raw_span;
    double final_loss =
        options.loss_floor + options.loss_span * norm + options.noise_scale * rand_normal(rng);
    final_loss = std::max(final_loss, 0.01);

    BenchRecord rec;
    const double rise = 0.5 + 1.5 * rand_unit(rng);
    const double decay = 3.0 + 5.0 * rand_unit(rng);
    rec.curve.resize(static_cast<std::size_t>(options.max_epochs));
    for (int t = 0; t < options.max_epochs; ++t) {
      rec.curve[static_cast<std::size_t>(t)] =
          final_loss + rise * std::exp(-decay * static_cast<double>(t + 1) /
                                       static_cast<double>(options.max_epochs));
    }
    rec.train_time =
        std::exp(rand_range(rng, std::log(options.time_lo), std::log(options.time_hi)));
    rec.valid = true;
    const std::string key = space.key(row.config);
    rec.config = std::move(row.config);
    records.emplace(key, std::move(rec));
  }

  return BenchmarkTable(space, options.max_epochs, std::move(records));
}

}  // namespace bbea
