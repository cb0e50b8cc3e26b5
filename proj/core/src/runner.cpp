#include "bbea/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "bbea/errors.hpp"
#include "bbea/metrics.hpp"

namespace bbea {

namespace {

using json = nlohmann::json;

json json_num(double x) {
  if (std::isfinite(x)) return json(x);
  return json(x > 0 ? "inf" : "-inf");
}

std::string format_num(double x) {
  if (!std::isfinite(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(12);
  os << x;
  return os.str();
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

bool valid_label(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
  return true;
}

std::string trace_file_name(const std::string& label, std::uint64_t seed) {
  return label + "__seed" + std::to_string(seed) + ".jsonl";
}

json exit_to_json(const ExitCriteria& e) {
  json j;
  j["mode"] = e.mode == ExitCriteria::Mode::fixed_budget ? "fixed_budget" : "fixed_target";
  j["t_max"] = e.t_max;
  if (e.mode == ExitCriteria::Mode::fixed_target) j["target"] = e.target;
  if (e.max_evals > 0) j["max_evals"] = e.max_evals;
  return j;
}

ExitCriteria exit_from_json(const json& j) {
  ExitCriteria e;
  const auto mode = j.value("mode", std::string("fixed_budget"));
  if (mode == "fixed_budget") {
    e.mode = ExitCriteria::Mode::fixed_budget;
  } else if (mode == "fixed_target") {
    e.mode = ExitCriteria::Mode::fixed_target;
    e.target = j.at("target").get<double>();
  } else {
    throw std::invalid_argument("exit criteria: unknown mode '" + mode + "'");
  }
  e.t_max = j.at("t_max").get<double>();
  e.max_evals = j.value("max_evals", std::uint64_t{0});
  return e;
}

json summary_to_json(const RunSummary& s) {
  json j;
  j["algorithm"] = s.algorithm;
  j["seed"] = s.seed;
  j["file"] = s.file;
  j["status"] = s.status;
  j["events"] = s.events;
  j["best_y"] = json_num(s.best_y);
  j["total_sim_time"] = s.total_sim_time;
  j["total_train_time"] = s.total_train_time;
  j["fit_fallbacks"] = s.fit_fallbacks;
  if (!s.warnings.empty()) j["warnings"] = s.warnings;
  return j;
}

RunSummary summary_from_json(const json& j) {
  RunSummary s;
  s.algorithm = j.at("algorithm").get<std::string>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.file = j.at("file").get<std::string>();
  s.status = j.at("status").get<std::string>();
  s.events = j.value("events", std::uint64_t{0});
  if (j.contains("best_y") && j["best_y"].is_number()) s.best_y = j["best_y"].get<double>();
  s.total_sim_time = j.value("total_sim_time", 0.0);
  s.total_train_time = j.value("total_train_time", 0.0);
  s.fit_fallbacks = j.value("fit_fallbacks", 0);
  if (j.contains("warnings")) s.warnings = j["warnings"].get<std::vector<std::string>>();
  return s;
}

}  // namespace

std::string fnv1a64_hex(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

EngineConfig engine_config_from_json(const json& j) {
  EngineConfig cfg;
  cfg.k = j.value("k", cfg.k);
  cfg.m = j.value("m", cfg.m);
  cfg.mutation_prob = j.value("mutation_prob", cfg.mutation_prob);
  cfg.pool_cap = j.value("pool_cap", cfg.pool_cap);
  cfg.subsample_cap = j.value("subsample_cap", cfg.subsample_cap);
  cfg.n_mc = j.value("n_mc", cfg.n_mc);
  cfg.acq_epsilon = j.value("acq_epsilon", cfg.acq_epsilon);
  cfg.ucb_kappa = j.value("ucb_kappa", cfg.ucb_kappa);
  if (j.contains("switches")) {
    const auto& s = j["switches"];
    cfg.switches.saea = s.value("saea", true);
    cfg.switches.module_a = s.value("module_a", true);
    cfg.switches.module_b = s.value("module_b", true);
    cfg.switches.module_c = s.value("module_c", true);
    cfg.switches.input_warping = s.value("input_warping", true);
    cfg.switches.output_transform = s.value("output_transform", true);
    cfg.switches.early_termination = s.value("early_termination", true);
  }
  if (j.contains("termination")) {
    const auto& t = j["termination"];
    cfg.termination.beta = t.value("beta", cfg.termination.beta);
    cfg.termination.checkpoint_fractions =
        t.value("checkpoint_fractions", cfg.termination.checkpoint_fractions);
    cfg.termination.warmup = t.value("warmup", cfg.termination.warmup);
  }
  const auto overhead = j.value("overhead", std::string("none"));
  if (overhead == "none") {
    cfg.overhead = OverheadMode::none;
  } else if (overhead == "measured") {
    cfg.overhead = OverheadMode::measured;
  } else {
    throw std::invalid_argument("engine config: unknown overhead mode '" + overhead + "'");
  }
  cfg.validate();
  return cfg;
}

json engine_config_to_json(const EngineConfig& cfg) {
  json j;
  j["k"] = cfg.k;
  j["m"] = cfg.m;
  j["mutation_prob"] = cfg.mutation_prob;
  j["pool_cap"] = cfg.pool_cap;
  j["subsample_cap"] = cfg.subsample_cap;
  j["n_mc"] = cfg.n_mc;
  j["acq_epsilon"] = cfg.acq_epsilon;
  j["ucb_kappa"] = cfg.ucb_kappa;
  j["switches"] = json{{"saea", cfg.switches.saea},
                       {"module_a", cfg.switches.module_a},
                       {"module_b", cfg.switches.module_b},
                       {"module_c", cfg.switches.module_c},
                       {"input_warping", cfg.switches.input_warping},
                       {"output_transform", cfg.switches.output_transform},
                       {"early_termination", cfg.switches.early_termination}};
  j["termination"] = json{{"beta", cfg.termination.beta},
                          {"checkpoint_fractions", cfg.termination.checkpoint_fractions},
                          {"warmup", cfg.termination.warmup}};
  j["overhead"] = cfg.overhead == OverheadMode::measured ? "measured" : "none";
  return j;
}

ExperimentSpec ExperimentSpec::from_json(const json& j) {
  ExperimentSpec spec;
  spec.benchmark = j.at("benchmark").get<std::string>();
  if (!j.contains("algorithms") || !j["algorithms"].is_array() || j["algorithms"].empty())
    throw std::invalid_argument("experiment spec needs a non-empty 'algorithms' array");
  for (const auto& a : j["algorithms"]) {
    AlgorithmSpec alg;
    alg.algorithm = a.at("algorithm").get<std::string>();
    alg.name = a.value("name", alg.algorithm);
    alg.config = engine_config_from_json(a);
    spec.algorithms.push_back(std::move(alg));
  }
  spec.seeds = j.value("seeds", std::vector<std::uint64_t>{});
  spec.exit_criteria = exit_from_json(j.at("exit"));
  spec.validate();
  return spec;
}

ExperimentSpec ExperimentSpec::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open experiment spec: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  try {
    return from_json(j);
  } catch (const std::invalid_argument& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

json ExperimentSpec::to_json() const {
  json j;
  j["benchmark"] = benchmark.string();
  json algs = json::array();
  for (const auto& alg : algorithms) {
    json a = engine_config_to_json(alg.config);
    a["name"] = alg.name;
    a["algorithm"] = alg.algorithm;
    algs.push_back(std::move(a));
  }
  j["algorithms"] = std::move(algs);
  j["seeds"] = seeds;
  j["exit"] = exit_to_json(exit_criteria);
  return j;
}

std::string ExperimentSpec::config_hash() const { return fnv1a64_hex(to_json().dump()); }

void ExperimentSpec::validate() const {
  if (algorithms.empty()) throw std::invalid_argument("experiment spec: no algorithms");
  if (seeds.empty()) throw std::invalid_argument("experiment spec: no seeds");
  std::set<std::string> names;
  for (const auto& alg : algorithms) {
    if (!valid_label(alg.name))
      throw std::invalid_argument("algorithm name '" + alg.name +
                                  "' must match [A-Za-z0-9_-]+");
    if (!names.insert(alg.name).second)
      throw std::invalid_argument("duplicate algorithm name '" + alg.name + "'");
    if (alg.algorithm != "b2ea" && alg.algorithm != "gp_bo" && alg.algorithm != "rs" &&
        alg.algorithm != "rea")
      throw std::invalid_argument("unknown algorithm '" + alg.algorithm + "'");
    alg.config.validate();
  }
  std::set<std::uint64_t> seed_set(seeds.begin(), seeds.end());
  if (seed_set.size() != seeds.size())
    throw std::invalid_argument("experiment spec: duplicate seeds");
  exit_criteria.validate();
}

void write_trace_file(const std::filesystem::path& path, const RunResult& result) {
  std::string content;
  for (const auto& e : result.events) {
    json row;
    row["n"] = e.n;
    row["sim_time"] = e.sim_time;
    row["y"] = e.y;
    row["config_key"] = e.config_key;
    row["terminated_early"] = e.terminated_early;
    row["substituted"] = e.substituted;
    content += row.dump();
    content += "\n";
  }
  write_text_atomic(path, content);
}

Trace load_trace_file(const std::filesystem::path& path, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open trace file: " + path.string());
  Trace trace;
  trace.seed = seed;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    TraceEvent event;
    event.n = row.at("n").get<std::uint64_t>();
    event.sim_time = row.at("sim_time").get<double>();
    event.y = row.at("y").get<double>();
    event.config_key = row.at("config_key").get<std::string>();
    event.terminated_early = row.value("terminated_early", false);
    event.substituted = row.value("substituted", false);
    trace.events.push_back(std::move(event));
  }
  return trace;
}

ExperimentResult run_experiment(const ExperimentSpec& spec,
                                const std::filesystem::path& out_dir, int workers) {
  spec.validate();
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  std::filesystem::create_directories(out_dir);

  const std::string hash = spec.config_hash();
  const auto manifest_path = out_dir / "manifest.json";

  // Resume support: entries recorded in a matching manifest are kept.
  std::map<std::pair<std::string, std::uint64_t>, RunSummary> completed;
  if (std::filesystem::exists(manifest_path)) {
    std::ifstream in(manifest_path);
    json m;
    try {
      in >> m;
    } catch (const json::parse_error&) {
      m = json::object();  // a torn manifest just means nothing to resume
    }
    if (m.contains("config_hash")) {
      if (m["config_hash"].get<std::string>() != hash)
        throw std::runtime_error("output directory " + out_dir.string() +
                                 " holds a different experiment (config hash mismatch)");
      for (const auto& e : m.value("entries", json::array())) {
        RunSummary s = summary_from_json(e);
        if (std::filesystem::exists(out_dir / s.file))
          completed[{s.algorithm, s.seed}] = std::move(s);
      }
    }
  }

  struct Pair {
    const AlgorithmSpec* alg;
    std::uint64_t seed;
  };
  std::vector<Pair> pairs;
  for (const auto& alg : spec.algorithms)
    for (std::uint64_t seed : spec.seeds) pairs.push_back({&alg, seed});

  std::vector<RunSummary> summaries(pairs.size());
  std::vector<bool> executed(pairs.size(), false);

  BenchmarkTable table = BenchmarkTable::load(spec.benchmark);

  std::mutex manifest_mutex;
  auto flush_manifest = [&] {
    json m;
    m["config_hash"] = hash;
    m["version"] = "0.1.0";
    m["benchmark"] = spec.benchmark.string();
    m["exit"] = exit_to_json(spec.exit_criteria);
    json entries = json::array();
    double total = 0.0;
    std::vector<const RunSummary*> done;
    for (std::size_t i = 0; i < pairs.size(); ++i)
      if (!summaries[i].file.empty()) done.push_back(&summaries[i]);
    std::sort(done.begin(), done.end(), [](const RunSummary* a, const RunSummary* b) {
      return std::tie(a->algorithm, a->seed) < std::tie(b->algorithm, b->seed);
    });
    for (const auto* s : done) {
      entries.push_back(summary_to_json(*s));
      total += s->total_sim_time;
    }
    m["entries"] = std::move(entries);
    m["total_sim_time"] = total;
    write_text_atomic(manifest_path, m.dump(2) + "\n");
  };

  std::atomic<std::size_t> next{0};
  std::atomic<int> n_executed{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto work = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= pairs.size()) return;
      const auto& pair = pairs[i];
      const auto key = std::make_pair(pair.alg->name, pair.seed);
      try {
        if (const auto it = completed.find(key); it != completed.end()) {
          summaries[i] = it->second;
          continue;
        }
        RunResult result =
            run_algorithm(pair.alg->algorithm, table, pair.alg->config, spec.exit_criteria,
                          pair.seed);
        const std::string file = trace_file_name(pair.alg->name, pair.seed);
        write_trace_file(out_dir / file, result);
        RunSummary s;
        s.algorithm = pair.alg->name;
        s.seed = pair.seed;
        s.file = file;
        s.status = to_string(result.status);
        s.events = result.events.size();
        s.best_y = result.best_y;
        s.total_sim_time = result.total_sim_time;
        s.total_train_time = result.total_train_time;
        s.fit_fallbacks = result.fit_fallbacks;
        s.warnings = result.warnings;
        summaries[i] = std::move(s);
        executed[i] = true;
        ++n_executed;
        {
          std::lock_guard<std::mutex> lock(manifest_mutex);
          flush_manifest();
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  const int n_threads = std::min<int>(workers, static_cast<int>(pairs.size()));
  if (n_threads <= 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) threads.emplace_back(work);
    for (auto& t : threads) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  {
    std::lock_guard<std::mutex> lock(manifest_mutex);
    flush_manifest();
  }

  ExperimentResult result;
  result.manifest_path = manifest_path;
  result.executed = n_executed.load();
  result.skipped = static_cast<int>(pairs.size()) - result.executed;
  result.runs = std::move(summaries);
  std::sort(result.runs.begin(), result.runs.end(), [](const RunSummary& a, const RunSummary& b) {
    return std::tie(a.algorithm, a.seed) < std::tie(b.algorithm, b.seed);
  });
  return result;
}

LoadedRun load_run_dir(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw ParseError("cannot open manifest: " + manifest_path.string());
  json m;
  try {
    in >> m;
  } catch (const json::parse_error& e) {
    throw ParseError(manifest_path.string() + ": " + e.what());
  }

  LoadedRun run;
  run.spec.benchmark = m.at("benchmark").get<std::string>();
  run.spec.exit_criteria = exit_from_json(m.at("exit"));
  for (const auto& e : m.value("entries", json::array())) {
    const RunSummary s = summary_from_json(e);
    run.traces[s.algorithm].push_back(load_trace_file(dir / s.file, s.seed));
  }
  if (run.traces.empty()) throw ParseError(manifest_path.string() + ": no completed runs");
  return run;
}

void write_report(const std::vector<std::filesystem::path>& run_dirs,
                  const std::filesystem::path& out_dir, const ReportOptions& options) {
  if (run_dirs.empty()) throw std::invalid_argument("report needs at least one run directory");
  std::filesystem::create_directories(out_dir);

  struct Level {
    const char* name;
    double percentile;
  };
  const Level levels[] = {{"easy", options.p_easy},
                          {"difficult", options.p_difficult},
                          {"extreme", options.p_extreme}};

  json report;
  report["tasks"] = json::array();
  std::string csv = "task,algorithm,target_level,target_value,target_regret,t_budget,t_max,"
                    "success_rate,expected_time,normalized_expected_time\n";
  std::string series_csv = "task,algorithm,time,regret_median,regret_q25,regret_q75,regret_mean\n";

  // aggregate inputs: [level][task][algorithm] -> value
  std::map<std::string, std::map<std::string, std::map<std::string, double>>> success_by_level;
  std::map<std::string, std::map<std::string, std::map<std::string, double>>> norm_time_by_level;

  for (const auto& dir : run_dirs) {
    const LoadedRun run = load_run_dir(dir);
    const BenchmarkTable table = BenchmarkTable::load(run.spec.benchmark);
    const std::string task = dir.filename().empty() ? dir.parent_path().filename().string()
                                                    : dir.filename().string();
    const double t_max = run.spec.exit_criteria.t_max;
    const TargetSet targets = derive_targets(table, options.p_easy, options.p_difficult,
                                             options.p_extreme);
    const double target_values[] = {targets.c_easy, targets.c_difficult, targets.c_extreme};

    json task_json;
    task_json["task"] = task;
    task_json["benchmark"] = run.spec.benchmark.string();
    task_json["optimum"] = targets.optimum;
    task_json["t_max"] = t_max;
    task_json["levels"] = json::array();

    for (std::size_t li = 0; li < 3; ++li) {
      const double target = target_values[li];
      const double t_budget = derive_budget(run.traces, target, t_max);
      json level_json;
      level_json["level"] = levels[li].name;
      level_json["percentile"] = levels[li].percentile;
      level_json["target"] = target;
      level_json["target_regret"] = target - targets.optimum;
      level_json["t_budget"] = t_budget;
      level_json["algorithms"] = json::object();
      for (const auto& [name, traces] : run.traces) {
        const double sr = success_rate(traces, target, t_budget);
        const double et = expected_time(traces, target, t_max);
        const double norm = std::isfinite(et) ? 100.0 * et / t_max
                                              : std::numeric_limits<double>::infinity();
        level_json["algorithms"][name] =
            json{{"success_rate", sr},
                 {"expected_time", json_num(et)},
                 {"normalized_expected_time", json_num(norm)},
                 {"n_runs", traces.size()}};
        csv += task + "," + name + "," + levels[li].name + "," + format_num(target) + "," +
               format_num(target - targets.optimum) + "," + format_num(t_budget) + "," +
               format_num(t_max) + "," + format_num(sr) + "," + format_num(et) + "," +
               format_num(norm) + "\n";
        success_by_level[levels[li].name][task][name] = sr;
        norm_time_by_level[levels[li].name][task][name] = norm;
      }
      task_json["levels"].push_back(std::move(level_json));
    }

    // Regret-vs-time series over a log grid from the earliest observation.
    double t_lo = t_max;
    for (const auto& [name, traces] : run.traces)
      for (const auto& trace : traces)
        if (!trace.events.empty()) t_lo = std::min(t_lo, trace.events.front().sim_time);
    if (!(t_lo > 0.0) || t_lo >= t_max) t_lo = t_max / 1000.0;
    const auto grid = log_time_grid(t_lo, t_max, options.grid_points);
    for (const auto& [name, traces] : run.traces) {
      const auto series = regret_series(traces, targets.optimum, grid);
      for (std::size_t i = 0; i < series.times.size(); ++i) {
        series_csv += task + "," + name + "," + format_num(series.times[i]) + "," +
                      format_num(series.median[i]) + "," + format_num(series.q25[i]) + "," +
                      format_num(series.q75[i]) + "," + format_num(series.mean[i]) + "\n";
      }
    }

    report["tasks"].push_back(std::move(task_json));
  }

  report["aggregates"] = json::object();
  for (const auto& [level, by_task] : success_by_level) {
    // Rank aggregation only makes sense when every task covers the same set.
    try {
      json agg = json::object();
      for (const auto& [name, stats] : aggregate(by_task, /*lower_is_better=*/false)) {
        agg[name] = json{{"mean", stats.mean_value},
                         {"std", stats.std_value},
                         {"mean_rank", stats.mean_rank},
                         {"std_rank", stats.std_rank}};
      }
      report["aggregates"]["success_rate"][level] = std::move(agg);
    } catch (const std::invalid_argument&) {
    }
    try {
      json agg = json::object();
      for (const auto& [name, stats] :
           aggregate(norm_time_by_level[level], /*lower_is_better=*/true)) {
        agg[name] = json{{"mean", json_num(stats.mean_value)},
                         {"std", json_num(stats.std_value)},
                         {"mean_rank", stats.mean_rank},
                         {"std_rank", stats.std_rank}};
      }
      report["aggregates"]["normalized_expected_time"][level] = std::move(agg);
    } catch (const std::invalid_argument&) {
    }
  }

  write_text_atomic(out_dir / "metrics.csv", csv);
  write_text_atomic(out_dir / "metrics.json", report.dump(2) + "\n");
  write_text_atomic(out_dir / "regret_series.csv", series_csv);
}

}  // namespace bbea
