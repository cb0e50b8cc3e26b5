#include "bbea/engine.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "bbea/errors.hpp"

namespace bbea {

namespace {

// Stream tags; every consumer derives its own per-iteration stream so that
// toggling one switch never shifts the draws seen by another.
constexpr std::uint64_t kTagInit = 0x11;
constexpr std::uint64_t kTagPool = 0x12;
constexpr std::uint64_t kTagSubsample = 0x13;
constexpr std::uint64_t kTagPopulateFit = 0x14;
constexpr std::uint64_t kTagProposeFit = 0x15;
constexpr std::uint64_t kTagDiversify = 0x16;
constexpr std::uint64_t kTagMutate = 0x17;
constexpr std::uint64_t kTagPopulateFallback = 0x18;
constexpr std::uint64_t kTagProposeFallback = 0x19;
constexpr std::uint64_t kTagRandomPopulate = 0x1a;
constexpr std::uint64_t kTagSelectOff = 0x1b;
constexpr std::uint64_t kTagRs = 0x1c;
constexpr std::uint64_t kTagRea = 0x1d;

constexpr std::uint64_t kRsEnumerationCap = 100000;

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  k = std::min(k, n);
  for (std::size_t i = 0; i < k; ++i)
    std::swap(idx[i], idx[i + rand_below(rng, n - i)]);
  idx.resize(k);
  return idx;
}

std::vector<Config> uniform_subset(const std::vector<Config>& pool, std::size_t k, Rng& rng) {
  if (pool.size() <= k) return pool;
  std::vector<Config> out;
  out.reserve(k);
  for (std::size_t i : sample_without_replacement(pool.size(), k, rng)) out.push_back(pool[i]);
  return out;
}

std::vector<std::vector<double>> encode_all(const SearchSpace& space,
                                            const std::vector<Config>& configs) {
  std::vector<std::vector<double>> out;
  out.reserve(configs.size());
  for (const auto& c : configs) out.push_back(space.encode(c));
  return out;
}

// Shared run bookkeeping: clock, history, trace, exit checks.
struct LoopState {
  const BenchmarkTable& table;
  const ExitCriteria& exit_criteria;
  TerminationRule rule;
  SimClock clock;
  History history;
  std::vector<std::vector<double>> completed_curves;
  std::unordered_set<std::string> evaluated;
  RunResult result;
  bool done = false;

  LoopState(const BenchmarkTable& t, const ExitCriteria& e, TerminationRule r)
      : table(t), exit_criteria(e), rule(std::move(r)) {}

  void evaluate_config(const Config& config, double overhead_seconds) {
    Observation obs =
        evaluate(table, clock, config, rule, completed_curves, overhead_seconds);
    result.total_train_time += obs.charged_time;
    result.best_y = std::min(result.best_y, obs.y);
    evaluated.insert(obs.key);
    result.events.push_back({static_cast<std::uint64_t>(history.size() + 1), clock.now(),
                             obs.y, obs.key, obs.terminated_early, obs.substituted});
    if (!obs.terminated_early) completed_curves.push_back(obs.curve);
    history.push_back(std::move(obs));
    check_exit();
  }

  void check_exit() {
    if (exit_criteria.mode == ExitCriteria::Mode::fixed_target &&
        result.best_y <= exit_criteria.target) {
      finish(RunStatus::target_achieved);
    } else if (clock.now() >= exit_criteria.t_max) {
      finish(RunStatus::budget_exhausted);
    } else if (exit_criteria.max_evals > 0 && history.size() >= exit_criteria.max_evals) {
      finish(RunStatus::evals_exhausted);
    }
  }

  bool space_exhausted() const {
    const auto card = table.space().cardinality();
    return card && evaluated.size() >= *card;
  }

  void finish(RunStatus status) {
    result.status = status;
    done = true;
  }

  RunResult take_result() {
    result.total_sim_time = clock.now();
    result.history = std::move(history);
    return std::move(result);
  }
};

// Two distinct uniform configs; a single-config space yields one observation
// and a warning.
void initialize(LoopState& st, const SearchSpace& space, std::uint64_t seed) {
  Rng rng = make_stream(seed, kTagInit);
  const Config first = space.sample_uniform(rng);
  const std::string first_key = space.key(first);
  st.evaluate_config(first, 0.0);
  if (st.done) return;

  for (int attempt = 0; attempt < 100; ++attempt) {
    const Config second = space.sample_uniform(rng);
    if (space.key(second) != first_key) {
      st.evaluate_config(second, 0.0);
      return;
    }
  }
  st.result.warnings.push_back("initialization: no second distinct config found");
}

double measured_seconds(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RunResult run_single_model(const BenchmarkTable& table, const EngineConfig& cfg,
                           const ExitCriteria& exit_criteria, std::uint64_t seed,
                           std::string algorithm_name) {
  const SearchSpace& space = table.space();
  SurrogateSpec spec;
  spec.family = ModelFamily::gp;
  spec.acquisition = {AcqKind::ei, cfg.acq_epsilon, cfg.ucb_kappa};
  spec.name = "gp_ei";

  LoopState st(table, exit_criteria,
               cfg.switches.early_termination ? cfg.termination : TerminationRule{});
  st.result.algorithm = std::move(algorithm_name);
  st.result.seed = seed;

  initialize(st, space, seed);
  for (std::uint64_t n = 1; !st.done; ++n) {
    if (st.space_exhausted()) {
      st.finish(RunStatus::space_exhausted);
      break;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Rng pool_rng = make_stream(seed, kTagPool, n);
    const auto pool = build_candidate_pool(space, st.history, cfg, pool_rng);
    if (pool.empty()) {
      st.finish(RunStatus::space_exhausted);
      break;
    }
    Rng sub_rng = make_stream(seed, kTagSubsample, n);
    const FitContext ctx = make_fit_context(st.history, cfg, sub_rng);

    Config chosen;
    try {
      Rng fit_rng = make_stream(seed, kTagProposeFit, n);
      const FittedModel model = fit_model(spec, ctx, cfg, fit_rng);
      const auto scores = score_candidates(spec, model, encode_all(space, pool), ctx.y_best);
      std::size_t best = 0;
      for (std::size_t i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[best]) best = i;
      chosen = pool[best];
    } catch (const ModelFitError& e) {
      ++st.result.fit_fallbacks;
      st.result.warnings.push_back("iteration " + std::to_string(n) +
                                   ": surrogate fit failed (" + e.what() + ")");
      Rng fb_rng = make_stream(seed, kTagProposeFallback, n);
      chosen = pool[rand_below(fb_rng, pool.size())];
    }
    const double overhead =
        cfg.overhead == OverheadMode::measured ? measured_seconds(t0) : 0.0;
    st.evaluate_config(chosen, overhead);
  }
  return st.take_result();
}

}  // namespace

std::string to_string(RunStatus status) {
  switch (status) {
    case RunStatus::budget_exhausted: return "budget_exhausted";
    case RunStatus::target_achieved: return "target_achieved";
    case RunStatus::space_exhausted: return "space_exhausted";
    case RunStatus::evals_exhausted: return "evals_exhausted";
  }
  return "unknown";
}

void EngineConfig::validate() const {
  if (k < 1) throw std::invalid_argument("engine config: k must be >= 1");
  if (m < 1 || m > k) throw std::invalid_argument("engine config: need 1 <= m <= k");
  if (mutation_prob < 0.0 || mutation_prob > 1.0)
    throw std::invalid_argument("engine config: mutation_prob must be in [0,1]");
  if (pool_cap < 1) throw std::invalid_argument("engine config: pool_cap must be >= 1");
  if (subsample_cap < 2) throw std::invalid_argument("engine config: subsample_cap must be >= 2");
  if (n_mc < 1) throw std::invalid_argument("engine config: n_mc must be >= 1");
  if (termination.beta < 0.0 || termination.beta > 1.0)
    throw std::invalid_argument("engine config: termination beta must be in [0,1]");
  double prev = 0.0;
  for (double f : termination.checkpoint_fractions) {
    if (!(f > prev && f < 1.0))
      throw std::invalid_argument("engine config: checkpoint fractions must increase in (0,1)");
    prev = f;
  }
  if (termination.warmup < 0) throw std::invalid_argument("engine config: warmup must be >= 0");
  if (pool_override && pool_override->size() < 2)
    throw std::invalid_argument("engine config: pool override needs >= 2 entries");
}

void ExitCriteria::validate() const {
  if (!(t_max > 0.0)) throw std::invalid_argument("exit criteria: t_max must be > 0");
}

FitContext make_fit_context(const History& history, const EngineConfig& cfg,
                            Rng& subsample_rng) {
  if (history.size() < 2)
    throw std::invalid_argument("fit context needs at least 2 observations");

  std::vector<std::size_t> indices;
  if (history.size() > cfg.subsample_cap) {
    indices = sample_without_replacement(history.size(), cfg.subsample_cap, subsample_rng);
  } else {
    indices.resize(history.size());
    std::iota(indices.begin(), indices.end(), std::size_t{0});
  }

  FitContext ctx;
  std::vector<double> ys;
  ys.reserve(indices.size());
  ctx.X.reserve(indices.size());
  for (std::size_t i : indices) {
    ctx.X.push_back(history[i].encoded);
    ys.push_back(history[i].y);
  }
  ctx.transform =
      cfg.switches.output_transform ? fit_power_transform(ys) : standardize_only(ys);
  ctx.z.reserve(ys.size());
  for (double y : ys) ctx.z.push_back(ctx.transform.apply(y));
  ctx.y_best = *std::min_element(ctx.z.begin(), ctx.z.end());
  return ctx;
}

std::vector<Config> build_candidate_pool(const SearchSpace& space, const History& history,
                                         const EngineConfig& cfg, Rng& pool_rng) {
  std::unordered_set<std::string> evaluated;
  evaluated.reserve(history.size());
  for (const auto& obs : history) evaluated.insert(obs.key);

  const auto card = space.cardinality();
  std::vector<Config> raw;
  if (card && *card <= cfg.pool_cap) {
    raw = space.enumerate_all();
  } else {
    raw.reserve(cfg.pool_cap);
    for (std::uint64_t i = 0; i < cfg.pool_cap; ++i) raw.push_back(space.sample_uniform(pool_rng));
  }

  std::vector<Config> fresh;
  fresh.reserve(raw.size());
  for (const auto& c : raw)
    if (!evaluated.count(space.key(c))) fresh.push_back(c);

  // Keep evaluated configs only when too few unevaluated ones remain.
  if (fresh.size() >= static_cast<std::size_t>(cfg.k)) return fresh;
  for (const auto& c : raw) {
    if (fresh.size() >= static_cast<std::size_t>(cfg.k)) break;
    if (evaluated.count(space.key(c))) fresh.push_back(c);
  }
  return fresh;
}

FittedModel fit_model(const SurrogateSpec& spec, const FitContext& ctx, const EngineConfig& cfg,
                      Rng& fit_rng) {
  if (spec.family == ModelFamily::gp) {
    GpOptions options;
    options.n_mc = cfg.n_mc;
    options.input_warping = cfg.switches.input_warping;
    return FittedGp::fit(ctx.X, ctx.z, fit_rng, options);
  }
  return FittedRf::fit(ctx.X, ctx.z, fit_rng, RfOptions{});
}

std::vector<double> score_candidates(const SurrogateSpec& spec, const FittedModel& model,
                                     const std::vector<std::vector<double>>& encoded,
                                     double y_best) {
  std::vector<double> scores;
  scores.reserve(encoded.size());
  if (spec.family == ModelFamily::gp) {
    const auto* gp = std::get_if<FittedGp>(&model);
    if (!gp) throw std::invalid_argument("score: spec wants a gp model");
    for (const auto& posteriors : gp->predict_batch(encoded))
      scores.push_back(score_samples(spec.acquisition, posteriors, y_best));
  } else {
    const auto* rf = std::get_if<FittedRf>(&model);
    if (!rf) throw std::invalid_argument("score: spec wants an rf model");
    for (const auto& mv : rf->predict_batch(encoded))
      scores.push_back(acq_value(spec.acquisition, mv.mean, mv.var, y_best));
  }
  return scores;
}

std::vector<Config> module_a_populate(const std::vector<Config>& pool, const SearchSpace& space,
                                      const FitContext& ctx, const SurrogateSpec& first,
                                      const EngineConfig& cfg, Rng& fit_rng, Rng& fallback_rng,
                                      bool* fell_back) {
  if (fell_back) *fell_back = false;
  if (pool.empty()) throw std::invalid_argument("populate needs a non-empty pool");
  try {
    const FittedModel model = fit_model(first, ctx, cfg, fit_rng);
    const auto scores = score_candidates(first, model, encode_all(space, pool), ctx.y_best);
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
    });
    const auto take = std::min<std::size_t>(static_cast<std::size_t>(cfg.k), pool.size());
    std::vector<Config> population;
    population.reserve(take);
    for (std::size_t i = 0; i < take; ++i) population.push_back(pool[order[i]]);
    return population;
  } catch (const ModelFitError&) {
    if (fell_back) *fell_back = true;
    return uniform_subset(pool, static_cast<std::size_t>(cfg.k), fallback_rng);
  }
}

std::vector<Config> module_b_vary(const std::vector<Config>& population,
                                  const SearchSpace& space,
                                  const std::vector<std::string>& evaluated_keys,
                                  const EngineConfig& cfg, Rng& mutate_rng) {
  if (population.empty()) throw std::invalid_argument("vary needs a non-empty population");
  const std::unordered_set<std::string> evaluated(evaluated_keys.begin(), evaluated_keys.end());
  const auto m = std::min<std::size_t>(static_cast<std::size_t>(cfg.m), population.size());

  std::vector<Config> offspring;
  offspring.reserve(m);
  for (std::size_t i : sample_without_replacement(population.size(), m, mutate_rng)) {
    const Config& parent = population[i];
    if (rand_unit(mutate_rng) < cfg.mutation_prob) {
      Config child = space.mutate(parent, mutate_rng);
      if (space.cardinality()) {
        // Intensification on finite grids: re-mutate duplicates of already
        // evaluated configs, then accept as-is.
        for (int retry = 0; retry < 10 && evaluated.count(space.key(child)); ++retry)
          child = space.mutate(parent, mutate_rng);
      }
      offspring.push_back(std::move(child));
    } else {
      offspring.push_back(parent);
    }
  }
  return offspring;
}

Config module_c_select(const std::vector<Config>& candidates, const SearchSpace& space,
                       const FitContext& ctx, const SurrogateSpec& second,
                       const EngineConfig& cfg, Rng& fit_rng, Rng& fallback_rng,
                       bool* fell_back) {
  if (fell_back) *fell_back = false;
  if (candidates.empty()) throw std::invalid_argument("select needs a non-empty candidate set");
  try {
    const FittedModel model = fit_model(second, ctx, cfg, fit_rng);
    const auto scores =
        score_candidates(second, model, encode_all(space, candidates), ctx.y_best);
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
      if (scores[i] > scores[best]) best = i;
    return candidates[best];
  } catch (const ModelFitError&) {
    if (fell_back) *fell_back = true;
    return candidates[rand_below(fallback_rng, candidates.size())];
  }
}

RunResult run_b2ea(const BenchmarkTable& table, const EngineConfig& cfg,
                   const ExitCriteria& exit_criteria, std::uint64_t seed) {
  cfg.validate();
  exit_criteria.validate();
  if (!cfg.switches.saea) return run_single_model(table, cfg, exit_criteria, seed, "b2ea");

  const SearchSpace& space = table.space();
  const SurrogatePool pool =
      cfg.pool_override ? *cfg.pool_override : default_pool(cfg.acq_epsilon, cfg.ucb_kappa);

  LoopState st(table, exit_criteria,
               cfg.switches.early_termination ? cfg.termination : TerminationRule{});
  st.result.algorithm = "b2ea";
  st.result.seed = seed;

  std::vector<std::string> evaluated_keys;
  initialize(st, space, seed);
  for (const auto& obs : st.history) evaluated_keys.push_back(obs.key);

  for (std::uint64_t n = 1; !st.done; ++n) {
    if (st.space_exhausted()) {
      st.finish(RunStatus::space_exhausted);
      break;
    }
    const auto t0 = std::chrono::steady_clock::now();

    Rng pool_rng = make_stream(seed, kTagPool, n);
    const auto cand_pool = build_candidate_pool(space, st.history, cfg, pool_rng);
    if (cand_pool.empty()) {
      st.finish(RunStatus::space_exhausted);
      break;
    }
    Rng sub_rng = make_stream(seed, kTagSubsample, n);
    const FitContext ctx = make_fit_context(st.history, cfg, sub_rng);
    const std::size_t first_idx = pick_first_index(pool.size(), n);

    // Module A: populate.
    std::vector<Config> population;
    if (cfg.switches.module_a) {
      Rng fit_rng = make_stream(seed, kTagPopulateFit, n);
      Rng fb_rng = make_stream(seed, kTagPopulateFallback, n);
      bool fell_back = false;
      population = module_a_populate(cand_pool, space, ctx, pool[first_idx], cfg, fit_rng,
                                     fb_rng, &fell_back);
      if (fell_back) {
        ++st.result.fit_fallbacks;
        st.result.warnings.push_back("iteration " + std::to_string(n) +
                                     ": populate fit failed, using random population");
      }
    } else {
      Rng rng = make_stream(seed, kTagRandomPopulate, n);
      population = uniform_subset(cand_pool, static_cast<std::size_t>(cfg.k), rng);
    }

    // Module B: vary.
    std::vector<Config> candidates;
    if (cfg.switches.module_b) {
      Rng mut_rng = make_stream(seed, kTagMutate, n);
      candidates = module_b_vary(population, space, evaluated_keys, cfg, mut_rng);
    } else {
      const auto m = std::min<std::size_t>(static_cast<std::size_t>(cfg.m), population.size());
      candidates.assign(population.begin(), population.begin() + static_cast<std::ptrdiff_t>(m));
    }

    // Module C: estimate with the second surrogate, then evaluate for real.
    Config chosen;
    if (cfg.switches.module_c) {
      Rng div_rng = make_stream(seed, kTagDiversify, n);
      const std::size_t second_idx = pick_second_index(pool.size(), first_idx, div_rng);
      Rng fit_rng = make_stream(seed, kTagProposeFit, n);
      Rng fb_rng = make_stream(seed, kTagProposeFallback, n);
      bool fell_back = false;
      chosen = module_c_select(candidates, space, ctx, pool[second_idx], cfg, fit_rng, fb_rng,
                               &fell_back);
      if (fell_back) {
        ++st.result.fit_fallbacks;
        st.result.warnings.push_back("iteration " + std::to_string(n) +
                                     ": select fit failed, using random candidate");
      }
    } else {
      Rng rng = make_stream(seed, kTagSelectOff, n);
      chosen = candidates[rand_below(rng, candidates.size())];
    }

    const double overhead =
        cfg.overhead == OverheadMode::measured ? measured_seconds(t0) : 0.0;
    st.evaluate_config(chosen, overhead);
    evaluated_keys.push_back(st.history.back().key);
  }
  return st.take_result();
}

RunResult run_single_bo(const BenchmarkTable& table, const EngineConfig& cfg,
                        const ExitCriteria& exit_criteria, std::uint64_t seed) {
  cfg.validate();
  exit_criteria.validate();
  return run_single_model(table, cfg, exit_criteria, seed, "gp_bo");
}

RunResult run_rs(const BenchmarkTable& table, const ExitCriteria& exit_criteria,
                 std::uint64_t seed) {
  exit_criteria.validate();
  const SearchSpace& space = table.space();
  LoopState st(table, exit_criteria, TerminationRule{});
  st.result.algorithm = "rs";
  st.result.seed = seed;

  Rng rng = make_stream(seed, kTagRs);
  const auto card = space.cardinality();

  // Exact without-replacement sampling for enumerable spaces; rejection
  // sampling elsewhere (collisions stay negligible there).
  std::vector<Config> all;
  std::vector<std::size_t> remaining;
  if (card && *card <= kRsEnumerationCap) {
    all = space.enumerate_all();
    remaining.resize(all.size());
    std::iota(remaining.begin(), remaining.end(), std::size_t{0});
  }

  while (!st.done) {
    if (st.space_exhausted()) {
      st.finish(RunStatus::space_exhausted);
      break;
    }
    Config config;
    if (!all.empty()) {
      const std::size_t pick = rand_below(rng, remaining.size());
      config = all[remaining[pick]];
      remaining[pick] = remaining.back();
      remaining.pop_back();
    } else if (card) {
      do {
        config = space.sample_uniform(rng);
      } while (st.evaluated.count(space.key(config)));
    } else {
      config = space.sample_uniform(rng);
    }
    st.evaluate_config(config, 0.0);
  }
  return st.take_result();
}

RunResult run_rea(const BenchmarkTable& table, const ExitCriteria& exit_criteria,
                  std::uint64_t seed, int population_size, int tournament_size) {
  exit_criteria.validate();
  if (population_size < 1 || tournament_size < 1)
    throw std::invalid_argument("rea needs population and tournament sizes >= 1");
  const SearchSpace& space = table.space();
  LoopState st(table, exit_criteria, TerminationRule{});
  st.result.algorithm = "rea";
  st.result.seed = seed;

  Rng rng = make_stream(seed, kTagRea);
  std::deque<std::pair<Config, double>> population;

  for (int i = 0; i < population_size && !st.done; ++i) {
    const Config config = space.sample_uniform(rng);
    st.evaluate_config(config, 0.0);
    population.emplace_back(config, st.history.back().y);
  }

  while (!st.done) {
    // Aging tournament: sample with replacement, mutate the fittest, evict
    // the oldest.
    std::size_t winner = rand_below(rng, population.size());
    for (int t = 1; t < tournament_size; ++t) {
      const std::size_t i = rand_below(rng, population.size());
      if (population[i].second < population[winner].second) winner = i;
    }
    const Config child = space.mutate(population[winner].first, rng);
    st.evaluate_config(child, 0.0);
    population.emplace_back(child, st.history.back().y);
    if (population.size() > static_cast<std::size_t>(population_size)) population.pop_front();
  }
  return st.take_result();
}

RunResult run_algorithm(const std::string& name, const BenchmarkTable& table,
                        const EngineConfig& cfg, const ExitCriteria& exit_criteria,
                        std::uint64_t seed) {
  if (name == "b2ea") return run_b2ea(table, cfg, exit_criteria, seed);
  if (name == "gp_bo") return run_single_bo(table, cfg, exit_criteria, seed);
  if (name == "rs") return run_rs(table, exit_criteria, seed);
  if (name == "rea") return run_rea(table, exit_criteria, seed);
  throw std::invalid_argument("unknown algorithm '" + name + "'");
}

}  // namespace bbea
