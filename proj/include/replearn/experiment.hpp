#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "replearn/reductions.hpp"
#include "replearn/theory_lab.hpp"

namespace replearn {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EvalParams {
  std::size_t eval_tasks = 200;
  std::size_t n_spec = 100;
  std::size_t test_points = 200;
};

struct RepErrEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
};

/// Monte-Carlo estimate of the meta-error of a representation: fresh tasks
/// from the evaluation stream, exact ERM specialization on n_spec samples,
/// error measured on test_points further samples, averaged over tasks.
inline RepErrEstimate evaluate_rep_err(const LinearRep& rep, const SyntheticMeta& meta,
                                       const EvalParams& eval) {
  require(eval.eval_tasks >= 1, "evaluate_rep_err: eval_tasks must be >= 1");
  require(eval.n_spec >= 1 && eval.test_points >= 1,
          "evaluate_rep_err: n_spec and test_points must be >= 1");
  Vec errs;
  errs.reserve(eval.eval_tasks);
  for (std::size_t j = 0; j < eval.eval_tasks; ++j) {
    const TaskHandle task = make_task(meta, stream::eval, j);
    const TaskDataset spec_data = draw_dataset(meta, task, eval.n_spec);
    const Halfspace f = specialize(rep, spec_data);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < eval.test_points; ++i) {
      const LabeledPoint p = draw_point(meta, task, eval.n_spec + i);
      if (f.classify(rep.B.apply(p.x)) != p.y) ++wrong;
    }
    errs.push_back(static_cast<double>(wrong) / eval.test_points);
  }
  RepErrEstimate out;
  for (double e : errs) out.estimate += e;
  out.estimate /= errs.size();
  if (errs.size() > 1) {
    double ss = 0.0;
    for (double e : errs) ss += (e - out.estimate) * (e - out.estimate);
    out.stderr_ = std::sqrt(ss / (errs.size() - 1) / errs.size());
  }
  return out;
}

struct ExperimentConfig {
  std::string mode;
  std::size_t d = 4, k = 1, t = 50, n = 3, n_spec = 100;
  double eta = 0.0;
  double epsilon = 0.15;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  FeatureLaw law = FeatureLaw::gaussian;
  SearchConfig search;
  EvalParams eval;
  double c = 8.0;                      // reduction confidence/error tradeoff
  std::size_t ell_min = 3, ell_max = 4;  // nrc-scan range
  std::string witness_cases = "1x1x1,2x1x2,1x2x2,2x1x1";
  std::size_t instances = 50;  // verify: distributions per seed
  std::string out_dir = "out";

  void validate() const {
    require(d >= 1 && k >= 1 && t >= 1 && n >= 1 && n_spec >= 1,
            "config: counts must be positive");
    require(eta >= 0.0 && eta < 0.5, "config: eta must be in [0, 0.5)");
    require(epsilon > 0.0 && epsilon < 1.0, "config: epsilon must be in (0, 1)");
    require(!seeds.empty(), "config: at least one seed");
    if (mode == "metalearn-mon")
      require(n == 2 && k == 1, "config: metalearn-mon needs n = 2 and k = 1");
    search.validate();
  }
};

struct RunResult {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::pair<std::string, std::string>> summary;  // key, value
};

namespace detail {

inline std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline std::string fmt_u64(std::uint64_t v) { return std::to_string(v); }

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct KeyValue {
  std::string key, value;
  std::size_t line = 0;
};

/// key = value lines with optional [mode] sections and # comments. Returns
/// the keys visible to `mode`: global ones overlaid by the mode's section.
inline std::vector<KeyValue> read_config_lines(const std::string& path,
                                               const std::string& mode) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::map<std::string, KeyValue> global, scoped;
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) + ": unterminated section");
      section = trim(body.substr(1, body.size() - 2));
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    KeyValue kv{trim(body.substr(0, eq)), trim(body.substr(eq + 1)), lineno};
    if (kv.key.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (section.empty())
      global[kv.key] = kv;
    else if (section == mode)
      scoped[kv.key] = kv;
  }
  std::vector<KeyValue> out;
  for (const auto& [k, v] : global)
    if (!scoped.count(k)) out.push_back(v);
  for (const auto& [k, v] : scoped) out.push_back(v);
  return out;
}

inline std::uint64_t parse_u64(const KeyValue& kv) {
  try {
    std::size_t pos = 0;
    const std::uint64_t v = std::stoull(kv.value, &pos);
    if (pos != kv.value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("line " + std::to_string(kv.line) + ": '" + kv.key +
                      "' needs an unsigned integer, got '" + kv.value + "'");
  }
}

inline double parse_double(const KeyValue& kv) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(kv.value, &pos);
    if (pos != kv.value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("line " + std::to_string(kv.line) + ": '" + kv.key +
                      "' needs a number, got '" + kv.value + "'");
  }
}

inline std::vector<std::uint64_t> parse_seed_list(const KeyValue& kv) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(kv.value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      seeds.push_back(std::stoull(item));
    } catch (const std::exception&) {
      throw ConfigError("line " + std::to_string(kv.line) + ": bad seed '" + item + "'");
    }
  }
  if (seeds.empty())
    throw ConfigError("line " + std::to_string(kv.line) + ": empty seed list");
  return seeds;
}

}  // namespace detail

inline const std::vector<std::string>& experiment_modes() {
  static const std::vector<std::string> modes = {
      "metalearn-mon", "metalearn-real", "metalearn-agn", "multitask",
      "reduction",     "verify",         "vc-witness",    "nrc-scan"};
  return modes;
}

inline ExperimentConfig parse_config_file(const std::string& path,
                                          const std::string& mode) {
  if (std::find(experiment_modes().begin(), experiment_modes().end(), mode) ==
      experiment_modes().end())
    throw ConfigError("unknown mode: " + mode);
  ExperimentConfig cfg;
  cfg.mode = mode;
  for (const auto& kv : detail::read_config_lines(path, mode)) {
    if (kv.key == "d") cfg.d = detail::parse_u64(kv);
    else if (kv.key == "k") cfg.k = detail::parse_u64(kv);
    else if (kv.key == "t") cfg.t = detail::parse_u64(kv);
    else if (kv.key == "n") cfg.n = detail::parse_u64(kv);
    else if (kv.key == "n_spec") cfg.n_spec = detail::parse_u64(kv);
    else if (kv.key == "eta") cfg.eta = detail::parse_double(kv);
    else if (kv.key == "epsilon") cfg.epsilon = detail::parse_double(kv);
    else if (kv.key == "seeds") cfg.seeds = detail::parse_seed_list(kv);
    else if (kv.key == "feature_law") {
      if (kv.value == "gaussian") cfg.law = FeatureLaw::gaussian;
      else if (kv.value == "uniform_cube") cfg.law = FeatureLaw::uniform_cube;
      else
        throw ConfigError("line " + std::to_string(kv.line) +
                          ": feature_law must be gaussian or uniform_cube");
    } else if (kv.key == "restarts") cfg.search.restarts = detail::parse_u64(kv);
    else if (kv.key == "iters") cfg.search.iters = detail::parse_u64(kv);
    else if (kv.key == "step0") cfg.search.step0 = detail::parse_double(kv);
    else if (kv.key == "step_decay") cfg.search.step_decay = detail::parse_double(kv);
    else if (kv.key == "pool") cfg.search.pool = detail::parse_u64(kv);
    else if (kv.key == "eval_tasks") cfg.eval.eval_tasks = detail::parse_u64(kv);
    else if (kv.key == "test_points") cfg.eval.test_points = detail::parse_u64(kv);
    else if (kv.key == "c") cfg.c = detail::parse_double(kv);
    else if (kv.key == "ell_min") cfg.ell_min = detail::parse_u64(kv);
    else if (kv.key == "ell_max") cfg.ell_max = detail::parse_u64(kv);
    else if (kv.key == "witness_cases") cfg.witness_cases = kv.value;
    else if (kv.key == "instances") cfg.instances = detail::parse_u64(kv);
    else if (kv.key == "out") cfg.out_dir = kv.value;
    else
      throw ConfigError("line " + std::to_string(kv.line) + ": unknown key '" +
                        kv.key + "'");
  }
  cfg.eval.n_spec = cfg.n_spec;
  try {
    cfg.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

namespace detail {

inline SyntheticMeta seeded_meta(const ExperimentConfig& cfg, std::uint64_t seed,
                                 bool monotone) {
  SyntheticMeta meta(random_ground_rep(cfg.k, cfg.d, seed), cfg.law, cfg.eta, seed);
  meta.monotone_tasks = monotone;
  return meta;
}

inline SearchConfig seeded_search(const ExperimentConfig& cfg, std::uint64_t seed) {
  SearchConfig s = cfg.search;
  s.seed = seed;
  return s;
}

/// Random atom distribution over R^1 with label conflicts; used by the
/// verify mode's report rows.
inline DiscreteDist verify_dist(std::uint64_t seed, std::uint64_t index) {
  Rng rng = Rng(seed).derive(0xd157u).derive(index);
  std::vector<Atom> atoms;
  Vec raw;
  const std::size_t values = 2 + rng.next_index(4);
  for (std::size_t i = 0; i < values; ++i) {
    const double z = rng.next_gaussian();
    atoms.push_back({{z}, rng.next_bernoulli(0.5) ? +1 : -1, 0.0});
    raw.push_back(0.05 + rng.next_unit());
    if (rng.next_bernoulli(0.6)) {
      atoms.push_back({{z}, -atoms.back().y, 0.0});
      raw.push_back(0.05 + rng.next_unit());
    }
  }
  double sum = 0.0;
  for (double w : raw) sum += w;
  for (std::size_t i = 0; i < atoms.size(); ++i) atoms[i].prob = raw[i] / sum;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < atoms.size(); ++i) acc += atoms[i].prob;
  atoms.back().prob = 1.0 - acc;
  return DiscreteDist(std::move(atoms), 1);
}

struct SeedOutcome {
  std::vector<std::vector<std::string>> rows;
  double primary = 0.0;    // headline metric for the summary
  double secondary = 0.0;  // mode-specific second metric
  bool pass = true;
};

inline SeedOutcome run_metalearn_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
  const bool monotone = cfg.mode == "metalearn-mon";
  const std::size_t k = cfg.k;
  SyntheticMeta meta = seeded_meta(cfg, seed, monotone);
  MetaSample sample = sample_meta(meta, cfg.t, cfg.n);

  LearnResult learned;
  if (cfg.mode == "metalearn-mon")
    learned = metalearn_monotone(sample);
  else if (cfg.mode == "metalearn-real")
    learned = metalearn_realizable(sample, k, Family::halfspace, seeded_search(cfg, seed));
  else
    learned = metalearn_agnostic(sample, k, seeded_search(cfg, seed));

  const RepErrEstimate rep_err = evaluate_rep_err(learned.rep, meta, cfg.eval);
  SeedOutcome out;
  out.rows.push_back({fmt_u64(seed), fmt_double(learned.objective),
                      fmt_double(rep_err.estimate), fmt_double(rep_err.stderr_)});
  out.primary = rep_err.estimate;
  out.secondary = learned.objective;
  out.pass = rep_err.estimate <= cfg.epsilon;
  return out;
}

inline SeedOutcome run_multitask_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
  SyntheticMeta meta = seeded_meta(cfg, seed, false);
  std::vector<TaskHandle> handles;
  std::vector<TaskDataset> tasks;
  for (std::size_t j = 0; j < cfg.t; ++j) {
    handles.push_back(make_task(meta, stream::train, j));
    tasks.push_back(draw_dataset(meta, handles.back(), cfg.n));
  }
  MultitaskModel model = multitask_erm(tasks, cfg.k, seeded_search(cfg, seed));

  Vec errs;
  for (std::size_t j = 0; j < cfg.t; ++j) {
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < cfg.eval.test_points; ++i) {
      const LabeledPoint p = draw_point(meta, handles[j], cfg.n + i);
      if (model.specialists[j].classify(model.rep.B.apply(p.x)) != p.y) ++wrong;
    }
    errs.push_back(static_cast<double>(wrong) / cfg.eval.test_points);
  }
  double mean = 0.0;
  for (double e : errs) mean += e;
  mean /= errs.size();
  double ss = 0.0;
  for (double e : errs) ss += (e - mean) * (e - mean);
  const double se = errs.size() > 1 ? std::sqrt(ss / (errs.size() - 1) / errs.size()) : 0.0;

  SeedOutcome out;
  out.rows.push_back({fmt_u64(seed), fmt_double(model.training_error), fmt_double(mean),
                      fmt_double(se)});
  out.primary = mean;
  out.secondary = model.training_error;
  out.pass = mean <= cfg.epsilon;
  return out;
}

inline SeedOutcome run_reduction_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
  SyntheticMeta meta = seeded_meta(cfg, seed, false);

  // Metalearning from multitask learning on a fresh task.
  StoredSpecializer spec;
  for (std::size_t j = 0; j < cfg.t; ++j)
    spec.stored.push_back(draw_dataset(meta, make_task(meta, stream::train, j), cfg.n));
  spec.k = cfg.k;
  spec.cfg = seeded_search(cfg, seed);
  spec.seed = seed;

  const TaskHandle fresh = make_task(meta, stream::eval, 0);
  const TaskDataset fresh_data = draw_dataset(meta, fresh, cfg.n);
  const TaskClassifier g = meta_from_multitask(spec, fresh_data, seed);

  std::size_t wrong = 0, wrong_direct = 0;
  const Halfspace direct = specialize(meta.b_star, fresh_data);
  for (std::size_t i = 0; i < cfg.eval.test_points; ++i) {
    const LabeledPoint p = draw_point(meta, fresh, cfg.n + i);
    if (g(p.x) != p.y) ++wrong;
    if (direct.classify(meta.b_star.B.apply(p.x)) != p.y) ++wrong_direct;
  }
  const double meta_err = static_cast<double>(wrong) / cfg.eval.test_points;
  const double direct_err = static_cast<double>(wrong_direct) / cfg.eval.test_points;

  // Multitask learning from metalearning under the oversampling budget.
  const std::size_t budget = reduction_budget(cfg.n, cfg.c, cfg.t, cfg.n_spec);
  std::vector<TaskHandle> handles;
  std::vector<TaskDataset> tasks;
  for (std::size_t j = 0; j < cfg.t; ++j) {
    handles.push_back(make_task(meta, stream::train, 1000000 + j));
    tasks.push_back(draw_dataset(meta, handles.back(), budget));
  }
  Metalearner learner = [&](const MetaSample& s) {
    return metalearn_agnostic(s, cfg.k, seeded_search(cfg, seed)).rep;
  };
  auto classifiers = multitask_from_meta(tasks, cfg.c, learner, cfg.n, cfg.n_spec, seed);

  double mtl_median = std::numeric_limits<double>::quiet_NaN();
  const bool bot = !classifiers.has_value();
  if (!bot) {
    Vec errs;
    for (std::size_t j = 0; j < cfg.t; ++j) {
      std::size_t w = 0;
      for (std::size_t i = 0; i < cfg.eval.test_points; ++i) {
        const LabeledPoint p = draw_point(meta, handles[j], budget + i);
        if ((*classifiers)[j](p.x) != p.y) ++w;
      }
      errs.push_back(static_cast<double>(w) / cfg.eval.test_points);
    }
    mtl_median = median_of(errs);
  }

  SeedOutcome out;
  out.rows.push_back({fmt_u64(seed), fmt_double(meta_err), fmt_double(direct_err),
                      bot ? "1" : "0", fmt_double(mtl_median)});
  out.primary = meta_err;
  out.secondary = bot ? 1.0 : 0.0;
  out.pass = meta_err <= cfg.epsilon;
  return out;
}

inline SeedOutcome run_verify_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
  SeedOutcome out;
  out.pass = true;
  for (std::size_t i = 0; i < cfg.instances; ++i) {
    const DiscreteDist dist = verify_dist(seed, i);
    const MonBoundReport mon = check_mon_bound(dist);
    out.rows.push_back({fmt_u64(seed), std::to_string(i), "mon-bound",
                        fmt_double(mon.err), fmt_double(mon.err_sq), fmt_double(mon.pnr),
                        fmt_double(0.0), fmt_double(mon.err_sq), mon.pass ? "1" : "0"});
    out.pass = out.pass && mon.pass;

    const double err_hs = exact_err(dist, Family::halfspace);
    if (err_hs > 0.0) {
      const PnrEstimate p = exact_pnr(dist, Family::halfspace, 3);
      const double bound = pnr_lower_bound(err_hs, 3, 2);
      const bool pass = p.value >= bound - (p.exact ? 1e-12 : 3.0 * p.stderr_);
      out.rows.push_back({fmt_u64(seed), std::to_string(i), "pnr-floor",
                          fmt_double(err_hs), fmt_double(err_hs * err_hs),
                          fmt_double(p.value), fmt_double(p.stderr_), fmt_double(bound),
                          pass ? "1" : "0"});
      out.pass = out.pass && pass;
    }
  }
  out.primary = out.pass ? 1.0 : 0.0;
  return out;
}

inline std::vector<std::array<std::size_t, 3>> parse_witness_cases(const std::string& s) {
  std::vector<std::array<std::size_t, 3>> cases;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    std::array<std::size_t, 3> tdk{};
    std::size_t pos = 0;
    for (int part = 0; part < 3; ++part) {
      std::size_t next = item.find('x', pos);
      const std::string tok =
          part == 2 ? item.substr(pos) : item.substr(pos, next - pos);
      try {
        tdk[part] = std::stoull(tok);
      } catch (const std::exception&) {
        throw ConfigError("bad witness case '" + item + "' (expected txdxk)");
      }
      if (part < 2) {
        if (next == std::string::npos)
          throw ConfigError("bad witness case '" + item + "' (expected txdxk)");
        pos = next + 1;
      }
    }
    cases.push_back(tdk);
  }
  if (cases.empty()) throw ConfigError("witness_cases is empty");
  return cases;
}

}  // namespace detail

/// Executes the configured mode for every seed (seeds in parallel up to
/// `threads`), writing rows.csv, summary.csv and config.echo under
/// cfg.out_dir. Output bytes are a pure function of (config, seeds).
inline RunResult run_experiment(const ExperimentConfig& cfg, std::size_t threads = 1) {
  cfg.validate();
  RunResult result;
  std::vector<detail::SeedOutcome> outcomes;

  if (cfg.mode == "vc-witness") {
    result.header = {"t", "d", "k", "witness_size", "labelings", "all_realized"};
    for (const auto& [t, d, k] : detail::parse_witness_cases(cfg.witness_cases)) {
      const WitnessReport rep = vc_witness(t, d, k);
      result.rows.push_back({std::to_string(t), std::to_string(d), std::to_string(k),
                             std::to_string(rep.witness_size),
                             std::to_string(rep.labelings),
                             rep.all_realized ? "1" : "0"});
    }
    double realized = 0.0;
    for (const auto& row : result.rows) realized += row.back() == "1";
    result.summary.emplace_back("cases", std::to_string(result.rows.size()));
    result.summary.emplace_back(
        "all_realized_rate",
        detail::fmt_double(realized / static_cast<double>(result.rows.size())));
  } else if (cfg.mode == "nrc-scan") {
    result.header = {"ell", "class", "vc", "nrc"};
    require(cfg.ell_min >= 2 && cfg.ell_min <= cfg.ell_max && cfg.ell_max <= 6,
            "nrc-scan: need 2 <= ell_min <= ell_max <= 6");
    for (std::size_t ell = cfg.ell_min; ell <= cfg.ell_max; ++ell) {
      struct Case {
        const char* name;
        FiniteClass cls;
      };
      const Case cases[] = {{"point-functions", point_function_class(ell)},
                            {"point-functions+const", point_function_class_with_constant(ell)},
                            {"pinned-origin", pinned_origin_class(ell)}};
      for (const auto& c : cases)
        result.rows.push_back({std::to_string(ell), c.name,
                               std::to_string(finite_vc(c.cls)),
                               std::to_string(finite_nrc(c.cls))});
    }
    result.summary.emplace_back("rows", std::to_string(result.rows.size()));
  } else {
    if (cfg.mode == "metalearn-mon" || cfg.mode == "metalearn-real" ||
        cfg.mode == "metalearn-agn")
      result.header = {"seed", "objective", "rep_err", "rep_err_stderr"};
    else if (cfg.mode == "multitask")
      result.header = {"seed", "train_error", "mean_test_error", "test_stderr"};
    else if (cfg.mode == "reduction")
      result.header = {"seed", "meta_test_error", "direct_test_error", "bot",
                       "mtl_median_test_error"};
    else if (cfg.mode == "verify")
      result.header = {"seed", "instance", "check", "err", "err_sq",
                       "pnr",  "pnr_stderr", "bound", "pass"};
    else
      throw ConfigError("unknown mode: " + cfg.mode);

    outcomes.resize(cfg.seeds.size());
    detail::parallel_index_for(cfg.seeds.size(), threads, [&](std::size_t i) {
      const std::uint64_t seed = cfg.seeds[i];
      const auto t0 = std::chrono::steady_clock::now();
      if (cfg.mode == "multitask")
        outcomes[i] = detail::run_multitask_seed(cfg, seed);
      else if (cfg.mode == "reduction")
        outcomes[i] = detail::run_reduction_seed(cfg, seed);
      else if (cfg.mode == "verify")
        outcomes[i] = detail::run_verify_seed(cfg, seed);
      else
        outcomes[i] = detail::run_metalearn_seed(cfg, seed);
      const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
      // Wallclock goes to the log only; output files stay a pure function of
      // (config, seeds).
      std::fprintf(stderr, "[%s] seed %llu done in %lld ms\n", cfg.mode.c_str(),
                   static_cast<unsigned long long>(seed),
                   static_cast<long long>(ms));
    });
    for (auto& o : outcomes)
      for (auto& row : o.rows) result.rows.push_back(std::move(row));

    Vec primaries, secondaries;
    double passed = 0.0;
    for (const auto& o : outcomes) {
      primaries.push_back(o.primary);
      secondaries.push_back(o.secondary);
      passed += o.pass ? 1.0 : 0.0;
    }
    const double seeds_n = static_cast<double>(cfg.seeds.size());
    result.summary.emplace_back("seeds", std::to_string(cfg.seeds.size()));
    if (cfg.mode == "multitask") {
      result.summary.emplace_back("median_test_error",
                                  detail::fmt_double(detail::median_of(primaries)));
      result.summary.emplace_back("median_train_error",
                                  detail::fmt_double(detail::median_of(secondaries)));
    } else if (cfg.mode == "reduction") {
      result.summary.emplace_back("median_meta_test_error",
                                  detail::fmt_double(detail::median_of(primaries)));
      double bots = 0.0;
      for (double s : secondaries) bots += s;
      result.summary.emplace_back("bot_rate", detail::fmt_double(bots / seeds_n));
    } else if (cfg.mode == "verify") {
      result.summary.emplace_back("instances_per_seed", std::to_string(cfg.instances));
    } else {
      result.summary.emplace_back("median_rep_err",
                                  detail::fmt_double(detail::median_of(primaries)));
      result.summary.emplace_back("median_objective",
                                  detail::fmt_double(detail::median_of(secondaries)));
    }
    result.summary.emplace_back("success_rate", detail::fmt_double(passed / seeds_n));
    result.summary.emplace_back("epsilon", detail::fmt_double(cfg.epsilon));
  }
  return result;
}

/// Serializes the effective configuration, one key = value per line.
inline std::string config_echo(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "mode = " << cfg.mode << "\n";
  os << "d = " << cfg.d << "\nk = " << cfg.k << "\nt = " << cfg.t << "\nn = " << cfg.n
     << "\nn_spec = " << cfg.n_spec << "\n";
  os << "eta = " << detail::fmt_double(cfg.eta)
     << "\nepsilon = " << detail::fmt_double(cfg.epsilon) << "\n";
  os << "seeds = ";
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i)
    os << (i ? "," : "") << cfg.seeds[i];
  os << "\n";
  os << "feature_law = "
     << (cfg.law == FeatureLaw::gaussian ? "gaussian" : "uniform_cube") << "\n";
  os << "restarts = " << cfg.search.restarts << "\niters = " << cfg.search.iters
     << "\nstep0 = " << detail::fmt_double(cfg.search.step0)
     << "\nstep_decay = " << detail::fmt_double(cfg.search.step_decay)
     << "\npool = " << cfg.search.pool << "\n";
  os << "eval_tasks = " << cfg.eval.eval_tasks
     << "\ntest_points = " << cfg.eval.test_points << "\n";
  os << "c = " << detail::fmt_double(cfg.c) << "\n";
  os << "ell_min = " << cfg.ell_min << "\nell_max = " << cfg.ell_max << "\n";
  os << "witness_cases = " << cfg.witness_cases << "\n";
  os << "instances = " << cfg.instances << "\n";
  os << "out = " << cfg.out_dir << "\n";
  return os.str();
}

/// Runs the experiment and persists rows.csv, summary.csv and config.echo.
inline RunResult run_and_write(const ExperimentConfig& cfg, std::size_t threads = 1) {
  RunResult result = run_experiment(cfg, threads);
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + cfg.out_dir);

  auto write_file = [&](const std::string& name, const std::string& contents) {
    const fs::path p = fs::path(cfg.out_dir) / name;
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + p.string());
    out << contents;
    if (!out) throw IoError("write failed: " + p.string());
  };

  std::ostringstream rows;
  for (std::size_t i = 0; i < result.header.size(); ++i)
    rows << (i ? "," : "") << result.header[i];
  rows << "\n";
  for (const auto& row : result.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) rows << (i ? "," : "") << row[i];
    rows << "\n";
  }
  write_file("rows.csv", rows.str());

  std::ostringstream summary;
  summary << "key,value\n";
  for (const auto& [k, v] : result.summary) summary << k << "," << v << "\n";
  write_file("summary.csv", summary.str());

  write_file("config.echo", config_echo(cfg));
  return result;
}

}  // namespace replearn
