#include "transfusion/harness.hpp"

#include "transfusion/dtransfusion.hpp"
#include "transfusion/rng.hpp"
#include "transfusion/transfusion.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <tuple>

namespace tfusion {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double_field(const std::string& s) {
  if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("bad number in records CSV: " + s);
  return v;
}

const FitResult& better_of(const FitResult& a, const FitResult& b) {
  return select_by_validation({a, b}) == 0 ? a : b;
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::lasso: return "lasso";
    case Method::pooled: return "pooled";
    case Method::tf1: return "tf1";
    case Method::tf2: return "tf2";
    case Method::dtf1: return "dtf1";
    case Method::dtf2: return "dtf2";
  }
  return "?";
}

Method method_from_string(std::string_view s) {
  for (Method m : all_methods()) {
    if (to_string(m) == s) return m;
  }
  throw std::invalid_argument("unknown method: " + std::string(s));
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods = {Method::lasso, Method::pooled, Method::tf1,
                                              Method::tf2,   Method::dtf1,   Method::dtf2};
  return methods;
}

SolverConfig BenchPlan::default_bench_solver() {
  SolverConfig cfg;
  cfg.method = SolverMethod::active_set;
  return cfg;
}

std::vector<std::string> BenchPlan::keys() {
  std::vector<std::string> k = {"scenario_id", "sweep", "values", "methods", "trials", "folds", "grid_points",
                                "grid_min_ratio", "fusion_constants", "timing", "kkt_tol", "max_iter"};
  for (auto& key : ScenarioConfig::keys()) k.push_back(key);
  return k;
}

void BenchPlan::apply(const KeyValues& kv) {
  reject_unknown_keys(kv, keys(), "bench config");
  KeyValues scenario;
  for (const auto& key : ScenarioConfig::keys()) {
    if (auto it = kv.find(key); it != kv.end()) scenario.insert(*it);
  }
  base.apply(scenario);
  read_value(kv, "scenario_id", scenario_id);
  std::string axis_name;
  read_value(kv, "sweep", axis_name);
  if (!axis_name.empty()) {
    if (axis_name == "K") axis = SweepAxis::K;
    else if (axis_name == "n_S") axis = SweepAxis::n_S;
    else throw std::invalid_argument("bench config: sweep must be K or n_S");
  }
  read_value(kv, "values", values);
  std::vector<std::string> names;
  read_value(kv, "methods", names);
  if (!names.empty()) {
    methods.clear();
    for (const auto& n : names) methods.push_back(method_from_string(n));
  }
  read_value(kv, "trials", trials);
  read_value(kv, "folds", folds);
  read_value(kv, "grid_points", grid_points);
  read_value(kv, "grid_min_ratio", grid_min_ratio);
  read_value(kv, "fusion_constants", fusion_constants);
  int timing = record_timing ? 1 : 0;
  read_value(kv, "timing", timing);
  record_timing = timing != 0;
  read_value(kv, "kkt_tol", solver.kkt_tol);
  read_value(kv, "max_iter", solver.max_iter);
}

void BenchPlan::validate() const {
  if (trials < 1) throw std::invalid_argument("bench plan: trials must be >= 1");
  if (values.empty()) throw std::invalid_argument("bench plan: empty sweep");
  if (methods.empty()) throw std::invalid_argument("bench plan: no methods");
  if (folds < 2) throw std::invalid_argument("bench plan: folds must be >= 2");
  if (scenario_id.empty() || scenario_id.find(',') != std::string::npos) {
    throw std::invalid_argument("bench plan: scenario_id must be nonempty and comma-free");
  }
  for (int v : values) {
    if (v < (axis == SweepAxis::K ? 0 : 1)) throw std::invalid_argument("bench plan: bad sweep value");
  }
  tuning_grid().validate();
  solver.validate();
  for (std::size_t j = 0; j < values.size(); ++j) point_config(j, 0).validate();
}

TuningGrid BenchPlan::tuning_grid() const {
  TuningGrid g;
  g.folds = folds;
  g.points = grid_points;
  g.min_ratio = grid_min_ratio;
  g.fusion_constants = fusion_constants;
  return g;
}

std::uint64_t BenchPlan::trial_seed(std::size_t point, int trial) const {
  return derive_seed(base.seed, {static_cast<std::uint64_t>(point), static_cast<std::uint64_t>(trial)});
}

ScenarioConfig BenchPlan::point_config(std::size_t point, int trial) const {
  ScenarioConfig cfg = base;
  if (axis == SweepAxis::K) cfg.k = values.at(point);
  else cfg.n_s = values.at(point);
  cfg.seed = trial_seed(point, trial);
  return cfg;
}

std::vector<TrialRecord> run_trial(const TransferProblem& problem, const Vector& truth_beta,
                                   const std::vector<Method>& methods, const BenchPlan& plan, std::uint64_t fold_seed) {
  const TuningGrid grid = plan.tuning_grid();
  const ValidationPlan vplan{plan.folds, fold_seed};
  const SolverConfig& cfg = plan.solver;
  auto wants = [&](Method m) { return std::find(methods.begin(), methods.end(), m) != methods.end(); };

  struct Outcome {
    std::optional<FitResult> fit;
    double ms = 0.0;
  };
  std::map<Method, Outcome> done;
  auto attempt = [&](std::initializer_list<Method> targets, auto&& body) {
    const auto start = Clock::now();
    try {
      body();
    } catch (const std::exception&) {
      // The cell is recorded as failed below.
    }
    const double ms = elapsed_ms(start);
    for (Method m : targets) done[m].ms = ms;
  };

  if (wants(Method::lasso)) {
    attempt({Method::lasso}, [&] { done[Method::lasso].fit = lasso_baseline(problem.target(), grid, cfg, fold_seed); });
  }
  if (wants(Method::pooled)) {
    attempt({Method::pooled}, [&] { done[Method::pooled].fit = pooled_baseline(problem, grid, cfg, fold_seed); });
  }
  if (wants(Method::tf2)) {
    attempt({Method::tf1, Method::tf2}, [&] {
      const AutoFitReport r = fit_auto_report(problem, grid, cfg, vplan);
      if (r.candidates.empty()) {
        done[Method::tf1].fit = r.selected;
        done[Method::tf2].fit = r.selected;
      } else {
        done[Method::tf1].fit = r.candidates[0];
        done[Method::tf2].fit = better_of(r.candidates[1], r.candidates[2]);
      }
    });
  } else if (wants(Method::tf1)) {
    attempt({Method::tf1}, [&] { done[Method::tf1].fit = fit_one_step(problem, grid, cfg, vplan); });
  }
  if (wants(Method::dtf1) || wants(Method::dtf2)) {
    attempt({Method::dtf1, Method::dtf2}, [&] {
      std::vector<SourceMessage> messages;
      messages.reserve(problem.sources().size());
      for (const auto& s : problem.sources()) messages.push_back(source_precompute(s, cfg));
      const DFitReport r = dtransfusion_fit_report(problem.target(), messages, grid, cfg, vplan);
      if (r.candidates.empty()) {
        done[Method::dtf1].fit = r.selected;
        done[Method::dtf2].fit = r.selected;
      } else {
        done[Method::dtf1].fit = r.candidates[0];
        done[Method::dtf2].fit = better_of(r.candidates[1], r.candidates[2]);
      }
    });
  }

  std::vector<TrialRecord> out;
  for (Method m : methods) {
    TrialRecord rec;
    rec.method = m;
    const Outcome& o = done[m];
    rec.runtime_ms = plan.record_timing ? o.ms : 0.0;
    if (o.fit) {
      rec.l2_error = estimation_error(o.fit->beta_target, truth_beta);
      rec.strategy = std::string(to_string(o.fit->strategy));
      rec.converged = o.fit->converged;
    } else {
      rec.l2_error = std::numeric_limits<double>::quiet_NaN();
      rec.strategy = "failed";
      rec.converged = false;
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<TrialRecord> run_bench(const BenchPlan& plan) {
  plan.validate();
  const std::size_t points = plan.values.size();
  const std::size_t cells = points * static_cast<std::size_t>(plan.trials);
  std::vector<std::vector<TrialRecord>> per_cell(cells);

#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t c = 0; c < cells; ++c) {
    const std::size_t j = c / static_cast<std::size_t>(plan.trials);
    const int i = static_cast<int>(c % static_cast<std::size_t>(plan.trials));
    const ScenarioConfig sc = plan.point_config(j, i);
    std::vector<TrialRecord> recs;
    try {
      const auto [problem, truth] = gen_scenario(sc);
      recs = run_trial(problem, truth.beta0, plan.methods, plan, derive_seed(sc.seed, {0xF01D}));
    } catch (const std::exception&) {
      for (Method m : plan.methods) {
        TrialRecord r;
        r.method = m;
        r.l2_error = std::numeric_limits<double>::quiet_NaN();
        r.strategy = "failed";
        recs.push_back(r);
      }
    }
    for (auto& r : recs) {
      r.scenario_id = plan.scenario_id;
      r.k = sc.k;
      r.n_s = sc.n_s;
      r.trial_seed = sc.seed;
    }
    per_cell[c] = std::move(recs);
  }

  std::vector<TrialRecord> out;
  out.reserve(cells * plan.methods.size());
  for (auto& recs : per_cell) {
    for (auto& r : recs) out.push_back(std::move(r));
  }
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records) {
  if (records.empty()) throw std::invalid_argument("summarize: no records");
  using Key = std::tuple<std::string, int, Index, int>;
  std::map<Key, std::vector<double>> groups;
  std::map<Key, int> failures;
  for (const auto& r : records) {
    const Key key{r.scenario_id, r.k, r.n_s, static_cast<int>(r.method)};
    auto& g = groups[key];
    if (std::isfinite(r.l2_error)) g.push_back(r.l2_error);
    else ++failures[key];
  }
  std::vector<SummaryRow> rows;
  for (auto& [key, values] : groups) {
    SummaryRow row;
    row.scenario_id = std::get<0>(key);
    row.k = std::get<1>(key);
    row.n_s = std::get<2>(key);
    row.method = static_cast<Method>(std::get<3>(key));
    row.failures = failures[key];
    row.count = static_cast<int>(values.size());
    if (!values.empty()) {
      double sum = 0.0;
      for (double v : values) sum += v;
      row.mean = sum / row.count;
      double ss = 0.0;
      for (double v : values) ss += (v - row.mean) * (v - row.mean);
      row.std_error = row.count > 1 ? std::sqrt(ss / (row.count - 1)) / std::sqrt(static_cast<double>(row.count)) : 0.0;
      std::sort(values.begin(), values.end());
      const std::size_t n = values.size();
      row.median = n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
    } else {
      row.mean = row.std_error = row.median = std::numeric_limits<double>::quiet_NaN();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

const SummaryRow& find_summary(const std::vector<SummaryRow>& rows, Method method, int k, Index n_s) {
  for (const auto& r : rows) {
    if (r.method == method && r.k == k && r.n_s == n_s) return r;
  }
  throw std::out_of_range("find_summary: no row for " + std::string(to_string(method)) + " K=" + std::to_string(k) +
                          " n_S=" + std::to_string(n_s));
}

const std::string& records_csv_header() {
  static const std::string header = "scenario_id,method,K,n_S,trial_seed,l2_error,runtime_ms,strategy,converged";
  return header;
}

void write_records(std::ostream& out, const std::vector<TrialRecord>& records) {
  out << records_csv_header() << '\n';
  for (const auto& r : records) {
    out << r.scenario_id << ',' << to_string(r.method) << ',' << r.k << ',' << r.n_s << ',' << r.trial_seed << ','
        << g17(r.l2_error) << ',' << g17(r.runtime_ms) << ',' << r.strategy << ',' << (r.converged ? 1 : 0) << '\n';
  }
}

std::vector<TrialRecord> read_records(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != records_csv_header()) {
    throw std::invalid_argument("records CSV: missing or unexpected header");
  }
  std::vector<TrialRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 9) throw std::invalid_argument("records CSV: expected 9 fields: " + line);
    TrialRecord r;
    r.scenario_id = f[0];
    r.method = method_from_string(f[1]);
    r.k = std::stoi(f[2]);
    r.n_s = static_cast<Index>(std::stoll(f[3]));
    r.trial_seed = std::stoull(f[4]);
    r.l2_error = parse_double_field(f[5]);
    r.runtime_ms = parse_double_field(f[6]);
    r.strategy = f[7];
    if (f[8] != "0" && f[8] != "1") throw std::invalid_argument("records CSV: converged must be 0 or 1");
    r.converged = f[8] == "1";
    out.push_back(std::move(r));
  }
  return out;
}

void write_summary(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "scenario_id,method,K,n_S,count,failures,mean,stderr,median\n";
  for (const auto& r : rows) {
    out << r.scenario_id << ',' << to_string(r.method) << ',' << r.k << ',' << r.n_s << ',' << r.count << ','
        << r.failures << ',' << g17(r.mean) << ',' << g17(r.std_error) << ',' << g17(r.median) << '\n';
  }
}

}  // namespace tfusion
