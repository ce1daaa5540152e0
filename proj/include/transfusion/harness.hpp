#pragma once

// Monte-Carlo bench runner: sweeps K or n_S, fits every requested method on
// shared per-trial datasets, and persists one CSV row per (point, method, trial).

#include "transfusion/cross_validation.hpp"
#include "transfusion/keyvalue.hpp"
#include "transfusion/prox_solver.hpp"
#include "transfusion/synthgen.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace tfusion {

enum class Method { lasso, pooled, tf1, tf2, dtf1, dtf2 };

std::string_view to_string(Method m);
Method method_from_string(std::string_view s);
const std::vector<Method>& all_methods();

struct TrialRecord {
  std::string scenario_id;
  Method method = Method::lasso;
  int k = 0;
  Index n_s = 0;
  std::uint64_t trial_seed = 0;
  /// NaN when the fit threw.
  double l2_error = 0.0;
  double runtime_ms = 0.0;
  std::string strategy;
  bool converged = false;

  bool operator==(const TrialRecord&) const = default;
};

enum class SweepAxis { K, n_S };

struct BenchPlan {
  std::string scenario_id = "bench";
  ScenarioConfig base = ScenarioConfig::desk();
  SweepAxis axis = SweepAxis::K;
  std::vector<int> values = {1, 3, 5};
  std::vector<Method> methods = {Method::lasso, Method::tf1};
  int trials = 50;
  /// Target-sample CV folds for every method.
  int folds = 5;
  int grid_points = 30;
  double grid_min_ratio = 1e-3;
  std::vector<double> fusion_constants = TuningGrid{}.fusion_constants;
  /// Wall-clock runtimes are written only when set; otherwise runtime_ms = 0
  /// so that reruns are byte-identical.
  bool record_timing = false;
  SolverConfig solver = default_bench_solver();

  static SolverConfig default_bench_solver();
  static std::vector<std::string> keys();
  /// Plan keys plus every ScenarioConfig key (applied to `base`).
  void apply(const KeyValues& kv);
  void validate() const;
  TuningGrid tuning_grid() const;

  ScenarioConfig point_config(std::size_t point, int trial) const;
  std::uint64_t trial_seed(std::size_t point, int trial) const;
};

/// Runs every cell. Trials run concurrently; records come back ordered by
/// (sweep point, trial, method) whatever the completion order.
std::vector<TrialRecord> run_bench(const BenchPlan& plan);

/// Fits the requested methods on one dataset, sharing work between methods
/// that have a common first step. `truth_beta` is only used for the error.
/// Records come back in `methods` order; scenario_id, K, n_S and trial_seed are
/// left for the caller.
std::vector<TrialRecord> run_trial(const TransferProblem& problem, const Vector& truth_beta,
                                   const std::vector<Method>& methods, const BenchPlan& plan, std::uint64_t fold_seed);

struct SummaryRow {
  std::string scenario_id;
  Method method = Method::lasso;
  int k = 0;
  Index n_s = 0;
  /// Finite records only.
  int count = 0;
  int failures = 0;
  double mean = 0.0;
  double std_error = 0.0;
  double median = 0.0;
};

/// Mean, sample standard error and median per (scenario, K, n_S, method).
std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records);

/// Looks up one summary row; throws if absent.
const SummaryRow& find_summary(const std::vector<SummaryRow>& rows, Method method, int k, Index n_s);

const std::string& records_csv_header();
void write_records(std::ostream& out, const std::vector<TrialRecord>& records);
std::vector<TrialRecord> read_records(std::istream& in);
void write_summary(std::ostream& out, const std::vector<SummaryRow>& rows);

}  // namespace tfusion
