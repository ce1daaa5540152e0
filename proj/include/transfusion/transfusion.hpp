#pragma once

// Centralized two-step estimator: fused co-training of all tasks, the
// averaged first-step estimate w_hat, and a local correction on the target
// sample; plus the target-only LASSO and pooled baselines.

#include "transfusion/core_types.hpp"
#include "transfusion/cross_validation.hpp"
#include "transfusion/fused_path.hpp"
#include "transfusion/prox_solver.hpp"

#include <cstdint>
#include <vector>

namespace tfusion {

/// Which of the two theoretical penalty families to use. `A` is the regime
/// s log p / n_S >= h_bar sqrt(log p / n_T).
enum class Regime { A, Ac };

struct ProblemDims {
  Index total = 0;  // N
  Index source_size = 0;
  Index target_size = 0;
  Index dim = 0;
  int num_sources = 0;

  static ProblemDims of(const TransferProblem& problem);
  void validate() const;
};

/// Regime A: lambda_0 = c0 sqrt(log p / N), a_k = 8 sqrt(n_S / N).
/// Regime Ac: lambda_0 = c0 sqrt(log p / n_S), a_k = 8 n_S / N.
/// tilde_lambda is left at 0.
PenaltyWeights theorem_weights(const ProblemDims& dims, Regime regime, double c0 = 1.0);

/// True when s log p / n_S >= h_bar sqrt(log p / n_T).
bool in_regime_a(const ProblemDims& dims, double sparsity, double h_bar);

/// Stacked responses [y^(1); ...; y^(K); y^(0)].
Vector stacked_responses(const TransferProblem& problem);

struct CoTrainResult {
  BlockParams theta;
  /// beta-view, index 0 is the target.
  std::vector<Vector> betas;
  Vector w_hat;
  SolverDiagnostics diagnostics;
};

/// Fused co-training at fixed penalties, solved in the reparametrised form.
CoTrainResult step1_cotrain(const TransferProblem& problem, const PenaltyWeights& weights, const SolverConfig& cfg);

struct LocalCorrection {
  Vector delta_hat;
  Vector beta;
  SolverDiagnostics diagnostics;
};

/// delta_hat = argmin 1/(2 n_T)||y0 - X0 w_hat - X0 delta||^2 + tilde_lambda ||delta||_1,
/// beta = w_hat + delta_hat.
LocalCorrection step2_debias(const TaskSample& target, const Vector& w_hat, double tilde_lambda,
                             const SolverConfig& cfg);

struct ValidationPlan {
  int folds = 5;
  std::uint64_t seed = 0;
};

/// CV-tuned LASSO on the target sample only (grid.folds folds).
FitResult lasso_baseline(const TaskSample& target, const TuningGrid& grid, const SolverConfig& cfg,
                         std::uint64_t seed = 0);

/// One LASSO on all N rows, then the CV-tuned local correction.
FitResult pooled_baseline(const TransferProblem& problem, const TuningGrid& grid, const SolverConfig& cfg,
                          std::uint64_t seed = 0);

/// First step only, fusion weights from `regime`, lambda_0 by target CV.
FitResult fit_one_step(const TransferProblem& problem, const TuningGrid& grid, const SolverConfig& cfg,
                       const ValidationPlan& plan, Regime regime = Regime::A);

/// Two-step fit for one regime.
FitResult fit_two_step(const TransferProblem& problem, Regime regime, const TuningGrid& grid,
                       const SolverConfig& cfg, const ValidationPlan& plan);

struct AutoFitReport {
  FitResult selected;
  /// one_step, two_step_regime_A, two_step_regime_Ac (empty for K = 0).
  std::vector<FitResult> candidates;
};

/// Fits one-step, two-step (regime A) and two-step (regime Ac) and returns the
/// one with the smallest held-out target error. K = 0 reduces to the
/// CV-tuned target LASSO.
AutoFitReport fit_auto_report(const TransferProblem& problem, const TuningGrid& grid, const SolverConfig& cfg,
                              const ValidationPlan& plan);
FitResult fit_auto(const TransferProblem& problem, const TuningGrid& grid, const SolverConfig& cfg,
                   const ValidationPlan& plan);

/// Picks the smallest validation error; ties go to the earliest candidate.
std::size_t select_by_validation(const std::vector<FitResult>& candidates);

}  // namespace tfusion
