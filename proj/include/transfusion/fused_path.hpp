#pragma once

// Shared CV engine behind the centralized estimator, the baselines and the
// distributed aggregation. Everything the engine needs from the sources is
// their Gram statistics, so raw source rows never reach it.

#include "transfusion/core_types.hpp"
#include "transfusion/cross_validation.hpp"
#include "transfusion/kernels.hpp"
#include "transfusion/prox_solver.hpp"

#include <optional>
#include <span>
#include <vector>

namespace tfusion {

/// Source-side least-squares statistics.
///
/// `sources` become fused blocks (one contrast each). `pooled_prior`, when
/// present, is added to the target block's Gram, i.e. those rows are treated
/// as if they came from the target model (pooled estimator).
struct FusedDesign {
  std::vector<kernels::GramBlock> sources;
  Index source_size = 0;
  std::optional<kernels::GramBlock> pooled_prior;
  Index pooled_rows = 0;

  int num_sources() const { return static_cast<int>(sources.size()); }
  static FusedDesign from_problem(const TransferProblem& problem);
  static FusedDesign pooled_from_problem(const TransferProblem& problem);
  static FusedDesign target_only() { return {}; }
};

/// Gram model for `design` plus the target rows `rows` of `target`.
QuadraticModel make_fused_model(const FusedDesign& design, const TaskSample& target, std::span<const Index> rows,
                                const SolverConfig& cfg);

struct FusedFit {
  CvCurve step1_curve;
  BlockParams theta;
  std::vector<Vector> betas;
  Vector w_hat;
  SolverDiagnostics step1_diagnostics;

  /// Leading constant of the fusion weights used (8 = theoretical).
  double fusion_constant = 8.0;

  std::optional<CvCurve> step2_curve;
  Vector delta_hat;
  SolverDiagnostics step2_diagnostics;
};

/// Fold ids over the target rows; falls back to leave-one-out when there are
/// fewer rows than folds.
std::vector<int> target_folds(Index n_t, int folds, std::uint64_t seed);

/// CV-tuned co-training (lambda_0 over the grid, fusion weights `a` fixed),
/// optionally followed by a CV-tuned local correction on the target.
/// Validation always uses held-out target rows only.
FusedFit fit_fused_path(const FusedDesign& design, const TaskSample& target, std::span<const double> a,
                        const TuningGrid& grid, const SolverConfig& cfg, std::span<const int> fold_ids,
                        bool two_step);

/// fit_fused_path once per grid.fusion_constants entry c, with fusion weights
/// theorem_a * c / 8; keeps the fit with the smallest first-step validation
/// error (ties to the earlier constant).
FusedFit fit_fused_tuned(const FusedDesign& design, const TaskSample& target, std::span<const double> theorem_a,
                         const TuningGrid& grid, const SolverConfig& cfg, std::span<const int> fold_ids,
                         bool two_step);

FitResult one_step_result(const FusedFit& fit, Strategy tag);
FitResult two_step_result(const FusedFit& fit, Strategy tag);

}  // namespace tfusion
