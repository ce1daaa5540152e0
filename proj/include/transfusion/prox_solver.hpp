#pragma once

// Weighted-LASSO engine for
//
//   minimize  1/(2N) || y - X theta ||^2 + sum_b lambda_b || theta_b ||_1
//
// over the block-sparse stacked design, by proximal gradient descent with a
// fixed step 1/L and soft-thresholding. Optional FISTA momentum with gradient
// restart is available for throughput-bound callers, as is an active-set
// Newton method (feature-sign search) that solves the problem exactly once the
// support is found (CV paths, benchmarks). Every method stops on the same KKT
// certificate.

#include "transfusion/core_types.hpp"
#include "transfusion/kernels.hpp"
#include "transfusion/stacked_operator.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace tfusion {

enum class SolverMethod { proximal_gradient, active_set };

struct SolverConfig {
  SolverMethod method = SolverMethod::proximal_gradient;
  int max_iter = 50000;
  double kkt_tol = 1e-7;
  double objective_tol = 1e-10;
  /// Fixed step; unset means 1 / lipschitz_upper.
  std::optional<double> step_size;
  /// FISTA momentum; proximal_gradient only.
  bool accelerated = false;
  std::uint64_t rng_seed = 0x7f4a7c15ULL;
  /// Power-iteration steps used for the Lipschitz estimate (>= 10).
  int power_probes = 100;
  kernels::Backend backend = kernels::Backend::omp;

  void validate() const;
};

struct SolverDiagnostics {
  /// Objective per iteration (every iteration when accelerated = false,
  /// every convergence check otherwise). For active_set one iteration is
  /// one Newton step or one round of gradient steps.
  std::vector<double> objective_trace;
  double kkt_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  double step_size = 0.0;
};

struct SolveResult {
  BlockParams theta;
  SolverDiagnostics diagnostics;
};

/// Gram-form view of a stacked least-squares problem: per row block
/// G_k = X_k^T X_k, c_k = X_k^T y_k, plus the normaliser N. Built once and
/// reused along a penalty path; the gradient costs O((K+1) p nnz) per call.
class QuadraticModel {
 public:
  QuadraticModel(std::vector<kernels::GramBlock> sources, kernels::GramBlock target, double normalizer,
                 int power_probes = 100, std::uint64_t seed = 0x7f4a7c15ULL,
                 kernels::Backend backend = kernels::Backend::omp);

  static QuadraticModel from_operator(const StackedOperator& op, const Vector& y, const SolverConfig& cfg);
  /// Plain least squares on one design.
  static QuadraticModel single_block(const Matrix& design, const Vector& responses, const SolverConfig& cfg);

  int num_sources() const { return static_cast<int>(sources_.size()); }
  Index dim() const { return target_.dim(); }
  Index num_params() const { return (num_sources() + 1) * dim(); }
  double normalizer() const { return normalizer_; }
  /// Upper estimate of lambda_max(X^T X)/N (power iteration, 5% inflation).
  double lipschitz() const { return lipschitz_; }

  /// Writes grad L(theta) and returns L(theta) = 1/(2N)||y - X theta||^2.
  double loss_and_gradient(const Vector& theta, Vector& grad) const;
  /// (X^T X / N) v.
  Vector hessian_apply(const Vector& v) const;
  /// Smallest lambda_0 at which theta = 0 is optimal for block weights
  /// `relative_weights` (lambda_b = lambda_0 * w_b). Blocks with w_b = 0 are skipped.
  double lambda_max(std::span<const double> relative_weights) const;

  const std::vector<kernels::GramBlock>& source_blocks() const { return sources_; }
  const kernels::GramBlock& target_block() const { return target_; }

 private:
  std::vector<kernels::GramBlock> sources_;
  kernels::GramBlock target_;
  double normalizer_;
  double yy_ = 0.0;
  double lipschitz_ = 0.0;
  kernels::Backend backend_;
};

/// Elementwise sign(v_i) max(|v_i| - t, 0).
Vector soft_threshold(const Vector& v, double t);

/// Power iteration on `normal_op` (symmetric PSD, dimension n): returns
/// 1.05 * ||A v|| after convergence or `probes` steps, deterministic in `seed`.
double power_iteration_upper(const std::function<Vector(const Vector&)>& normal_op, Index n, int probes,
                             std::uint64_t seed);

/// Upper estimate of lambda_max(X^T X)/N for the stacked operator.
double lipschitz_upper(const StackedOperator& op, int probes, std::uint64_t seed = 0x7f4a7c15ULL);

/// Maximal violation of the subgradient condition given a gradient:
/// max(|g_j| - lambda_b, 0) where theta_j = 0, |g_j + lambda_b sign(theta_j)| elsewhere.
double kkt_residual_from_gradient(const Vector& theta, const Vector& grad, std::span<const double> penalties,
                                  Index dim);

/// Same certificate, gradient evaluated through the matrix-free operator.
double kkt_residual(const StackedOperator& op, const Vector& y, std::span<const double> penalties,
                    const BlockParams& theta);

/// 1/(2N)||y - X theta||^2 + sum_b lambda_b ||theta_b||_1 via the operator.
double weighted_lasso_objective(const StackedOperator& op, const Vector& y, std::span<const double> penalties,
                                const BlockParams& theta);

/// Solve on a prebuilt Gram model, optionally warm-started from a flat theta.
SolveResult solve(const QuadraticModel& model, std::span<const double> penalties, const SolverConfig& cfg,
                  const Vector* warm_start = nullptr);

SolveResult solve_weighted_lasso(const StackedOperator& op, const Vector& y, std::span<const double> penalties,
                                 const SolverConfig& cfg, const BlockParams* warm_start = nullptr);

}  // namespace tfusion
