#pragma once

// Debiased-LASSO pseudo-samples: a local LASSO per source, an approximate
// inverse of the sample covariance row by row, and the one-step correction
//
//   beta_tilde = beta_lasso + (1/n) Theta X^T (y - X beta_lasso).

#include "transfusion/core_types.hpp"
#include "transfusion/prox_solver.hpp"

namespace tfusion {

struct ThetaRow {
  Vector theta;
  /// || Sigma theta - e_j ||_inf
  double feasibility_residual = 0.0;
  double mu_used = 0.0;
  /// theta^T Sigma theta
  double quadratic_value = 0.0;
  int sweeps = 0;
};

struct ThetaDiagnostics {
  double max_feasibility_residual = 0.0;
  /// max_j (Theta Sigma Theta^T)_jj
  double max_variance_diag = 0.0;
  double max_mu_used = 0.0;
};

struct PseudoSample {
  Vector beta_tilde;
  int source_index = 0;
  double lambda_used = 0.0;
  double mu_used = 0.0;
  ThetaDiagnostics theta_diagnostics;

  // Kept on the node that built it; never serialized.
  Vector beta_lasso;
  Matrix theta_hat;
};

/// Single-block LASSO 1/(2n)||y - X b||^2 + lambda ||b||_1.
Vector lasso_local(const TaskSample& sample, double lambda, const SolverConfig& cfg);

/// X^T X / n, uncentred.
Matrix sample_covariance(const Matrix& design);

/// minimize theta^T Sigma theta  subject to  ||Sigma theta - e_j||_inf <= mu.
///
/// Solved through the penalised form 1/2 theta^T Sigma theta - theta_j + mu ||theta||_1
/// by cyclic coordinate descent; its minimiser satisfies the constraint and the
/// KKT conditions of the constrained problem. When the constraint set is empty
/// (the penalised form is unbounded) mu is doubled, at most 10 times.
ThetaRow solve_theta_row(const Matrix& sigma_hat, Index j, double mu, const SolverConfig& cfg);

/// Debiased LASSO on one sample. Theta rows are solved concurrently.
PseudoSample debias_estimator(const TaskSample& sample, double lambda, double mu, const SolverConfig& cfg);

struct BiasVariance {
  /// (1/n) Theta X^T eps
  Vector variance_term;
  /// -(Theta Sigma - I)(beta_lasso - beta)
  Vector bias_term;
};

/// Splits beta_tilde - beta_true into its noise and bias parts (simulation only).
BiasVariance bias_variance_report(const TaskSample& sample, const Vector& beta_true, const PseudoSample& pseudo);

/// Scaled-LASSO noise level: alternates sigma = ||y - X b||/sqrt(n) with a LASSO
/// at lambda = sigma sqrt(2 log p / n).
double estimate_noise_sd(const TaskSample& sample, const SolverConfig& cfg);

struct DebiasParams {
  double lambda = 0.0;
  double mu = 0.0;
};

/// Default tuning: lambda = sigma_hat sqrt(log p / n), mu = sqrt(log p / n).
DebiasParams default_debias_params(const TaskSample& sample, const SolverConfig& cfg);

}  // namespace tfusion
