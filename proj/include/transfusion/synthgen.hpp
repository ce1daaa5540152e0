#pragma once

// Synthetic transfer-learning scenarios: sparse target coefficients, diverse
// or non-diverse model shifts, and homogeneous / heterogeneous / arrowhead
// source covariances.

#include "transfusion/core_types.hpp"
#include "transfusion/keyvalue.hpp"
#include "transfusion/rng.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace tfusion {

enum class ShiftKind { diverse, nondiverse };
enum class DesignKind { homogeneous, heterogeneous, arrowhead };

std::string_view to_string(ShiftKind k);
std::string_view to_string(DesignKind k);
ShiftKind shift_kind_from_string(std::string_view s);
DesignKind design_kind_from_string(std::string_view s);

struct ScenarioConfig {
  Index p = 500;
  Index s = 10;
  Index n_t = 150;
  Index n_s = 200;
  int k = 5;
  double beta_level = 0.3;
  double h = 12.0;
  ShiftKind shift_kind = ShiftKind::diverse;
  DesignKind design_kind = DesignKind::homogeneous;
  /// Only for DesignKind::arrowhead.
  double arrowhead_c = 0.5;
  double noise_sd = 1.0;
  std::uint64_t seed = 1;

  /// p=200, s=5, n_T=100, n_S=150.
  static ScenarioConfig desk();
  static ScenarioConfig paper() { return {}; }

  void validate() const;

  static std::vector<std::string> keys();
  /// Overrides fields present in `kv`; unknown keys are rejected.
  void apply(const KeyValues& kv);
  KeyValues to_key_values() const;
};

/// A Gaussian design N(0, Sigma) with its sampling factor Sigma = L L^T.
class Covariance {
 public:
  static Covariance identity(Index p);
  /// Symmetric positive-definite `sigma`; throws NumericalError otherwise.
  static Covariance dense(Matrix sigma);

  Index dim() const { return p_; }
  bool is_identity() const { return sigma_.size() == 0; }
  Matrix matrix() const;
  const Matrix& factor() const { return factor_; }

  /// n rows i.i.d. N(0, Sigma).
  Matrix sample(Rng& rng, Index n) const;

 private:
  Index p_ = 0;
  Matrix sigma_;
  Matrix factor_;
};

struct GroundTruth {
  Vector beta0;
  std::vector<Vector> deltas;
  /// Index 0 is the target.
  std::vector<Covariance> sigmas;
  double epsilon_d = 0.0;
  /// ||delta_k||_1 as drawn.
  std::vector<double> realized_l1;

  Vector source_beta(int k) const { return beta0 + deltas.at(static_cast<std::size_t>(k)); }
};

/// Target X ~ N(0, I); sources per the design kind; y = X beta + noise_sd * eps.
std::pair<TransferProblem, GroundTruth> gen_scenario(const ScenarioConfig& cfg);

/// Shift vectors supported on the first min(50, p) coordinates, entries
/// N(0, (h/50)^2) (diverse) or N(0.1, (h/50)^2) (non-diverse). Diverse shifts
/// set the last vector to minus the sum of the others.
std::vector<Vector> gen_model_shift(ShiftKind kind, int k, double h, Index p, std::uint64_t seed);

/// Homogeneous: I. Heterogeneous: A^T A + I with A_ij = 0.3 w.p. 0.3, else 0.
/// Arrowhead: arrowhead_sigma(p, c).
Covariance gen_covariance(DesignKind kind, Index p, std::uint64_t seed, double arrowhead_c = 0.5);

/// alpha A + (1 - alpha) I, A the all-ones arrowhead (first row, first column,
/// diagonal), alpha = c / sqrt(p - 1). Eigenvalues lie in [1 - c, 1 + c].
Matrix arrowhead_sigma(Index p, double c);

/// 1 + max_j max_k || e_j^T (Sigma_k - Sigma_0) Sigma_bar^{-1} ||_1, Sigma_bar the source mean.
double c_sigma(const std::vector<Matrix>& sigmas, const Matrix& sigma0);

/// (sum_k Sigma_k)^{-1} sum_k Sigma_k delta_k
Vector pooled_bias(const std::vector<Matrix>& sigmas, const std::vector<Vector>& deltas);
/// (1/K) sum_k delta_k
Vector fused_bias(const std::vector<Vector>& deltas);

/// One CSV per task (target.csv, source_1.csv, ...): header x1..xp,y.
void export_csv(const TransferProblem& problem, const std::string& directory);
void write_task_csv(const TaskSample& sample, const std::string& path);

}  // namespace tfusion
