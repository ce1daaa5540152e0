#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tfusion {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Raised when array shapes disagree with the documented contract.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised on NaN iterates, singular systems and similar numerical breakdowns.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One task's data: an n x p design and its n responses.
///
/// Storage is shared and immutable so that samples can be copied into folds,
/// problems and worker threads without duplicating the matrices.
class TaskSample {
 public:
  TaskSample(Matrix design, Vector responses, int task_id);

  const Matrix& design() const { return *design_; }
  const std::shared_ptr<const Matrix>& design_ptr() const { return design_; }
  const Vector& responses() const { return *responses_; }
  int task_id() const { return task_id_; }
  Index rows() const { return design_->rows(); }
  Index dim() const { return design_->cols(); }

  /// Copy of the rows listed in `rows`, in that order.
  TaskSample subset(std::span<const Index> rows) const;

 private:
  std::shared_ptr<const Matrix> design_;
  std::shared_ptr<const Vector> responses_;
  int task_id_;
};

/// A target sample plus K equally sized source samples.
class TransferProblem {
 public:
  TransferProblem(TaskSample target, std::vector<TaskSample> sources);

  const TaskSample& target() const { return target_; }
  const std::vector<TaskSample>& sources() const { return sources_; }
  Index dim() const { return target_.dim(); }
  int num_sources() const { return static_cast<int>(sources_.size()); }
  /// Common source size; 0 when there are no sources.
  Index source_size() const { return n_s_; }
  Index target_size() const { return target_.rows(); }
  /// N = K n_S + n_T.
  Index total_size() const { return num_sources() * n_s_ + target_.rows(); }

  /// Same sources, target replaced (used to build CV folds).
  TransferProblem with_target(TaskSample target) const;

 private:
  TaskSample target_;
  std::vector<TaskSample> sources_;
  Index n_s_ = 0;
};

/// Reparametrised co-training variables: theta^(k) = beta^(k) - beta^(0) for
/// k = 1..K and theta^(0) = beta^(0).
///
/// The flat layout used by the solver is [theta^(1), ..., theta^(K), theta^(0)].
class BlockParams {
 public:
  BlockParams() = default;
  BlockParams(std::vector<Vector> contrasts, Vector target_block);

  static BlockParams zeros(int num_sources, Index dim);
  /// `betas[0]` is the target parameter, `betas[k]` the k-th source.
  static BlockParams from_betas(std::span<const Vector> betas);
  static BlockParams unflatten(const Vector& flat, int num_sources, Index dim);

  const std::vector<Vector>& contrasts() const { return contrasts_; }
  const Vector& target_block() const { return target_; }
  int num_sources() const { return static_cast<int>(contrasts_.size()); }
  Index dim() const { return target_.size(); }

  /// beta-view, index 0 is the target.
  std::vector<Vector> betas() const;
  Vector flatten() const;

 private:
  std::vector<Vector> contrasts_;
  Vector target_;
};

/// lambda_0, the fusion weights a_k (lambda_k = a_k lambda_0) and the
/// local-correction penalty.
struct PenaltyWeights {
  double lambda0 = 0.0;
  std::vector<double> a;
  double tilde_lambda = 0.0;

  void validate(int num_sources) const;
  /// Per-block l1 levels in flat block order: [lambda0 a_1, ..., lambda0 a_K, lambda0].
  std::vector<double> block_penalties() const;
};

enum class Strategy {
  one_step,
  two_step_regime_A,
  two_step_regime_Ac,
  baseline_lasso,
  pooled,
  dtransfusion_one,
  dtransfusion_two,
};

std::string_view to_string(Strategy s);
Strategy strategy_from_string(std::string_view name);

struct FitResult {
  Vector beta_target;
  Vector w_hat;
  std::optional<Vector> delta_hat;
  std::vector<Vector> per_task_betas;
  std::vector<double> objective_trace;
  double kkt_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  Strategy strategy = Strategy::baseline_lasso;

  // Model-selection bookkeeping.
  double lambda0 = 0.0;
  std::optional<double> tilde_lambda;
  /// Leading constant of the fusion weights, for fused fits.
  std::optional<double> fusion_constant;
  double validation_error = 0.0;
};

/// (n_S/N) sum_k beta^(k) + (n_T/N) beta^(0); `per_task_betas[0]` is the target.
Vector w_average(std::span<const Vector> per_task_betas, Index n_s, Index n_t);

/// Euclidean distance.
double estimation_error(const Vector& beta_hat, const Vector& beta_star);

/// || (n_S/N) sum_k delta^(k) ||_1.
double diversity_epsilon(std::span<const Vector> contrasts, Index n_s, Index n_t);

}  // namespace tfusion
