#pragma once

#include "transfusion/core_types.hpp"
#include "transfusion/kernels.hpp"

#include <memory>
#include <vector>

namespace tfusion {

/// Matrix-free block-sparse design of the reparametrised co-training problem.
///
/// Row block k (k = 1..K) maps theta to X^(k) (theta^(k) + theta^(0)); the last
/// row block maps theta to X^(0) theta^(0). In the pseudo-sample form every
/// source block is sqrt(n_S) I_p instead of X^(k). Nothing of size (K+1)p
/// columns is ever materialised.
class StackedOperator {
 public:
  enum class Form { design, identity_blocks };

  /// Design form. The loss normaliser N is the total number of rows.
  StackedOperator(std::vector<std::shared_ptr<const Matrix>> source_designs,
                  std::shared_ptr<const Matrix> target_design);

  static StackedOperator from_problem(const TransferProblem& problem);

  /// Pseudo-sample form: K blocks sqrt(n_S) I_p on top of X^(0); the loss
  /// normaliser is K n_S + n_T (the sample count, not the row count).
  static StackedOperator identity_blocks(int num_sources, Index source_size,
                                         std::shared_ptr<const Matrix> target_design);

  Form form() const { return form_; }
  int num_sources() const { return static_cast<int>(view_.sources.size()); }
  Index dim() const { return view_.dim; }
  Index rows() const { return view_.total_rows(); }
  Index cols() const { return (num_sources() + 1) * dim(); }
  /// N in the 1/(2N) loss scaling.
  double normalizer() const { return normalizer_; }
  Index source_size() const { return n_s_; }

  const Matrix& target_design() const { return *target_; }
  /// nullptr for identity blocks.
  const Matrix* source_design(int k) const { return view_.sources.at(static_cast<std::size_t>(k)).design; }
  double source_scale(int k) const { return view_.sources.at(static_cast<std::size_t>(k)).scale; }
  const kernels::StackView& view() const { return view_; }

  Vector apply(const Vector& theta_flat, kernels::Backend backend = kernels::Backend::omp) const;
  Vector apply(const BlockParams& theta, kernels::Backend backend = kernels::Backend::omp) const;
  /// Block gradient layout: block k (k>=1) is X^(k)T r^(k), block 0 sums every row block.
  Vector adjoint(const Vector& residual, kernels::Backend backend = kernels::Backend::omp) const;

  /// Gram statistics of each row block against the stacked response `y`
  /// (sources first, target last).
  std::vector<kernels::GramBlock> gram_blocks(const Vector& y) const;

 private:
  StackedOperator() = default;

  Form form_ = Form::design;
  std::vector<std::shared_ptr<const Matrix>> owned_;
  std::shared_ptr<const Matrix> target_;
  kernels::StackView view_;
  double normalizer_ = 0.0;
  Index n_s_ = 0;
};

}  // namespace tfusion
