#include "transfusion/stacked_operator.hpp"

#include <cmath>

namespace tfusion {

StackedOperator::StackedOperator(std::vector<std::shared_ptr<const Matrix>> source_designs,
                                 std::shared_ptr<const Matrix> target_design)
    : form_(Form::design), owned_(std::move(source_designs)), target_(std::move(target_design)) {
  if (!target_) throw DimensionError("StackedOperator: missing target design");
  view_.dim = target_->cols();
  view_.target = target_.get();
  for (const auto& x : owned_) {
    if (!x || x->cols() != view_.dim) throw DimensionError("StackedOperator: source design has wrong p");
    view_.sources.push_back({x.get(), 1.0});
  }
  if (!owned_.empty()) n_s_ = owned_.front()->rows();
  normalizer_ = static_cast<double>(view_.total_rows());
  if (normalizer_ <= 0) throw DimensionError("StackedOperator: no rows");
}

StackedOperator StackedOperator::from_problem(const TransferProblem& problem) {
  std::vector<std::shared_ptr<const Matrix>> src;
  src.reserve(problem.sources().size());
  for (const auto& s : problem.sources()) src.push_back(s.design_ptr());
  return StackedOperator(std::move(src), problem.target().design_ptr());
}

StackedOperator StackedOperator::identity_blocks(int num_sources, Index source_size,
                                                 std::shared_ptr<const Matrix> target_design) {
  if (!target_design) throw DimensionError("StackedOperator: missing target design");
  if (num_sources < 0 || (num_sources > 0 && source_size <= 0)) {
    throw DimensionError("StackedOperator::identity_blocks: invalid K or n_S");
  }
  StackedOperator op;
  op.form_ = Form::identity_blocks;
  op.target_ = std::move(target_design);
  op.view_.dim = op.target_->cols();
  op.view_.target = op.target_.get();
  const double scale = std::sqrt(static_cast<double>(source_size));
  for (int k = 0; k < num_sources; ++k) op.view_.sources.push_back({nullptr, scale});
  op.n_s_ = source_size;
  op.normalizer_ = static_cast<double>(num_sources * source_size + op.target_->rows());
  if (op.normalizer_ <= 0) throw DimensionError("StackedOperator: no samples");
  return op;
}

Vector StackedOperator::apply(const Vector& theta_flat, kernels::Backend backend) const {
  Vector out;
  if (backend == kernels::Backend::serial) {
    kernels::serial::apply(view_, theta_flat, out);
  } else {
    kernels::omp::apply(view_, theta_flat, out);
  }
  return out;
}

Vector StackedOperator::apply(const BlockParams& theta, kernels::Backend backend) const {
  if (theta.num_sources() != num_sources() || theta.dim() != dim()) {
    throw DimensionError("StackedOperator::apply: BlockParams shape mismatch");
  }
  return apply(theta.flatten(), backend);
}

Vector StackedOperator::adjoint(const Vector& residual, kernels::Backend backend) const {
  Vector out;
  if (backend == kernels::Backend::serial) {
    kernels::serial::adjoint(view_, residual, out);
  } else {
    kernels::omp::adjoint(view_, residual, out);
  }
  return out;
}

std::vector<kernels::GramBlock> StackedOperator::gram_blocks(const Vector& y) const {
  if (y.size() != rows()) throw DimensionError("StackedOperator::gram_blocks: y has wrong length");
  std::vector<kernels::GramBlock> out;
  out.reserve(view_.sources.size() + 1);
  Index row = 0;
  for (std::size_t k = 0; k < view_.sources.size(); ++k) {
    const Index n = view_.block_rows(k);
    const auto& b = view_.sources[k];
    if (b.design) {
      out.push_back(kernels::make_gram_block(*b.design, y.segment(row, n)));
    } else {
      out.push_back(kernels::make_identity_gram_block(b.scale, y.segment(row, n)));
    }
    row += n;
  }
  out.push_back(kernels::make_gram_block(*target_, y.segment(row, target_->rows())));
  return out;
}

}  // namespace tfusion
