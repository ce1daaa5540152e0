#include "transfusion/kernels.hpp"

namespace tfusion::kernels {

Index StackView::total_rows() const {
  Index n = target ? target->rows() : 0;
  for (std::size_t k = 0; k < sources.size(); ++k) n += block_rows(k);
  return n;
}

GramBlock make_gram_block(const Matrix& design, const Vector& responses) {
  if (design.rows() != responses.size()) throw DimensionError("make_gram_block: row mismatch");
  const Index p = design.cols();
  Matrix g = Matrix::Zero(p, p);
  g.selfadjointView<Eigen::Lower>().rankUpdate(design.transpose());
  g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
  GramBlock b;
  b.gram = std::make_shared<const Matrix>(std::move(g));
  b.linear = design.transpose() * responses;
  b.yy = responses.squaredNorm();
  return b;
}

GramBlock make_identity_gram_block(double scale, const Vector& responses) {
  GramBlock b;
  b.diag = scale * scale;
  b.linear = scale * responses;
  b.yy = responses.squaredNorm();
  return b;
}

GramBlock sum_gram_blocks(const std::vector<const GramBlock*>& blocks) {
  if (blocks.empty()) throw DimensionError("sum_gram_blocks: empty");
  const Index p = blocks.front()->dim();
  Matrix g = Matrix::Zero(p, p);
  GramBlock out;
  out.linear = Vector::Zero(p);
  for (const GramBlock* b : blocks) {
    if (b->dim() != p) throw DimensionError("sum_gram_blocks: dimension mismatch");
    if (b->gram) {
      g += *b->gram;
    } else {
      g.diagonal().array() += b->diag;
    }
    out.linear += b->linear;
    out.yy += b->yy;
  }
  out.gram = std::make_shared<const Matrix>(std::move(g));
  return out;
}

void gram_times(const GramBlock& block, const Vector& u, Vector& out) {
  if (!block.gram) {
    out = block.diag * u;
    return;
  }
  const Matrix& g = *block.gram;
  const Index p = u.size();
  Index nnz = 0;
  for (Index j = 0; j < p; ++j) nnz += (u(j) != 0.0);
  if (4 * nnz > p) {
    out.noalias() = g * u;
    return;
  }
  out.setZero(p);
  for (Index j = 0; j < p; ++j) {
    if (u(j) != 0.0) out.noalias() += u(j) * g.col(j);
  }
}

namespace serial {

void apply(const StackView& op, const Vector& theta, Vector& out) {
  const Index p = op.dim;
  const Index k_src = static_cast<Index>(op.sources.size());
  if (theta.size() != (k_src + 1) * p) throw DimensionError("apply: theta has wrong length");
  out.resize(op.total_rows());
  const auto theta0 = theta.segment(k_src * p, p);
  Index row = 0;
  for (Index k = 0; k < k_src; ++k) {
    const BlockView& b = op.sources[static_cast<std::size_t>(k)];
    const Index n = op.block_rows(static_cast<std::size_t>(k));
    const Vector u = theta.segment(k * p, p) + theta0;
    if (b.design) {
      out.segment(row, n).noalias() = *b.design * u;
    } else {
      out.segment(row, n) = b.scale * u;
    }
    row += n;
  }
  out.segment(row, op.target->rows()).noalias() = *op.target * theta0;
}

void adjoint(const StackView& op, const Vector& residual, Vector& out) {
  const Index p = op.dim;
  const Index k_src = static_cast<Index>(op.sources.size());
  if (residual.size() != op.total_rows()) throw DimensionError("adjoint: residual has wrong length");
  out.resize((k_src + 1) * p);
  Index row = 0;
  for (Index k = 0; k < k_src; ++k) {
    const BlockView& b = op.sources[static_cast<std::size_t>(k)];
    const Index n = op.block_rows(static_cast<std::size_t>(k));
    if (b.design) {
      out.segment(k * p, p).noalias() = b.design->transpose() * residual.segment(row, n);
    } else {
      out.segment(k * p, p) = b.scale * residual.segment(row, n);
    }
    row += n;
  }
  auto g0 = out.segment(k_src * p, p);
  g0.noalias() = op.target->transpose() * residual.segment(row, op.target->rows());
  for (Index k = 0; k < k_src; ++k) g0 += out.segment(k * p, p);
}

double gram_gradient(const std::vector<GramBlock>& sources, const GramBlock& target,
                     const Vector& theta, Vector& grad) {
  const Index p = target.dim();
  const Index k_src = static_cast<Index>(sources.size());
  if (theta.size() != (k_src + 1) * p) throw DimensionError("gram_gradient: theta has wrong length");
  grad.resize(theta.size());
  const Vector theta0 = theta.segment(k_src * p, p);
  Vector u(p), gu(p);
  double quad = 0.0;
  for (Index k = 0; k < k_src; ++k) {
    const GramBlock& b = sources[static_cast<std::size_t>(k)];
    u = theta.segment(k * p, p) + theta0;
    gram_times(b, u, gu);
    quad += u.dot(gu) - 2.0 * b.linear.dot(u);
    grad.segment(k * p, p) = gu - b.linear;
  }
  gram_times(target, theta0, gu);
  quad += theta0.dot(gu) - 2.0 * target.linear.dot(theta0);
  auto g0 = grad.segment(k_src * p, p);
  g0 = gu - target.linear;
  for (Index k = 0; k < k_src; ++k) g0 += grad.segment(k * p, p);
  return quad;
}

}  // namespace serial
}  // namespace tfusion::kernels
