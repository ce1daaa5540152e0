#include "transfusion/kernels.hpp"

#include <omp.h>

namespace tfusion::kernels::omp {

namespace {

// Below this much work per call the fork/join cost dominates.
constexpr Index kMinParallelWork = 1 << 15;

}  // namespace

void apply(const StackView& op, const Vector& theta, Vector& out) {
  const Index p = op.dim;
  const Index k_src = static_cast<Index>(op.sources.size());
  if (theta.size() != (k_src + 1) * p) throw DimensionError("apply: theta has wrong length");
  out.resize(op.total_rows());
  std::vector<Index> offsets(static_cast<std::size_t>(k_src) + 1, 0);
  for (Index k = 0; k < k_src; ++k)
    offsets[static_cast<std::size_t>(k) + 1] = offsets[static_cast<std::size_t>(k)] + op.block_rows(static_cast<std::size_t>(k));
  const auto theta0 = theta.segment(k_src * p, p);
  const bool par = out.size() * p >= kMinParallelWork && k_src > 0;

#pragma omp parallel for schedule(static) if (par)
  for (Index k = 0; k <= k_src; ++k) {
    if (k == k_src) {
      out.segment(offsets.back(), op.target->rows()).noalias() = *op.target * theta0;
      continue;
    }
    const BlockView& b = op.sources[static_cast<std::size_t>(k)];
    const Index row = offsets[static_cast<std::size_t>(k)];
    const Index n = op.block_rows(static_cast<std::size_t>(k));
    const Vector u = theta.segment(k * p, p) + theta0;
    if (b.design) {
      out.segment(row, n).noalias() = *b.design * u;
    } else {
      out.segment(row, n) = b.scale * u;
    }
  }
}

void adjoint(const StackView& op, const Vector& residual, Vector& out) {
  const Index p = op.dim;
  const Index k_src = static_cast<Index>(op.sources.size());
  if (residual.size() != op.total_rows()) throw DimensionError("adjoint: residual has wrong length");
  out.resize((k_src + 1) * p);
  std::vector<Index> offsets(static_cast<std::size_t>(k_src) + 1, 0);
  for (Index k = 0; k < k_src; ++k)
    offsets[static_cast<std::size_t>(k) + 1] = offsets[static_cast<std::size_t>(k)] + op.block_rows(static_cast<std::size_t>(k));
  const bool par = residual.size() * p >= kMinParallelWork && k_src > 0;

#pragma omp parallel for schedule(static) if (par)
  for (Index k = 0; k <= k_src; ++k) {
    if (k == k_src) {
      out.segment(k_src * p, p).noalias() =
          op.target->transpose() * residual.segment(offsets.back(), op.target->rows());
      continue;
    }
    const BlockView& b = op.sources[static_cast<std::size_t>(k)];
    const Index row = offsets[static_cast<std::size_t>(k)];
    const Index n = op.block_rows(static_cast<std::size_t>(k));
    if (b.design) {
      out.segment(k * p, p).noalias() = b.design->transpose() * residual.segment(row, n);
    } else {
      out.segment(k * p, p) = b.scale * residual.segment(row, n);
    }
  }
  auto g0 = out.segment(k_src * p, p);
  for (Index k = 0; k < k_src; ++k) g0 += out.segment(k * p, p);
}

double gram_gradient(const std::vector<GramBlock>& sources, const GramBlock& target,
                     const Vector& theta, Vector& grad) {
  const Index p = target.dim();
  const Index k_src = static_cast<Index>(sources.size());
  if (theta.size() != (k_src + 1) * p) throw DimensionError("gram_gradient: theta has wrong length");
  grad.resize(theta.size());
  const Vector theta0 = theta.segment(k_src * p, p);
  std::vector<double> quad(static_cast<std::size_t>(k_src) + 1, 0.0);
  Vector target_part(p);
  const bool par = (k_src + 1) * p * p >= kMinParallelWork && k_src > 0;

#pragma omp parallel if (par)
  {
    Vector u(p), gu(p);
#pragma omp for schedule(static)
    for (Index k = 0; k <= k_src; ++k) {
      const GramBlock& b = (k == k_src) ? target : sources[static_cast<std::size_t>(k)];
      if (k == k_src) {
        u = theta0;
      } else {
        u = theta.segment(k * p, p) + theta0;
      }
      gram_times(b, u, gu);
      quad[static_cast<std::size_t>(k)] = u.dot(gu) - 2.0 * b.linear.dot(u);
      if (k == k_src) {
        target_part = gu - b.linear;
      } else {
        grad.segment(k * p, p) = gu - b.linear;
      }
    }
  }
  auto g0 = grad.segment(k_src * p, p);
  g0 = target_part;
  for (Index k = 0; k < k_src; ++k) g0 += grad.segment(k * p, p);
  double total = 0.0;
  for (Index k = 0; k < k_src; ++k) total += quad[static_cast<std::size_t>(k)];
  return total + quad.back();
}

}  // namespace tfusion::kernels::omp
