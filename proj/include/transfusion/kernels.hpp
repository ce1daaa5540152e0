#pragma once

// Data-parallel kernels behind the stacked operator and the Gram-form gradient.
//
// Every kernel has a serial reference in `kernels::serial` and an OpenMP
// version in `kernels::omp`. Both produce bit-identical results: the parallel
// loops only write disjoint output segments and every cross-block reduction is
// done afterwards in fixed block order.

#include "transfusion/core_types.hpp"

#include <memory>
#include <vector>

namespace tfusion::kernels {

/// One source row-block of the stacked design. `design == nullptr` means the
/// block is `scale * I_p` (pseudo-sample form).
struct BlockView {
  const Matrix* design = nullptr;
  double scale = 1.0;
};

/// Non-owning view of the stacked design
///
///   [ X1  0 ... 0  X1 ]
///   [ 0  X2 ... 0  X2 ]
///   [ ...             ]
///   [ 0   0 ... XK XK ]
///   [ 0   0 ... 0  X0 ]
///
/// acting on theta = [theta1, ..., thetaK, theta0].
struct StackView {
  std::vector<BlockView> sources;
  const Matrix* target = nullptr;
  Index dim = 0;

  Index block_rows(std::size_t k) const {
    return sources[k].design ? sources[k].design->rows() : dim;
  }
  Index total_rows() const;
};

/// Sufficient statistics of one least-squares block: G = X^T X, c = X^T y,
/// yy = y^T y. `gram == nullptr` means G = diag * I.
struct GramBlock {
  std::shared_ptr<const Matrix> gram;
  double diag = 0.0;
  Vector linear;
  double yy = 0.0;

  Index dim() const { return linear.size(); }
};

GramBlock make_gram_block(const Matrix& design, const Vector& responses);
GramBlock make_identity_gram_block(double scale, const Vector& responses);
/// Sum of blocks (pooled least squares on concatenated rows).
GramBlock sum_gram_blocks(const std::vector<const GramBlock*>& blocks);

/// out = G u, skipping zero entries of u when u is sparse.
void gram_times(const GramBlock& block, const Vector& u, Vector& out);

namespace serial {
void apply(const StackView& op, const Vector& theta, Vector& out);
void adjoint(const StackView& op, const Vector& residual, Vector& out);
/// Unnormalised stacked gradient X^T X theta - X^T y written into `grad`
/// (flat block layout); returns theta^T X^T X theta - 2 y^T X theta.
double gram_gradient(const std::vector<GramBlock>& sources, const GramBlock& target,
                     const Vector& theta, Vector& grad);
}  // namespace serial

namespace omp {
void apply(const StackView& op, const Vector& theta, Vector& out);
void adjoint(const StackView& op, const Vector& residual, Vector& out);
double gram_gradient(const std::vector<GramBlock>& sources, const GramBlock& target,
                     const Vector& theta, Vector& grad);
}  // namespace omp

enum class Backend { serial, omp };

}  // namespace tfusion::kernels
