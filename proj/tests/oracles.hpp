#pragma once

// Test-side reference implementations. Nothing here calls into the library:
// every oracle works on explicitly built dense matrices with plain loops.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Dense stacked design: row block k carries X_k in column blocks k and K,
/// the last row block carries X_0 in column block K.
inline Matrix dense_stacked(const std::vector<Matrix>& sources, const Matrix& target) {
  const Index p = target.cols();
  const Index k = static_cast<Index>(sources.size());
  Index rows = target.rows();
  for (const auto& x : sources) rows += x.rows();
  Matrix d = Matrix::Zero(rows, (k + 1) * p);
  Index r = 0;
  for (Index b = 0; b < k; ++b) {
    const Matrix& x = sources[static_cast<std::size_t>(b)];
    for (Index i = 0; i < x.rows(); ++i) {
      for (Index j = 0; j < p; ++j) {
        d(r + i, b * p + j) = x(i, j);
        d(r + i, k * p + j) = x(i, j);
      }
    }
    r += x.rows();
  }
  for (Index i = 0; i < target.rows(); ++i) {
    for (Index j = 0; j < p; ++j) d(r + i, k * p + j) = target(i, j);
  }
  return d;
}

/// Same layout with every source block equal to scale * I_p.
inline Matrix dense_identity_stacked(int num_sources, double scale, const Matrix& target) {
  const Index p = target.cols();
  std::vector<Matrix> blocks(static_cast<std::size_t>(num_sources), scale * Matrix::Identity(p, p));
  return dense_stacked(blocks, target);
}

/// Objective 1/(2N)||y - D t||^2 + sum_j pen_j |t_j|.
inline double lasso_objective(const Matrix& d, const Vector& y, const std::vector<double>& pen, double n,
                              const Vector& t) {
  double v = 0.0;
  for (Index i = 0; i < d.rows(); ++i) {
    double fit = 0.0;
    for (Index j = 0; j < d.cols(); ++j) fit += d(i, j) * t(j);
    v += (y(i) - fit) * (y(i) - fit);
  }
  v /= 2.0 * n;
  for (Index j = 0; j < t.size(); ++j) v += pen[static_cast<std::size_t>(j)] * std::abs(t(j));
  return v;
}

/// Cyclic coordinate descent with per-coordinate penalties. Runs until no
/// coordinate moves by more than `tol` in a full sweep.
inline Vector cd_lasso(const Matrix& d, const Vector& y, const std::vector<double>& pen, double n,
                       double tol = 1e-14, long max_sweeps = 2000000) {
  const Index m = d.cols();
  Vector t = Vector::Zero(m);
  Vector r = y;
  std::vector<double> sq(static_cast<std::size_t>(m));
  for (Index j = 0; j < m; ++j) {
    double s = 0.0;
    for (Index i = 0; i < d.rows(); ++i) s += d(i, j) * d(i, j);
    sq[static_cast<std::size_t>(j)] = s / n;
  }
  for (long sweep = 0; sweep < max_sweeps; ++sweep) {
    double moved = 0.0;
    for (Index j = 0; j < m; ++j) {
      const double a = sq[static_cast<std::size_t>(j)];
      if (a == 0.0) continue;
      double z = 0.0;
      for (Index i = 0; i < d.rows(); ++i) z += d(i, j) * r(i);
      z = z / n + a * t(j);
      const double lam = pen[static_cast<std::size_t>(j)];
      const double next = z > lam ? (z - lam) / a : (z < -lam ? (z + lam) / a : 0.0);
      const double step = next - t(j);
      if (step != 0.0) {
        for (Index i = 0; i < d.rows(); ++i) r(i) -= d(i, j) * step;
        t(j) = next;
        moved = std::max(moved, std::abs(step));
      }
    }
    if (moved <= tol) break;
  }
  return t;
}

/// Expands per-block levels to per-coordinate penalties.
inline std::vector<double> per_coordinate(const std::vector<double>& blocks, Index p) {
  std::vector<double> out;
  for (double b : blocks) out.insert(out.end(), static_cast<std::size_t>(p), b);
  return out;
}

/// min t^T S t  s.t.  |(S t - e_j)_i| <= mu for all i, by enumerating which
/// constraints are tight (and on which side). Returns +inf if nothing is feasible.
inline double theta_row_qp(const Matrix& s, Index j, double mu, Vector* argmin = nullptr) {
  const Index p = s.rows();
  long patterns = 1;
  for (Index i = 0; i < p; ++i) patterns *= 3;
  double best = std::numeric_limits<double>::infinity();
  for (long code = 0; code < patterns; ++code) {
    std::vector<Index> rows;
    std::vector<double> rhs;
    long c = code;
    for (Index i = 0; i < p; ++i) {
      const int side = static_cast<int>(c % 3);
      c /= 3;
      if (side == 0) continue;
      rows.push_back(i);
      rhs.push_back((i == j ? 1.0 : 0.0) + (side == 1 ? mu : -mu));
    }
    const Index m = static_cast<Index>(rows.size());
    // Stationarity 2 S t = A^T nu with A t = b, A = S(rows, :).
    Matrix kkt = Matrix::Zero(p + m, p + m);
    Vector b = Vector::Zero(p + m);
    kkt.topLeftCorner(p, p) = 2.0 * s;
    for (Index a = 0; a < m; ++a) {
      for (Index q = 0; q < p; ++q) {
        kkt(q, p + a) = -s(rows[static_cast<std::size_t>(a)], q);
        kkt(p + a, q) = s(rows[static_cast<std::size_t>(a)], q);
      }
      b(p + a) = rhs[static_cast<std::size_t>(a)];
    }
    const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(kkt);
    const Vector sol = cod.solve(b);
    if ((kkt * sol - b).norm() > 1e-9 * (1.0 + b.norm())) continue;
    const Vector t = sol.head(p);
    const Vector res = s * t - Vector::Unit(p, j);
    if (res.cwiseAbs().maxCoeff() > mu + 1e-10) continue;
    const double v = t.dot(s * t);
    if (v < best) {
      best = v;
      if (argmin) *argmin = t;
    }
  }
  return best;
}

/// Two-pass mean and sample standard error.
struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanSe mean_se(const std::vector<double>& xs) {
  MeanSe out;
  for (double x : xs) out.mean += x;
  out.mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return out;
  double ss = 0.0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  out.se = std::sqrt(ss / static_cast<double>(xs.size() - 1)) / std::sqrt(static_cast<double>(xs.size()));
  return out;
}

}  // namespace oracle
