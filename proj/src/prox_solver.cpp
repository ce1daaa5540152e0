#include "transfusion/prox_solver.hpp"

#include "transfusion/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <tuple>

namespace tfusion {

namespace {

double block_l1(const Vector& theta, std::span<const double> penalties, Index p) {
  double total = 0.0;
  for (std::size_t b = 0; b < penalties.size(); ++b) {
    if (penalties[b] != 0.0) total += penalties[b] * theta.segment(static_cast<Index>(b) * p, p).lpNorm<1>();
  }
  return total;
}

void prox_step(const Vector& point, const Vector& grad, double step, std::span<const double> penalties, Index p,
               Vector& out) {
  out.resize(point.size());
  for (std::size_t b = 0; b < penalties.size(); ++b) {
    const double t = step * penalties[b];
    const Index off = static_cast<Index>(b) * p;
    for (Index j = off; j < off + p; ++j) {
      const double v = point(j) - step * grad(j);
      const double mag = std::abs(v) - t;
      out(j) = mag > 0.0 ? std::copysign(mag, v) : 0.0;
    }
  }
}

void check_penalties(std::span<const double> penalties, int num_sources) {
  if (static_cast<int>(penalties.size()) != num_sources + 1) {
    throw DimensionError("weighted lasso: expected " + std::to_string(num_sources + 1) + " block penalties, got " +
                         std::to_string(penalties.size()));
  }
  for (double l : penalties) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw std::invalid_argument("weighted lasso: penalties must be finite and >= 0");
  }
}

// Fallback stop for iterates stuck at the floating-point floor: the objective
// no longer moves and the KKT residual has not reached a new low for 20
// consecutive checks. Slow but steady progress never triggers it.
class Plateau {
 public:
  explicit Plateau(double tol) : tol_(tol) {}
  void record(double rel_change, double kkt) {
    count_ = (rel_change <= tol_ && kkt >= best_) ? count_ + 1 : 0;
    best_ = std::min(best_, kkt);
  }
  bool done(double kkt, double kkt_tol) const { return kkt <= kkt_tol || (count_ >= 20 && kkt <= 100.0 * kkt_tol); }

 private:
  double tol_;
  double best_ = std::numeric_limits<double>::infinity();
  int count_ = 0;
};

}  // namespace

void SolverConfig::validate() const {
  if (max_iter < 1) throw std::invalid_argument("SolverConfig: max_iter must be >= 1");
  if (!(kkt_tol > 0.0) || !(objective_tol > 0.0)) throw std::invalid_argument("SolverConfig: tolerances must be > 0");
  if (step_size && !(*step_size > 0.0)) throw std::invalid_argument("SolverConfig: step size must be > 0");
  if (power_probes < 10) throw std::invalid_argument("SolverConfig: power_probes must be >= 10");
}

QuadraticModel::QuadraticModel(std::vector<kernels::GramBlock> sources, kernels::GramBlock target, double normalizer,
                               int power_probes, std::uint64_t seed, kernels::Backend backend)
    : sources_(std::move(sources)), target_(std::move(target)), normalizer_(normalizer), backend_(backend) {
  if (!(normalizer_ > 0.0)) throw DimensionError("QuadraticModel: normaliser must be positive");
  yy_ = target_.yy;
  for (const auto& b : sources_) {
    if (b.dim() != target_.dim()) throw DimensionError("QuadraticModel: block dimension mismatch");
    yy_ += b.yy;
  }
  lipschitz_ = power_iteration_upper([this](const Vector& v) { return hessian_apply(v); }, num_params(),
                                     power_probes, seed);
}

QuadraticModel QuadraticModel::from_operator(const StackedOperator& op, const Vector& y, const SolverConfig& cfg) {
  auto blocks = op.gram_blocks(y);
  kernels::GramBlock target = std::move(blocks.back());
  blocks.pop_back();
  return QuadraticModel(std::move(blocks), std::move(target), op.normalizer(), cfg.power_probes, cfg.rng_seed,
                        cfg.backend);
}

QuadraticModel QuadraticModel::single_block(const Matrix& design, const Vector& responses, const SolverConfig& cfg) {
  return QuadraticModel({}, kernels::make_gram_block(design, responses), static_cast<double>(design.rows()),
                        cfg.power_probes, cfg.rng_seed, cfg.backend);
}

double QuadraticModel::loss_and_gradient(const Vector& theta, Vector& grad) const {
  const double quad = backend_ == kernels::Backend::serial
                          ? kernels::serial::gram_gradient(sources_, target_, theta, grad)
                          : kernels::omp::gram_gradient(sources_, target_, theta, grad);
  grad /= normalizer_;
  return std::max(0.0, (quad + yy_) / (2.0 * normalizer_));
}

Vector QuadraticModel::hessian_apply(const Vector& v) const {
  std::vector<kernels::GramBlock> src;
  src.reserve(sources_.size());
  for (const auto& b : sources_) src.push_back({b.gram, b.diag, Vector::Zero(b.dim()), 0.0});
  const kernels::GramBlock tgt{target_.gram, target_.diag, Vector::Zero(target_.dim()), 0.0};
  Vector out;
  kernels::serial::gram_gradient(src, tgt, v, out);
  return out / normalizer_;
}

double QuadraticModel::lambda_max(std::span<const double> relative_weights) const {
  check_penalties(relative_weights, num_sources());
  const Index p = dim();
  Vector total = target_.linear;
  double best = 0.0;
  for (std::size_t k = 0; k < sources_.size(); ++k) {
    total += sources_[k].linear;
    if (relative_weights[k] > 0.0) {
      best = std::max(best, sources_[k].linear.lpNorm<Eigen::Infinity>() / normalizer_ / relative_weights[k]);
    }
  }
  if (relative_weights.back() > 0.0) {
    best = std::max(best, total.lpNorm<Eigen::Infinity>() / normalizer_ / relative_weights.back());
  }
  (void)p;
  return best;
}

Vector soft_threshold(const Vector& v, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("soft_threshold: threshold must be >= 0");
  Vector out(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v(i)) - t;
    out(i) = mag > 0.0 ? std::copysign(mag, v(i)) : 0.0;
  }
  return out;
}

double power_iteration_upper(const std::function<Vector(const Vector&)>& normal_op, Index n, int probes,
                             std::uint64_t seed) {
  if (probes < 10) throw std::invalid_argument("power iteration: probes must be >= 10");
  if (n <= 0) throw DimensionError("power iteration: empty operator");
  Rng rng(seed);
  Vector v = standard_normal(rng, n);
  v.normalize();
  double est = 0.0;
  double prev = 0.0;
  for (int i = 0; i < probes; ++i) {
    const Vector w = normal_op(v);
    const double nw = w.norm();
    if (!std::isfinite(nw)) throw NumericalError("power iteration: non-finite operator output");
    if (nw == 0.0) {
      if (i == 0) throw NumericalError("power iteration: zero operator");
      break;
    }
    est = nw;
    v = w / nw;
    if (i >= 10 && std::abs(est - prev) <= 1e-10 * est) break;
    prev = est;
  }
  if (est == 0.0) throw NumericalError("power iteration: zero operator");
  return 1.05 * est;
}

double lipschitz_upper(const StackedOperator& op, int probes, std::uint64_t seed) {
  const double n = op.normalizer();
  return power_iteration_upper([&op, n](const Vector& v) { return Vector(op.adjoint(op.apply(v)) / n); },
                               op.cols(), probes, seed);
}

double kkt_residual_from_gradient(const Vector& theta, const Vector& grad, std::span<const double> penalties,
                                  Index dim) {
  if (theta.size() != grad.size() || theta.size() != static_cast<Index>(penalties.size()) * dim) {
    throw DimensionError("kkt_residual: shape mismatch");
  }
  double worst = 0.0;
  for (std::size_t b = 0; b < penalties.size(); ++b) {
    const double lam = penalties[b];
    const Index off = static_cast<Index>(b) * dim;
    for (Index j = off; j < off + dim; ++j) {
      const double v = theta(j) == 0.0 ? std::max(std::abs(grad(j)) - lam, 0.0)
                                       : std::abs(grad(j) + std::copysign(lam, theta(j)));
      worst = std::max(worst, v);
    }
  }
  return worst;
}

double kkt_residual(const StackedOperator& op, const Vector& y, std::span<const double> penalties,
                    const BlockParams& theta) {
  check_penalties(penalties, op.num_sources());
  if (y.size() != op.rows()) throw DimensionError("kkt_residual: y has wrong length");
  const Vector flat = theta.flatten();
  const Vector residual = y - op.apply(flat);
  const Vector grad = -op.adjoint(residual) / op.normalizer();
  return kkt_residual_from_gradient(flat, grad, penalties, op.dim());
}

double weighted_lasso_objective(const StackedOperator& op, const Vector& y, std::span<const double> penalties,
                                const BlockParams& theta) {
  check_penalties(penalties, op.num_sources());
  const Vector flat = theta.flatten();
  const double loss = (y - op.apply(flat)).squaredNorm() / (2.0 * op.normalizer());
  return loss + block_l1(flat, penalties, op.dim());
}

namespace {

// G[rows, cols] for sorted index lists.
Matrix gram_sub(const kernels::GramBlock& b, const std::vector<Index>& rows, const std::vector<Index>& cols) {
  if (b.gram) return (*b.gram)(rows, cols);
  Matrix out = Matrix::Zero(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (std::size_t r = 0, c = 0; r < rows.size() && c < cols.size();) {
    if (rows[r] == cols[c]) {
      out(static_cast<Index>(r), static_cast<Index>(c)) = b.diag;
      ++r;
      ++c;
    } else if (rows[r] < cols[c]) {
      ++r;
    } else {
      ++c;
    }
  }
  return out;
}

bool well_conditioned(const Eigen::LLT<Matrix>& llt) {
  if (llt.info() != Eigen::Success) return false;
  const Vector d = Matrix(llt.matrixL()).diagonal();
  return d.size() == 0 || d.minCoeff() * d.minCoeff() > 1e-12 * d.maxCoeff() * d.maxCoeff();
}

// Cholesky of a Gram sub-block. Rank-deficient blocks (more working
// coordinates than rows) get a ridge of 1e-8 times the largest diagonal entry;
// the resulting direction still descends and the line search keeps progress
// monotone.
bool factor(Matrix a, Eigen::LLT<Matrix>& llt) {
  llt.compute(a);
  if (well_conditioned(llt)) return true;
  const double top = a.diagonal().cwiseAbs().maxCoeff();
  if (!(top > 0.0)) return false;
  a.diagonal().array() += 1e-8 * top;
  llt.compute(a);
  return well_conditioned(llt);
}

// Solves H_AA x = rhs for a sorted working set A. The stacked Hessian is a
// block arrow (G_k on the diagonal and in the shared column, the sum of all
// Grams in the shared corner), so sources are eliminated one at a time and
// only the Schur complement on the shared block is factored jointly.
// Returns false when a pivot block is numerically singular.
bool solve_working_newton(const QuadraticModel& model, const std::vector<Index>& work, const Vector& rhs, Vector& x) {
  const Index p = model.dim();
  const auto ks = static_cast<std::size_t>(model.num_sources());
  const double n_norm = model.normalizer();
  const auto& src = model.source_blocks();
  std::vector<std::vector<Index>> cols(ks + 1), pos(ks + 1);
  for (std::size_t w = 0; w < work.size(); ++w) {
    const auto b = static_cast<std::size_t>(work[w] / p);
    cols[b].push_back(work[w] % p);
    pos[b].push_back(static_cast<Index>(w));
  }
  const auto& s0 = cols[ks];
  const auto m0 = static_cast<Index>(s0.size());
  Matrix schur = gram_sub(model.target_block(), s0, s0);
  Vector r0 = n_norm * rhs(pos[ks]);
  std::vector<Matrix> reduced(ks);
  for (std::size_t k = 0; k < ks; ++k) {
    if (cols[k].empty()) {
      if (m0 > 0) schur += gram_sub(src[k], s0, s0);
      continue;
    }
    Eigen::LLT<Matrix> llt;
    if (!factor(gram_sub(src[k], cols[k], cols[k]), llt)) return false;
    Matrix coupled(static_cast<Index>(cols[k].size()), m0 + 1);
    coupled.leftCols(m0) = gram_sub(src[k], cols[k], s0);
    coupled.col(m0) = n_norm * rhs(pos[k]);
    reduced[k] = llt.solve(coupled);
    if (m0 > 0) {
      schur += gram_sub(src[k], s0, s0);
      schur.noalias() -= coupled.leftCols(m0).transpose() * reduced[k].leftCols(m0);
      r0.noalias() -= coupled.leftCols(m0).transpose() * reduced[k].col(m0);
    }
  }
  Vector x0;
  if (m0 > 0) {
    Eigen::LLT<Matrix> llt;
    if (!factor(std::move(schur), llt)) return false;
    x0 = llt.solve(r0);
  }
  x.resize(static_cast<Index>(work.size()));
  x(pos[ks]) = x0;
  for (std::size_t k = 0; k < ks; ++k) {
    if (cols[k].empty()) continue;
    x(pos[k]) = m0 > 0 ? Vector(reduced[k].col(m0) - reduced[k].leftCols(m0) * x0) : Vector(reduced[k].col(m0));
  }
  return x.allFinite();
}

// Feature-sign search: Newton steps on the quadratic restricted to a working
// set with frozen signs, followed by a discrete line search over the points
// where a coordinate changes sign. Each accepted step lowers the objective.
// A few proximal-gradient steps are taken whenever the Newton step fails to
// make progress (singular working Hessian or no decrease).
SolveResult solve_active_set(const QuadraticModel& model, std::span<const double> penalties, const SolverConfig& cfg,
                             Vector theta) {
  const Index p = model.dim();
  const Index n = model.num_params();
  auto lam = [&](Index i) { return penalties[static_cast<std::size_t>(i / p)]; };

  SolverDiagnostics diag;
  Vector grad;
  double loss = model.loss_and_gradient(theta, grad);
  double step = cfg.step_size ? *cfg.step_size : 1.0 / model.lipschitz();
  Plateau plateau(cfg.objective_tol);
  std::vector<Index> work;
  std::vector<std::pair<double, Index>> violators;
  std::vector<double> knots;
  Vector cand, cand_grad;

  auto gradient_steps = [&](int count) {
    const double obj0 = loss + block_l1(theta, penalties, p);
    double obj = obj0;
    for (int c = 0; c < count; ++c) {
      double cand_obj = 0.0;
      for (int tries = 0;; ++tries) {
        prox_step(theta, grad, step, penalties, p, cand);
        const double cand_loss = model.loss_and_gradient(cand, cand_grad);
        cand_obj = cand_loss + block_l1(cand, penalties, p);
        if (cand_obj <= obj + 1e-12 * std::max(1.0, std::abs(obj)) || tries >= 40) {
          loss = cand_loss;
          break;
        }
        step *= 0.5;
      }
      theta.swap(cand);
      grad.swap(cand_grad);
      obj = cand_obj;
    }
    return obj0 - obj;
  };

  for (int it = 0;; ++it) {
    const double obj = loss + block_l1(theta, penalties, p);
    if (!std::isfinite(obj) || !grad.allFinite()) throw NumericalError("weighted lasso: non-finite iterate");
    const double kkt = kkt_residual_from_gradient(theta, grad, penalties, p);
    diag.objective_trace.push_back(obj);
    diag.kkt_residual = kkt;
    diag.iterations = it;
    if (plateau.done(kkt, cfg.kkt_tol)) {
      diag.converged = true;
      break;
    }
    if (it >= cfg.max_iter) break;

    // Working set: the support, plus the worst zero coordinates violating
    // their subgradient bound once the support itself is optimal.
    work.clear();
    double support_kkt = 0.0;
    for (Index i = 0; i < n; ++i) {
      if (theta(i) != 0.0) {
        work.push_back(i);
        support_kkt = std::max(support_kkt, std::abs(grad(i) + std::copysign(lam(i), theta(i))));
      }
    }
    std::vector<double> sign(work.size());
    for (std::size_t w = 0; w < work.size(); ++w) sign[w] = theta(work[w]) > 0.0 ? 1.0 : -1.0;
    if (support_kkt <= cfg.kkt_tol) {
      violators.clear();
      for (Index i = 0; i < n; ++i) {
        if (theta(i) == 0.0 && std::abs(grad(i)) > lam(i)) violators.emplace_back(std::abs(grad(i)) - lam(i), i);
      }
      const std::size_t cap = std::min(violators.size(), std::max<std::size_t>(10, work.size() / 2));
      std::partial_sort(violators.begin(), violators.begin() + static_cast<std::ptrdiff_t>(cap), violators.end(),
                        [](const auto& x, const auto& y) { return x.first > y.first || (x.first == y.first && x.second < y.second); });
      for (std::size_t v = 0; v < cap; ++v) {
        const Index i = violators[v].second;
        work.push_back(i);
        sign.push_back(grad(i) > 0.0 ? -1.0 : 1.0);
      }
    }
    {
      std::vector<std::pair<Index, double>> tagged(work.size());
      for (std::size_t w = 0; w < work.size(); ++w) tagged[w] = {work[w], sign[w]};
      std::sort(tagged.begin(), tagged.end());
      for (std::size_t w = 0; w < work.size(); ++w) std::tie(work[w], sign[w]) = tagged[w];
    }
    const auto m = static_cast<Index>(work.size());
    if (m == 0) {
      plateau.record(gradient_steps(1) / std::max(1.0, std::abs(obj)), kkt);
      continue;
    }

    Vector rhs(m);
    for (Index w = 0; w < m; ++w) rhs(w) = grad(work[static_cast<std::size_t>(w)]) + lam(work[static_cast<std::size_t>(w)]) * sign[static_cast<std::size_t>(w)];
    Vector dir;
    const bool usable = solve_working_newton(model, work, rhs, dir);
    if (usable) dir = -dir;
    double gain = 0.0;
    if (usable) {
      Vector base(m);
      for (Index w = 0; w < m; ++w) base(w) = theta(work[static_cast<std::size_t>(w)]);
      Vector gw(m);
      for (Index w = 0; w < m; ++w) gw(w) = grad(work[static_cast<std::size_t>(w)]);
      const double slope = gw.dot(dir);
      const double curv = -dir.dot(rhs);
      double rest = block_l1(theta, penalties, p);
      for (Index w = 0; w < m; ++w) rest -= lam(work[static_cast<std::size_t>(w)]) * std::abs(base(w));
      auto value_at = [&](double t) {
        double v = loss + rest + t * slope + 0.5 * t * t * curv;
        for (Index w = 0; w < m; ++w) v += lam(work[static_cast<std::size_t>(w)]) * std::abs(base(w) + t * dir(w));
        return v;
      };
      knots.assign(1, 1.0);
      for (Index w = 0; w < m; ++w) {
        if (base(w) != 0.0 && dir(w) != 0.0) {
          const double t = -base(w) / dir(w);
          if (t > 0.0 && t < 1.0) knots.push_back(t);
        }
      }
      std::sort(knots.begin(), knots.end());
      double best_t = 0.0;
      double best_v = obj;
      for (double t : knots) {
        const double v = value_at(t);
        if (v < best_v) {
          best_v = v;
          best_t = t;
        }
      }
      // Steps projected onto the sign pattern drop every coordinate that
      // crosses zero at once, where the knot search drops one per step.
      Vector proj_best, proj_grad;
      double proj_v = std::numeric_limits<double>::infinity();
      double proj_loss = 0.0;
      for (double t = 1.0; t >= 0.125; t *= 0.5) {
        cand = theta;
        for (Index w = 0; w < m; ++w) {
          const double next = base(w) + t * dir(w);
          cand(work[static_cast<std::size_t>(w)]) = next * sign[static_cast<std::size_t>(w)] > 0.0 ? next : 0.0;
        }
        const double cl = model.loss_and_gradient(cand, cand_grad);
        const double cv = cl + block_l1(cand, penalties, p);
        if (cv < proj_v) {
          proj_v = cv;
          proj_loss = cl;
          proj_best.swap(cand);
          proj_grad.swap(cand_grad);
        }
      }
      if (proj_v < best_v && proj_v < obj) {
        theta.swap(proj_best);
        grad.swap(proj_grad);
        loss = proj_loss;
        gain = obj - proj_v;
      } else if (best_t > 0.0 && best_v < obj) {
        for (Index w = 0; w < m; ++w) {
          const Index i = work[static_cast<std::size_t>(w)];
          double next = base(w) + best_t * dir(w);
          // Coordinates whose crossing point was chosen land exactly on zero.
          if (base(w) != 0.0 && dir(w) != 0.0 && -base(w) / dir(w) == best_t) next = 0.0;
          theta(i) = next;
        }
        loss = model.loss_and_gradient(theta, grad);
        gain = obj - (loss + block_l1(theta, penalties, p));
      }
    }
    if (!(gain > 0.0)) gain = gradient_steps(5);
    plateau.record(gain / std::max(1.0, std::abs(obj)), kkt);
  }
  diag.step_size = step;
  return {BlockParams::unflatten(theta, model.num_sources(), p), std::move(diag)};
}

}  // namespace

SolveResult solve(const QuadraticModel& model, std::span<const double> penalties, const SolverConfig& cfg,
                  const Vector* warm_start) {
  cfg.validate();
  check_penalties(penalties, model.num_sources());
  const Index p = model.dim();
  const Index n = model.num_params();

  Vector theta = Vector::Zero(n);
  if (warm_start) {
    if (warm_start->size() != n) throw DimensionError("solve: warm start has wrong length");
    theta = *warm_start;
  }
  if (cfg.method == SolverMethod::active_set) return solve_active_set(model, penalties, cfg, std::move(theta));
  const bool fixed_step = cfg.step_size.has_value();
  double step = fixed_step ? *cfg.step_size : 1.0 / model.lipschitz();

  SolverDiagnostics diag;
  Vector grad;
  double obj = model.loss_and_gradient(theta, grad) + block_l1(theta, penalties, p);
  auto guard = [](double value, const Vector& g) {
    if (!std::isfinite(value) || !g.allFinite()) throw NumericalError("weighted lasso: non-finite iterate");
  };

  Plateau plateau(cfg.objective_tol);

  if (!cfg.accelerated) {
    Vector cand, cand_grad;
    for (int it = 0;; ++it) {
      guard(obj, grad);
      const double kkt = kkt_residual_from_gradient(theta, grad, penalties, p);
      diag.objective_trace.push_back(obj);
      diag.kkt_residual = kkt;
      diag.iterations = it;
      if (plateau.done(kkt, cfg.kkt_tol)) {
        diag.converged = true;
        break;
      }
      if (it >= cfg.max_iter) break;
      double cand_obj = 0.0;
      // A step of exactly 1/L always descends; the halving only triggers if the
      // power-iteration estimate undershot the true curvature.
      for (int tries = 0;; ++tries) {
        prox_step(theta, grad, step, penalties, p, cand);
        cand_obj = model.loss_and_gradient(cand, cand_grad) + block_l1(cand, penalties, p);
        if (fixed_step || cand_obj <= obj + 1e-12 * std::max(1.0, std::abs(obj)) || tries >= 40) break;
        step *= 0.5;
      }
      const double rel = std::abs(obj - cand_obj) / std::max(1.0, std::abs(obj));
      plateau.record(rel, kkt);
      theta.swap(cand);
      grad.swap(cand_grad);
      obj = cand_obj;
    }
  } else {
    constexpr int kCheckEvery = 5;
    guard(obj, grad);
    double kkt = kkt_residual_from_gradient(theta, grad, penalties, p);
    diag.objective_trace.push_back(obj);
    diag.kkt_residual = kkt;
    if (kkt <= cfg.kkt_tol) {
      diag.converged = true;
    } else {
      Vector y = theta;
      Vector gy = grad;
      Vector x_new;
      double t = 1.0;
      double last_obj = obj;
      for (int it = 1; it <= cfg.max_iter; ++it) {
        if (it > 1) model.loss_and_gradient(y, gy);
        prox_step(y, gy, step, penalties, p, x_new);
        if ((y - x_new).dot(x_new - theta) > 0.0) {
          t = 1.0;
          y = x_new;
        } else {
          const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
          y = x_new + ((t - 1.0) / t_next) * (x_new - theta);
          t = t_next;
        }
        theta.swap(x_new);
        diag.iterations = it;
        if (it % kCheckEvery == 0 || it == cfg.max_iter) {
          obj = model.loss_and_gradient(theta, grad) + block_l1(theta, penalties, p);
          guard(obj, grad);
          kkt = kkt_residual_from_gradient(theta, grad, penalties, p);
          diag.objective_trace.push_back(obj);
          diag.kkt_residual = kkt;
          const double rel = std::abs(last_obj - obj) / std::max(1.0, std::abs(obj));
          plateau.record(rel, kkt);
          last_obj = obj;
          if (plateau.done(kkt, cfg.kkt_tol)) {
            diag.converged = true;
            break;
          }
        }
      }
    }
  }
  diag.step_size = step;
  return {BlockParams::unflatten(theta, model.num_sources(), p), std::move(diag)};
}

SolveResult solve_weighted_lasso(const StackedOperator& op, const Vector& y, std::span<const double> penalties,
                                 const SolverConfig& cfg, const BlockParams* warm_start) {
  const QuadraticModel model = QuadraticModel::from_operator(op, y, cfg);
  if (warm_start) {
    const Vector flat = warm_start->flatten();
    return solve(model, penalties, cfg, &flat);
  }
  return solve(model, penalties, cfg);
}

}  // namespace tfusion
