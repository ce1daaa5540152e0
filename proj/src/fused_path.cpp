#include "transfusion/fused_path.hpp"

#include <algorithm>
#include <numeric>

namespace tfusion {

namespace {

std::vector<double> scaled(std::span<const double> rel, double lambda) {
  std::vector<double> out(rel.begin(), rel.end());
  for (double& v : out) v *= lambda;
  return out;
}

std::vector<Index> all_rows(Index n) {
  std::vector<Index> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), Index{0});
  return rows;
}

}  // namespace

FusedDesign FusedDesign::from_problem(const TransferProblem& problem) {
  FusedDesign d;
  d.source_size = problem.source_size();
  d.sources.reserve(problem.sources().size());
  for (const auto& s : problem.sources()) d.sources.push_back(kernels::make_gram_block(s.design(), s.responses()));
  return d;
}

FusedDesign FusedDesign::pooled_from_problem(const TransferProblem& problem) {
  FusedDesign d;
  if (problem.num_sources() == 0) return d;
  std::vector<kernels::GramBlock> blocks;
  blocks.reserve(problem.sources().size());
  for (const auto& s : problem.sources()) blocks.push_back(kernels::make_gram_block(s.design(), s.responses()));
  std::vector<const kernels::GramBlock*> ptrs;
  for (const auto& b : blocks) ptrs.push_back(&b);
  d.pooled_prior = kernels::sum_gram_blocks(ptrs);
  d.pooled_rows = problem.num_sources() * problem.source_size();
  return d;
}

QuadraticModel make_fused_model(const FusedDesign& design, const TaskSample& target, std::span<const Index> rows,
                                const SolverConfig& cfg) {
  const std::vector<Index> idx(rows.begin(), rows.end());
  const Matrix x = target.design()(idx, Eigen::all);
  const Vector y = target.responses()(idx);
  kernels::GramBlock tgt = kernels::make_gram_block(x, y);
  if (design.pooled_prior) tgt = kernels::sum_gram_blocks({&*design.pooled_prior, &tgt});
  const double n_total = static_cast<double>(design.num_sources() * design.source_size + design.pooled_rows +
                                             static_cast<Index>(rows.size()));
  return QuadraticModel(design.sources, std::move(tgt), n_total, cfg.power_probes, cfg.rng_seed, cfg.backend);
}

std::vector<int> target_folds(Index n_t, int folds, std::uint64_t seed) {
  if (n_t < 2) throw std::invalid_argument("target_folds: need at least 2 target rows for validation");
  return make_folds(n_t, static_cast<int>(std::min<Index>(folds, n_t)), seed);
}

FusedFit fit_fused_path(const FusedDesign& design, const TaskSample& target, std::span<const double> a,
                        const TuningGrid& grid, const SolverConfig& cfg, std::span<const int> fold_ids,
                        bool two_step) {
  grid.validate();
  const int k_src = design.num_sources();
  if (static_cast<int>(a.size()) != k_src) throw DimensionError("fit_fused_path: need one fusion weight per source");
  if (static_cast<Index>(fold_ids.size()) != target.rows()) throw DimensionError("fit_fused_path: fold ids vs rows");
  const Index n_s = design.source_size;
  const Index n_t = target.rows();

  std::vector<double> rel(a.begin(), a.end());
  rel.push_back(1.0);

  const std::vector<Index> everything = all_rows(n_t);
  const QuadraticModel full = make_fused_model(design, target, everything, cfg);
  std::vector<double> grid0 = grid.lambda0_grid;
  if (grid0.empty()) grid0 = log_spaced_grid(std::max(full.lambda_max(rel), 1e-12), grid.points, grid.min_ratio);

  const int folds = *std::max_element(fold_ids.begin(), fold_ids.end()) + 1;
  std::vector<std::vector<Vector>> fold_w(static_cast<std::size_t>(folds));

  FusedFit fit;
  fit.step1_curve = cross_validate(grid0, fold_ids, [&](int f, std::span<const Index> train, std::span<const Index> test) {
    const QuadraticModel model = make_fused_model(design, target, train, cfg);
    const std::vector<Index> test_idx(test.begin(), test.end());
    const Matrix x_test = target.design()(test_idx, Eigen::all);
    const Vector y_test = target.responses()(test_idx);
    Vector warm = Vector::Zero(model.num_params());
    std::vector<double> sse(grid0.size());
    auto& store = fold_w[static_cast<std::size_t>(f)];
    store.resize(grid0.size());
    for (std::size_t g = 0; g < grid0.size(); ++g) {
      const SolveResult sol = solve(model, scaled(rel, grid0[g]), cfg, &warm);
      warm = sol.theta.flatten();
      const auto betas = sol.theta.betas();
      store[g] = w_average(betas, n_s, static_cast<Index>(train.size()));
      sse[g] = (y_test - x_test * store[g]).squaredNorm();
    }
    return sse;
  });

  const std::size_t best = fit.step1_curve.best_index;
  {
    Vector warm = Vector::Zero(full.num_params());
    SolveResult sol;
    for (std::size_t g = 0; g <= best; ++g) {
      sol = solve(full, scaled(rel, grid0[g]), cfg, &warm);
      warm = sol.theta.flatten();
    }
    fit.theta = std::move(sol.theta);
    fit.step1_diagnostics = std::move(sol.diagnostics);
    fit.betas = fit.theta.betas();
    fit.w_hat = w_average(fit.betas, n_s, n_t);
  }
  if (!two_step) return fit;

  const Matrix& x0 = target.design();
  const Vector residual = target.responses() - x0 * fit.w_hat;
  std::vector<double> grid2 = grid.tilde_lambda_grid;
  if (grid2.empty()) {
    const double top = (x0.transpose() * residual).lpNorm<Eigen::Infinity>() / static_cast<double>(n_t);
    grid2 = log_spaced_grid(std::max(top, 1e-12), grid.points, grid.min_ratio);
  }

  fit.step2_curve = cross_validate(grid2, fold_ids, [&](int f, std::span<const Index> train, std::span<const Index> test) {
    const Vector& w_f = fold_w[static_cast<std::size_t>(f)][best];
    const std::vector<Index> tr(train.begin(), train.end());
    const std::vector<Index> te(test.begin(), test.end());
    const Matrix x_train = x0(tr, Eigen::all);
    const Vector r_train = target.responses()(tr) - x_train * w_f;
    const Matrix x_test = x0(te, Eigen::all);
    const Vector r_test = target.responses()(te) - x_test * w_f;
    const QuadraticModel model = QuadraticModel::single_block(x_train, r_train, cfg);
    Vector warm = Vector::Zero(model.num_params());
    std::vector<double> sse(grid2.size());
    for (std::size_t g = 0; g < grid2.size(); ++g) {
      const double pen[1] = {grid2[g]};
      const SolveResult sol = solve(model, pen, cfg, &warm);
      warm = sol.theta.target_block();
      sse[g] = (r_test - x_test * warm).squaredNorm();
    }
    return sse;
  });

  const std::size_t best2 = fit.step2_curve->best_index;
  const QuadraticModel local = QuadraticModel::single_block(x0, residual, cfg);
  Vector warm = Vector::Zero(local.num_params());
  SolveResult sol;
  for (std::size_t g = 0; g <= best2; ++g) {
    const double pen[1] = {grid2[g]};
    sol = solve(local, pen, cfg, &warm);
    warm = sol.theta.target_block();
  }
  fit.delta_hat = sol.theta.target_block();
  fit.step2_diagnostics = std::move(sol.diagnostics);
  return fit;
}

FusedFit fit_fused_tuned(const FusedDesign& design, const TaskSample& target, std::span<const double> theorem_a,
                         const TuningGrid& grid, const SolverConfig& cfg, std::span<const int> fold_ids,
                         bool two_step) {
  grid.validate();
  std::optional<FusedFit> best;
  for (double c : grid.fusion_constants) {
    std::vector<double> a(theorem_a.begin(), theorem_a.end());
    for (double& v : a) v *= c / 8.0;
    FusedFit fit = fit_fused_path(design, target, a, grid, cfg, fold_ids, two_step);
    fit.fusion_constant = c;
    const double err = fit.step1_curve.best_error();
    if (!best || err < best->step1_curve.best_error() * (1.0 - 1e-12)) best = std::move(fit);
  }
  return std::move(*best);
}

FitResult one_step_result(const FusedFit& fit, Strategy tag) {
  FitResult r;
  r.beta_target = fit.w_hat;
  r.w_hat = fit.w_hat;
  r.per_task_betas = fit.betas;
  r.objective_trace = fit.step1_diagnostics.objective_trace;
  r.kkt_residual = fit.step1_diagnostics.kkt_residual;
  r.iterations = fit.step1_diagnostics.iterations;
  r.converged = fit.step1_diagnostics.converged;
  r.strategy = tag;
  r.lambda0 = fit.step1_curve.best_lambda();
  r.validation_error = fit.step1_curve.best_error();
  if (fit.betas.size() > 1) r.fusion_constant = fit.fusion_constant;
  return r;
}

FitResult two_step_result(const FusedFit& fit, Strategy tag) {
  if (!fit.step2_curve) throw std::logic_error("two_step_result: fit has no local correction");
  FitResult r = one_step_result(fit, tag);
  r.beta_target = fit.w_hat + fit.delta_hat;
  r.delta_hat = fit.delta_hat;
  r.objective_trace = fit.step2_diagnostics.objective_trace;
  r.kkt_residual = std::max(fit.step1_diagnostics.kkt_residual, fit.step2_diagnostics.kkt_residual);
  r.iterations = fit.step1_diagnostics.iterations + fit.step2_diagnostics.iterations;
  r.converged = fit.step1_diagnostics.converged && fit.step2_diagnostics.converged;
  r.tilde_lambda = fit.step2_curve->best_lambda();
  r.validation_error = fit.step2_curve->best_error();
  return r;
}

}  // namespace tfusion
