#include "transfusion/transfusion.hpp"

#include "transfusion/stacked_operator.hpp"

#include <algorithm>
#include <cmath>

namespace tfusion {

ProblemDims ProblemDims::of(const TransferProblem& problem) {
  ProblemDims d;
  d.total = problem.total_size();
  d.source_size = problem.source_size();
  d.target_size = problem.target_size();
  d.dim = problem.dim();
  d.num_sources = problem.num_sources();
  return d;
}

void ProblemDims::validate() const {
  if (dim < 2) throw DimensionError("ProblemDims: need p >= 2");
  if (target_size < 1) throw DimensionError("ProblemDims: need n_T >= 1");
  if (num_sources < 0 || (num_sources > 0 && source_size < 1)) throw DimensionError("ProblemDims: invalid K or n_S");
  if (total != num_sources * source_size + target_size) throw DimensionError("ProblemDims: N != K n_S + n_T");
}

PenaltyWeights theorem_weights(const ProblemDims& dims, Regime regime, double c0) {
  dims.validate();
  if (!(c0 > 0.0)) throw std::invalid_argument("theorem_weights: c0 must be positive");
  const double log_p = std::log(static_cast<double>(dims.dim));
  const double n = static_cast<double>(dims.total);
  const double ns = static_cast<double>(dims.source_size);
  PenaltyWeights w;
  double ak = 0.0;
  if (regime == Regime::A) {
    w.lambda0 = c0 * std::sqrt(log_p / n);
    ak = 8.0 * std::sqrt(ns / n);
  } else {
    // With no sources the regime-Ac level would divide by n_S = 0.
    w.lambda0 = c0 * std::sqrt(log_p / (dims.num_sources > 0 ? ns : n));
    ak = 8.0 * ns / n;
  }
  w.a.assign(static_cast<std::size_t>(dims.num_sources), ak);
  return w;
}

bool in_regime_a(const ProblemDims& dims, double sparsity, double h_bar) {
  dims.validate();
  if (dims.num_sources == 0) return true;
  const double log_p = std::log(static_cast<double>(dims.dim));
  return sparsity * log_p / static_cast<double>(dims.source_size) >=
         h_bar * std::sqrt(log_p / static_cast<double>(dims.target_size));
}

Vector stacked_responses(const TransferProblem& problem) {
  Vector y(problem.total_size());
  Index off = 0;
  for (const auto& s : problem.sources()) {
    y.segment(off, s.rows()) = s.responses();
    off += s.rows();
  }
  y.segment(off, problem.target_size()) = problem.target().responses();
  return y;
}

CoTrainResult step1_cotrain(const TransferProblem& problem, const PenaltyWeights& weights, const SolverConfig& cfg) {
  weights.validate(problem.num_sources());
  const StackedOperator op = StackedOperator::from_problem(problem);
  const std::vector<double> pen = weights.block_penalties();
  SolveResult sol = solve_weighted_lasso(op, stacked_responses(problem), pen, cfg);
  CoTrainResult out;
  out.betas = sol.theta.betas();
  out.w_hat = w_average(out.betas, problem.source_size(), problem.target_size());
  out.theta = std::move(sol.theta);
  out.diagnostics = std::move(sol.diagnostics);
  return out;
}

LocalCorrection step2_debias(const TaskSample& target, const Vector& w_hat, double tilde_lambda,
                             const SolverConfig& cfg) {
  if (w_hat.size() != target.dim()) throw DimensionError("step2_debias: w_hat has wrong length");
  if (!(tilde_lambda >= 0.0) || !std::isfinite(tilde_lambda)) {
    throw std::invalid_argument("step2_debias: tilde_lambda must be finite and >= 0");
  }
  const Vector residual = target.responses() - target.design() * w_hat;
  const QuadraticModel model = QuadraticModel::single_block(target.design(), residual, cfg);
  const double pen[1] = {tilde_lambda};
  SolveResult sol = solve(model, pen, cfg);
  LocalCorrection out;
  out.delta_hat = sol.theta.target_block();
  out.beta = w_hat + out.delta_hat;
  out.diagnostics = std::move(sol.diagnostics);
  return out;
}

FitResult lasso_baseline(const TaskSample& target, const TuningGrid& grid, const SolverConfig& cfg,
                         std::uint64_t seed) {
  const auto folds = target_folds(target.rows(), grid.folds, seed);
  const FusedFit fit = fit_fused_path(FusedDesign::target_only(), target, {}, grid, cfg, folds, false);
  return one_step_result(fit, Strategy::baseline_lasso);
}

FitResult pooled_baseline(const TransferProblem& problem, const TuningGrid& grid, const SolverConfig& cfg,
                          std::uint64_t seed) {
  if (problem.num_sources() == 0) return lasso_baseline(problem.target(), grid, cfg, seed);
  const auto folds = target_folds(problem.target_size(), grid.folds, seed);
  const FusedFit fit =
      fit_fused_path(FusedDesign::pooled_from_problem(problem), problem.target(), {}, grid, cfg, folds, true);
  return two_step_result(fit, Strategy::pooled);
}

namespace {

TuningGrid with_folds(TuningGrid grid, int folds) {
  grid.folds = folds;
  return grid;
}

FusedFit fused_fit(const TransferProblem& problem, const FusedDesign& design, Regime regime, const TuningGrid& grid,
                   const SolverConfig& cfg, const ValidationPlan& plan, bool two_step) {
  const PenaltyWeights w = theorem_weights(ProblemDims::of(problem), regime);
  const auto folds = target_folds(problem.target_size(), plan.folds, plan.seed);
  return fit_fused_tuned(design, problem.target(), w.a, grid, cfg, folds, two_step);
}

}  // namespace

FitResult fit_one_step(const TransferProblem& problem, const TuningGrid& grid, const SolverConfig& cfg,
                       const ValidationPlan& plan, Regime regime) {
  if (problem.num_sources() == 0) return lasso_baseline(problem.target(), with_folds(grid, plan.folds), cfg, plan.seed);
  const FusedFit fit = fused_fit(problem, FusedDesign::from_problem(problem), regime, grid, cfg, plan, false);
  return one_step_result(fit, Strategy::one_step);
}

FitResult fit_two_step(const TransferProblem& problem, Regime regime, const TuningGrid& grid,
                       const SolverConfig& cfg, const ValidationPlan& plan) {
  if (problem.num_sources() == 0) return lasso_baseline(problem.target(), with_folds(grid, plan.folds), cfg, plan.seed);
  const FusedFit fit = fused_fit(problem, FusedDesign::from_problem(problem), regime, grid, cfg, plan, true);
  return two_step_result(fit, regime == Regime::A ? Strategy::two_step_regime_A : Strategy::two_step_regime_Ac);
}

std::size_t select_by_validation(const std::vector<FitResult>& candidates) {
  if (candidates.empty()) throw std::invalid_argument("select_by_validation: no candidates");
  std::vector<double> errs;
  errs.reserve(candidates.size());
  for (const auto& c : candidates) errs.push_back(c.validation_error);
  return argmin_prefer_first(errs);
}

AutoFitReport fit_auto_report(const TransferProblem& problem, const TuningGrid& grid, const SolverConfig& cfg,
                              const ValidationPlan& plan) {
  AutoFitReport report;
  if (problem.num_sources() == 0) {
    report.selected = lasso_baseline(problem.target(), with_folds(grid, plan.folds), cfg, plan.seed);
    return report;
  }
  const FusedDesign design = FusedDesign::from_problem(problem);
  // The one-step candidate is the first step of the regime-A fit.
  const FusedFit fit_a = fused_fit(problem, design, Regime::A, grid, cfg, plan, true);
  const FusedFit fit_ac = fused_fit(problem, design, Regime::Ac, grid, cfg, plan, true);
  report.candidates.push_back(one_step_result(fit_a, Strategy::one_step));
  report.candidates.push_back(two_step_result(fit_a, Strategy::two_step_regime_A));
  report.candidates.push_back(two_step_result(fit_ac, Strategy::two_step_regime_Ac));

  if (std::none_of(report.candidates.begin(), report.candidates.end(), [](const FitResult& r) { return r.converged; })) {
    throw NumericalError("fit_auto: no candidate converged");
  }
  report.selected = report.candidates[select_by_validation(report.candidates)];
  return report;
}

FitResult fit_auto(const TransferProblem& problem, const TuningGrid& grid, const SolverConfig& cfg,
                   const ValidationPlan& plan) {
  return fit_auto_report(problem, grid, cfg, plan).selected;
}

}  // namespace tfusion
