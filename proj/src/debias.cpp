#include "transfusion/debias.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

namespace tfusion {

namespace {

constexpr double kStationarityTol = 1e-10;
constexpr int kMaxDoublings = 10;
constexpr int kMaxSweeps = 20000;

double row_violation(double theta_i, double r_i, double mu) {
  return theta_i == 0.0 ? std::max(std::abs(r_i) - mu, 0.0) : std::abs(r_i + std::copysign(mu, theta_i));
}

// Coordinate descent on 1/2 t^T S t - t_j + mu ||t||_1. Returns nothing when the
// iterates blow up or stall, which is how an empty constraint set shows itself.
std::optional<std::pair<Vector, int>> penalised_row(const Matrix& s, Index j, double mu, int max_sweeps) {
  const Index p = s.rows();
  Vector theta = Vector::Zero(p);
  Vector g = Vector::Zero(p);  // S theta
  double diag_scale = 0.0;
  for (Index i = 0; i < p; ++i) diag_scale = std::max(diag_scale, s(i, i));
  if (s(j, j) <= 0.0 && mu < 1.0) return std::nullopt;
  const double blowup = 1e10 / std::max(diag_scale, 1e-300);

  auto update = [&](Index i) {
    const double sii = s(i, i);
    if (sii <= 0.0) return 0.0;
    const double target = (i == j ? 1.0 : 0.0) - (g(i) - sii * theta(i));
    const double mag = std::abs(target) - mu;
    const double next = mag > 0.0 ? std::copysign(mag, target) / sii : 0.0;
    const double diff = next - theta(i);
    if (diff != 0.0) {
      g.noalias() += diff * s.col(i);
      theta(i) = next;
    }
    return std::abs(diff) * std::sqrt(sii);
  };
  auto violation = [&](bool active_only) {
    double worst = 0.0;
    for (Index i = 0; i < p; ++i) {
      if (active_only && theta(i) == 0.0) continue;
      if (s(i, i) <= 0.0) continue;
      worst = std::max(worst, row_violation(theta(i), g(i) - (i == j ? 1.0 : 0.0), mu));
    }
    return worst;
  };

  std::vector<Index> active;
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    for (Index i = 0; i < p; ++i) update(i);
    if (!theta.allFinite() || theta.lpNorm<Eigen::Infinity>() > blowup) return std::nullopt;
    if (violation(false) <= kStationarityTol) return std::make_pair(theta, sweep);
    active.clear();
    for (Index i = 0; i < p; ++i) {
      if (theta(i) != 0.0) active.push_back(i);
    }
    for (int inner = 0; inner < 1000; ++inner) {
      double change = 0.0;
      for (Index i : active) change = std::max(change, update(i));
      if (change <= 0.1 * kStationarityTol) break;
    }
    if (!theta.allFinite() || theta.lpNorm<Eigen::Infinity>() > blowup) return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace

Vector lasso_local(const TaskSample& sample, double lambda, const SolverConfig& cfg) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lasso_local: lambda must be >= 0");
  const QuadraticModel model = QuadraticModel::single_block(sample.design(), sample.responses(), cfg);
  const double pen[1] = {lambda};
  SolveResult sol = solve(model, pen, cfg);
  return sol.theta.target_block();
}

Matrix sample_covariance(const Matrix& design) {
  if (design.rows() == 0) throw DimensionError("sample_covariance: no rows");
  Matrix s = Matrix::Zero(design.cols(), design.cols());
  s.selfadjointView<Eigen::Lower>().rankUpdate(design.transpose(), 1.0 / static_cast<double>(design.rows()));
  return Matrix(s.selfadjointView<Eigen::Lower>());
}

ThetaRow solve_theta_row(const Matrix& sigma_hat, Index j, double mu, const SolverConfig& cfg) {
  if (sigma_hat.rows() != sigma_hat.cols()) throw DimensionError("solve_theta_row: sigma_hat must be square");
  if (j < 0 || j >= sigma_hat.rows()) throw DimensionError("solve_theta_row: row index out of range");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw std::invalid_argument("solve_theta_row: mu must be positive");
  if (!sigma_hat.allFinite()) throw std::invalid_argument("solve_theta_row: sigma_hat has non-finite entries");
  if (!sigma_hat.isApprox(sigma_hat.transpose(), 1e-12)) throw std::invalid_argument("solve_theta_row: sigma_hat not symmetric");

  const int sweeps = std::min(cfg.max_iter, kMaxSweeps);
  double m = mu;
  for (int attempt = 0; attempt <= kMaxDoublings; ++attempt, m *= 2.0) {
    const auto sol = penalised_row(sigma_hat, j, m, sweeps);
    if (!sol) continue;
    ThetaRow row;
    row.theta = sol->first;
    row.sweeps = sol->second;
    row.mu_used = m;
    Vector r = sigma_hat * row.theta;
    row.quadratic_value = row.theta.dot(r);
    r(j) -= 1.0;
    row.feasibility_residual = r.lpNorm<Eigen::Infinity>();
    if (row.feasibility_residual <= m + 1e-9) return row;
  }
  throw NumericalError("solve_theta_row: row " + std::to_string(j) + " infeasible up to mu = " +
                       std::to_string(m / 2.0));
}

PseudoSample debias_estimator(const TaskSample& sample, double lambda, double mu, const SolverConfig& cfg) {
  const Index n = sample.rows();
  const Index p = sample.dim();
  PseudoSample out;
  out.source_index = sample.task_id();
  out.lambda_used = lambda;
  out.beta_lasso = lasso_local(sample, lambda, cfg);

  const Matrix& x = sample.design();
  const Matrix sigma = sample_covariance(x);
  out.theta_hat.resize(p, p);
  std::vector<double> mus(static_cast<std::size_t>(p), 0.0);
  std::vector<double> feas(static_cast<std::size_t>(p), 0.0);
  std::string failure;
#pragma omp parallel for schedule(dynamic, 4)
  for (Index j = 0; j < p; ++j) {
    try {
      const ThetaRow row = solve_theta_row(sigma, j, mu, cfg);
      out.theta_hat.row(j) = row.theta.transpose();
      mus[static_cast<std::size_t>(j)] = row.mu_used;
      feas[static_cast<std::size_t>(j)] = row.feasibility_residual;
    } catch (const std::exception& e) {
#pragma omp critical(debias_failure)
      if (failure.empty()) failure = e.what();
    }
  }
  if (!failure.empty()) throw NumericalError(failure);

  const Vector residual = sample.responses() - x * out.beta_lasso;
  out.beta_tilde = out.beta_lasso + out.theta_hat * (x.transpose() * residual) / static_cast<double>(n);
  if (!out.beta_tilde.allFinite()) throw NumericalError("debias_estimator: non-finite pseudo-sample");

  out.mu_used = *std::max_element(mus.begin(), mus.end());
  out.theta_diagnostics.max_mu_used = out.mu_used;
  out.theta_diagnostics.max_feasibility_residual = *std::max_element(feas.begin(), feas.end());
  const Matrix ts = out.theta_hat * sigma;
  out.theta_diagnostics.max_variance_diag = (ts.array() * out.theta_hat.array()).rowwise().sum().maxCoeff();
  return out;
}

BiasVariance bias_variance_report(const TaskSample& sample, const Vector& beta_true, const PseudoSample& pseudo) {
  const Index p = sample.dim();
  if (beta_true.size() != p || pseudo.beta_lasso.size() != p || pseudo.theta_hat.rows() != p) {
    throw DimensionError("bias_variance_report: dimension mismatch");
  }
  const Matrix& x = sample.design();
  const double n = static_cast<double>(sample.rows());
  const Vector eps = sample.responses() - x * beta_true;
  BiasVariance out;
  out.variance_term = pseudo.theta_hat * (x.transpose() * eps) / n;
  const Vector err = pseudo.beta_lasso - beta_true;
  out.bias_term = err - pseudo.theta_hat * (x.transpose() * (x * err)) / n;
  return out;
}

double estimate_noise_sd(const TaskSample& sample, const SolverConfig& cfg) {
  const Matrix& x = sample.design();
  const Vector& y = sample.responses();
  const double n = static_cast<double>(sample.rows());
  const double scale = std::sqrt(2.0 * std::log(static_cast<double>(sample.dim())) / n);
  const QuadraticModel model = QuadraticModel::single_block(x, y, cfg);
  double sigma = y.norm() / std::sqrt(n);
  if (sigma == 0.0) return 0.0;
  const double floor = 1e-8 * sigma;
  Vector warm = Vector::Zero(sample.dim());
  for (int it = 0; it < 20; ++it) {
    const double pen[1] = {sigma * scale};
    const SolveResult sol = solve(model, pen, cfg, &warm);
    warm = sol.theta.target_block();
    const double next = std::max((y - x * warm).norm() / std::sqrt(n), floor);
    const bool done = std::abs(next - sigma) <= 1e-4 * sigma;
    sigma = next;
    if (done) break;
  }
  return sigma;
}

DebiasParams default_debias_params(const TaskSample& sample, const SolverConfig& cfg) {
  const double rate = std::sqrt(std::log(static_cast<double>(sample.dim())) / static_cast<double>(sample.rows()));
  DebiasParams d;
  d.mu = rate;
  d.lambda = std::max(estimate_noise_sd(sample, cfg), 1e-12) * rate;
  return d;
}

}  // namespace tfusion
