#include "validate_suite.hpp"

#include "transfusion/debias.hpp"
#include "transfusion/dtransfusion.hpp"
#include "transfusion/kernels.hpp"
#include "transfusion/prox_solver.hpp"
#include "transfusion/rng.hpp"
#include "transfusion/stacked_operator.hpp"
#include "transfusion/synthgen.hpp"
#include "transfusion/transfusion.hpp"

#include <cmath>
#include <functional>
#include <ostream>
#include <string>

using namespace tfusion;

namespace {

TransferProblem random_problem(Rng& rng, int k, Index n_s, Index n_t, Index p) {
  const Vector beta = standard_normal(rng, p);
  auto task = [&](int id, Index n) {
    Matrix x = standard_normal(rng, n, p);
    Vector y = x * beta + 0.5 * standard_normal(rng, n);
    return TaskSample(std::move(x), std::move(y), id);
  };
  TaskSample target = task(0, n_t);
  std::vector<TaskSample> sources;
  for (int i = 1; i <= k; ++i) sources.push_back(task(i, n_s));
  return TransferProblem(std::move(target), std::move(sources));
}

}  // namespace

int run_validate_suite(std::ostream& out, std::uint64_t seed) {
  int failures = 0;
  auto check = [&](const std::string& name, const std::function<bool()>& body) {
    bool ok = false;
    std::string why;
    try {
      ok = body();
    } catch (const std::exception& e) {
      why = std::string(" (") + e.what() + ")";
    }
    out << (ok ? "PASS " : "FAIL ") << name << why << '\n';
    if (!ok) ++failures;
  };
  Rng rng(seed);
  SolverConfig cfg;

  check("kkt certificate on random weighted lasso", [&] {
    for (int t = 0; t < 20; ++t) {
      const TransferProblem prob = random_problem(rng, 1 + t % 3, 15, 12, 8);
      const StackedOperator op = StackedOperator::from_problem(prob);
      const Vector y = stacked_responses(prob);
      const std::vector<double> pen(static_cast<std::size_t>(prob.num_sources() + 1), 0.05);
      const SolveResult r = solve_weighted_lasso(op, y, pen, cfg);
      if (!r.diagnostics.converged || kkt_residual(op, y, pen, r.theta) > 1e-7) return false;
    }
    return true;
  });

  check("stacked operator adjoint and serial/omp agreement", [&] {
    for (int t = 0; t < 10; ++t) {
      const TransferProblem prob = random_problem(rng, 2, 9, 7, 5);
      for (int form = 0; form < 2; ++form) {
        const StackedOperator op = form == 0 ? StackedOperator::from_problem(prob)
                                             : StackedOperator::identity_blocks(2, 9, prob.target().design_ptr());
        const Vector v = standard_normal(rng, op.cols());
        const Vector r = standard_normal(rng, op.rows());
        const double lhs = op.apply(v).dot(r);
        const double rhs = v.dot(op.adjoint(r));
        if (std::abs(lhs - rhs) > 1e-10 * (1.0 + std::abs(lhs))) return false;
        if (op.apply(v, kernels::Backend::serial) != op.apply(v, kernels::Backend::omp)) return false;
        if (op.adjoint(r, kernels::Backend::serial) != op.adjoint(r, kernels::Backend::omp)) return false;
      }
    }
    return true;
  });

  check("no sources reduces co-training to the target lasso", [&] {
    const TransferProblem prob = random_problem(rng, 0, 0, 30, 10);
    PenaltyWeights w;
    w.lambda0 = 0.1;
    const CoTrainResult r = step1_cotrain(prob, w, cfg);
    const Vector lasso = lasso_local(prob.target(), 0.1, cfg);
    return (r.w_hat - lasso).lpNorm<Eigen::Infinity>() <= 1e-8;
  });

  check("local correction is a no-op above the residual bound", [&] {
    const TransferProblem prob = random_problem(rng, 0, 0, 25, 6);
    const Vector w = standard_normal(rng, 6);
    const TaskSample& t = prob.target();
    const double bound = (t.design().transpose() * (t.responses() - t.design() * w)).lpNorm<Eigen::Infinity>() /
                         static_cast<double>(t.rows());
    const LocalCorrection c = step2_debias(t, w, bound * (1 + 1e-12), cfg);
    return c.delta_hat.isZero(0.0) && c.beta == w;
  });

  check("theta rows are feasible", [&] {
    const Matrix x = standard_normal(rng, 40, 12);
    const Matrix s = sample_covariance(x);
    for (Index j = 0; j < 12; ++j) {
      const ThetaRow row = solve_theta_row(s, j, 0.2, cfg);
      if (row.feasibility_residual > row.mu_used + 1e-9) return false;
    }
    return true;
  });

  check("debiased estimator splits into bias and variance", [&] {
    const TransferProblem prob = random_problem(rng, 0, 0, 40, 10);
    const Vector beta = standard_normal(rng, 10);
    const PseudoSample ps = debias_estimator(prob.target(), 0.1, 0.3, cfg);
    const BiasVariance bv = bias_variance_report(prob.target(), beta, ps);
    return (bv.variance_term + bv.bias_term - (ps.beta_tilde - beta)).lpNorm<Eigen::Infinity>() <= 1e-10;
  });

  check("diverse shifts cancel exactly", [&] {
    for (int k = 1; k <= 6; ++k) {
      const auto d = gen_model_shift(ShiftKind::diverse, k, 12.0, 80, seed + static_cast<std::uint64_t>(k));
      Vector sum = Vector::Zero(80);
      for (const auto& v : d) sum += v;
      if (!sum.isZero(0.0)) return false;
    }
    return true;
  });

  check("C_Sigma is 1 for identical covariances", [&] {
    const Matrix s = arrowhead_sigma(20, 0.5);
    return c_sigma({s, s}, s) == 1.0;
  });

  check("source message round-trips bit-exactly", [&] {
    SourceMessage m;
    m.n_s = 123;
    m.pseudo.source_index = 4;
    m.pseudo.beta_tilde = standard_normal(rng, 17);
    const auto bytes = m.serialize();
    const SourceMessage back = SourceMessage::deserialize(bytes);
    return bytes.size() == m.payload_bytes() && back.n_s == 123 && back.pseudo.source_index == 4 &&
           back.pseudo.beta_tilde == m.pseudo.beta_tilde;
  });

  return failures;
}
