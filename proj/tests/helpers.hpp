#pragma once

#include "transfusion/core_types.hpp"
#include "transfusion/rng.hpp"

#include <memory>
#include <vector>

namespace testing_support {

using namespace tfusion;

inline TaskSample random_task(Rng& rng, int id, Index n, Index p, const Vector& beta, double noise) {
  Matrix x = standard_normal(rng, n, p);
  Vector y = x * beta + noise * standard_normal(rng, n);
  return TaskSample(std::move(x), std::move(y), id);
}

/// Shared-beta problem with i.i.d. Gaussian designs.
inline TransferProblem random_problem(Rng& rng, int k, Index n_s, Index n_t, Index p, double noise = 0.5) {
  const Vector beta = standard_normal(rng, p);
  TaskSample target = random_task(rng, 0, n_t, p, beta, noise);
  std::vector<TaskSample> sources;
  for (int i = 1; i <= k; ++i) sources.push_back(random_task(rng, i, n_s, p, beta + 0.3 * standard_normal(rng, p), noise));
  return TransferProblem(std::move(target), std::move(sources));
}

inline std::vector<Matrix> source_designs(const TransferProblem& prob) {
  std::vector<Matrix> out;
  for (const auto& s : prob.sources()) out.push_back(s.design());
  return out;
}

inline double max_abs_diff(const Vector& a, const Vector& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace testing_support
