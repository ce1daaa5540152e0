#include "transfusion/cross_validation.hpp"

#include "transfusion/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace tfusion {

void TuningGrid::validate() const {
  if (!lambda0_grid.empty()) validate_grid(lambda0_grid);
  if (!tilde_lambda_grid.empty()) validate_grid(tilde_lambda_grid);
  if (folds < 2) throw std::invalid_argument("TuningGrid: folds must be >= 2");
  if (points < 1) throw std::invalid_argument("TuningGrid: points must be >= 1");
  if (!(min_ratio > 0.0 && min_ratio <= 1.0)) throw std::invalid_argument("TuningGrid: min_ratio must be in (0, 1]");
  if (fusion_constants.empty()) throw std::invalid_argument("TuningGrid: need at least one fusion constant");
  for (double c : fusion_constants) {
    if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("TuningGrid: fusion constants must be positive");
  }
}

std::vector<double> log_spaced_grid(double lambda_max, int points, double min_ratio) {
  if (!(lambda_max > 0.0) || !std::isfinite(lambda_max)) {
    throw std::invalid_argument("log_spaced_grid: lambda_max must be positive");
  }
  if (points < 1) throw std::invalid_argument("log_spaced_grid: need at least one point");
  std::vector<double> grid(static_cast<std::size_t>(points));
  if (points == 1) {
    grid[0] = lambda_max;
    return grid;
  }
  const double log_ratio = std::log(min_ratio);
  for (int i = 0; i < points; ++i) {
    grid[static_cast<std::size_t>(i)] = lambda_max * std::exp(log_ratio * i / (points - 1));
  }
  return grid;
}

void validate_grid(std::span<const double> grid) {
  if (grid.empty()) throw std::invalid_argument("tuning grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0)) throw std::invalid_argument("tuning grid entries must be > 0");
    if (i > 0 && !(grid[i] < grid[i - 1])) throw std::invalid_argument("tuning grid must be strictly descending");
  }
}

std::vector<int> make_folds(Index n, int folds, std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("make_folds: need at least 2 folds");
  if (n < folds) {
    throw std::invalid_argument("make_folds: " + std::to_string(n) + " rows cannot fill " + std::to_string(folds) +
                                " folds");
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::vector<std::uint64_t> keys(order.size());
  for (Index i = 0; i < n; ++i) keys[static_cast<std::size_t>(i)] = derive_seed(seed, {static_cast<std::uint64_t>(i)});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    const auto ka = keys[static_cast<std::size_t>(a)];
    const auto kb = keys[static_cast<std::size_t>(b)];
    return ka != kb ? ka < kb : a < b;
  });
  std::vector<int> ids(static_cast<std::size_t>(n));
  for (std::size_t r = 0; r < order.size(); ++r) ids[static_cast<std::size_t>(order[r])] = static_cast<int>(r % static_cast<std::size_t>(folds));
  return ids;
}

std::size_t argmin_prefer_first(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmin of empty range");
  double best = values[0];
  for (double v : values) best = std::min(best, v);
  const double slack = 1e-12 * std::max(1.0, std::abs(best));
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] <= best + slack) return i;
  }
  return 0;
}

CvCurve cross_validate(std::span<const double> grid, std::span<const int> fold_ids, const FoldEvaluator& evaluate) {
  validate_grid(grid);
  if (fold_ids.empty()) throw std::invalid_argument("cross_validate: no rows");
  const int folds = *std::max_element(fold_ids.begin(), fold_ids.end()) + 1;
  if (folds < 2) throw std::invalid_argument("cross_validate: need at least 2 folds");
  if (static_cast<Index>(fold_ids.size()) < folds) throw std::invalid_argument("cross_validate: fewer rows than folds");

  std::vector<std::vector<Index>> train(static_cast<std::size_t>(folds)), test(static_cast<std::size_t>(folds));
  for (std::size_t i = 0; i < fold_ids.size(); ++i) {
    const int f = fold_ids[i];
    if (f < 0) throw std::invalid_argument("cross_validate: negative fold id");
    for (int g = 0; g < folds; ++g) {
      (g == f ? test : train)[static_cast<std::size_t>(g)].push_back(static_cast<Index>(i));
    }
  }
  for (int f = 0; f < folds; ++f) {
    if (test[static_cast<std::size_t>(f)].empty()) throw std::invalid_argument("cross_validate: empty fold");
  }

  std::vector<std::vector<double>> sse(static_cast<std::size_t>(folds));
  std::vector<std::string> errors(static_cast<std::size_t>(folds));
#pragma omp parallel for schedule(dynamic)
  for (int f = 0; f < folds; ++f) {
    const auto fi = static_cast<std::size_t>(f);
    try {
      sse[fi] = evaluate(f, train[fi], test[fi]);
    } catch (const std::exception& e) {
      errors[fi] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw NumericalError("cross_validate: fold failed: " + e);
  }

  CvCurve curve;
  curve.grid.assign(grid.begin(), grid.end());
  curve.mean_error.assign(grid.size(), 0.0);
  for (const auto& fold_sse : sse) {
    if (fold_sse.size() != grid.size()) throw DimensionError("cross_validate: evaluator returned wrong length");
    for (std::size_t g = 0; g < grid.size(); ++g) curve.mean_error[g] += fold_sse[g];
  }
  for (double& e : curve.mean_error) e /= static_cast<double>(fold_ids.size());
  curve.best_index = argmin_prefer_first(curve.mean_error);
  return curve;
}

}  // namespace tfusion
