#pragma once

#include "transfusion/core_types.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace tfusion {

/// Penalty grids and fold count for CV tuning. Empty grids are derived from
/// the data: `points` log-spaced values from lambda_max down to
/// lambda_max * `min_ratio`.
///
/// `fusion_constants` are the candidate leading constants of the fusion
/// weights (a_k = c sqrt(n_S/N) in regime A, c n_S/N in regime Ac; the
/// theoretical choice is c = 8). The constant is tuned jointly with lambda_0.
struct TuningGrid {
  std::vector<double> lambda0_grid;
  std::vector<double> tilde_lambda_grid;
  int folds = 10;
  int points = 30;
  double min_ratio = 1e-3;
  std::vector<double> fusion_constants = {8.0, 1.0};

  void validate() const;
};

/// `points` log-spaced values from `lambda_max` down to `lambda_max * min_ratio`.
std::vector<double> log_spaced_grid(double lambda_max, int points, double min_ratio);

/// Validates a user grid (nonempty, positive, strictly descending).
void validate_grid(std::span<const double> grid);

/// Balanced fold ids in [0, folds): rows are ranked by a hash of (seed, row
/// index) and dealt round-robin. Throws if n < folds.
std::vector<int> make_folds(Index n, int folds, std::uint64_t seed);

struct CvCurve {
  std::vector<double> grid;
  /// Held-out squared prediction error averaged over all rows, per grid point.
  std::vector<double> mean_error;
  std::size_t best_index = 0;

  double best_lambda() const { return grid.at(best_index); }
  double best_error() const { return mean_error.at(best_index); }
};

/// Evaluates one fold: given the training and held-out row indices, returns
/// the held-out sum of squared errors at every grid point (in grid order).
using FoldEvaluator =
    std::function<std::vector<double>(int fold, std::span<const Index> train, std::span<const Index> test)>;

/// K-fold CV over `grid`. Folds run concurrently and are merged in fold order.
/// The arg-min breaks ties toward the larger lambda (earlier grid entry).
CvCurve cross_validate(std::span<const double> grid, std::span<const int> fold_ids, const FoldEvaluator& evaluate);

/// Index of the smallest entry, ties (within 1e-12 relative) to the earliest one.
std::size_t argmin_prefer_first(std::span<const double> values);

}  // namespace tfusion
