#pragma once

#include <cstdint>
#include <vector>

namespace regretlab {

/// Zero-sum matrix game. The row player mixes over rows to MINIMIZE the
/// payoff, the column player mixes over columns to MAXIMIZE it (rows are
/// policies, columns are levels, payoffs are regrets).
struct MatrixGame {
  int64_t rows = 0;
  int64_t cols = 0;
  std::vector<double> payoff;  // [row * cols + col]

  double at(int64_t r, int64_t c) const { return payoff[static_cast<size_t>(r * cols + c)]; }
  void validate() const;
};

struct GameSolution {
  double value = 0.0;
  std::vector<double> row_strategy;
  std::vector<double> col_strategy;
  double duality_gap = 0.0;  // certified against the input payoffs
  int pivots = 0;
};

/// Exact solve via linear programming (revised simplex on the column-count
/// sized basis). The returned duality gap is recomputed from the two output
/// strategies on the original matrix; callers should treat it as the
/// correctness certificate. Throws CapacityError if the pivot cap is hit.
GameSolution solve_matrix_game(const MatrixGame& game, double tolerance = 1e-9,
                               int max_pivots = 200000);

/// max_col(x^T M) - min_row(M q): nonnegative up to roundoff, zero at optimum.
double duality_gap(const MatrixGame& game, const std::vector<double>& row_strategy,
                   const std::vector<double>& col_strategy);

}  // namespace regretlab
