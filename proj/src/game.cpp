#include "regretlab/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "regretlab/errors.hpp"

namespace regretlab {

void MatrixGame::validate() const {
  if (rows < 1 || cols < 1) throw ValidationError("matrix game needs at least one row and column");
  if (payoff.size() != static_cast<size_t>(rows * cols)) {
    throw ValidationError("matrix game payoff size does not match rows*cols");
  }
  for (double v : payoff) {
    if (!std::isfinite(v)) throw ValidationError("matrix game payoffs must be finite");
  }
}

double duality_gap(const MatrixGame& game, const std::vector<double>& row_strategy,
                   const std::vector<double>& col_strategy) {
  double upper = -std::numeric_limits<double>::infinity();  // row player's exposure
  for (int64_t j = 0; j < game.cols; ++j) {
    double v = 0.0;
    for (int64_t i = 0; i < game.rows; ++i) v += row_strategy[i] * game.at(i, j);
    upper = std::max(upper, v);
  }
  double lower = std::numeric_limits<double>::infinity();  // column player's guarantee
  for (int64_t i = 0; i < game.rows; ++i) {
    double v = 0.0;
    for (int64_t j = 0; j < game.cols; ++j) v += game.at(i, j) * col_strategy[j];
    lower = std::min(lower, v);
  }
  return upper - lower;
}

namespace {

GameSolution solve_single_row(const MatrixGame& game) {
  GameSolution s;
  s.row_strategy = {1.0};
  s.col_strategy.assign(game.cols, 0.0);
  int64_t best = 0;
  for (int64_t j = 1; j < game.cols; ++j) {
    if (game.at(0, j) > game.at(0, best)) best = j;
  }
  s.col_strategy[best] = 1.0;
  s.value = game.at(0, best);
  s.duality_gap = 0.0;
  return s;
}

GameSolution solve_single_col(const MatrixGame& game) {
  GameSolution s;
  s.col_strategy = {1.0};
  s.row_strategy.assign(game.rows, 0.0);
  int64_t best = 0;
  for (int64_t i = 1; i < game.rows; ++i) {
    if (game.at(i, 0) < game.at(best, 0)) best = i;
  }
  s.row_strategy[best] = 1.0;
  s.value = game.at(best, 0);
  s.duality_gap = 0.0;
  return s;
}

}  // namespace

GameSolution solve_matrix_game(const MatrixGame& game, double tolerance, int max_pivots) {
  game.validate();
  if (game.rows == 1) return solve_single_row(game);
  if (game.cols == 1) return solve_single_col(game);

  const int64_t m = game.rows;  // structural variables
  const int64_t n = game.cols;  // constraints
  double shift = std::numeric_limits<double>::infinity();
  for (double v : game.payoff) shift = std::min(shift, v);
  // B[k][j] = payoff[k][j] - shift + 1 >= 1, so the shifted game value is >= 1
  // and the standard normalization LP below is bounded and feasible.
  auto b_at = [&](int64_t k, int64_t j) { return game.at(k, j) - shift + 1.0; };

  // maximize sum(u) s.t. for each column j: sum_k u_k B[k][j] <= 1, u >= 0.
  std::vector<int64_t> basis(n);
  std::vector<char> is_basic(m + n, 0);
  for (int64_t j = 0; j < n; ++j) {
    basis[j] = m + j;  // slacks
    is_basic[m + j] = 1;
  }
  std::vector<double> binv(n * n, 0.0);
  for (int64_t j = 0; j < n; ++j) binv[j * n + j] = 1.0;
  std::vector<double> xb(n, 1.0);

  const double kReducedTol = 1e-11;
  const double kPivotTol = 1e-12;
  const int bland_after = 2000;

  std::vector<double> y(n), direction(n), column(n);
  int pivots = 0;
  while (true) {
    if (pivots >= max_pivots) {
      double z = 0.0;
      for (int64_t r = 0; r < n; ++r) {
        if (basis[r] < m) z += xb[r];
      }
      throw CapacityError("matrix game solver exceeded pivot cap (" +
                          std::to_string(max_pivots) + " pivots, objective " +
                          std::to_string(z) + ")");
    }
    // y = c_B^T B^{-1}
    for (int64_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int64_t r = 0; r < n; ++r) {
        if (basis[r] < m) acc += binv[r * n + j];
      }
      y[j] = acc;
    }
    // pricing
    int64_t entering = -1;
    double best_reduced = kReducedTol;
    const bool bland = pivots >= bland_after;
    for (int64_t k = 0; k < m + n; ++k) {
      if (is_basic[k]) continue;
      double reduced;
      if (k < m) {
        double dot = 0.0;
        for (int64_t j = 0; j < n; ++j) dot += y[j] * b_at(k, j);
        reduced = 1.0 - dot;
      } else {
        reduced = -y[k - m];
      }
      if (reduced > best_reduced) {
        entering = k;
        best_reduced = reduced;
        if (bland) break;  // first improving index
      }
    }
    if (entering < 0) break;  // optimal

    for (int64_t j = 0; j < n; ++j) {
      column[j] = entering < m ? b_at(entering, j) : (j == entering - m ? 1.0 : 0.0);
    }
    for (int64_t r = 0; r < n; ++r) {
      double acc = 0.0;
      for (int64_t j = 0; j < n; ++j) acc += binv[r * n + j] * column[j];
      direction[r] = acc;
    }
    int64_t leaving = -1;
    double theta = std::numeric_limits<double>::infinity();
    for (int64_t r = 0; r < n; ++r) {
      if (direction[r] > kPivotTol) {
        double ratio = xb[r] / direction[r];
        if (ratio < theta - 1e-15 ||
            (ratio < theta + 1e-15 && (leaving < 0 || basis[r] < basis[leaving]))) {
          theta = ratio;
          leaving = r;
        }
      }
    }
    if (leaving < 0) {
      throw CapacityError("matrix game LP reported an unbounded direction (numerical failure)");
    }
    for (int64_t r = 0; r < n; ++r) xb[r] = std::max(0.0, xb[r] - theta * direction[r]);
    xb[leaving] = theta;
    double pivot = direction[leaving];
    for (int64_t j = 0; j < n; ++j) binv[leaving * n + j] /= pivot;
    for (int64_t r = 0; r < n; ++r) {
      if (r == leaving) continue;
      double factor = direction[r];
      if (factor == 0.0) continue;
      for (int64_t j = 0; j < n; ++j) binv[r * n + j] -= factor * binv[leaving * n + j];
    }
    is_basic[basis[leaving]] = 0;
    is_basic[entering] = 1;
    basis[leaving] = entering;
    ++pivots;
  }

  double z = 0.0;
  std::vector<double> u(m, 0.0);
  for (int64_t r = 0; r < n; ++r) {
    if (basis[r] < m) {
      u[basis[r]] = xb[r];
      z += xb[r];
    }
  }
  if (!(z > 0.0)) {
    throw CapacityError("matrix game LP finished with a nonpositive objective");
  }
  GameSolution solution;
  solution.pivots = pivots;
  solution.value = 1.0 / z + shift - 1.0;

  solution.row_strategy.assign(m, 0.0);
  double row_total = 0.0;
  for (int64_t k = 0; k < m; ++k) {
    solution.row_strategy[k] = std::max(0.0, u[k]);
    row_total += solution.row_strategy[k];
  }
  for (double& v : solution.row_strategy) v /= row_total;

  // Optimal duals of the column constraints give the column strategy.
  solution.col_strategy.assign(n, 0.0);
  double col_total = 0.0;
  for (int64_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (int64_t r = 0; r < n; ++r) {
      if (basis[r] < m) acc += binv[r * n + j];
    }
    solution.col_strategy[j] = std::max(0.0, acc);
    col_total += solution.col_strategy[j];
  }
  if (!(col_total > 0.0)) {
    throw CapacityError("matrix game LP produced a degenerate dual solution");
  }
  for (double& v : solution.col_strategy) v /= col_total;

  solution.duality_gap = duality_gap(game, solution.row_strategy, solution.col_strategy);
  if (std::abs(solution.duality_gap) > tolerance) {
    throw CapacityError("matrix game certificate exceeded tolerance: gap " +
                        std::to_string(solution.duality_gap));
  }
  return solution;
}

}  // namespace regretlab
