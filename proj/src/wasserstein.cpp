#include <algorithm>
#include <cmath>
#include <limits>

#include "tci/concentration.hpp"
#include "tci/errors.hpp"

namespace tci {

double w2_sorted_1d(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ParameterError("w2_sorted_1d needs samples of equal size");
  if (a.empty()) throw ParameterError("w2_sorted_1d needs nonempty samples");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  CompensatedSum sum;
  for (std::size_t i = 0; i < sa.size(); ++i) sum.add((sa[i] - sb[i]) * (sa[i] - sb[i]));
  return std::sqrt(sum.value() / static_cast<double>(sa.size()));
}

Eigen::MatrixXd squared_distance_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols()) throw ParameterError("point clouds have different dimensions");
  Eigen::MatrixXd d(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) d(i, j) = (a.row(i) - b.row(j)).squaredNorm();
  }
  return d;
}

// Shortest augmenting path with row/column potentials, O(n^3).
std::vector<int> optimal_assignment(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw ParameterError("assignment needs a square cost matrix");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);  // match[col] = row, 1-based
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int col0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[col0] = 1;
      const int row0 = match[col0];
      double delta = inf;
      int col1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double reduced = cost(row0 - 1, j - 1) - u[row0] - v[j];
        if (reduced < minv[j]) {
          minv[j] = reduced;
          way[j] = col0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          col1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const int col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<int> assignment(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j) assignment[static_cast<std::size_t>(match[j] - 1)] = j - 1;
  return assignment;
}

double w2_small_cloud(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows()) throw ParameterError("point clouds must have the same number of points");
  if (a.rows() == 0) throw ParameterError("point clouds must be nonempty");
  if (a.rows() > 256 || a.cols() > 8) {
    throw ParameterError("w2_small_cloud is capped at 256 points in dimension 8; "
                         "use w2_sorted_1d on scalar functionals instead");
  }
  const Eigen::MatrixXd cost = squared_distance_matrix(a, b);
  const std::vector<int> assignment = optimal_assignment(cost);
  double total = 0.0;
  for (Eigen::Index i = 0; i < cost.rows(); ++i) total += cost(i, assignment[static_cast<std::size_t>(i)]);
  return std::sqrt(total / static_cast<double>(cost.rows()));
}

}  // namespace tci
