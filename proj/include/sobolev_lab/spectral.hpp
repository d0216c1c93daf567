// Derivative estimates from function samples: Chebyshev collocation and a
// second-order finite-difference matrix, plus a gridded H¹ loss.
#pragma once

#include "sobolev_lab/core.hpp"

namespace sobolev_lab::spectral {

/// xⱼ = cos(jπ/n), j = 0..n (decreasing from 1 to −1).
inline Vector cheb_points(int n) {
  if (n < 1) throw LabError(ErrorKind::domain, "cheb_points: n must be >= 1");
  Vector x(n + 1);
  for (int j = 0; j <= n; ++j) x[j] = std::cos(j * kPi / n);
  // exact symmetry about 0 and an exact centre point
  for (int j = 0; j <= n / 2; ++j) {
    x[n - j] = -x[j];
  }
  if (n % 2 == 0) x[n / 2] = 0.0;
  return x;
}

/// Trefethen's construction; the diagonal comes from the negative-sum trick.
inline Matrix cheb_diff_matrix(int n) {
  const Vector x = cheb_points(n);
  Matrix d = Matrix::Zero(n + 1, n + 1);
  auto weight = [n](int i) { return (i == 0 || i == n) ? 2.0 : 1.0; };
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) {
      if (i == j) continue;
      const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
      d(i, j) = (weight(i) / weight(j)) * sign / (x[i] - x[j]);
    }
  }
  for (int i = 0; i <= n; ++i) d(i, i) = -d.row(i).sum();
  return d;
}

/// Central differences inside, one-sided three-point stencils at the ends.
/// Works on non-uniform increasing grids.
inline Matrix fdm_diff_matrix(const Vector& grid) {
  const Eigen::Index m = grid.size();
  if (m < 3) throw LabError(ErrorKind::domain, "fdm_diff_matrix: need at least 3 points");
  for (Eigen::Index i = 1; i < m; ++i) {
    if (!(grid[i] > grid[i - 1])) throw LabError(ErrorKind::domain, "fdm_diff_matrix: grid must be strictly increasing");
  }
  Matrix d = Matrix::Zero(m, m);
  // derivative at x0 of the quadratic through (x0, x1, x2)
  auto stencil = [&](Eigen::Index row, Eigen::Index i0, Eigen::Index i1, Eigen::Index i2) {
    const double x = grid[row];
    const double a = grid[i0];
    const double b = grid[i1];
    const double c = grid[i2];
    d(row, i0) = ((x - b) + (x - c)) / ((a - b) * (a - c));
    d(row, i1) = ((x - a) + (x - c)) / ((b - a) * (b - c));
    d(row, i2) = ((x - a) + (x - b)) / ((c - a) * (c - b));
  };
  stencil(0, 0, 1, 2);
  for (Eigen::Index i = 1; i + 1 < m; ++i) stencil(i, i - 1, i, i + 1);
  stencil(m - 1, m - 3, m - 2, m - 1);
  return d;
}

/// mean((p − t)²) + mean((p′ − D t)²).
inline double h1_grid_loss(const Vector& pred_values, const Vector& pred_input_grads, const Vector& target_values,
                           const Matrix& diff) {
  const Eigen::Index m = target_values.size();
  if (pred_values.size() != m || pred_input_grads.size() != m || diff.rows() != m || diff.cols() != m) {
    throw LabError(ErrorKind::dimension_mismatch, "h1_grid_loss: shape mismatch");
  }
  const double value_term = (pred_values - target_values).squaredNorm() / m;
  const double grad_term = (pred_input_grads - diff * target_values).squaredNorm() / m;
  return value_term + grad_term;
}

}  // namespace sobolev_lab::spectral
