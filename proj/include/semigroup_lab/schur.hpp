#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <utility>

#include "semigroup_lab/core.hpp"

namespace semigroup_lab {

/// V = Q T Q^H with the selected eigenvalues leading the diagonal of T.
struct OrderedSchur {
  Matrix Q;
  Matrix T;
  Eigen::Index leading = 0;
};

namespace detail {

// Exchanges the adjacent diagonal entries k, k+1 of the upper-triangular T by a
// unitary rotation whose first column is the eigenvector of the 2x2 block for T(k+1,k+1).
inline void swap_adjacent(Matrix& t, Matrix& q, Eigen::Index k) {
  Complex t11 = t(k, k);
  Complex t22 = t(k + 1, k + 1);
  Complex t12 = t(k, k + 1);
  Complex x1 = t12;
  Complex x2 = t22 - t11;
  double r = std::hypot(std::abs(x1), std::abs(x2));
  if (r == 0.0) return;
  Complex c = x1 / r;
  Complex s = x2 / r;
  Eigen::Matrix2cd g;
  g << c, -std::conj(s), s, std::conj(c);
  t.middleRows(k, 2) = (g.adjoint() * t.middleRows(k, 2)).eval();
  t.middleCols(k, 2) = (t.middleCols(k, 2) * g).eval();
  q.middleCols(k, 2) = (q.middleCols(k, 2) * g).eval();
  t(k + 1, k) = 0.0;
  t(k, k) = t22;
  t(k + 1, k + 1) = t11;
}

}  // namespace detail

template <class Select>
OrderedSchur ordered_schur(const Matrix& v, Select&& select) {
  OrderedSchur out;
  const auto n = v.rows();
  if (n == 1) {
    out.Q = Matrix::Identity(1, 1);
    out.T = v;
  } else {
    Eigen::ComplexSchur<Matrix> schur(v, true);
    if (schur.info() != Eigen::Success) throw ComputationError("complex Schur decomposition did not converge");
    out.Q = schur.matrixU();
    out.T = schur.matrixT();
    out.T.triangularView<Eigen::StrictlyLower>().setZero();
  }
  Eigen::Index next = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!select(out.T(j, j))) continue;
    for (Eigen::Index k = j; k > next; --k) detail::swap_adjacent(out.T, out.Q, k - 1);
    ++next;
  }
  out.leading = next;
  return out;
}

/// Spectral (Riesz) projection of V onto its selected eigenvalues, with orthonormal bases
/// of the image and of the kernel (the complementary invariant subspace).
struct SpectralSplit {
  Matrix projection;
  Matrix image_basis;
  Matrix kernel_basis;
  Eigen::Index image_dim = 0;
};

template <class Select>
SpectralSplit spectral_projection(const Matrix& v, Select&& select) {
  const auto n = v.rows();
  OrderedSchur os = ordered_schur(v, select);
  const auto k = os.leading;
  SpectralSplit out;
  out.image_dim = k;
  if (k == 0) {
    out.projection = Matrix::Zero(n, n);
    out.image_basis = Matrix(n, 0);
    out.kernel_basis = Matrix::Identity(n, n);
    return out;
  }
  if (k == n) {
    out.projection = Matrix::Identity(n, n);
    out.image_basis = Matrix::Identity(n, n);
    out.kernel_basis = Matrix(n, 0);
    return out;
  }
  const auto m = n - k;
  Matrix t11 = os.T.topLeftCorner(k, k);
  Matrix t12 = os.T.topRightCorner(k, m);
  Matrix t22 = os.T.bottomRightCorner(m, m);
  // Decoupling equation T11 Z - Z T22 = -T12, column by column (T22 upper triangular).
  Matrix z(k, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    Vector rhs = -t12.col(j);
    for (Eigen::Index i = 0; i < j; ++i) rhs += z.col(i) * t22(i, j);
    Matrix shifted = t11;
    shifted.diagonal().array() -= t22(j, j);
    z.col(j) = shifted.triangularView<Eigen::Upper>().solve(rhs);
  }
  if (!z.allFinite()) throw ComputationError("spectral decoupling equation is singular");
  Matrix pt = Matrix::Zero(n, n);
  pt.topLeftCorner(k, k).setIdentity();
  pt.topRightCorner(k, m) = -z;
  out.projection = os.Q * pt * os.Q.adjoint();
  out.image_basis = os.Q.leftCols(k);
  Matrix complement(n, m);
  complement.topRows(k) = z;
  complement.bottomRows(m).setIdentity();
  Matrix spanning = os.Q * complement;
  Eigen::HouseholderQR<Matrix> qr(spanning);
  out.kernel_basis = qr.householderQ() * Matrix::Identity(n, m);
  return out;
}

}  // namespace semigroup_lab
