#pragma once

#include <initializer_list>

#include "semigroup_lab.hpp"

namespace sgl_test {

using semigroup_lab::Complex;
using semigroup_lab::LinearOperator;
using semigroup_lab::Matrix;
using semigroup_lab::Vector;

inline Matrix mat(std::initializer_list<std::initializer_list<Complex>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (Complex z : r) m(i, j++) = z;
    ++i;
  }
  return m;
}

inline LinearOperator op(std::initializer_list<std::initializer_list<Complex>> rows) { return LinearOperator(mat(rows)); }

inline LinearOperator diag(std::initializer_list<Complex> d) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (Complex z : d) { m(i, i) = z; ++i; }
  return LinearOperator(m);
}

inline double norm2(const Matrix& m) { return semigroup_lab::detail::spectral_norm(m); }

/// Largest singular value by Jacobi SVD, independent of the library's Gram-matrix route.
inline double svd_norm(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

/// Taylor series with scaling and squaring in long double arithmetic: an exponential independent
/// of the library's Pade kernel.
inline Matrix taylor_expm(const Matrix& a) {
  using LMat = Eigen::Matrix<std::complex<long double>, Eigen::Dynamic, Eigen::Dynamic>;
  LMat x = a.cast<std::complex<long double>>();
  long double nrm = 0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) nrm = std::max(nrm, x.col(j).cwiseAbs().sum());
  int s = 0;
  while (nrm > 0.125L) { nrm /= 2; ++s; }
  x /= static_cast<long double>(std::ldexp(1.0, s));
  LMat term = LMat::Identity(x.rows(), x.cols());
  LMat sum = term;
  for (int k = 1; k < 30; ++k) {
    term = term * x / static_cast<long double>(k);
    sum += term;
  }
  for (int i = 0; i < s; ++i) sum = sum * sum;
  return sum.cast<Complex>();
}

}  // namespace sgl_test
