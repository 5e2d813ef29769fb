#pragma once

#include <array>
#include <cmath>
#include <sstream>

#include "semigroup_lab/core.hpp"

namespace semigroup_lab {

namespace detail {

// Diagonal Pade [m/m] numerator coefficients and the 1-norm thresholds below which
// the degree-m approximant has unit-roundoff backward error (scaling-and-squaring,
// Higham 2005).
inline constexpr std::array<double, 4> kPade3 = {120.0, 60.0, 12.0, 1.0};
inline constexpr std::array<double, 6> kPade5 = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
inline constexpr std::array<double, 8> kPade7 = {17297280.0, 8648640.0, 1995840.0, 277200.0,
                                                 25200.0,    1512.0,    56.0,      1.0};
inline constexpr std::array<double, 10> kPade9 = {17643225600.0, 8821612800.0, 2075673600.0,
                                                  302702400.0,   30270240.0,   2162160.0,
                                                  110880.0,      3960.0,       90.0,
                                                  1.0};
inline constexpr std::array<double, 14> kPade13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
    1323241920.0,        40840800.0,          960960.0,           16380.0,
    182.0,               1.0};
inline constexpr double kTheta3 = 1.495585217958292e-2;
inline constexpr double kTheta5 = 2.539398330063230e-1;
inline constexpr double kTheta7 = 9.504178996162932e-1;
inline constexpr double kTheta9 = 2.097847961257068e0;
inline constexpr double kTheta13 = 5.371920351148152e0;

inline double one_norm(const Matrix& a) { return a.cwiseAbs().colwise().sum().maxCoeff(); }

template <std::size_t N>
Matrix pade_low(const Matrix& a, const std::array<double, N>& b) {
  const auto n = a.rows();
  Matrix id = Matrix::Identity(n, n);
  Matrix a2 = a * a;
  Matrix power = id;
  Matrix u_inner = Matrix::Zero(n, n);
  Matrix v = Matrix::Zero(n, n);
  for (std::size_t k = 0; k + 1 < N; k += 2) {
    v += b[k] * power;
    u_inner += b[k + 1] * power;
    power = power * a2;
  }
  Matrix u = a * u_inner;
  return (v - u).partialPivLu().solve(v + u);
}

inline Matrix pade13(const Matrix& a) {
  const auto& b = kPade13;
  const auto n = a.rows();
  Matrix id = Matrix::Identity(n, n);
  Matrix a2 = a * a;
  Matrix a4 = a2 * a2;
  Matrix a6 = a4 * a2;
  Matrix u = a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 +
                  b[3] * a2 + b[1] * id);
  Matrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 +
             b[0] * id;
  return (v - u).partialPivLu().solve(v + u);
}

/// exp(a) by scaling and squaring with a backward-error-selected Pade degree.
inline Matrix expm(const Matrix& a) {
  const auto n = a.rows();
  if (!a.allFinite()) throw RangeError("matrix exponential of a non-finite argument");
  if (n == 1) {
    Complex z = std::exp(a(0, 0));
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw RangeError("scalar exponential overflowed");
    return Matrix::Constant(1, 1, z);
  }
  double norm1 = one_norm(a);
  if (!std::isfinite(norm1)) throw RangeError("matrix exponential argument norm overflowed");
  Matrix result;
  if (norm1 <= kTheta3) {
    result = pade_low(a, kPade3);
  } else if (norm1 <= kTheta5) {
    result = pade_low(a, kPade5);
  } else if (norm1 <= kTheta7) {
    result = pade_low(a, kPade7);
  } else if (norm1 <= kTheta9) {
    result = pade_low(a, kPade9);
  } else {
    int s = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / kTheta13))));
    if (s > 1100) throw RangeError("matrix exponential argument too large to scale");
    result = pade13(a * std::ldexp(1.0, -s));
    for (int i = 0; i < s; ++i) {
      result = result * result;
      if (!result.allFinite()) throw RangeError("matrix exponential overflowed while squaring");
    }
  }
  if (!result.allFinite()) throw RangeError("matrix exponential overflowed");
  return result;
}

}  // namespace detail

/// exp(tA). Negative t is permitted (used for backward evolution on unstable subspaces).
inline LinearOperator matrix_exponential(const LinearOperator& a, double t) {
  if (!std::isfinite(t)) throw InputError("matrix_exponential needs finite t");
  if (t == 0.0) return LinearOperator::identity(a.dim());
  return LinearOperator(detail::expm(t * a.matrix()));
}

}  // namespace semigroup_lab
