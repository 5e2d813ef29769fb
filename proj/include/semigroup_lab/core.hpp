#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "semigroup_lab/errors.hpp"

namespace semigroup_lab {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kPowerTol = 1e-8;  // relative slack of every inequality verdict
inline constexpr double kEnvTol = 1e-6;    // relative slack of certified envelopes
inline constexpr double kSpecGuard = 1e-8; // resolvent guard, times max(1, ||A||)

/// A generator or a perturbation: square, finite, complex. Real inputs are embedded.
class LinearOperator {
 public:
  explicit LinearOperator(Matrix entries, std::string label = {})
      : entries_(std::move(entries)), label_(std::move(label)) {
    if (entries_.rows() < 1 || entries_.rows() != entries_.cols()) {
      std::ostringstream os;
      os << "operator must be square with dim >= 1, got " << entries_.rows() << "x"
         << entries_.cols();
      throw InputError(os.str());
    }
    if (!entries_.allFinite()) throw InputError("operator has non-finite entries");
  }

  static LinearOperator identity(Eigen::Index dim) { return LinearOperator(Matrix::Identity(dim, dim)); }
  static LinearOperator zero(Eigen::Index dim) { return LinearOperator(Matrix::Zero(dim, dim)); }
  static LinearOperator from_real(const Eigen::MatrixXd& m, std::string label = {}) {
    return LinearOperator(m.cast<Complex>(), std::move(label));
  }

  Eigen::Index dim() const noexcept { return entries_.rows(); }
  const Matrix& matrix() const noexcept { return entries_; }
  const std::string& label() const noexcept { return label_; }
  LinearOperator with_label(std::string label) const { return LinearOperator(entries_, std::move(label)); }

  friend LinearOperator operator+(const LinearOperator& a, const LinearOperator& b) {
    require_same_dim(a, b);
    return LinearOperator(a.entries_ + b.entries_);
  }
  friend LinearOperator operator-(const LinearOperator& a, const LinearOperator& b) {
    require_same_dim(a, b);
    return LinearOperator(a.entries_ - b.entries_);
  }
  friend LinearOperator operator*(const LinearOperator& a, const LinearOperator& b) {
    require_same_dim(a, b);
    return LinearOperator(a.entries_ * b.entries_);
  }
  friend LinearOperator operator*(Complex s, const LinearOperator& a) {
    return LinearOperator(s * a.entries_);
  }
  friend bool operator==(const LinearOperator& a, const LinearOperator& b) {
    return a.entries_.rows() == b.entries_.rows() && a.entries_ == b.entries_;
  }

  static void require_same_dim(const LinearOperator& a, const LinearOperator& b) {
    if (a.dim() != b.dim()) {
      std::ostringstream os;
      os << "dimension mismatch: " << a.dim() << " vs " << b.dim();
      throw InputError(os.str());
    }
  }

 private:
  Matrix entries_;
  std::string label_;
};

struct SpectralData {
  std::vector<Complex> eigenvalues;  // with multiplicity, sorted by (real, imag)
  double spectral_abscissa = 0.0;
  double spectral_radius = 0.0;
};

enum class Spacing { geometric, linear, adaptive };

inline const char* to_string(Spacing s) {
  switch (s) {
    case Spacing::geometric: return "geometric";
    case Spacing::linear: return "linear";
    case Spacing::adaptive: return "adaptive";
  }
  return "?";
}

/// Strictly increasing finite evaluation points (mu > omega sweeps, t >= 0 sweeps).
class ScalarGrid {
 public:
  ScalarGrid(std::vector<double> points, Spacing kind) : points_(std::move(points)), kind_(kind) {
    if (points_.empty()) throw InputError("grid must be nonempty");
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (!std::isfinite(points_[i])) throw InputError("grid has a non-finite point");
      if (i > 0 && !(points_[i] > points_[i - 1])) throw InputError("grid must be strictly increasing");
    }
  }

  static ScalarGrid linear(double lo, double hi, std::size_t count) {
    if (count == 0) throw InputError("grid needs at least one point");
    std::vector<double> pts(count);
    if (count == 1) {
      pts[0] = lo;
    } else {
      for (std::size_t i = 0; i < count; ++i)
        pts[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
      pts.back() = hi;
    }
    return ScalarGrid(std::move(pts), Spacing::linear);
  }

  /// Geometric spacing of the offsets above `origin`: origin + lo * (hi/lo)^(i/(n-1)).
  static ScalarGrid geometric(double origin, double lo, double hi, std::size_t count) {
    if (count == 0) throw InputError("grid needs at least one point");
    if (!(lo > 0.0) || !(hi >= lo)) throw InputError("geometric grid needs 0 < lo <= hi");
    std::vector<double> pts(count);
    double ratio = std::log(hi / lo);
    for (std::size_t i = 0; i < count; ++i) {
      double frac = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
      pts[i] = origin + lo * std::exp(ratio * frac);
    }
    return ScalarGrid(std::move(pts), Spacing::geometric);
  }

  const std::vector<double>& points() const noexcept { return points_; }
  Spacing spacing() const noexcept { return kind_; }
  std::size_t size() const noexcept { return points_.size(); }
  double front() const { return points_.front(); }
  double back() const { return points_.back(); }

 private:
  std::vector<double> points_;
  Spacing kind_;
};

namespace detail {

inline double spectral_norm(const Matrix& a) {
  if (!a.allFinite()) throw InputError("norm of a matrix with non-finite entries");
  if (a.rows() == 1 && a.cols() == 1) return std::abs(a(0, 0));
  // Largest eigenvalue of the Gram matrix of a / max|a_ij| (no overflow); relative accuracy
  // of sigma_max is O(eps).
  double peak = a.cwiseAbs().maxCoeff();
  if (peak == 0.0) return 0.0;
  Matrix s = a / peak;
  Matrix gram = s.rows() >= s.cols() ? Matrix(s.adjoint() * s) : Matrix(s * s.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw ComputationError("Hermitian eigensolver failed in op_norm");
  return peak * std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

inline double vector_norm(const Vector& v) { return v.norm(); }

inline std::vector<Complex> eigenvalues(const Matrix& a) {
  if (a.rows() == 1) return {a(0, 0)};
  Eigen::ComplexEigenSolver<Matrix> es(a, false);
  if (es.info() != Eigen::Success) throw ComputationError("complex eigensolver did not converge");
  std::vector<Complex> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(ev.begin(), ev.end(), [](Complex x, Complex y) {
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
  });
  return ev;
}

inline double logarithmic_norm(const Matrix& b) {
  Matrix h = (b + b.adjoint()) * 0.5;
  if (h.rows() == 1) return h(0, 0).real();
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw ComputationError("Hermitian eigensolver failed in log norm");
  return es.eigenvalues().maxCoeff();
}

}  // namespace detail

/// Spectral norm (largest singular value).
inline double op_norm(const LinearOperator& a) { return detail::spectral_norm(a.matrix()); }

inline SpectralData spectrum(const LinearOperator& a) {
  SpectralData out;
  out.eigenvalues = detail::eigenvalues(a.matrix());
  out.spectral_abscissa = -std::numeric_limits<double>::infinity();
  for (Complex z : out.eigenvalues) {
    out.spectral_abscissa = std::max(out.spectral_abscissa, z.real());
    out.spectral_radius = std::max(out.spectral_radius, std::abs(z));
  }
  return out;
}

/// Logarithmic norm mu_2(B) = max eig of (B + B*)/2, so that ||exp(tB)|| <= exp(t mu_2(B)).
inline double logarithmic_norm(const LinearOperator& b) { return detail::logarithmic_norm(b.matrix()); }

/// A - omega I; the generator of exp(-omega t) exp(tA).
inline LinearOperator shift_generator(const LinearOperator& a, double omega) {
  Matrix m = a.matrix();
  m.diagonal().array() -= omega;
  return LinearOperator(std::move(m), a.label());
}

struct ResolventEvaluation {
  LinearOperator value;
  double residual;  // Frobenius norm of (lambda I - A) X - I
};

/// Resolvent R(lambda, A) = (lambda I - A)^{-1} with a spectral guard. The spectrum
/// and norm are computed once, so repeated evaluation along a grid costs one LU each.
class Resolvent {
 public:
  explicit Resolvent(LinearOperator a)
      : a_(std::move(a)), spectrum_(semigroup_lab::spectrum(a_)), norm_(op_norm(a_)) {
    guard_ = kSpecGuard * std::max(1.0, norm_);
  }

  const LinearOperator& op() const noexcept { return a_; }
  const SpectralData& spectral_data() const noexcept { return spectrum_; }
  double norm() const noexcept { return norm_; }
  double guard() const noexcept { return guard_; }

  /// Distance from lambda to the nearest eigenvalue, and that eigenvalue.
  std::pair<double, Complex> nearest_eigenvalue(Complex lambda) const {
    double best = std::numeric_limits<double>::infinity();
    Complex where{};
    for (Complex z : spectrum_.eigenvalues) {
      double d = std::abs(lambda - z);
      if (d < best) { best = d; where = z; }
    }
    return {best, where};
  }

  Matrix raw(Complex lambda) const {
    auto [dist, z] = nearest_eigenvalue(lambda);
    if (dist < guard_) {
      std::ostringstream os;
      os.precision(17);
      os << "resolvent requested at " << lambda << " within " << dist << " of eigenvalue " << z
         << " (guard " << guard_ << ")";
      throw SingularityError(os.str(), z);
    }
    Matrix shifted = -a_.matrix();
    shifted.diagonal().array() += lambda;
    Eigen::PartialPivLU<Matrix> lu(shifted);
    Matrix x = lu.inverse();
    if (!x.allFinite()) throw RangeError("resolvent overflowed");
    return x;
  }

  LinearOperator operator()(Complex lambda) const { return LinearOperator(raw(lambda)); }

  ResolventEvaluation evaluate(Complex lambda) const {
    Matrix x = raw(lambda);
    Matrix shifted = -a_.matrix();
    shifted.diagonal().array() += lambda;
    Matrix r = shifted * x;
    r.diagonal().array() -= 1.0;
    return {LinearOperator(std::move(x)), r.norm()};
  }

 private:
  LinearOperator a_;
  SpectralData spectrum_;
  double norm_;
  double guard_;
};

inline LinearOperator resolvent(const LinearOperator& a, Complex lambda) { return Resolvent(a)(lambda); }

}  // namespace semigroup_lab
