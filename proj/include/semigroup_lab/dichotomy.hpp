#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "semigroup_lab/core.hpp"
#include "semigroup_lab/hille_yosida.hpp"
#include "semigroup_lab/matrix_exponential.hpp"
#include "semigroup_lab/parallel.hpp"
#include "semigroup_lab/perturbation.hpp"
#include "semigroup_lab/schur.hpp"

namespace semigroup_lab {

inline constexpr double kGapTol = 1e-8;        // relative to max(1, |z|)
inline constexpr double kOnCircleTol = 1e-13;  // numerically on the unit circle

enum class Tristate { yes, no, marginal };

inline const char* to_string(Tristate s) {
  switch (s) {
    case Tristate::yes: return "yes";
    case Tristate::no: return "no";
    case Tristate::marginal: return "marginal";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Yosida distance

struct YosidaDistanceEstimate {
  double value = 0.0;
  std::vector<double> lambda_sequence;
  std::vector<double> raw_values;    // lambda^2 ||R(lambda, A) - R(lambda, B)||
  std::vector<double> extrapolants;  // first-order Richardson in 1/lambda
  int extrapolation_order = 1;
  bool convergence_flag = false;
  double laurent_limit = 0.0;  // ||A - B||, the exact limit for matrices
};

struct YosidaOptions {
  int points = 13;
  double start_factor = 8.0;
  double convergence_tol = 1e-6;
};

/// limsup lambda^2 ||R(lambda, A) - R(lambda, B)|| on lambda_k = 2^k lambda_0,
/// lambda_0 = 8 max(1, ||A||, ||B||), extrapolated to 1/lambda = 0.
inline YosidaDistanceEstimate yosida_distance(const LinearOperator& a, const LinearOperator& b,
                                              const YosidaOptions& opt = {}) {
  LinearOperator::require_same_dim(a, b);
  Resolvent ra(a);
  Resolvent rb(b);
  YosidaDistanceEstimate est;
  est.laurent_limit = op_norm(a - b);
  double lambda0 = opt.start_factor * std::max({1.0, ra.norm(), rb.norm()});
  for (int k = 0; k < opt.points; ++k) est.lambda_sequence.push_back(std::ldexp(lambda0, k));
  est.raw_values = parallel_map<double>(est.lambda_sequence.size(), [&](std::size_t i) {
    double l = est.lambda_sequence[i];
    return l * l * detail::spectral_norm(ra.raw(l) - rb.raw(l));
  });
  // v(lambda) = d + c / lambda + O(lambda^-2); doubling lambda cancels the c term.
  for (std::size_t k = 0; k + 1 < est.raw_values.size(); ++k)
    est.extrapolants.push_back(2.0 * est.raw_values[k + 1] - est.raw_values[k]);
  if (est.extrapolants.empty()) {
    est.value = est.raw_values.back();
    return est;
  }
  double last = est.extrapolants.back();
  double prev = est.extrapolants.size() > 1 ? est.extrapolants[est.extrapolants.size() - 2] : last;
  est.convergence_flag = std::abs(last - prev) <= opt.convergence_tol * std::abs(last);
  est.value = std::max(0.0, last);
  return est;
}

struct YosidaVsANorm {
  double d = 0.0;
  double bound = 0.0;  // ||C1 - C2||_A
  bool ok = false;
  double M = 1.0;
  double m_squared_bound = 0.0;  // M^2 ||C1 - C2||_A
  YosidaDistanceEstimate distance;
  ANormValue anorm;
};

/// d_Y(A + C1, A + C2) against ||C1 - C2||_A.
inline YosidaVsANorm yosida_vs_anorm(const LinearOperator& a, const LinearOperator& c1, const LinearOperator& c2,
                                     const GrowthEnvelope& env, const ScalarGrid& mu_grid,
                                     double tol = kPowerTol) {
  YosidaVsANorm out;
  out.distance = yosida_distance(a + c1, a + c2);
  out.anorm = a_norm(a, c1 - c2, env, mu_grid);
  out.d = out.distance.value;
  out.bound = out.anorm.value;
  out.M = env.M;
  out.m_squared_bound = env.M * env.M * out.bound;
  out.ok = out.d <= out.bound * (1.0 + tol);
  return out;
}

// ---------------------------------------------------------------------------
// Exponential dichotomy

struct BlockDecay {
  double N = 1.0;
  double alpha = 0.0;
  double abscissa = 0.0;
  double theta = 0.0;  // omega = abscissa (1 - theta)
};

struct DichotomyData {
  Tristate has_dichotomy = Tristate::no;
  std::optional<LinearOperator> P;
  double N = 1.0;
  double alpha = 0.0;
  double circle_gap = 0.0;
  int stable_dim = 0;
  std::vector<Complex> monodromy_eigenvalues;  // sigma(T(1))
  Matrix stable_basis;                          // orthonormal basis of Im(P)
  Matrix unstable_basis;                        // orthonormal basis of ker(P)
  std::optional<BlockDecay> stable_block;
  std::optional<BlockDecay> unstable_block;
};

namespace detail {

inline constexpr std::array<double, 4> kDecayThetas = {0.0, 0.01, 0.1, 0.5};

// Certified (N, alpha) with ||exp(t G)|| <= N e^{-alpha t} for a block G whose spectrum
// lies in the open left half-plane; tries omega = abscissa, then backs off toward 0.
inline BlockDecay block_decay(const Matrix& g) {
  LinearOperator op(g);
  double abscissa = spectrum(op).spectral_abscissa;
  if (!(abscissa < 0.0)) throw ComputationError("block is not exponentially decaying");
  for (double theta : kDecayThetas) {
    double omega = abscissa * (1.0 - theta);
    try {
      GrowthEnvelope env = certify_growth_envelope(op, omega);
      return {env.M, -omega, abscissa, theta};
    } catch (const CertificationError&) {
    }
  }
  throw ComputationError("could not certify decay of a dichotomy block");
}

inline Tristate classify_gap(const std::vector<Complex>& eigs, double& gap) {
  gap = std::numeric_limits<double>::infinity();
  bool on_circle = false;
  bool near_circle = false;
  for (Complex z : eigs) {
    double r = std::abs(z);
    double g = std::abs(r - 1.0);
    gap = std::min(gap, g);
    double scale = std::max(1.0, r);
    if (g <= kOnCircleTol * scale) on_circle = true;
    else if (g <= kGapTol * scale) near_circle = true;
  }
  if (on_circle) return Tristate::no;
  if (near_circle) return Tristate::marginal;
  return Tristate::yes;
}

}  // namespace detail

/// Dichotomy via sigma(T(1)) and the unit circle; when present, the spectral projection P of
/// T(1) onto |z| < 1 and constants (N, alpha) certified on the two invariant blocks.
inline DichotomyData check_dichotomy(const LinearOperator& a) {
  const Matrix v = detail::expm(a.matrix());
  DichotomyData out;
  out.monodromy_eigenvalues = detail::eigenvalues(v);
  out.has_dichotomy = detail::classify_gap(out.monodromy_eigenvalues, out.circle_gap);
  for (Complex z : out.monodromy_eigenvalues)
    if (std::abs(z) < 1.0) ++out.stable_dim;
  if (out.has_dichotomy != Tristate::yes) return out;

  SpectralSplit split = spectral_projection(v, [](Complex z) { return std::abs(z) < 1.0; });
  out.stable_dim = static_cast<int>(split.image_dim);
  out.P = LinearOperator(split.projection);
  out.stable_basis = split.image_basis;
  out.unstable_basis = split.kernel_basis;
  out.N = 1.0;
  out.alpha = std::numeric_limits<double>::infinity();
  if (split.image_basis.cols() > 0) {
    Matrix block = split.image_basis.adjoint() * a.matrix() * split.image_basis;
    out.stable_block = detail::block_decay(block);
  }
  if (split.kernel_basis.cols() > 0) {
    // Backward evolution on ker(P): T(-t) = exp(-tA) restricted.
    Matrix block = -(split.kernel_basis.adjoint() * a.matrix() * split.kernel_basis);
    out.unstable_block = detail::block_decay(block);
  }
  for (const auto& blk : {out.stable_block, out.unstable_block}) {
    if (!blk) continue;
    out.N = std::max(out.N, blk->N);
    out.alpha = std::min(out.alpha, blk->alpha);
  }
  return out;
}

struct ExpStability {
  Tristate stable = Tristate::no;
  double spectral_radius = 0.0;  // r(T(1))
};

/// Exponential stability via r(T(1)) < 1, with a marginal band of width gap_tol.
inline ExpStability exp_stability_check(const LinearOperator& a) {
  ExpStability out;
  LinearOperator v(detail::expm(a.matrix()));
  out.spectral_radius = spectrum(v).spectral_radius;
  if (std::abs(out.spectral_radius - 1.0) <= kGapTol) out.stable = Tristate::marginal;
  else out.stable = out.spectral_radius < 1.0 ? Tristate::yes : Tristate::no;
  return out;
}

// ---------------------------------------------------------------------------
// Perturbation of the semigroup

struct DifferenceSample {
  double t = 0.0;
  double lhs = 0.0;        // ||T_{A+C1}(t) - T_{A+C2}(t)||
  double bound = 0.0;      // t M^2 e^{4 omega0 t} d_Y
  double voc_bound = 0.0;  // t M^2 e^{omega0 t} d_Y (variation of constants)
  double abs_tol = 0.0;
  double slack = 0.0;      // bound + abs_tol - lhs
};

struct DifferenceBound {
  double omega0 = 0.0;
  double eps0 = 0.0;
  double coefficient = 1.0;  // M^2
  double d = 0.0;            // d_Y(A + C1, A + C2)
  std::string c1_norm_kind = "operator (spectral) norm";
  std::vector<DifferenceSample> bound_at;
  double min_slack = std::numeric_limits<double>::infinity();
  bool violated = false;
  std::optional<double> witness_t;
  bool voc_violated = false;
};

inline DifferenceBound semigroup_difference_bound(const LinearOperator& a, const LinearOperator& c1,
                                                  const LinearOperator& c2, const GrowthEnvelope& env,
                                                  double eps0, const ScalarGrid& t_grid,
                                                  double abs_tol_factor = 1e-8) {
  LinearOperator::require_same_dim(a, c1);
  LinearOperator::require_same_dim(a, c2);
  double gap = op_norm(c1 - c2);
  if (!(eps0 > 0.0) || !(gap < eps0)) {
    std::ostringstream os;
    os.precision(17);
    os << "need 0 < ||C1 - C2|| = " << gap << " < eps0 = " << eps0;
    throw InputError(os.str());
  }
  if (t_grid.front() < 0.0) throw InputError("t grid must be nonnegative");
  DifferenceBound out;
  out.eps0 = eps0;
  out.coefficient = env.M * env.M;
  out.omega0 = env.omega + out.coefficient * (op_norm(c1) + eps0);
  out.d = yosida_distance(a + c1, a + c2).value;
  const Matrix g1 = a.matrix() + c1.matrix();
  const Matrix g2 = a.matrix() + c2.matrix();
  const auto& ts = t_grid.points();
  out.bound_at = parallel_map<DifferenceSample>(ts.size(), [&](std::size_t i) {
    DifferenceSample s;
    s.t = ts[i];
    Matrix e1 = ts[i] == 0.0 ? Matrix::Identity(g1.rows(), g1.cols()) : detail::expm(ts[i] * g1);
    Matrix e2 = ts[i] == 0.0 ? Matrix::Identity(g2.rows(), g2.cols()) : detail::expm(ts[i] * g2);
    s.lhs = detail::spectral_norm(e1 - e2);
    double scale = std::max({1.0, detail::spectral_norm(e1), detail::spectral_norm(e2)});
    s.abs_tol = abs_tol_factor * scale;
    if (out.d == 0.0 || s.t == 0.0) {
      s.bound = 0.0;
      s.voc_bound = 0.0;
    } else {
      s.bound = s.t * out.coefficient * std::exp(4.0 * out.omega0 * s.t) * out.d;
      s.voc_bound = s.t * out.coefficient * std::exp(out.omega0 * s.t) * out.d;
    }
    s.slack = s.bound + s.abs_tol - s.lhs;
    return s;
  });
  for (const auto& s : out.bound_at) {
    out.min_slack = std::min(out.min_slack, s.slack);
    if (s.slack < 0.0 && !out.witness_t) {
      out.violated = true;
      out.witness_t = s.t;
    }
    if (s.voc_bound + s.abs_tol < s.lhs) out.voc_violated = true;
  }
  return out;
}

struct PersistenceOptions {
  std::optional<double> eps0;  // default: max(2 ||C1 - C2||, 1e-12)
  int stability_horizon = 64;
  std::size_t circle_samples = 256;
  std::size_t max_circle_samples = 16384;
};

struct PersistenceReport {
  double circle_gap = 0.0;
  double kappa = 0.0;          // circle_gap * max_{|z|=1} ||(z - V)^{-1}||
  double safety_radius = 0.0;  // circle_gap / (2 kappa)
  std::size_t circle_samples = 0;
  double anorm_difference = 0.0;  // ||C1 - C2||_A
  double eps0 = 0.0;
  double omega0 = 0.0;
  double bound_t1 = 0.0;  // M^2 e^{4 omega0} ||C1 - C2||_A
  double actual_difference_t1 = 0.0;
  bool certified = false;
  Tristate a_posteriori = Tristate::no;  // dichotomy of A + C2, checked directly
  double a_posteriori_gap = 0.0;
  std::optional<int> n0;  // first integer with ||T_{A+C1}(n0)|| < 1
  std::optional<double> norm_c1_at_n0;
  std::optional<double> norm_c2_at_n0;
  std::optional<bool> stable_c2_at_n0;
};

namespace detail {

// max over the unit circle of ||(z - V)^{-1}||; the sampling is refined until
// spacing * max <= 1/4, which keeps the true max within 8/7 of the sampled one.
inline std::pair<double, std::size_t> circle_resolvent_max(const Matrix& v, std::size_t samples,
                                                           std::size_t max_samples) {
  while (true) {
    std::vector<double> norms = parallel_map<double>(samples, [&](std::size_t i) {
      double theta = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(samples);
      Matrix shifted = -v;
      shifted.diagonal().array() += std::polar(1.0, theta);
      Eigen::PartialPivLU<Matrix> lu(shifted);
      Matrix inv = lu.inverse();
      if (!inv.allFinite()) return std::numeric_limits<double>::infinity();
      return spectral_norm(inv);
    });
    double peak = 0.0;
    for (double x : norms) peak = std::max(peak, x);
    double spacing = 2.0 * std::numbers::pi / static_cast<double>(samples);
    if (spacing * peak <= 0.25) return {peak, samples};
    if (samples >= max_samples || !std::isfinite(peak))
      return {std::numeric_limits<double>::infinity(), samples};
    samples *= 2;
  }
}

}  // namespace detail

/// Persistence of the dichotomy of A + C1 under the move to A + C2.
inline PersistenceReport persistence_margin(const LinearOperator& a, const LinearOperator& c1,
                                            const LinearOperator& c2, const GrowthEnvelope& env,
                                            const ScalarGrid& mu_grid, const PersistenceOptions& opt = {}) {
  LinearOperator g1 = a + c1;
  LinearOperator g2 = a + c2;
  DichotomyData base = check_dichotomy(g1);
  if (base.has_dichotomy != Tristate::yes)
    throw PreconditionError("A + C1 has no exponential dichotomy", base.circle_gap);

  PersistenceReport rep;
  rep.circle_gap = base.circle_gap;
  Matrix v1 = detail::expm(g1.matrix());
  auto [peak, used] = detail::circle_resolvent_max(v1, opt.circle_samples, opt.max_circle_samples);
  rep.circle_samples = used;
  rep.kappa = rep.circle_gap * peak;
  rep.safety_radius = std::isfinite(peak) ? 1.0 / (2.0 * peak) : 0.0;

  LinearOperator diff = c1 - c2;
  double diff_norm = op_norm(diff);
  rep.anorm_difference = a_norm(a, diff, env, mu_grid).value;
  rep.eps0 = opt.eps0 ? *opt.eps0 : std::max(2.0 * diff_norm, 1e-12);
  rep.omega0 = env.omega + env.M * env.M * (op_norm(c1) + rep.eps0);
  rep.bound_t1 = rep.anorm_difference == 0.0 ? 0.0
                                             : env.M * env.M * std::exp(4.0 * rep.omega0) * rep.anorm_difference;
  Matrix v2 = detail::expm(g2.matrix());
  rep.actual_difference_t1 = detail::spectral_norm(v1 - v2);
  rep.certified = rep.bound_t1 < rep.safety_radius;

  DichotomyData moved = check_dichotomy(g2);
  rep.a_posteriori = moved.has_dichotomy;
  rep.a_posteriori_gap = moved.circle_gap;

  if (exp_stability_check(g1).stable == Tristate::yes) {
    for (int n0 = 1; n0 <= opt.stability_horizon; ++n0) {
      double norm1 = detail::spectral_norm(detail::expm(static_cast<double>(n0) * g1.matrix()));
      if (norm1 < 1.0) {
        rep.n0 = n0;
        rep.norm_c1_at_n0 = norm1;
        rep.norm_c2_at_n0 = detail::spectral_norm(detail::expm(static_cast<double>(n0) * g2.matrix()));
        rep.stable_c2_at_n0 = *rep.norm_c2_at_n0 < 1.0;
        break;
      }
    }
  }
  return rep;
}

}  // namespace semigroup_lab
