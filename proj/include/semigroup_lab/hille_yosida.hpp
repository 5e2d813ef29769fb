#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include "semigroup_lab/certified_max.hpp"
#include "semigroup_lab/core.hpp"
#include "semigroup_lab/matrix_exponential.hpp"
#include "semigroup_lab/parallel.hpp"
#include "semigroup_lab/verdict.hpp"

namespace semigroup_lab {

/// Certified pair (M, omega) with ||exp(tA)|| <= M exp(omega t) for all t >= 0.
///
/// Certification: find t_star with ||S(t_star)|| <= 1 for S(t) = exp(t(A - omega I)).
/// Writing t = k t_star + r gives ||S(t)|| <= ||S(t_star)||^k ||S(r)|| <= max_[0,t_star] ||S||,
/// so the certified maximum over [0, t_star] bounds the sup over the half-line.
struct GrowthEnvelope {
  double M = 1.0;
  double omega = 0.0;
  double t_star = 1.0;
  ScalarGrid grid{{0.0}, Spacing::adaptive};
  std::vector<double> sampled_norms;  // ||S(t)|| on grid (shifted semigroup)
  double margin = 0.0;                // min over grid of M e^{omega t} - ||T(t)||
  double best_sample = 1.0;           // uninflated max on the grid
  double tail_norm = 1.0;             // ||S(t_star)||
  std::size_t evaluations = 0;
  bool converged = true;
  bool certified = false;  // false for envelopes declared by the caller

  /// An envelope taken on trust (e.g. known analytically); only M and omega are meaningful.
  static GrowthEnvelope declared(double M, double omega) {
    GrowthEnvelope env;
    env.M = M;
    env.omega = omega;
    return env;
  }
};

struct EnvelopeOptions {
  double env_tol = kEnvTol;
  double tail_tol = 1e-12;  // accepted rounding excess in ||S(t_star)|| <= 1
  int max_doublings = 20;   // horizon cap 2^20
  std::size_t max_evaluations = 200000;
};

namespace detail {

inline GrowthRates growth_rates(const Matrix& b) {
  GrowthRates r;
  r.log_norm_plus = std::max(0.0, logarithmic_norm(b));
  r.square_norm = spectral_norm(b * b);
  return r;
}

/// First doubling time t = 1, 2, 4, ... with ||exp(tB)|| <= 1 + tail_tol.
inline double find_tail_horizon(const Matrix& b, const EnvelopeOptions& opt,
                                std::vector<std::pair<double, double>>& curve, double& tail_norm) {
  double t = 1.0;
  for (int k = 0; k <= opt.max_doublings; ++k, t *= 2.0) {
    double n;
    try {
      n = spectral_norm(expm(t * b));
    } catch (const RangeError&) {
      curve.emplace_back(t, std::numeric_limits<double>::infinity());
      break;
    }
    curve.emplace_back(t, n);
    if (n <= 1.0 + opt.tail_tol) {
      tail_norm = n;
      return t;
    }
    if (n > 1e250) break;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

inline GrowthEnvelope certify_growth_envelope(const LinearOperator& a, double omega,
                                              const EnvelopeOptions& opt = {}) {
  if (!std::isfinite(omega)) throw InputError("omega must be finite");
  const Matrix b = shift_generator(a, omega).matrix();
  std::vector<std::pair<double, double>> curve;
  double tail_norm = 0.0;
  double t_star = detail::find_tail_horizon(b, opt, curve, tail_norm);
  if (std::isnan(t_star)) {
    std::ostringstream os;
    os.precision(17);
    os << "certification failure: ||exp(t(A - omega I))|| did not fall to 1 within horizon 2^"
       << opt.max_doublings << " (omega = " << omega << ")";
    throw CertificationError(os.str(), std::move(curve));
  }

  auto rates = detail::growth_rates(b);
  auto orbit = [&b](double t) { return t == 0.0 ? 1.0 : detail::spectral_norm(detail::expm(t * b)); };
  CertifiedMaximum cm = certify_maximum(orbit, t_star, rates, opt.env_tol / 2.0, 64, opt.max_evaluations);

  GrowthEnvelope env;
  env.omega = omega;
  env.t_star = t_star;
  env.M = std::max(1.0, cm.bound);
  env.best_sample = cm.best;
  env.tail_norm = tail_norm;
  env.evaluations = cm.evaluations;
  env.converged = cm.converged;
  env.certified = true;
  env.margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cm.t.size(); ++i)
    env.margin = std::min(env.margin, std::exp(omega * cm.t[i]) * (env.M - cm.value[i]));
  env.sampled_norms = std::move(cm.value);
  env.grid = ScalarGrid(std::move(cm.t), Spacing::adaptive);
  return env;
}

/// Growth rate used when the caller gives none: the spectral abscissa for normal A (where
/// M = 1 is exact), otherwise the abscissa plus the catalog stability shift 0.5.
inline double default_omega(const LinearOperator& a) {
  const Matrix& m = a.matrix();
  double n = op_norm(a);
  bool normal = detail::spectral_norm(m * m.adjoint() - m.adjoint() * m) <= 1e-12 * std::max(1.0, n * n);
  double abscissa = spectrum(a).spectral_abscissa;
  return normal ? abscissa : abscissa + 0.5;
}

/// Evaluation of ||R(lambda, A)^n|| (lambda - omega)^n / M over a lambda grid and n = 1..n_max.
struct PowerBoundReport {
  ScalarGrid lambda_grid{{1.0}, Spacing::linear};
  int n_max = 1;
  double M = 1.0;
  double omega = 0.0;
  double tol = kPowerTol;
  double worst_ratio = 0.0;
  double worst_lambda = 0.0;
  int worst_n = 1;
  std::vector<double> per_lambda_worst;
  double max_condition = 0.0;  // max of ||lambda I - A|| ||R||; error growth ~ n_max * cond * eps
  bool verdict = false;
  Status status = Status::fail;
};

inline PowerBoundReport verify_resolvent_powers(const LinearOperator& a, double M, double omega,
                                                const ScalarGrid& lambda_grid, int n_max,
                                                double tol = kPowerTol) {
  if (n_max < 1) throw InputError("n_max must be >= 1");
  if (!(M > 0.0)) throw InputError("M must be positive");
  for (double l : lambda_grid.points())
    if (!(l > omega)) {
      std::ostringstream os;
      os.precision(17);
      os << "grid point " << l << " is not above omega = " << omega;
      throw InputError(os.str());
    }

  Resolvent res(a);
  struct Row {
    double worst = 0.0;
    int worst_n = 1;
    double cond = 0.0;
  };
  const auto& pts = lambda_grid.points();
  std::vector<Row> rows = parallel_map<Row>(pts.size(), [&](std::size_t i) {
    double lambda = pts[i];
    Matrix r = res.raw(lambda);
    Row row;
    Matrix shifted = -a.matrix();
    shifted.diagonal().array() += lambda;
    row.cond = detail::spectral_norm(shifted) * detail::spectral_norm(r);
    Matrix scaled = (lambda - omega) * r;  // powers of (lambda - omega) R stay O(M)
    Matrix power = scaled;
    for (int n = 1; n <= n_max; ++n) {
      double ratio = detail::spectral_norm(power) / M;
      if (ratio > row.worst) { row.worst = ratio; row.worst_n = n; }
      if (n < n_max) power = power * scaled;
    }
    return row;
  });

  PowerBoundReport rep;
  rep.lambda_grid = lambda_grid;
  rep.n_max = n_max;
  rep.M = M;
  rep.omega = omega;
  rep.tol = tol;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rep.per_lambda_worst.push_back(rows[i].worst);
    rep.max_condition = std::max(rep.max_condition, rows[i].cond);
    if (i == 0 || rows[i].worst > rep.worst_ratio) {
      rep.worst_ratio = rows[i].worst;
      rep.worst_lambda = pts[i];
      rep.worst_n = rows[i].worst_n;
    }
  }
  rep.status = classify_ratio(rep.worst_ratio, tol);
  rep.verdict = rep.worst_ratio <= 1.0 + tol;
  return rep;
}

inline PowerBoundReport verify_resolvent_powers(const LinearOperator& a, const GrowthEnvelope& env,
                                                const ScalarGrid& lambda_grid, int n_max,
                                                double tol = kPowerTol) {
  return verify_resolvent_powers(a, env.M, env.omega, lambda_grid, n_max, tol);
}

/// The M = 1 case: ||R(lambda, A)|| (lambda - omega) <= 1 on the grid.
inline bool contraction_check(const LinearOperator& a, double omega, const ScalarGrid& lambda_grid,
                              double tol = kPowerTol) {
  return verify_resolvent_powers(a, 1.0, omega, lambda_grid, 1, tol).verdict;
}

/// |x| = sup_t ||exp(tA) x|| for an envelope certified with omega = 0; the returned value is
/// a certified upper estimate (relative slack env_tol) over [0, t_star].
inline double sup_renorm(const LinearOperator& a, const GrowthEnvelope& env, const Vector& x,
                         double env_tol = kEnvTol) {
  if (env.omega != 0.0) throw InputError("sup_renorm needs an envelope with omega = 0; shift first");
  if (!env.certified) throw InputError("sup_renorm needs a certified envelope (its t_star is used)");
  if (x.size() != a.dim()) throw InputError("vector length does not match operator dimension");
  if (!x.allFinite()) throw InputError("vector has non-finite entries");
  const Matrix& b = a.matrix();
  auto rates = detail::growth_rates(b);
  auto orbit = [&](double t) { return t == 0.0 ? x.norm() : (detail::expm(t * b) * x).norm(); };
  CertifiedMaximum cm = certify_maximum(orbit, env.t_star, rates, env_tol / 2.0);
  double value = cm.bound;
  double nx = x.norm();
  // ||x|| <= |x| <= M ||x||
  if (value < nx * (1.0 - 1e-14) || value > env.M * nx * (1.0 + env_tol) + 1e-300) {
    std::ostringstream os;
    os.precision(17);
    os << "renorm sandwich violated: ||x|| = " << nx << ", |x| = " << value << ", M = " << env.M;
    throw ComputationError(os.str());
  }
  return value;
}

}  // namespace semigroup_lab
