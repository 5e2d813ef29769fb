#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include "semigroup_lab/core.hpp"
#include "semigroup_lab/hille_yosida.hpp"
#include "semigroup_lab/matrix_exponential.hpp"
#include "semigroup_lab/parallel.hpp"
#include "semigroup_lab/verdict.hpp"

namespace semigroup_lab {

/// Relative bound K with ||C R(mu, A)|| <= K / (mu - omega). The grid maximum is joined with
/// the mu -> infinity limit ||C|| (since (mu - omega) R(mu, A) -> I); K is a grid estimate of
/// the sup, never below the limit.
struct RelativeBoundReport {
  double K = 0.0;
  double omega = 0.0;
  ScalarGrid mu_grid{{1.0}, Spacing::geometric};
  std::optional<double> argsup_mu;  // nullopt: sup approached asymptotically
  double limit_value = 0.0;
  std::vector<std::pair<double, double>> profile;  // (mu, (mu - omega) ||C R(mu, A)||)
};

struct ANormValue {
  double value = 0.0;
  double M_used = 1.0;
  double omega_used = 0.0;
  RelativeBoundReport report;
};

struct GrowthClaim {
  double M = 1.0;
  double omega = 0.0;
};

struct GenerationCertificate {
  GrowthEnvelope base_env;
  double K = 0.0;
  RelativeBoundReport relative;
  GrowthClaim perturbed_env;
  std::optional<GrowthClaim> bounded_variant;
  std::vector<double> t_samples;
  std::vector<double> ratios;  // ||exp(t(A+C))|| / (M e^{omega' t})
  std::vector<double> bounded_ratios;
  double verified_margin = 0.0;  // min over t of 1 - ratio
  std::optional<double> bounded_margin;
  bool falsified = false;
  std::optional<double> witness_t;
  Status status = Status::pass;
};

enum class ResolventMode { factorized, neumann, direct };

struct PerturbedResolvent {
  LinearOperator value;
  double contraction_norm = std::numeric_limits<double>::quiet_NaN();  // ||C R(mu, A)||
  int terms = 0;                     // Neumann terms kept
  double truncation_bound = 0.0;     // ||X||^{k+1} / (1 - ||X||)
};

/// Default mu grid: 64 geometric offsets in [1e-3 s, 1e6 s] above omega, s = max(1, ||A||).
inline ScalarGrid default_mu_grid(const LinearOperator& a, double omega, std::size_t points = 64,
                                  double lo = 1e-3, double hi = 1e6) {
  double s = std::max(1.0, op_norm(a));
  return ScalarGrid::geometric(omega, lo * s, hi * s, points);
}

namespace detail {

inline void require_above(const ScalarGrid& grid, double floor, const char* what) {
  for (double m : grid.points())
    if (!(m > floor)) {
      std::ostringstream os;
      os.precision(17);
      os << what << ": grid point " << m << " is not above " << floor;
      throw InputError(os.str());
    }
}

}  // namespace detail

inline RelativeBoundReport relative_bound_K(const LinearOperator& a, const LinearOperator& c,
                                            const GrowthEnvelope& env, const ScalarGrid& mu_grid) {
  LinearOperator::require_same_dim(a, c);
  detail::require_above(mu_grid, env.omega, "relative_bound_K");
  RelativeBoundReport rep;
  rep.omega = env.omega;
  rep.mu_grid = mu_grid;
  const auto& pts = mu_grid.points();
  if (c.matrix().isZero(0.0)) {
    for (double m : pts) rep.profile.emplace_back(m, 0.0);
    return rep;
  }
  rep.limit_value = op_norm(c);
  Resolvent res(a);
  std::vector<double> values = parallel_map<double>(pts.size(), [&](std::size_t i) {
    Matrix cr = c.matrix() * res.raw(pts[i]);
    return (pts[i] - env.omega) * detail::spectral_norm(cr);
  });
  double grid_max = -1.0;
  double arg = pts.front();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    rep.profile.emplace_back(pts[i], values[i]);
    if (values[i] > grid_max) { grid_max = values[i]; arg = pts[i]; }
  }
  if (grid_max > rep.limit_value) {
    rep.K = grid_max;
    rep.argsup_mu = arg;
  } else {
    rep.K = rep.limit_value;
  }
  return rep;
}

/// ||C||_A = (1/M) sup_{mu > omega} (mu - omega) ||C R(mu, A)||.
inline ANormValue a_norm(const LinearOperator& a, const LinearOperator& c, const GrowthEnvelope& env,
                         const ScalarGrid& mu_grid) {
  ANormValue out;
  out.report = relative_bound_K(a, c, env, mu_grid);
  out.M_used = env.M;
  out.omega_used = env.omega;
  out.value = out.report.K / env.M;
  return out;
}

inline PerturbedResolvent perturbed_resolvent(const LinearOperator& a, const LinearOperator& c, double mu,
                                              ResolventMode mode, double series_tol = 1e-12) {
  LinearOperator::require_same_dim(a, c);
  if (mode == ResolventMode::direct) return {resolvent(a + c, mu)};

  Matrix ra = Resolvent(a).raw(mu);
  Matrix x = c.matrix() * ra;
  double q = detail::spectral_norm(x);
  if (!(q < 1.0)) {
    std::ostringstream os;
    os.precision(17);
    os << "||C R(mu, A)|| = " << q << " >= 1 at mu = " << mu;
    throw PreconditionError(os.str(), q);
  }
  const auto n = a.dim();
  if (mode == ResolventMode::factorized) {
    // R(mu, A + C) = R(mu, A) (I - C R(mu, A))^{-1}; solve Y (I - X) = R(mu, A).
    Matrix i_minus_x = Matrix::Identity(n, n) - x;
    Matrix y = i_minus_x.transpose().partialPivLu().solve(ra.transpose()).transpose();
    return {LinearOperator(std::move(y)), q};
  }

  int terms = 200;
  if (q == 0.0) {
    terms = 1;
  } else {
    double needed = std::log(series_tol * (1.0 - q)) / std::log(q);  // q^{k+1}/(1-q) <= tol
    if (needed < 200.0) terms = std::max(1, static_cast<int>(std::ceil(needed)));
  }
  Matrix sum = Matrix::Identity(n, n);  // Horner: I + X (I + X (...))
  for (int k = 1; k < terms; ++k) {
    Matrix next = x * sum;
    next.diagonal().array() += 1.0;
    sum = std::move(next);
  }
  PerturbedResolvent out{LinearOperator(ra * sum), q, terms, std::pow(q, terms) / (1.0 - q)};
  return out;
}

/// ||R(mu, A + C) - R(mu, A) - R(mu, A + C) C R(mu, A)||.
inline double resolvent_identity_residual(const LinearOperator& a, const LinearOperator& c, double mu) {
  LinearOperator::require_same_dim(a, c);
  Matrix ra = Resolvent(a).raw(mu);
  Matrix rac = Resolvent(a + c).raw(mu);
  return detail::spectral_norm(rac - ra - rac * c.matrix() * ra);
}

/// ||(mu - (A + C)) R(mu, A) - (I - C R(mu, A))||.
inline double factorization_residual(const LinearOperator& a, const LinearOperator& c, double mu) {
  LinearOperator::require_same_dim(a, c);
  const auto n = a.dim();
  Matrix ra = Resolvent(a).raw(mu);
  Matrix lhs = -(a.matrix() + c.matrix());
  lhs.diagonal().array() += mu;
  Matrix rhs = Matrix::Identity(n, n) - c.matrix() * ra;
  return detail::spectral_norm(lhs * ra - rhs);
}

/// Magnitude against which the two resolvent residuals are judged:
/// max(1, |mu| + ||A|| + ||C||) max(1, ||C||) max(1, ||R(mu, A)||) max(1, ||R(mu, A + C)||).
inline double resolvent_residual_scale(const LinearOperator& a, const LinearOperator& c, double mu) {
  double ra = detail::spectral_norm(Resolvent(a).raw(mu));
  double rac = detail::spectral_norm(Resolvent(a + c).raw(mu));
  double nc = op_norm(c);
  return std::max(1.0, std::abs(mu) + op_norm(a) + nc) * std::max(1.0, nc) * std::max(1.0, ra) *
         std::max(1.0, rac);
}

namespace detail {

/// max over t of ||exp(t G)|| / (M e^{omega t}), evaluated as ||exp(t (G - omega I))|| / M.
inline std::vector<double> envelope_ratios(const Matrix& g, const GrowthClaim& claim,
                                           const std::vector<double>& ts) {
  Matrix shifted = g;
  shifted.diagonal().array() -= claim.omega;
  return parallel_map<double>(ts.size(), [&](std::size_t i) {
    if (ts[i] == 0.0) return 1.0 / claim.M;
    return spectral_norm(expm(ts[i] * shifted)) / claim.M;
  });
}

}  // namespace detail

/// Emits the envelope (M, omega + M K) for A + C and re-verifies it on t_grid. With
/// `bounded_variant` it also emits (M, omega + M ||C||) for bounded C and verifies that.
inline GenerationCertificate certify_perturbed_growth(const LinearOperator& a, const LinearOperator& c,
                                                      const GrowthEnvelope& env, const ScalarGrid& mu_grid,
                                                      const ScalarGrid& t_grid, bool bounded_variant = false,
                                                      double env_tol = kEnvTol) {
  if (t_grid.front() < 0.0) throw InputError("t grid must be nonnegative");
  GenerationCertificate cert;
  cert.base_env = env;
  cert.relative = relative_bound_K(a, c, env, mu_grid);
  cert.K = cert.relative.K;
  cert.perturbed_env = {env.M, env.omega + env.M * cert.K};
  cert.t_samples = t_grid.points();

  Matrix g = a.matrix() + c.matrix();
  cert.ratios = detail::envelope_ratios(g, cert.perturbed_env, cert.t_samples);
  double worst = 0.0;
  cert.verified_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cert.ratios.size(); ++i) {
    worst = std::max(worst, cert.ratios[i]);
    cert.verified_margin = std::min(cert.verified_margin, 1.0 - cert.ratios[i]);
    if (cert.ratios[i] > 1.0 + env_tol && !cert.witness_t) cert.witness_t = cert.t_samples[i];
  }
  cert.status = classify_ratio(worst, env_tol);

  if (bounded_variant) {
    GrowthClaim claim{env.M, env.omega + env.M * op_norm(c)};
    cert.bounded_variant = claim;
    cert.bounded_ratios = detail::envelope_ratios(g, claim, cert.t_samples);
    double bworst = 0.0;
    double bmargin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cert.bounded_ratios.size(); ++i) {
      bworst = std::max(bworst, cert.bounded_ratios[i]);
      bmargin = std::min(bmargin, 1.0 - cert.bounded_ratios[i]);
      if (cert.bounded_ratios[i] > 1.0 + env_tol && !cert.witness_t) cert.witness_t = cert.t_samples[i];
    }
    cert.bounded_margin = bmargin;
    if (classify_ratio(bworst, env_tol) == Status::fail) cert.status = Status::fail;
  }
  cert.falsified = cert.status == Status::fail;
  return cert;
}

struct ResolventBoundCheck {
  bool holds = false;
  double worst_ratio = 0.0;
  double worst_mu = 0.0;
  Status status = Status::fail;
};

/// ||R(mu, A + C)|| (mu - (omega + K)) <= 1 on the grid, for a contraction-type envelope (M = 1).
inline ResolventBoundCheck verify_perturbed_resolvent_bound(const LinearOperator& a, const LinearOperator& c,
                                                            const GrowthEnvelope& env, double K,
                                                            const ScalarGrid& mu_grid, double tol = kPowerTol) {
  if (std::abs(env.M - 1.0) > 1e-12) throw InputError("perturbed resolvent bound needs M = 1; renorm or shift first");
  LinearOperator::require_same_dim(a, c);
  double floor = env.omega + K;
  detail::require_above(mu_grid, floor, "verify_perturbed_resolvent_bound");
  Resolvent res(a + c);
  const auto& pts = mu_grid.points();
  std::vector<double> ratios = parallel_map<double>(pts.size(), [&](std::size_t i) {
    return detail::spectral_norm(res.raw(pts[i])) * (pts[i] - floor);
  });
  ResolventBoundCheck out;
  for (std::size_t i = 0; i < ratios.size(); ++i)
    if (i == 0 || ratios[i] > out.worst_ratio) { out.worst_ratio = ratios[i]; out.worst_mu = pts[i]; }
  out.status = classify_ratio(out.worst_ratio, tol);
  out.holds = passed(out.status);
  return out;
}

}  // namespace semigroup_lab
