#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "semigroup_lab/catalog.hpp"
#include "semigroup_lab/dichotomy.hpp"
#include "semigroup_lab/hille_yosida.hpp"
#include "semigroup_lab/matrix_io.hpp"
#include "semigroup_lab/perturbation.hpp"
#include "semigroup_lab/report.hpp"

namespace semigroup_lab::suite {

using report::Json;

struct SuiteOptions {
  std::uint64_t seed = 1;
  std::vector<int> dims{4, 8};
  int draws = 10;
  double tol = kPowerTol;  // a negative value forces failures (harness self-test)
};

inline int severity(Status s) {
  switch (s) {
    case Status::pass: return 0;
    case Status::tight: return 1;
    case Status::marginal: return 2;
    case Status::fail: return 3;
  }
  return 3;
}

/// Aggregate of many checks of one property: worst status, min slack, first witness of the worst status.
class Battery {
 public:
  explicit Battery(std::string name) : name_(std::move(name)) {}

  void record(Status s, double slack, const std::string& where) {
    ++checks_;
    if (std::isfinite(slack)) worst_slack_ = std::min(worst_slack_, slack);
    if (severity(s) > severity(status_)) {
      status_ = s;
      witness_ = where;
    }
  }
  void ratio(double r, double tol, const std::string& where) { record(classify_ratio(r, tol), 1.0 - r, where); }
  void fail(const std::string& where) { record(Status::fail, std::numeric_limits<double>::quiet_NaN(), where); }

  const std::string& name() const noexcept { return name_; }
  Status status() const noexcept { return status_; }
  std::size_t checks() const noexcept { return checks_; }
  double worst_slack() const noexcept { return worst_slack_; }
  const std::string& witness() const noexcept { return witness_; }

  Json json() const {
    Json out = {{"name", name_}, {"status", to_string(status_)}, {"checks", checks_}};
    out["worst_slack"] = checks_ > 0 && std::isfinite(worst_slack_) ? Json(worst_slack_) : Json(nullptr);
    if (!witness_.empty()) out["witness"] = witness_;
    return out;
  }

  report::Verdict verdict() const {
    report::Verdict v{name_, status_, std::isfinite(worst_slack_) ? worst_slack_ : 0.0, std::nullopt};
    if (!witness_.empty()) v.witness = witness_;
    return v;
  }

 private:
  std::string name_;
  Status status_ = Status::pass;
  std::size_t checks_ = 0;
  double worst_slack_ = std::numeric_limits<double>::infinity();
  std::string witness_;
};

template <class... Parts>
std::string where(const Parts&... parts) {
  std::ostringstream os;
  os.precision(17);
  ((os << parts), ...);
  return os.str();
}

// Random ensembles. Streams: role r of draw k at dim n uses derive_seed(seed, n * 1000003 + 16 k + r).
inline std::uint64_t draw_seed(std::uint64_t seed, int dim, int draw, int role) {
  return catalog::derive_seed(seed, static_cast<std::uint64_t>(dim) * 1000003ULL +
                                        16ULL * static_cast<std::uint64_t>(draw) +
                                        static_cast<std::uint64_t>(role));
}

inline LinearOperator stable_generator(int dim, std::uint64_t seed) {
  return catalog::build({catalog::Family::random_stable, dim, {catalog::kDefaultStabilityShift}, seed});
}

inline LinearOperator mixed_generator(int dim, std::uint64_t seed) {
  return catalog::gaussian_operator(dim, 1.0, seed).with_label("gaussian");
}

/// Eigenvector-matrix condition number, infinite when numerically defective.
inline double eigenvector_condition(const LinearOperator& a) {
  Eigen::ComplexEigenSolver<Matrix> es(a.matrix(), true);
  if (es.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
  Eigen::JacobiSVD<Matrix> svd(es.eigenvectors());
  const auto& s = svd.singularValues();
  double lo = s(s.size() - 1);
  return lo > 0.0 ? s(0) / lo : std::numeric_limits<double>::infinity();
}

/// Every property battery over the catalog standard set and the seeded random ensembles.
class Runner {
 public:
  explicit Runner(SuiteOptions opt) : opt_(std::move(opt)) {}

  Json run(std::vector<report::Verdict>& verdicts) {
    for (int dim : opt_.dims) {
      if (dim < 1) throw InputError("suite dims must be >= 1");
      for (const auto& spec : catalog::standard_set(dim, catalog::derive_seed(opt_.seed, static_cast<std::uint64_t>(dim))))
        catalog_checks(spec);
      for (int k = 0; k < opt_.draws; ++k) random_checks(dim, k);
    }
    Json batteries = Json::array();
    for (const Battery* b : all()) {
      batteries.push_back(b->json());
      verdicts.push_back(b->verdict());
    }
    return batteries;
  }

  std::vector<const Battery*> all() const {
    return {&determinism_, &io_round_trip_, &heat_definite_,  &transport_abscissa_, &envelope_,
            &powers_,      &zero_tight_,    &contraction_,    &renorm_,             &factorization_,
            &identity_,    &neumann_,       &generation_,     &homogeneity_,        &triangle_,
            &domination_,  &sandwich_,      &yosida_oracle_,  &yosida_symmetry_,    &yosida_triangle_,
            &yosida_theorem_, &yosida_m2_,  &projection_,     &decay_,              &stable_dim_,
            &exp_stability_, &difference_,  &persistence_};
  }

 private:
  void catalog_checks(const catalog::CatalogSpec& spec) {
    LinearOperator a = catalog::build(spec);
    const std::string name = a.label();
    const double tol = opt_.tol;

    if (catalog::build(spec) == a) determinism_.record(Status::pass, 0.0, name);
    else determinism_.fail(name);

    for (auto fmt : {io::Format::matrix_market, io::Format::csv}) {
      std::stringstream ss;
      if (fmt == io::Format::csv) io::write_csv(ss, a);
      else io::write_matrix_market(ss, a);
      LinearOperator back = fmt == io::Format::csv ? io::read_csv(ss) : io::read_matrix_market(ss);
      if (back == a) io_round_trip_.record(Status::pass, 0.0, name);
      else io_round_trip_.fail(where(name, " via ", fmt == io::Format::csv ? "csv" : "matrix market"));
    }

    SpectralData spec_data = spectrum(a);
    double scale = std::max(1.0, op_norm(a));
    if (spec.family == catalog::Family::heat_laplacian) {
      double top = detail::logarithmic_norm(a.matrix());  // largest eigenvalue of the symmetric matrix
      double herm = detail::spectral_norm(a.matrix() - a.matrix().adjoint());
      heat_definite_.record(top < 0.0 && herm == 0.0 ? Status::pass : Status::fail, -top / scale,
                            where(name, ": top eigenvalue ", top));
    }
    if (spec.family == catalog::Family::transport_shift) {
      double abscissa = spec_data.spectral_abscissa;
      transport_abscissa_.ratio(1.0 + abscissa / scale, tol, where(name, ": abscissa ", abscissa));
    }

    double omega = default_omega(a);
    GrowthEnvelope env;
    try {
      env = certify_growth_envelope(a, omega);
      envelope_.record(env.converged ? Status::pass : Status::marginal, env.margin / env.M,
                       where(name, ": omega ", omega, ", M ", env.M));
    } catch (const CertificationError& e) {
      envelope_.fail(where(name, ": ", e.what()));
      return;
    }
    ScalarGrid lambdas = default_mu_grid(a, omega, 32);
    PowerBoundReport pb = verify_resolvent_powers(a, env, lambdas, 20, tol);
    powers_.ratio(pb.worst_ratio, tol, where(name, ": lambda ", pb.worst_lambda, ", n ", pb.worst_n));
    if (spec.family == catalog::Family::zero) {
      double dev = 0.0;
      for (double r : pb.per_lambda_worst) dev = std::max(dev, std::abs(r - 1.0));
      Status s = pb.status == Status::fail ? Status::fail : (dev <= 1e-12 ? Status::tight : Status::fail);
      zero_tight_.record(s, 1.0 - pb.worst_ratio, where(name, ": |ratio - 1| = ", dev));
    }
    if (env.M == 1.0) {
      bool ok = contraction_check(a, omega, lambdas, tol);
      contraction_.record(ok ? Status::pass : Status::fail, 0.0, where(name, ": omega ", omega));
    }

    if (spec_data.spectral_abscissa < -0.1) {
      try {
        GrowthEnvelope env0 = certify_growth_envelope(a, 0.0);
        catalog::Rng rng(catalog::derive_seed(opt_.seed, 977 + static_cast<std::uint64_t>(a.dim())));
        for (int i = 0; i < 3; ++i) {
          Vector x = rng.gaussian_vector(a.dim());
          double v = sup_renorm(a, env0, x);
          double upper = env0.M * x.norm();
          renorm_.ratio(v / (upper * (1.0 + kEnvTol)), tol, where(name, ": |x| ", v, ", M ||x|| ", upper));
        }
      } catch (const Error& e) {
        renorm_.fail(where(name, ": ", e.what()));
      }
    }

    double cond = eigenvector_condition(a);
    bool axis_free = true;
    for (Complex z : spec_data.eigenvalues)
      if (std::abs(z.real()) <= 1e-8 * scale) axis_free = false;
    DichotomyData dd = check_dichotomy(a);
    if (cond < 1e8 && axis_free) {
      int negative = 0;
      for (Complex z : spec_data.eigenvalues)
        if (z.real() < 0.0) ++negative;
      stable_dim_.record(negative == dd.stable_dim ? Status::pass : Status::fail, 0.0,
                         where(name, ": stable_dim ", dd.stable_dim, " vs ", negative));
    }
    ExpStability es = exp_stability_check(a);
    bool expect_stable = spec_data.spectral_abscissa < -1e-8 * scale;
    if (es.stable != Tristate::marginal) {
      bool agree = (es.stable == Tristate::yes) == expect_stable;
      exp_stability_.record(agree ? Status::pass : Status::fail, 0.0,
                            where(name, ": r(T(1)) ", es.spectral_radius));
    }
    if (dd.has_dichotomy == Tristate::yes) dichotomy_checks(a, dd, name);
  }

  void dichotomy_checks(const LinearOperator& a, const DichotomyData& dd, const std::string& name) {
    const Matrix& p = dd.P->matrix();
    double pn = detail::spectral_norm(p);
    double idem = detail::spectral_norm(p * p - p);
    projection_.ratio(idem / (1e-9 * (1.0 + pn * pn)), 0.0, where(name, ": ||P^2 - P|| ", idem));
    catalog::Rng rng(catalog::derive_seed(opt_.seed, 31 + static_cast<std::uint64_t>(a.dim())));
    for (int i = 0; i < 3; ++i) {
      double t = rng.uniform(0.0, 2.0);
      Matrix e = detail::expm(t * a.matrix());
      double comm = detail::spectral_norm(e * p - p * e);
      double scale = 1e-9 * std::max(1.0, detail::spectral_norm(e)) * std::max(1.0, pn);
      projection_.ratio(comm / scale, 0.0, where(name, ": ||T(t)P - PT(t)|| ", comm, " at t ", t));
    }
    for (int i = 0; i < 4; ++i) {
      double t = rng.uniform(0.0, 5.0);
      double bound = dd.N * std::exp(-dd.alpha * t);
      if (dd.stable_basis.cols() > 0) {
        Vector x = dd.stable_basis * rng.gaussian_vector(dd.stable_basis.cols());
        double lhs = (detail::expm(t * a.matrix()) * x).norm();
        decay_.ratio(lhs / (bound * x.norm()), opt_.tol, where(name, ": forward at t ", t));
      }
      if (dd.unstable_basis.cols() > 0) {
        Vector x = dd.unstable_basis * rng.gaussian_vector(dd.unstable_basis.cols());
        double lhs = (detail::expm(-t * a.matrix()) * x).norm();
        decay_.ratio(lhs / (bound * x.norm()), opt_.tol, where(name, ": backward at t ", t));
      }
    }
  }

  void random_checks(int dim, int k) {
    const double tol = opt_.tol;
    const std::string tag = where("dim ", dim, " draw ", k);
    LinearOperator a = stable_generator(dim, draw_seed(opt_.seed, dim, k, 0));
    LinearOperator c = catalog::gaussian_operator(dim, 0.5, draw_seed(opt_.seed, dim, k, 1));
    LinearOperator c2 = catalog::gaussian_operator(dim, 0.5, draw_seed(opt_.seed, dim, k, 2));
    double omega = default_omega(a);
    GrowthEnvelope env = certify_growth_envelope(a, omega);
    ScalarGrid mu = default_mu_grid(a, omega);
    double s = std::max(1.0, op_norm(a));

    for (double off : {0.1, 1.0, 10.0}) {
      double m = omega + off * s;
      double scale = resolvent_residual_scale(a, c, m);
      factorization_.ratio(factorization_residual(a, c, m) / (1e-10 * scale), 0.0, where(tag, ": mu ", m));
      identity_.ratio(resolvent_identity_residual(a, c, m) / (1e-10 * scale), 0.0, where(tag, ": mu ", m));
      try {
        auto nm = perturbed_resolvent(a, c, m, ResolventMode::neumann);
        auto fz = perturbed_resolvent(a, c, m, ResolventMode::factorized);
        double diff = detail::spectral_norm(nm.value.matrix() - fz.value.matrix());
        double allow = nm.truncation_bound * detail::spectral_norm(Resolvent(a).raw(m)) + 1e-10 * scale;
        neumann_.ratio(diff / allow, 0.0, where(tag, ": mu ", m));
      } catch (const PreconditionError&) {
      }
    }

    GenerationCertificate cert =
        certify_perturbed_growth(a, c, env, mu, ScalarGrid::linear(0.0, 10.0, 64), true);
    double worst = 0.0;
    for (double r : cert.ratios) worst = std::max(worst, r);
    generation_.ratio(worst / (1.0 + kEnvTol), 0.0, where(tag, ": witness t ", cert.witness_t.value_or(-1.0)));

    ANormValue n1 = a_norm(a, c, env, mu);
    ANormValue n2 = a_norm(a, c2, env, mu);
    ANormValue n12 = a_norm(a, c + c2, env, mu);
    double scl = -1.7;
    ANormValue ns = a_norm(a, Complex(scl) * c, env, mu);
    double hom = std::abs(ns.value - std::abs(scl) * n1.value);
    homogeneity_.ratio(hom / (1e-9 * std::max(1.0, std::abs(scl) * n1.value)), 0.0, where(tag, ": deviation ", hom));
    triangle_.ratio(n12.value / (n1.value + n2.value + 1e-9), tol, tag);
    double cn = op_norm(c);
    domination_.ratio(n1.value / cn, 1e-8, where(tag, ": ||C||_A ", n1.value, ", ||C|| ", cn));
    sandwich_.ratio((cn / env.M) / n1.value, 1e-8, where(tag, ": ||C||_A ", n1.value, ", ||C||/M ", cn / env.M));

    LinearOperator b = a + c;
    YosidaDistanceEstimate dab = yosida_distance(a, b);
    double truth = op_norm(a - b);
    if (!dab.convergence_flag) {
      yosida_oracle_.record(Status::marginal, 0.0, where(tag, ": extrapolants not converged"));
    } else {
      double err = std::abs(dab.value - truth);
      yosida_oracle_.ratio(err / (1e-6 * (1.0 + truth)), 0.0, where(tag, ": d_Y ", dab.value, ", ||A - B|| ", truth));
    }
    YosidaDistanceEstimate dba = yosida_distance(b, a);
    double asym = std::abs(dab.value - dba.value);
    yosida_symmetry_.ratio(asym / (1e-8 * (1.0 + dab.value)), 0.0, tag);
    LinearOperator b2 = a + c2;
    double d13 = yosida_distance(a, b2).value;
    double d23 = yosida_distance(b, b2).value;
    yosida_triangle_.ratio(d13 / (dab.value + d23 + 1e-8 * (1.0 + d13)), 0.0, tag);

    YosidaVsANorm yv = yosida_vs_anorm(a, c, c2, env, mu, tol);
    yosida_theorem_.ratio(yv.bound > 0.0 ? yv.d / yv.bound : (yv.d == 0.0 ? 1.0 : 2.0), tol,
                          where(tag, ": d_Y ", yv.d, " > ||C1 - C2||_A ", yv.bound, " (M ", yv.M, ")"));
    yosida_m2_.ratio(yv.m_squared_bound > 0.0 ? yv.d / yv.m_squared_bound : 1.0, tol,
                     where(tag, ": d_Y ", yv.d, ", M^2 ||C1 - C2||_A ", yv.m_squared_bound));

    // Unshifted Gaussian generator, C2 a small move of C1.
    LinearOperator g = mixed_generator(dim, draw_seed(opt_.seed, dim, k, 3));
    double gomega = spectrum(g).spectral_abscissa + catalog::kDefaultStabilityShift;
    try {
      GrowthEnvelope genv = certify_growth_envelope(g, gomega);
      LinearOperator small = catalog::gaussian_operator(dim, 0.01, draw_seed(opt_.seed, dim, k, 4));
      LinearOperator d1 = c;
      LinearOperator d2 = c + small;
      double eps0 = 2.0 * op_norm(small);
      DifferenceBound db = semigroup_difference_bound(g, d1, d2, genv, eps0, ScalarGrid::linear(0.05, 5.0, 32));
      for (const auto& smp : db.bound_at)
        difference_.record(smp.slack >= 0.0 ? Status::pass : Status::fail, smp.slack / smp.abs_tol,
                           where(tag, ": t ", smp.t, ", lhs ", smp.lhs, ", bound ", smp.bound));
    } catch (const CertificationError& e) {
      difference_.fail(where(tag, ": ", e.what()));
    }

    DichotomyData gd = check_dichotomy(g);
    if (gd.has_dichotomy == Tristate::yes) {
      dichotomy_checks(g, gd, tag);
      double scale = std::max(1.0, op_norm(g));
      double cond = eigenvector_condition(g);
      bool axis_free = true;
      int negative = 0;
      for (Complex z : spectrum(g).eigenvalues) {
        if (std::abs(z.real()) <= 1e-8 * scale) axis_free = false;
        if (z.real() < 0.0) ++negative;
      }
      if (cond < 1e8 && axis_free)
        stable_dim_.record(negative == gd.stable_dim ? Status::pass : Status::fail, 0.0,
                           where(tag, ": stable_dim ", gd.stable_dim, " vs ", negative));
      persistence_checks(g, dim, k, tag);
    }
  }

  void persistence_checks(const LinearOperator& g, int dim, int k, const std::string& tag) {
    double gomega = default_omega(g);
    GrowthEnvelope genv;
    try {
      genv = certify_growth_envelope(g, gomega);
    } catch (const CertificationError& e) {
      persistence_.fail(where(tag, ": ", e.what()));
      return;
    }
    ScalarGrid mu = default_mu_grid(g, gomega, 32);
    LinearOperator zero = LinearOperator::zero(dim);
    Matrix e = catalog::gaussian_operator(dim, 1.0, draw_seed(opt_.seed, dim, k, 5)).matrix();
    LinearOperator unit(e / detail::spectral_norm(e));
    for (double s : {0.0, 1e-4, 1e-2, 0.3}) {
      PersistenceReport pr = persistence_margin(g, zero, Complex(s) * unit, genv, mu);
      bool false_positive = pr.certified && pr.a_posteriori != Tristate::yes;
      persistence_.record(false_positive ? Status::fail : Status::pass, pr.safety_radius - pr.bound_t1,
                          where(tag, ": s ", s, ", certified ", pr.certified, ", a posteriori ",
                                to_string(pr.a_posteriori)));
    }
  }

  SuiteOptions opt_;
  Battery determinism_{"catalog.determinism"};
  Battery io_round_trip_{"catalog.io_round_trip"};
  Battery heat_definite_{"catalog.heat_negative_definite"};
  Battery transport_abscissa_{"catalog.transport_abscissa"};
  Battery envelope_{"hille_yosida.envelope"};
  Battery powers_{"hille_yosida.resolvent_powers"};
  Battery zero_tight_{"hille_yosida.zero_tight"};
  Battery contraction_{"hille_yosida.contraction"};
  Battery renorm_{"hille_yosida.renorm_sandwich"};
  Battery factorization_{"perturbation.factorization"};
  Battery identity_{"perturbation.resolvent_identity"};
  Battery neumann_{"perturbation.neumann_series"};
  Battery generation_{"perturbation.generation"};
  Battery homogeneity_{"perturbation.a_norm_homogeneity"};
  Battery triangle_{"perturbation.a_norm_triangle"};
  Battery domination_{"perturbation.a_norm_domination"};
  Battery sandwich_{"perturbation.a_norm_sandwich"};
  Battery yosida_oracle_{"dichotomy.yosida_oracle"};
  Battery yosida_symmetry_{"dichotomy.yosida_symmetry"};
  Battery yosida_triangle_{"dichotomy.yosida_triangle"};
  Battery yosida_theorem_{"dichotomy.yosida_theorem"};
  Battery yosida_m2_{"dichotomy.yosida_theorem_m_squared"};
  Battery projection_{"dichotomy.projection_laws"};
  Battery decay_{"dichotomy.decay_estimates"};
  Battery stable_dim_{"dichotomy.stable_dim"};
  Battery exp_stability_{"dichotomy.exp_stability"};
  Battery difference_{"dichotomy.difference_bound"};
  Battery persistence_{"dichotomy.persistence"};
};

}  // namespace semigroup_lab::suite
