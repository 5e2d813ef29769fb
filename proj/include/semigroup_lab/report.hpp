#pragma once

#include <json.hpp>

#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "semigroup_lab/catalog.hpp"
#include "semigroup_lab/dichotomy.hpp"
#include "semigroup_lab/hille_yosida.hpp"
#include "semigroup_lab/matrix_io.hpp"
#include "semigroup_lab/perturbation.hpp"
#include "semigroup_lab/verdict.hpp"

namespace semigroup_lab::report {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "1";
inline constexpr const char* kToolVersion = "semigroup_lab 0.1.0";

inline Json complex_json(Complex z) { return Json::array({z.real(), z.imag()}); }

inline Json complex_list(const std::vector<Complex>& zs) {
  Json out = Json::array();
  for (Complex z : zs) out.push_back(complex_json(z));
  return out;
}

/// Rows of [re, im] pairs.
inline Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <class T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

inline Json grid_json(const ScalarGrid& g, bool with_points = true) {
  Json out = {{"spacing", to_string(g.spacing())}, {"size", g.size()}, {"lo", g.front()}, {"hi", g.back()}};
  if (with_points) out["points"] = g.points();
  return out;
}

inline Json to_json(const SpectralData& s) {
  return {{"eigenvalues", complex_list(s.eigenvalues)},
          {"spectral_abscissa", s.spectral_abscissa},
          {"spectral_radius", s.spectral_radius}};
}

inline Json to_json(const GrowthEnvelope& e) {
  Json out = {{"M", e.M}, {"omega", e.omega}, {"certified", e.certified}};
  if (!e.certified) return out;
  out["t_star"] = e.t_star;
  out["tail_norm"] = e.tail_norm;
  out["best_sample"] = e.best_sample;
  out["margin"] = e.margin;
  out["evaluations"] = e.evaluations;
  out["converged"] = e.converged;
  out["grid"] = grid_json(e.grid, false);
  out["method"] = "certified maximum of ||exp(t(A - omega I))|| on [0, t_star], ||S(t_star)|| <= 1";
  return out;
}

inline Json to_json(const PowerBoundReport& r) {
  return {{"lambda_grid", grid_json(r.lambda_grid)},
          {"n_max", r.n_max},
          {"M", r.M},
          {"omega", r.omega},
          {"tol", r.tol},
          {"worst_ratio", r.worst_ratio},
          {"worst_lambda", r.worst_lambda},
          {"worst_n", r.worst_n},
          {"per_lambda_worst", r.per_lambda_worst},
          {"max_condition", r.max_condition},
          {"status", to_string(r.status)}};
}

inline Json to_json(const RelativeBoundReport& r) {
  return {{"K", r.K},
          {"K_kind", "grid-estimate"},
          {"omega", r.omega},
          {"mu_grid", grid_json(r.mu_grid, false)},
          {"argsup_mu", optional_json(r.argsup_mu)},
          {"sup_location", r.argsup_mu ? "grid" : "asymptotic"},
          {"limit_value", r.limit_value}};
}

inline Json to_json(const ANormValue& v) {
  return {{"value", v.value}, {"M_used", v.M_used}, {"omega_used", v.omega_used}, {"K", v.report.K}};
}

inline Json to_json(const GrowthClaim& c) { return {{"M", c.M}, {"omega", c.omega}}; }

inline Json to_json(const GenerationCertificate& c) {
  Json out = {{"K", c.K},
              {"perturbed_envelope", to_json(c.perturbed_env)},
              {"t_grid", {{"size", c.t_samples.size()},
                          {"lo", c.t_samples.empty() ? 0.0 : c.t_samples.front()},
                          {"hi", c.t_samples.empty() ? 0.0 : c.t_samples.back()}}},
              {"verified_margin", c.verified_margin},
              {"falsified", c.falsified},
              {"witness_t", optional_json(c.witness_t)},
              {"status", to_string(c.status)}};
  if (c.bounded_variant) {
    out["bounded_variant"] = to_json(*c.bounded_variant);
    out["bounded_margin"] = optional_json(c.bounded_margin);
  }
  return out;
}

inline Json to_json(const YosidaDistanceEstimate& e) {
  return {{"value", e.value},
          {"lambda_sequence", e.lambda_sequence},
          {"raw_values", e.raw_values},
          {"extrapolants", e.extrapolants},
          {"extrapolation_order", e.extrapolation_order},
          {"convergence_flag", e.convergence_flag},
          {"laurent_limit", e.laurent_limit}};
}

inline Json to_json(const YosidaVsANorm& y) {
  return {{"d", y.d},
          {"bound", y.bound},
          {"ok", y.ok},
          {"M", y.M},
          {"m_squared_bound", y.m_squared_bound},
          {"distance", to_json(y.distance)},
          {"a_norm", to_json(y.anorm)},
          {"note", "proof denominators read omega + M^2 ||C1||_A and omega + M + ||C1||_A; both vanish in the limit"}};
}

inline Json to_json(const BlockDecay& b) {
  return {{"N", b.N}, {"alpha", b.alpha}, {"abscissa", b.abscissa}, {"theta", b.theta}};
}

inline Json to_json(const DichotomyData& d) {
  Json out = {{"has_dichotomy", to_string(d.has_dichotomy)},
              {"circle_gap", d.circle_gap},
              {"stable_dim", d.stable_dim},
              {"monodromy_eigenvalues", complex_list(d.monodromy_eigenvalues)}};
  if (d.P) {
    out["P"] = matrix_json(d.P->matrix());
    out["N"] = d.N;
    out["alpha"] = d.alpha;
  }
  if (d.stable_block) out["stable_block"] = to_json(*d.stable_block);
  if (d.unstable_block) out["unstable_block"] = to_json(*d.unstable_block);
  return out;
}

inline Json to_json(const ExpStability& e) {
  return {{"stable", to_string(e.stable)}, {"spectral_radius", e.spectral_radius}};
}

inline Json to_json(const DifferenceBound& b) {
  return {{"omega0", b.omega0},
          {"eps0", b.eps0},
          {"coefficient", b.coefficient},
          {"d", b.d},
          {"c1_norm_kind", b.c1_norm_kind},
          {"samples", b.bound_at.size()},
          {"min_slack", b.min_slack},
          {"violated", b.violated},
          {"witness_t", optional_json(b.witness_t)},
          {"voc_violated", b.voc_violated}};
}

inline Json to_json(const PersistenceReport& p) {
  return {{"circle_gap", p.circle_gap},
          {"kappa", p.kappa},
          {"safety_radius", p.safety_radius},
          {"circle_samples", p.circle_samples},
          {"anorm_difference", p.anorm_difference},
          {"eps0", p.eps0},
          {"omega0", p.omega0},
          {"bound_t1", p.bound_t1},
          {"actual_difference_t1", p.actual_difference_t1},
          {"certified", p.certified},
          {"a_posteriori", to_string(p.a_posteriori)},
          {"a_posteriori_gap", p.a_posteriori_gap},
          {"n0", optional_json(p.n0)},
          {"norm_c1_at_n0", optional_json(p.norm_c1_at_n0)},
          {"norm_c2_at_n0", optional_json(p.norm_c2_at_n0)},
          {"stable_c2_at_n0", optional_json(p.stable_c2_at_n0)}};
}

/// One named inequality outcome; `slack` is signed, negative means violated.
struct Verdict {
  std::string name;
  Status status = Status::pass;
  double slack = 0.0;
  std::optional<std::string> witness;
};

inline Json to_json(const Verdict& v) {
  Json out = {{"name", v.name}, {"status", to_string(v.status)}, {"slack", v.slack}};
  if (v.witness) out["witness"] = *v.witness;
  return out;
}

/// Verdict for a measured ratio against the bound 1.
inline Verdict ratio_verdict(std::string name, double ratio, double tol) {
  return {std::move(name), classify_ratio(ratio, tol), 1.0 - ratio, std::nullopt};
}

/// A plot table written next to the report as <stem>.<name>.csv.
struct Sidecar {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::string csv() const {
    std::ostringstream os;
    for (std::size_t j = 0; j < columns.size(); ++j) os << (j ? "," : "") << columns[j];
    os << "\n";
    for (const auto& r : rows) {
      for (std::size_t j = 0; j < r.size(); ++j) os << (j ? "," : "") << io::format_double(r[j]);
      os << "\n";
    }
    return os.str();
  }
};

}  // namespace semigroup_lab::report
