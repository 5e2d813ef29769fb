#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "semigroup_lab/catalog.hpp"
#include "semigroup_lab/dichotomy.hpp"
#include "semigroup_lab/hille_yosida.hpp"
#include "semigroup_lab/matrix_io.hpp"
#include "semigroup_lab/perturbation.hpp"
#include "semigroup_lab/report.hpp"
#include "semigroup_lab/suite.hpp"

namespace semigroup_lab::cli {

using report::Json;
using report::Sidecar;
using report::Verdict;

enum ExitCode : int { kExitPass = 0, kExitFail = 1, kExitInput = 2, kExitInternal = 3 };

/// Shared flags. Unset optionals fall back to per-command defaults.
struct Options {
  std::optional<double> omega;
  std::optional<double> mu_min;  // offsets above omega, times max(1, ||A||)
  std::optional<double> mu_max;
  std::optional<std::size_t> mu_points;
  double t_max = 10.0;
  std::size_t t_points = 64;
  std::optional<double> tol;
  std::optional<io::Format> format;
  std::uint64_t seed = 1;
  std::optional<double> eps0;
  bool timings = false;
};

struct Outcome {
  Json report;
  int exit_code = kExitPass;
  std::vector<Sidecar> sidecars;
};

/// "catalog:..." URIs take precedence; anything else is a file path. A URI without a seed
/// field takes --seed.
inline LinearOperator load_operator(const std::string& source, const Options& opt) {
  if (source.rfind("catalog:", 0) == 0) {
    catalog::CatalogSpec spec = catalog::parse_uri(source);
    if (std::count(source.begin(), source.end(), ':') < 4) spec.seed = opt.seed;
    return catalog::build(spec).with_label(source);
  }
  return opt.format ? io::load_matrix(source, *opt.format) : io::load_matrix(source);
}

inline Json source_json(const std::string& source, const LinearOperator& op) {
  Json out = {{"source", source}, {"dim", op.dim()}};
  if (source.rfind("catalog:", 0) != 0) out["entries"] = report::matrix_json(op.matrix());
  return out;
}

namespace detail {

inline double tol_of(const Options& o) { return o.tol.value_or(kPowerTol); }

inline ScalarGrid mu_grid(const LinearOperator& a, double omega, const Options& o, std::size_t default_points) {
  return default_mu_grid(a, omega, o.mu_points.value_or(default_points), o.mu_min.value_or(1e-3),
                         o.mu_max.value_or(1e6));
}

inline Json tolerances(const Options& o) {
  return {{"power_tol", tol_of(o)}, {"env_tol", kEnvTol}, {"spec_guard", kSpecGuard},
          {"gap_tol", kGapTol},     {"on_circle_tol", kOnCircleTol}};
}

inline Json grid_flags(const Options& o, std::size_t default_mu_points) {
  return {{"mu_min", o.mu_min.value_or(1e-3)},
          {"mu_max", o.mu_max.value_or(1e6)},
          {"mu_points", o.mu_points.value_or(default_mu_points)},
          {"mu_scale", "offsets above omega, times max(1, ||A||)"},
          {"t_max", o.t_max},
          {"t_points", o.t_points},
          {"seed", o.seed}};
}

inline Json skeleton(const std::string& command, Json inputs, Json tolerances) {
  return {{"schema_version", report::kSchemaVersion},
          {"tool_version", report::kToolVersion},
          {"command", command},
          {"inputs", std::move(inputs)},
          {"tolerances", std::move(tolerances)},
          {"results", Json::object()},
          {"verdicts", Json::array()}};
}

inline int finish(Json& rep, const std::vector<Verdict>& verdicts) {
  bool any_fail = false;
  for (const auto& v : verdicts) {
    rep["verdicts"].push_back(report::to_json(v));
    if (v.status == Status::fail) any_fail = true;
  }
  int code = any_fail ? kExitFail : kExitPass;
  rep["exit_code"] = code;
  return code;
}

inline Sidecar envelope_curve(const GrowthEnvelope& env) {
  Sidecar s{"envelope", {"t", "norm_shifted"}, {}};
  const auto& t = env.grid.points();
  for (std::size_t i = 0; i < t.size() && i < env.sampled_norms.size(); ++i)
    s.rows.push_back({t[i], env.sampled_norms[i]});
  return s;
}

/// Runs a command body; library errors become reports with exit 2 (input side) or 3.
inline Outcome guarded(const std::string& command, const Json& inputs, const Options& opt,
                       const std::function<Outcome()>& body) {
  auto started = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const CertificationError& e) {
    out.report = skeleton(command, inputs, tolerances(opt));
    out.report["error"] = {{"kind", "certification failure"}, {"message", e.what()}};
    Sidecar curve{"certification_curve", {"t", "norm_shifted"}, {}};
    for (const auto& [t, n] : e.curve()) curve.rows.push_back({t, n});
    out.sidecars.push_back(std::move(curve));
    out.exit_code = kExitInput;
  } catch (const Error& e) {
    out.report = skeleton(command, inputs, tolerances(opt));
    out.report["error"] = {{"kind", e.is_input_side() ? "input error" : "internal error"}, {"message", e.what()}};
    out.exit_code = e.is_input_side() ? kExitInput : kExitInternal;
  } catch (const std::exception& e) {
    out.report = skeleton(command, inputs, tolerances(opt));
    out.report["error"] = {{"kind", "internal error"}, {"message", e.what()}};
    out.exit_code = kExitInternal;
  }
  out.report["exit_code"] = out.exit_code;
  if (opt.timings) {
    auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    out.report["timings"] = {{"total_ms", ms}};
  }
  return out;
}

}  // namespace detail

inline Outcome cmd_analyze(const std::string& source, const Options& opt) {
  Json inputs = {{"operator", source}, {"omega", report::optional_json(opt.omega)}, {"flags", detail::grid_flags(opt, 32)}};
  return detail::guarded("analyze", inputs, opt, [&] {
    LinearOperator a = load_operator(source, opt);
    Json in = inputs;
    in["operator"] = source_json(source, a);
    double omega = opt.omega.value_or(default_omega(a));
    in["omega"] = omega;
    in["omega_source"] = opt.omega ? "flag" : "default";
    Outcome out;
    out.report = detail::skeleton("analyze", in, detail::tolerances(opt));
    auto& res = out.report["results"];
    res["spectrum"] = report::to_json(spectrum(a));
    GrowthEnvelope env = certify_growth_envelope(a, omega);
    res["envelope"] = report::to_json(env);
    ScalarGrid lambdas = detail::mu_grid(a, omega, opt, 32);
    PowerBoundReport pb = verify_resolvent_powers(a, env, lambdas, 20, detail::tol_of(opt));
    res["power_bounds"] = report::to_json(pb);
    std::vector<Verdict> verdicts;
    verdicts.push_back({"envelope", env.converged ? Status::pass : Status::marginal, env.margin, std::nullopt});
    verdicts.push_back(report::ratio_verdict("resolvent_powers", pb.worst_ratio, detail::tol_of(opt)));
    if (env.M == 1.0) {
      bool ok = contraction_check(a, omega, lambdas, detail::tol_of(opt));
      res["contraction"] = ok;
    }
    out.exit_code = detail::finish(out.report, verdicts);
    out.sidecars.push_back(detail::envelope_curve(env));
    Sidecar pbs{"power_bounds", {"lambda", "worst_ratio"}, {}};
    for (std::size_t i = 0; i < lambdas.size(); ++i) pbs.rows.push_back({lambdas.points()[i], pb.per_lambda_worst[i]});
    out.sidecars.push_back(std::move(pbs));
    return out;
  });
}

inline Outcome cmd_perturb(const std::string& a_source, const std::string& c_source, const Options& opt) {
  Json inputs = {{"A", a_source}, {"C", c_source}, {"omega", report::optional_json(opt.omega)},
                 {"flags", detail::grid_flags(opt, 64)}};
  return detail::guarded("perturb", inputs, opt, [&] {
    LinearOperator a = load_operator(a_source, opt);
    LinearOperator c = load_operator(c_source, opt);
    LinearOperator::require_same_dim(a, c);
    Json in = inputs;
    in["A"] = source_json(a_source, a);
    in["C"] = source_json(c_source, c);
    double omega = opt.omega.value_or(default_omega(a));
    in["omega"] = omega;
    in["omega_source"] = opt.omega ? "flag" : "default";
    const double tol = detail::tol_of(opt);
    Outcome out;
    out.report = detail::skeleton("perturb", in, detail::tolerances(opt));
    auto& res = out.report["results"];
    GrowthEnvelope env = certify_growth_envelope(a, omega);
    res["envelope"] = report::to_json(env);
    ScalarGrid mu = detail::mu_grid(a, omega, opt, 64);
    ScalarGrid ts = ScalarGrid::linear(0.0, opt.t_max, opt.t_points);
    GenerationCertificate cert = certify_perturbed_growth(a, c, env, mu, ts, true);
    ANormValue an{cert.K / env.M, env.M, env.omega, cert.relative};
    res["relative_bound"] = report::to_json(cert.relative);
    res["a_norm"] = report::to_json(an);
    res["certificate"] = report::to_json(cert);
    double cn = op_norm(c);
    res["operator_norm_C"] = cn;

    std::vector<Verdict> verdicts;
    verdicts.push_back({"generation_certificate", cert.status, cert.verified_margin,
                        cert.witness_t ? std::optional<std::string>(suite::where("t = ", *cert.witness_t)) : std::nullopt});
    if (cn > 0.0) {
      verdicts.push_back(report::ratio_verdict("a_norm_domination", an.value / cn, 1e-8));
      verdicts.push_back(report::ratio_verdict("a_norm_sandwich", (cn / env.M) / an.value, 1e-8));
    }
    double m_mid = omega + std::max(1.0, op_norm(a));
    double scale = resolvent_residual_scale(a, c, m_mid);
    verdicts.push_back(report::ratio_verdict("factorization_residual", factorization_residual(a, c, m_mid) / (1e-10 * scale), 0.0));
    verdicts.push_back(report::ratio_verdict("resolvent_identity_residual",
                                             resolvent_identity_residual(a, c, m_mid) / (1e-10 * scale), 0.0));
    if (env.M == 1.0) {
      double floor = omega + cert.K;
      ScalarGrid above = default_mu_grid(a, floor, 32);
      ResolventBoundCheck rb = verify_perturbed_resolvent_bound(a, c, env, cert.K, above, tol);
      res["perturbed_resolvent_bound"] = {{"worst_ratio", rb.worst_ratio}, {"worst_mu", rb.worst_mu},
                                          {"status", to_string(rb.status)}};
      verdicts.push_back(report::ratio_verdict("perturbed_resolvent_bound", rb.worst_ratio, tol));
    }
    out.exit_code = detail::finish(out.report, verdicts);
    Sidecar prof{"mu_profile", {"mu", "scaled_norm"}, {}};
    for (const auto& [m, v] : cert.relative.profile) prof.rows.push_back({m, v});
    out.sidecars.push_back(std::move(prof));
    Sidecar growth{"growth_ratio", {"t", "ratio", "bounded_ratio"}, {}};
    for (std::size_t i = 0; i < cert.t_samples.size(); ++i)
      growth.rows.push_back({cert.t_samples[i], cert.ratios[i],
                             i < cert.bounded_ratios.size() ? cert.bounded_ratios[i] : std::nan("")});
    out.sidecars.push_back(std::move(growth));
    return out;
  });
}

/// Two sources: d_Y(A, B). Three sources: A, C1, C2 and the comparison with ||C1 - C2||_A.
inline Outcome cmd_distance(const std::vector<std::string>& sources, const Options& opt) {
  Json inputs = {{"operators", sources}, {"omega", report::optional_json(opt.omega)}, {"flags", detail::grid_flags(opt, 64)}};
  return detail::guarded("distance", inputs, opt, [&] {
    if (sources.size() != 2 && sources.size() != 3) throw InputError("distance takes 2 (A B) or 3 (A C1 C2) operators");
    std::vector<LinearOperator> ops;
    Json in = inputs;
    in["operators"] = Json::array();
    for (const auto& s : sources) {
      ops.push_back(load_operator(s, opt));
      in["operators"].push_back(source_json(s, ops.back()));
    }
    for (const auto& op : ops) LinearOperator::require_same_dim(ops.front(), op);
    const double tol = detail::tol_of(opt);
    Outcome out;
    std::vector<Verdict> verdicts;
    YosidaDistanceEstimate est;
    if (sources.size() == 2) {
      in["mode"] = "pair";
      out.report = detail::skeleton("distance", in, detail::tolerances(opt));
      est = yosida_distance(ops[0], ops[1]);
      out.report["results"]["distance"] = report::to_json(est);
    } else {
      in["mode"] = "perturbations";
      double omega = opt.omega.value_or(default_omega(ops[0]));
      in["omega"] = omega;
      out.report = detail::skeleton("distance", in, detail::tolerances(opt));
      GrowthEnvelope env = certify_growth_envelope(ops[0], omega);
      out.report["results"]["envelope"] = report::to_json(env);
      YosidaVsANorm yv = yosida_vs_anorm(ops[0], ops[1], ops[2], env, detail::mu_grid(ops[0], omega, opt, 64), tol);
      out.report["results"]["yosida_vs_anorm"] = report::to_json(yv);
      est = yv.distance;
      double ratio = yv.bound > 0.0 ? yv.d / yv.bound : (yv.d == 0.0 ? 1.0 : std::numeric_limits<double>::infinity());
      verdicts.push_back(report::ratio_verdict("yosida_theorem", ratio, tol));
      double m2 = yv.m_squared_bound > 0.0 ? yv.d / yv.m_squared_bound : ratio;
      verdicts.push_back(report::ratio_verdict("yosida_theorem_m_squared", m2, tol));
    }
    double err = std::abs(est.value - est.laurent_limit);
    double allow = 1e-6 * (1.0 + est.laurent_limit);
    Status oracle = est.convergence_flag ? classify_ratio(err / allow, 0.0) : Status::marginal;
    verdicts.insert(verdicts.begin(), Verdict{"laurent_oracle", oracle, allow - err, std::nullopt});
    out.exit_code = detail::finish(out.report, verdicts);
    Sidecar seq{"lambda_sequence", {"lambda", "scaled_difference"}, {}};
    for (std::size_t i = 0; i < est.lambda_sequence.size(); ++i)
      seq.rows.push_back({est.lambda_sequence[i], est.raw_values[i]});
    out.sidecars.push_back(std::move(seq));
    return out;
  });
}

/// One source: dichotomy of A. Three sources: A, C1, C2 adds persistence and the difference bound.
inline Outcome cmd_dichotomy(const std::vector<std::string>& sources, const Options& opt) {
  Json inputs = {{"operators", sources}, {"omega", report::optional_json(opt.omega)},
                 {"eps0", report::optional_json(opt.eps0)}, {"flags", detail::grid_flags(opt, 64)}};
  return detail::guarded("dichotomy", inputs, opt, [&] {
    if (sources.size() != 1 && sources.size() != 3) throw InputError("dichotomy takes 1 (A) or 3 (A C1 C2) operators");
    std::vector<LinearOperator> ops;
    Json in = inputs;
    in["operators"] = Json::array();
    for (const auto& s : sources) {
      ops.push_back(load_operator(s, opt));
      in["operators"].push_back(source_json(s, ops.back()));
    }
    for (const auto& op : ops) LinearOperator::require_same_dim(ops.front(), op);
    const LinearOperator& a = ops[0];
    Outcome out;
    std::vector<Verdict> verdicts;
    DichotomyData dd = check_dichotomy(a);
    ExpStability es = exp_stability_check(a);
    if (sources.size() == 1) {
      out.report = detail::skeleton("dichotomy", in, detail::tolerances(opt));
    } else {
      double omega = opt.omega.value_or(default_omega(a));
      in["omega"] = omega;
      out.report = detail::skeleton("dichotomy", in, detail::tolerances(opt));
    }
    auto& res = out.report["results"];
    res["dichotomy"] = report::to_json(dd);
    res["exp_stability"] = report::to_json(es);
    if (dd.P) {
      const Matrix& p = dd.P->matrix();
      double pn = semigroup_lab::detail::spectral_norm(p);
      double idem = semigroup_lab::detail::spectral_norm(p * p - p);
      verdicts.push_back(report::ratio_verdict("projection_idempotent", idem / (1e-9 * (1.0 + pn * pn)), 0.0));
      Matrix e = semigroup_lab::detail::expm(a.matrix());
      double comm = semigroup_lab::detail::spectral_norm(e * p - p * e);
      double scale = 1e-9 * std::max(1.0, semigroup_lab::detail::spectral_norm(e)) * std::max(1.0, pn);
      verdicts.push_back(report::ratio_verdict("projection_commutes", comm / scale, 0.0));
    }
    if (sources.size() == 3) {
      const LinearOperator& c1 = ops[1];
      const LinearOperator& c2 = ops[2];
      double omega = in["omega"].get<double>();
      GrowthEnvelope env = certify_growth_envelope(a, omega);
      res["envelope"] = report::to_json(env);
      ScalarGrid mu = detail::mu_grid(a, omega, opt, 64);
      double eps0 = opt.eps0.value_or(std::max(2.0 * op_norm(c1 - c2), 1e-12));
      double dt = opt.t_max / static_cast<double>(std::max<std::size_t>(opt.t_points, 1));
      ScalarGrid ts = ScalarGrid::linear(dt, opt.t_max, std::max<std::size_t>(opt.t_points, 1));
      DifferenceBound db = semigroup_difference_bound(a, c1, c2, env, eps0, ts);
      res["difference_bound"] = report::to_json(db);
      verdicts.push_back({"difference_bound", db.violated ? Status::fail : Status::pass, db.min_slack,
                          db.witness_t ? std::optional<std::string>(suite::where("t = ", *db.witness_t)) : std::nullopt});
      Sidecar curve{"difference_bound", {"t", "lhs", "bound", "voc_bound"}, {}};
      for (const auto& s : db.bound_at) curve.rows.push_back({s.t, s.lhs, s.bound, s.voc_bound});
      out.sidecars.push_back(std::move(curve));
      if (check_dichotomy(a + c1).has_dichotomy == Tristate::yes) {
        PersistenceOptions po;
        po.eps0 = eps0;
        PersistenceReport pr = persistence_margin(a, c1, c2, env, mu, po);
        res["persistence"] = report::to_json(pr);
        bool false_positive = pr.certified && pr.a_posteriori != Tristate::yes;
        verdicts.push_back({"persistence_consistent", false_positive ? Status::fail : Status::pass,
                            pr.safety_radius - pr.bound_t1, std::nullopt});
      } else {
        res["persistence"] = {{"skipped", "A + C1 has no exponential dichotomy"}};
      }
    }
    out.exit_code = detail::finish(out.report, verdicts);
    return out;
  });
}

inline Outcome cmd_suite(const suite::SuiteOptions& so, const Options& opt) {
  Json inputs = {{"seed", so.seed}, {"dims", so.dims}, {"draws", so.draws}};
  Options o = opt;
  o.tol = so.tol;
  return detail::guarded("suite", inputs, o, [&] {
    Outcome out;
    out.report = detail::skeleton("suite", inputs, detail::tolerances(o));
    if (so.draws < 0) throw InputError("--draws must be >= 0");
    std::vector<Verdict> verdicts;
    suite::Runner runner(so);
    out.report["results"]["batteries"] = runner.run(verdicts);
    out.exit_code = detail::finish(out.report, verdicts);
    return out;
  });
}

inline Outcome cmd_export(const std::string& source, const std::string& path, const Options& opt) {
  Json inputs = {{"operator", source}, {"path", path}};
  return detail::guarded("export", inputs, opt, [&] {
    LinearOperator a = load_operator(source, opt);
    io::Format fmt = opt.format ? *opt.format : io::format_from_path(path);
    io::save_matrix(a, path, fmt);
    Outcome out;
    out.report = detail::skeleton("export", inputs, detail::tolerances(opt));
    out.report["results"] = {{"dim", a.dim()}, {"format", fmt == io::Format::csv ? "csv" : "mm"}};
    out.exit_code = detail::finish(out.report, {});
    return out;
  });
}

/// Writes the report (and sidecars as <stem>.<name>.csv) when a path is given; returns the
/// report text.
inline std::string write_outcome(const Outcome& out, const std::optional<std::string>& path) {
  std::string text = out.report.dump(2) + "\n";
  if (!path) return text;
  std::ofstream f(*path, std::ios::binary);
  if (!f) throw InputError("cannot write report '" + *path + "'");
  f << text;
  std::string stem = *path;
  auto dot = stem.rfind('.');
  auto slash = stem.find_last_of('/');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) stem.resize(dot);
  for (const auto& s : out.sidecars) {
    std::ofstream c(stem + "." + s.name + ".csv", std::ios::binary);
    if (!c) throw InputError("cannot write sidecar for '" + *path + "'");
    c << s.csv();
  }
  return text;
}

}  // namespace semigroup_lab::cli
