#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "semigroup_lab/commands.hpp"

namespace cli = semigroup_lab::cli;
namespace io = semigroup_lab::io;

namespace {

std::vector<int> parse_dims(const std::string& text) {
  std::vector<int> dims;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    int d = std::stoi(item, &used);
    if (used != item.size() || d < 1) throw CLI::ValidationError("--dims", "expected comma-separated positive integers");
    dims.push_back(d);
  }
  if (dims.empty()) throw CLI::ValidationError("--dims", "empty list");
  return dims;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified growth envelopes, relative bounds, Yosida distances and dichotomy checks for matrix semigroups"};
  app.require_subcommand(1);

  cli::Options opt;
  std::optional<std::string> out_path;
  std::string format_text;
  double omega = 0.0, mu_min = 0.0, mu_max = 0.0, tol = 0.0, eps0 = 0.0;
  std::size_t mu_points = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--omega", omega, "growth rate omega (default: spectral abscissa, plus 0.5 if non-normal)");
    sub->add_option("--mu-min", mu_min, "smallest mu - omega, in units of max(1, ||A||)");
    sub->add_option("--mu-max", mu_max, "largest mu - omega, in units of max(1, ||A||)");
    sub->add_option("--mu-points", mu_points, "points of the geometric mu/lambda grid");
    sub->add_option("--t-max", opt.t_max, "end of the t grid")->capture_default_str();
    sub->add_option("--t-points", opt.t_points, "points of the t grid")->capture_default_str();
    sub->add_option("--tol", tol, "relative slack of inequality verdicts (default 1e-8)");
    sub->add_option("--format", format_text, "matrix file format: mm or csv (default: from extension)");
    sub->add_option("--out", out_path, "report path; sidecar CSVs are written next to it");
    sub->add_option("--seed", opt.seed, "seed for catalog URIs without a seed field")->capture_default_str();
    sub->add_flag("--timings", opt.timings, "add wall-clock timings to the report");
  };

  std::string source;
  auto* analyze = app.add_subcommand("analyze", "certify a growth envelope and check resolvent power bounds");
  analyze->add_option("operator", source, "catalog URI or matrix file")->required();
  add_common(analyze);

  std::string a_source, c_source;
  auto* perturb = app.add_subcommand("perturb", "relative bound K, A-norm and the perturbed generation certificate");
  perturb->add_option("A", a_source, "generator")->required();
  perturb->add_option("C", c_source, "perturbation")->required();
  add_common(perturb);

  std::vector<std::string> sources;
  auto* distance = app.add_subcommand("distance", "Yosida distance d_Y(A, B), or of A+C1 and A+C2 against ||C1-C2||_A");
  distance->add_option("operators", sources, "A B, or A C1 C2")->required()->expected(2, 3);
  add_common(distance);

  std::vector<std::string> dsources;
  auto* dichotomy = app.add_subcommand("dichotomy", "exponential dichotomy of A; with C1 C2 also persistence");
  dichotomy->add_option("operators", dsources, "A, or A C1 C2")->required()->expected(1, 3);
  dichotomy->add_option("--eps0", eps0, "epsilon_0 of the difference bound (default 2 ||C1 - C2||)");
  add_common(dichotomy);

  semigroup_lab::suite::SuiteOptions so;
  std::string dims_text;
  auto* suite = app.add_subcommand("suite", "run every property battery on the catalog and random ensembles");
  suite->add_option("--dims", dims_text, "comma-separated dimensions (default 4,8)");
  suite->add_option("--draws", so.draws, "random draws per dimension")->capture_default_str();
  add_common(suite);

  std::string export_path;
  auto* exporter = app.add_subcommand("export", "write an operator to a matrix file");
  exporter->add_option("operator", source, "catalog URI or matrix file")->required();
  exporter->add_option("path", export_path, "destination (.mtx or .csv)")->required();
  add_common(exporter);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitInput;
  }

  cli::Outcome outcome;
  try {
    for (auto* sub : app.get_subcommands()) {
      if (sub->count("--omega")) opt.omega = omega;
      if (sub->count("--mu-min")) opt.mu_min = mu_min;
      if (sub->count("--mu-max")) opt.mu_max = mu_max;
      if (sub->count("--mu-points")) opt.mu_points = mu_points;
      if (sub->count("--tol")) opt.tol = tol;
      if (sub == dichotomy && sub->count("--eps0")) opt.eps0 = eps0;
    }
    if (!format_text.empty()) opt.format = io::parse_format(format_text);

    if (*analyze) outcome = cli::cmd_analyze(source, opt);
    else if (*perturb) outcome = cli::cmd_perturb(a_source, c_source, opt);
    else if (*distance) outcome = cli::cmd_distance(sources, opt);
    else if (*dichotomy) outcome = cli::cmd_dichotomy(dsources, opt);
    else if (*exporter) outcome = cli::cmd_export(source, export_path, opt);
    else {
      so.seed = opt.seed;
      if (!dims_text.empty()) so.dims = parse_dims(dims_text);
      if (opt.tol) so.tol = *opt.tol;
      outcome = cli::cmd_suite(so, opt);
    }
    std::string text = cli::write_outcome(outcome, out_path);
    if (!out_path) std::cout << text;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitInput;
  } catch (const semigroup_lab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.is_input_side() ? cli::kExitInput : cli::kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return cli::kExitInternal;
  }
  if (outcome.report.contains("error")) std::cerr << "error: " << outcome.report["error"]["message"].get<std::string>() << "\n";
  return outcome.exit_code;
}
