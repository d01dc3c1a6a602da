#include "meanratio/cli.hpp"

#include "meanratio/cohomology.hpp"
#include "meanratio/io.hpp"
#include "meanratio/metric_avg.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <variant>

namespace meanratio::cli {

namespace {

using io::json;

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<std::size_t> parse_subset(const std::string& text) {
  std::vector<std::size_t> out;
  for (const auto& item : split_csv(text)) out.push_back(std::stoul(item));
  return out;
}

void emit(const json& j, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") out << j.dump(2) << '\n';
  else io::write_json_file(path, j);
}

ValidationReport scenario_checks(const io::Scenario& sc, std::optional<NormalizingFunction<double>>& c) {
  ValidationReport report = validate(sc.groupoid);
  report.append(check_bundle(sc.groupoid, sc.bundle));
  report.append(check_left_invariance(sc.groupoid, sc.haar));
  if (report.ok()) {
    try {
      c = normalize_cutoff(sc.groupoid, sc.haar, sc.cutoff);
      report.append(check_normalizing(sc.groupoid, sc.haar, *c));
    } catch (const Error& e) {
      report.add("cutoff-starved-orbit", {}, e.what());
    }
  }
  if (sc.rep) report.append(check_shapes(sc.groupoid, sc.bundle, *sc.rep));
  return report;
}

struct Loaded {
  io::Scenario scenario;
  NormalizingFunction<double> c;
};

/// Loads and checks a scenario; returns an exit code on failure.
std::variant<Loaded, int> load_checked(const std::string& path, bool need_rep, std::ostream& out,
                                       std::ostream& err) {
  try {
    io::Scenario sc = io::load_scenario(path);
    std::optional<NormalizingFunction<double>> c;
    const ValidationReport report = scenario_checks(sc, c);
    if (!report.ok()) {
      out << json{{"ok", false}, {"violations", io::report_to_json(report)}}.dump(2) << '\n';
      return kValidationFailure;
    }
    if (need_rep && !sc.rep) {
      err << "scenario has no rep\n";
      return kValidationFailure;
    }
    return Loaded{std::move(sc), std::move(*c)};
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kValidationFailure;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kValidationFailure;
  }
}

int cmd_gen(const std::string& kind, std::size_t n, const std::string& group, std::size_t points,
            const std::string& action, const std::string& groups, const std::string& out_path,
            std::ostream& out, std::ostream& err) {
  json spec{{"kind", kind}};
  if (kind == "pair") spec["n"] = n;
  if (kind == "action") spec.update({{"group", group}, {"points", points}, {"action", action}});
  if (kind == "bundle") spec["groups"] = split_csv(groups);
  try {
    const FiniteGroupoid g = io::groupoid_from_generator(spec);
    if (auto report = validate(g); !report.ok()) {
      err << "generated groupoid fails validation\n";
      return kValidationFailure;
    }
    emit(io::groupoid_to_json(g), out_path, out);
    return kSuccess;
  } catch (const Error& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  }
}

int cmd_check(const std::string& path, std::ostream& out, std::ostream& err) {
  auto loaded = load_checked(path, false, out, err);
  if (auto* code = std::get_if<int>(&loaded)) return *code;
  out << json{{"ok", true}, {"violations", json::array()}}.dump(2) << '\n';
  return kSuccess;
}

int cmd_avg(const std::string& path, const std::string& trace_path, const std::string& report_path,
            const std::string& limit_path, std::optional<double> tol, std::optional<std::size_t> max_iter,
            bool force, std::ostream& out, std::ostream& err) {
  auto loaded = load_checked(path, true, out, err);
  if (auto* code = std::get_if<int>(&loaded)) return *code;
  auto& [sc, c] = std::get<Loaded>(loaded);

  IterationOptions options;
  options.tol = tol.value_or(sc.run.tol);
  options.max_iter = max_iter.value_or(sc.run.max_iter);
  options.force = force;

  IterationResult<double> result;
  try {
    result = iterate_average(sc.groupoid, *sc.rep, sc.haar, c, sc.metric, options);
  } catch (const GateRefused& e) {
    out << json{{"refused", true}, {"gate", {{"b", e.b}, {"r", e.r}, {"threshold", e.threshold}, {"is_near", false}}}}
               .dump(2)
        << '\n';
    err << e.what() << '\n';
    return kGateRefusal;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kValidationFailure;
  }
  const auto& trace = result.trace;
  if (!trace_path.empty()) {
    std::ofstream csv(trace_path);
    if (!csv) {
      err << "cannot write " << trace_path << '\n';
      return kValidationFailure;
    }
    csv << io::trace_csv(trace);
  }
  if (!limit_path.empty()) io::write_json_file(limit_path, io::rep_to_json(result.limit));

  json certificates = json::array();
  for (const auto& check : trace.certificates)
    certificates.push_back({{"name", check.name}, {"row", check.row}, {"lhs", check.lhs},
                            {"rhs", check.rhs}, {"passed", check.passed}});
  json report{{"gate", io::near_rep_to_json(trace.gate)},
              {"summary", io::trace_summary(trace)},
              {"final_defects", io::defects_to_json(defects(sc.groupoid, result.limit, sc.metric))},
              {"certified", trace.certified},
              {"certificates_pass", trace.certificates_pass()},
              {"certificates", certificates}};
  if (sc.base_rep) {
    report["recovery"] = {
        {"distance_to_base", sup_distance(sc.groupoid, result.limit, *sc.base_rep, sc.metric)},
        {"distance_to_start", sup_distance(sc.groupoid, result.limit, *sc.rep, sc.metric)},
        {"bound", 2.0 * std::sqrt(3.0) * trace.b0 * trace.r0}};
  }
  emit(report, report_path, out);
  const bool converged = trace.reason == Termination::converged;
  return converged && trace.certificates_pass() ? kSuccess : kCertificateViolation;
}

double max_abs_diff(const std::vector<Mat<double>>& a, const std::vector<Mat<double>>& b) {
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].size() > 0) worst = std::max(worst, (a[i] - b[i]).cwiseAbs().maxCoeff());
  return worst;
}

int cmd_cohomology(const std::string& path, const std::string& mode, std::uint64_t seed,
                   std::ostream& out, std::ostream& err) {
  auto loaded = load_checked(path, mode == "defect-consistency", out, err);
  if (auto* code = std::get_if<int>(&loaded)) return *code;
  auto& [sc, c] = std::get<Loaded>(loaded);
  const FiniteGroupoid& g = sc.groupoid;

  const bool rep_is_exact = sc.rep && defects(g, *sc.rep, sc.metric).r <= 1e-12;
  const auto rho = rep_is_exact ? conjugation_system(g, *sc.rep)
                                : CoefficientSystem<double>::trivial(g, sc.bundle);
  json report{{"mode", mode}, {"coefficients", rep_is_exact ? "conjugation" : "trivial"}};
  bool pass = false;
  if (mode == "contract2-verify") {
    const auto z = coboundary1(g, random_cochain1(g, rho, seed), rho);
    const auto cocycle = is_cocycle(g, z, rho, 1e-12);
    const double residual = max_abs_diff(coboundary1(g, contract2(g, z, sc.haar, c), rho).values, z.values);
    pass = cocycle.is_cocycle && residual <= 1e-11;
    report.update({{"delta_delta", cocycle.sup}, {"residual", residual}, {"tolerance", 1e-11}});
  } else if (mode == "contract1-verify") {
    const auto x = coboundary0(g, random_cochain0(g, rho, seed), rho);
    const double dd = sup_norm(coboundary1(g, x, rho).values).first;
    const double residual = max_abs_diff(coboundary0(g, contract1(g, x, sc.haar, c), rho).values, x.values);
    pass = dd <= 1e-12 && residual <= 1e-11;
    report.update({{"delta_delta", dd}, {"residual", residual}, {"tolerance", 1e-11}});
  } else if (mode == "defect-consistency") {
    try {
      const auto direct = mean_ratio(g, *sc.rep, sc.haar, c);
      const auto rebuilt = mean_ratio_from_defect(g, *sc.rep, sc.haar, c);
      const double residual = max_abs_diff(direct.maps, rebuilt.maps);
      pass = residual <= 1e-12;
      report.update({{"residual", residual}, {"tolerance", 1e-12}});
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      return kValidationFailure;
    }
  } else {
    err << "unknown mode '" << mode << "'\n";
    return kUsage;
  }
  report["pass"] = pass;
  out << report.dump(2) << '\n';
  return pass ? kSuccess : kCertificateViolation;
}

int cmd_metric(const std::string& path, const std::string& subset_text, bool certify_support,
               bool on_saturation, const std::string& gram_path, const std::string& report_path,
               std::ostream& out, std::ostream& err) {
  auto loaded = load_checked(path, true, out, err);
  if (auto* code = std::get_if<int>(&loaded)) return *code;
  auto& [sc, c] = std::get<Loaded>(loaded);
  const FiniteGroupoid& g = sc.groupoid;
  try {
    ObjectSet subset = all_objects(g);
    if (!subset_text.empty()) subset = make_object_set(g, parse_subset(subset_text));
    else if (sc.run.subset) subset = make_object_set(g, *sc.run.subset);

    AverageMetricOptions options;
    options.certify_support = certify_support;
    options.positivity_on_saturation = on_saturation;
    const auto result = average_metric(g, sc.metric, *sc.rep, sc.haar, c, subset, options);

    const bool rep_over_subset = is_representation_over(g, *sc.rep, sc.metric, subset, 1e-12);
    const bool isometry = check_isometry(g, *sc.rep, result.metric, subset, 1e-11);
    json report{{"invariance_defect", result.invariance_defect},
                {"min_eigenvalues", result.min_eigenvalues},
                {"tau", result.tau},
                {"subset", [&] {
                   std::vector<std::size_t> v;
                   for (ObjectId x : subset) v.push_back(x.index);
                   return v;
                 }()},
                {"rep_over_subset", rep_over_subset},
                {"isometry_pass", isometry}};
    if (is_representation(g, *sc.rep, sc.metric, 1e-12)) {
      const auto again = average_metric(g, result.metric, *sc.rep, sc.haar, c, all_objects(g));
      const double drift = max_abs_diff(again.metric.grams(), result.metric.grams());
      report["idempotence_drift"] = drift;
      report["idempotence_pass"] = drift <= 1e-12;
    }
    if (gram_path.empty()) report["metric"] = io::metric_to_json(result.metric);
    else io::write_json_file(gram_path, io::metric_to_json(result.metric));
    emit(report, report_path, out);
    const bool idempotent = !report.contains("idempotence_pass") || report["idempotence_pass"].get<bool>();
    return (!rep_over_subset || isometry) && idempotent ? kSuccess : kCertificateViolation;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kValidationFailure;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Averaging of pseudo-representations on finite groupoids", "meanratio"};
  app.require_subcommand(1);

  std::string scenario, out_path, trace_path, report_path, limit_path, gram_path;
  std::string kind, group = "z2", action = "rotate", groups, mode, subset;
  std::size_t n = 0, points = 1;
  std::optional<double> tol;
  std::optional<std::size_t> max_iter;
  std::uint64_t seed = 0;
  bool force = false, certify_support = false, on_saturation = false;

  auto* gen = app.add_subcommand("gen", "Write a generated groupoid as JSON");
  gen->add_option("kind", kind, "pair | action | bundle")->required()->check(CLI::IsMember({"pair", "action", "bundle"}));
  gen->add_option("--n", n, "objects of the pair groupoid");
  gen->add_option("--group", group, "acting group, e.g. z3");
  gen->add_option("--points", points, "points acted on");
  gen->add_option("--action", action, "rotate | trivial");
  gen->add_option("--groups", groups, "comma-separated isotropy groups, e.g. z2,z3");
  gen->add_option("--out,-o", out_path, "output file (default stdout)");

  auto* check = app.add_subcommand("check", "Validate a scenario");
  check->add_option("scenario", scenario)->required();

  auto* avg = app.add_subcommand("avg", "Iterate the mean ratio and certify convergence");
  avg->add_option("scenario", scenario)->required();
  avg->add_option("--trace", trace_path, "CSV trace output");
  avg->add_option("--report", report_path, "JSON report output (default stdout)");
  avg->add_option("--limit", limit_path, "write the final iterate as a rep file");
  avg->add_option("--tol", tol);
  avg->add_option("--max-iter", max_iter);
  avg->add_flag("--force", force, "run even when the near-representation gate fails");

  auto* coh = app.add_subcommand("cohomology", "Verify the cochain contractions");
  coh->add_option("scenario", scenario)->required();
  coh->add_option("--mode", mode)
      ->required()
      ->check(CLI::IsMember({"contract2-verify", "contract1-verify", "defect-consistency"}));
  coh->add_option("--seed", seed);

  auto* metric = app.add_subcommand("metric", "Average a fiber metric into an invariant one");
  metric->add_option("scenario", scenario)->required();
  metric->add_option("--subset", subset, "comma-separated objects (default: run.subset or all)");
  metric->add_flag("--certify-support", certify_support);
  metric->add_flag("--on-saturation", on_saturation, "certify positivity on saturation(S)");
  metric->add_option("--out,-o", gram_path, "Gram JSON output (default: inside the report)");
  metric->add_option("--report", report_path, "report output (default stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kSuccess : kUsage;
  }

  if (*gen) {
    if (kind == "pair" && n == 0) {
      err << "usage error: gen pair needs --n >= 1\n";
      return kUsage;
    }
    return cmd_gen(kind, n, group, points, action, groups, out_path, out, err);
  }
  if (*check) return cmd_check(scenario, out, err);
  if (*avg) return cmd_avg(scenario, trace_path, report_path, limit_path, tol, max_iter, force, out, err);
  if (*coh) return cmd_cohomology(scenario, mode, seed, out, err);
  if (*metric)
    return cmd_metric(scenario, subset, certify_support, on_saturation, gram_path, report_path, out, err);
  return kUsage;
}

}  // namespace meanratio::cli
