#pragma once

#include "meanratio/cohomology.hpp"
#include "meanratio/fiber_linalg.hpp"
#include "meanratio/groupoid.hpp"
#include "meanratio/haar.hpp"
#include "meanratio/pseudorep.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace meanratio::io {

using json = nlohmann::json;

/// {"n_objects", "arrows": [{"id","src","tgt"}], "units", "inverse",
///  "compose": [[g1, g2, g1g2], ...]} with compose listing exactly the
/// defined products.
json groupoid_to_json(const FiniteGroupoid& g);
FiniteGroupoid groupoid_from_json(const json& j);

json bundle_to_json(const VectorBundle& bundle);
VectorBundle bundle_from_json(const json& j);

/// {"kind":"gram","matrices":[row-major arrays]} or {"kind":"euclidean"}.
json metric_to_json(const FiberMetric<double>& metric);
FiberMetric<double> metric_from_json(const json& j, const VectorBundle& bundle);

/// {"kind":"counting"} or {"kind":"weights","values":[...]}.
json haar_to_json(const HaarSystem<double>& mu);
HaarSystem<double> haar_from_json(const json& j, const FiniteGroupoid& g);

/// Row-major flattening of a list of matrices.
json matrices_to_json(const std::vector<Mat<double>>& matrices);
/// Inverse of matrices_to_json given the expected shape of each entry.
std::vector<Mat<double>> matrices_from_json(const json& j,
                                            const std::vector<std::pair<Eigen::Index, Eigen::Index>>& shapes);

/// {"matrices": [...]} with one dim(t g) x dim(s g) block per arrow.
json rep_to_json(const PseudoRep<double>& rep);
PseudoRep<double> rep_from_json(const json& j, const FiniteGroupoid& g, const VectorBundle& bundle);

struct RunParameters {
  double tol = 1e-10;
  std::size_t max_iter = 60;
  std::optional<std::vector<std::size_t>> subset;
};

/// Everything a command needs, resolved from one scenario file.
struct Scenario {
  FiniteGroupoid groupoid;
  VectorBundle bundle;
  FiberMetric<double> metric;
  HaarSystem<double> haar;
  CutoffFunction<double> cutoff;
  std::optional<PseudoRep<double>> rep;
  std::optional<PseudoRep<double>> base_rep;  // set when rep was generated by perturbation
  RunParameters run;
};

/// Parses a scenario; relative file references resolve against base_dir.
/// Shapes are checked here, groupoid axioms are not.
Scenario scenario_from_json(const json& j, const std::filesystem::path& base_dir = ".");

/// Reads a JSON file; parse errors report the line and column.
json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& j);

Scenario load_scenario(const std::filesystem::path& path);

FiniteGroupoid groupoid_from_generator(const json& spec);

/// CSV with header i,b,r,step,quad_slack; values in %.17g.
std::string trace_csv(const ConvergenceTrace<double>& trace);
json trace_summary(const ConvergenceTrace<double>& trace);
json defects_to_json(const DefectReport<double>& d);
json near_rep_to_json(const NearRepReport<double>& r);
json report_to_json(const ValidationReport& report);

}  // namespace meanratio::io
