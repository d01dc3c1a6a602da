#include "meanratio/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace meanratio::io {

namespace {

std::size_t get_index(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(std::string("missing field '") + key + "'");
  const json& v = j.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    throw Error(std::string("field '") + key + "' must be a nonnegative integer");
  return v.get<std::size_t>();
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Mat<double> matrix_from_flat(const json& flat, Eigen::Index rows, Eigen::Index cols,
                             const std::string& what) {
  if (!flat.is_array()) throw Error(what + " must be an array");
  if (static_cast<Eigen::Index>(flat.size()) != rows * cols)
    throw Error(what + " has " + std::to_string(flat.size()) + " entries, expected " +
                std::to_string(rows * cols));
  Mat<double> m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = flat.at(i * cols + k).get<double>();
  return m;
}

json matrix_to_flat(const Mat<double>& m) {
  json flat = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index k = 0; k < m.cols(); ++k) flat.push_back(m(i, k));
  return flat;
}

std::vector<std::size_t> action_table(const json& spec, const FiniteGroup& group, std::size_t n_points) {
  const json& a = spec.contains("action") ? spec.at("action") : json("rotate");
  std::vector<std::size_t> table(group.order * n_points);
  if (a.is_string()) {
    const std::string kind = a.get<std::string>();
    for (std::size_t e = 0; e < group.order; ++e)
      for (std::size_t x = 0; x < n_points; ++x) {
        if (kind == "rotate") table[e * n_points + x] = (x + e) % n_points;
        else if (kind == "trivial") table[e * n_points + x] = x;
        else throw Error("unknown action '" + kind + "' (expected rotate, trivial or a table)");
      }
    return table;
  }
  table.clear();
  for (const auto& row : a)
    for (const auto& v : row) table.push_back(v.get<std::size_t>());
  return table;
}

}  // namespace

json groupoid_to_json(const FiniteGroupoid& g) {
  json arrows = json::array();
  for (std::size_t a = 0; a < g.n_arrows(); ++a)
    arrows.push_back({{"id", a}, {"src", g.source({a}).index}, {"tgt", g.target({a}).index}});
  json compose = json::array();
  for (std::size_t a = 0; a < g.n_arrows(); ++a)
    for (std::size_t b = 0; b < g.n_arrows(); ++b)
      if (auto ab = g.compose({a}, {b})) compose.push_back({a, b, ab->index});
  return {{"n_objects", g.n_objects()},
          {"arrows", arrows},
          {"units", g.unit_table()},
          {"inverse", g.inverse_table()},
          {"compose", compose}};
}

FiniteGroupoid groupoid_from_json(const json& j) {
  if (!j.is_object()) throw Error("groupoid must be a JSON object");
  const std::size_t n_objects = get_index(j, "n_objects");
  const json& arrows = j.at("arrows");
  const std::size_t m = arrows.size();
  std::vector<std::size_t> source(m), target(m);
  std::vector<bool> seen(m, false);
  for (const json& a : arrows) {
    const std::size_t id = get_index(a, "id");
    if (id >= m) throw Error("arrow id " + std::to_string(id) + " is not dense");
    if (seen[id]) throw Error("arrow id " + std::to_string(id) + " listed twice");
    seen[id] = true;
    source[id] = get_index(a, "src");
    target[id] = get_index(a, "tgt");
  }
  auto units = j.at("units").get<std::vector<std::size_t>>();
  auto inverse = j.at("inverse").get<std::vector<std::size_t>>();
  std::vector<std::size_t> compose(m * m, FiniteGroupoid::kUndefined);
  for (const json& entry : j.at("compose")) {
    if (!entry.is_array() || entry.size() != 3) throw Error("compose entries must be [g1, g2, g1g2]");
    const auto a = entry[0].get<std::size_t>();
    const auto b = entry[1].get<std::size_t>();
    const auto ab = entry[2].get<std::size_t>();
    if (a >= m || b >= m) throw Error("compose entry references an unknown arrow");
    compose[a * m + b] = ab;
  }
  return FiniteGroupoid(n_objects, std::move(source), std::move(target), std::move(units),
                        std::move(inverse), std::move(compose));
}

json bundle_to_json(const VectorBundle& bundle) { return {{"dims", bundle.dims}}; }

VectorBundle bundle_from_json(const json& j) {
  return {j.at("dims").get<std::vector<std::size_t>>()};
}

json metric_to_json(const FiberMetric<double>& metric) {
  return {{"kind", "gram"}, {"matrices", matrices_to_json(metric.grams())}};
}

FiberMetric<double> metric_from_json(const json& j, const VectorBundle& bundle) {
  const std::string kind = j.value("kind", "euclidean");
  if (kind == "euclidean") return FiberMetric<double>::euclidean(bundle);
  if (kind != "gram") throw Error("unknown metric kind '" + kind + "'");
  std::vector<std::pair<Eigen::Index, Eigen::Index>> shapes;
  for (std::size_t d : bundle.dims) shapes.emplace_back(Eigen::Index(d), Eigen::Index(d));
  return FiberMetric<double>(matrices_from_json(j.at("matrices"), shapes));
}

json haar_to_json(const HaarSystem<double>& mu) {
  return {{"kind", "weights"}, {"values", mu.weight}};
}

HaarSystem<double> haar_from_json(const json& j, const FiniteGroupoid& g) {
  const std::string kind = j.value("kind", "counting");
  if (kind == "counting") return counting_haar<double>(g);
  if (kind != "weights") throw Error("unknown haar kind '" + kind + "'");
  HaarSystem<double> mu{j.at("values").get<std::vector<double>>()};
  if (mu.weight.size() != g.n_arrows()) throw Error("haar weights need one value per arrow");
  return mu;
}

json matrices_to_json(const std::vector<Mat<double>>& matrices) {
  json out = json::array();
  for (const auto& m : matrices) out.push_back(matrix_to_flat(m));
  return out;
}

std::vector<Mat<double>> matrices_from_json(
    const json& j, const std::vector<std::pair<Eigen::Index, Eigen::Index>>& shapes) {
  if (!j.is_array() || j.size() != shapes.size())
    throw Error("expected " + std::to_string(shapes.size()) + " matrices");
  std::vector<Mat<double>> out;
  for (std::size_t i = 0; i < shapes.size(); ++i)
    out.push_back(matrix_from_flat(j[i], shapes[i].first, shapes[i].second,
                                   "matrix " + std::to_string(i)));
  return out;
}

json rep_to_json(const PseudoRep<double>& rep) { return {{"matrices", matrices_to_json(rep.maps)}}; }

PseudoRep<double> rep_from_json(const json& j, const FiniteGroupoid& g, const VectorBundle& bundle) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> shapes;
  for (std::size_t a = 0; a < g.n_arrows(); ++a)
    shapes.emplace_back(Eigen::Index(bundle.dim(g.target({a}))), Eigen::Index(bundle.dim(g.source({a}))));
  return {matrices_from_json(j.at("matrices"), shapes)};
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw Error(path.string() + ":" + std::to_string(line) + ":" + std::to_string(column) +
                ": JSON parse error: " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

FiniteGroupoid groupoid_from_generator(const json& spec) {
  const std::string kind = spec.at("kind").get<std::string>();
  if (kind == "pair") return pair_groupoid(get_index(spec, "n"));
  if (kind == "bundle") {
    std::vector<FiniteGroup> groups;
    for (const auto& name : spec.at("groups")) groups.push_back(parse_group(name.get<std::string>()));
    return group_bundle(groups);
  }
  if (kind == "action") {
    const FiniteGroup group = parse_group(spec.at("group").get<std::string>());
    const std::size_t n_points = get_index(spec, "points");
    return action_groupoid(group, n_points, action_table(spec, group, n_points));
  }
  throw Error("unknown groupoid generator '" + kind + "' (expected pair, action or bundle)");
}

namespace {

json resolve_file(const json& j, const std::filesystem::path& base_dir) {
  if (j.is_object() && j.contains("file") && j.size() == 1)
    return read_json_file(base_dir / j.at("file").get<std::string>());
  return j;
}

}  // namespace

Scenario scenario_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw Error("scenario must be a JSON object");
  json gj = resolve_file(j.at("groupoid"), base_dir);
  FiniteGroupoid g = gj.contains("generator") ? groupoid_from_generator(gj.at("generator"))
                                               : groupoid_from_json(gj);

  VectorBundle bundle = j.contains("bundle") ? bundle_from_json(j.at("bundle"))
                                             : VectorBundle{std::vector<std::size_t>(g.n_objects(), 1)};
  if (bundle.dims.size() != g.n_objects()) throw Error("bundle needs one dimension per object");

  FiberMetric<double> metric = j.contains("metric") ? metric_from_json(j.at("metric"), bundle)
                                                    : FiberMetric<double>::euclidean(bundle);
  HaarSystem<double> mu = j.contains("haar") ? haar_from_json(j.at("haar"), g) : counting_haar<double>(g);
  CutoffFunction<double> cutoff{j.contains("cutoff") ? j.at("cutoff").get<std::vector<double>>()
                                                     : std::vector<double>(g.n_objects(), 1.0)};
  if (cutoff.values.size() != g.n_objects()) throw Error("cutoff needs one value per object");

  Scenario sc{std::move(g), std::move(bundle), std::move(metric), std::move(mu), std::move(cutoff),
              std::nullopt, std::nullopt, {}};

  if (j.contains("rep")) {
    json rj = resolve_file(j.at("rep"), base_dir);
    if (rj.contains("rep")) rj = rj.at("rep");
    if (rj.contains("generator")) {
      const json& gen = rj.at("generator");
      const json base = gen.value("base_rep", json("identity"));
      PseudoRep<double> rho = base.is_string() && base.get<std::string>() == "identity"
                                  ? identity_rep<double>(sc.groupoid, sc.bundle)
                                  : rep_from_json(resolve_file(base, base_dir), sc.groupoid, sc.bundle);
      sc.rep = perturb_representation(sc.groupoid, rho, sc.metric, gen.value("magnitude", 0.0),
                                      gen.value("seed", std::uint64_t{0}), gen.value("keep_units", false));
      sc.base_rep = std::move(rho);
    } else {
      sc.rep = rep_from_json(rj, sc.groupoid, sc.bundle);
    }
  }

  if (j.contains("run")) {
    const json& run = j.at("run");
    sc.run.tol = run.value("tol", sc.run.tol);
    sc.run.max_iter = run.value("max_iter", sc.run.max_iter);
    if (run.contains("subset")) sc.run.subset = run.at("subset").get<std::vector<std::size_t>>();
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  return scenario_from_json(read_json_file(path), path.parent_path().empty() ? "." : path.parent_path());
}

std::string trace_csv(const ConvergenceTrace<double>& trace) {
  std::string out = "i,b,r,step,quad_slack\n";
  for (const auto& row : trace.rows) {
    out += std::to_string(row.i) + "," + fmt_double(row.b) + "," + fmt_double(row.r) + "," +
           fmt_double(row.step) + "," + fmt_double(row.quad_slack) + "\n";
  }
  return out;
}

json trace_summary(const ConvergenceTrace<double>& trace) {
  return {{"epsilon", trace.epsilon},
          {"b0", trace.b0},
          {"r0", trace.r0},
          {"iterations", trace.iterations()},
          {"reason", to_string(trace.reason)},
          {"final_b", trace.final_b},
          {"final_r", trace.final_r}};
}

json defects_to_json(const DefectReport<double>& d) {
  return {{"b", d.b},
          {"r", d.r},
          {"r_unit_part", d.r_unit_part},
          {"r_mult_part", d.r_mult_part},
          {"b_witness", d.b_witness.index},
          {"unit_witness", d.unit_witness.index},
          {"mult_witness", {d.mult_witness.first.index, d.mult_witness.second.index}}};
}

json near_rep_to_json(const NearRepReport<double>& r) {
  return {{"b", r.b}, {"r", r.r}, {"threshold", r.threshold}, {"is_near", r.is_near}};
}

json report_to_json(const ValidationReport& report) {
  json out = json::array();
  for (const auto& v : report.violations)
    out.push_back({{"rule", v.rule}, {"witness", v.witness}, {"detail", v.detail}});
  return out;
}

}  // namespace meanratio::io
