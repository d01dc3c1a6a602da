#pragma once

#include "meanratio/fiber_linalg.hpp"
#include "meanratio/haar.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace meanratio {

/// One linear map per arrow, from the fiber over s(g) to the fiber over t(g).
/// No unit or composition law is assumed.
template <typename Scalar>
struct PseudoRep {
  std::vector<Mat<Scalar>> maps;

  const Mat<Scalar>& operator[](ArrowId g) const { return maps[g.index]; }
  Mat<Scalar>& operator[](ArrowId g) { return maps[g.index]; }
};

template <typename Scalar>
ValidationReport check_shapes(const FiniteGroupoid& g, const VectorBundle& bundle,
                              const PseudoRep<Scalar>& lambda) {
  ValidationReport report;
  if (lambda.maps.size() != g.n_arrows()) {
    report.add("rep-shape", {}, "one matrix per arrow required");
    return report;
  }
  for (std::size_t a = 0; a < g.n_arrows(); ++a) {
    const auto rows = static_cast<Eigen::Index>(bundle.dim(g.target({a})));
    const auto cols = static_cast<Eigen::Index>(bundle.dim(g.source({a})));
    if (lambda.maps[a].rows() != rows || lambda.maps[a].cols() != cols)
      report.add("rep-shape", {a}, "matrix must be dim(t g) x dim(s g)");
  }
  return report;
}

/// λ_g = id on every arrow; a representation whenever dims are constant on orbits.
template <typename Scalar = double>
PseudoRep<Scalar> identity_rep(const FiniteGroupoid& g, const VectorBundle& bundle) {
  PseudoRep<Scalar> rep;
  for (std::size_t a = 0; a < g.n_arrows(); ++a) {
    const auto d = static_cast<Eigen::Index>(bundle.dim(g.source({a})));
    if (bundle.dim(g.target({a})) != bundle.dim(g.source({a})))
      throw Error("identity representation needs dims constant on orbits");
    rep.maps.push_back(Mat<Scalar>::Identity(d, d));
  }
  return rep;
}

template <typename Scalar>
FiberMap<Scalar> fiber_map(const FiniteGroupoid& g, const PseudoRep<Scalar>& lambda, ArrowId a) {
  return {g.source(a), g.target(a), lambda[a]};
}

template <typename Scalar>
struct DefectReport {
  Scalar b = 0;            // sup_g ‖λ_g‖
  Scalar r = 0;            // r_unit_part + r_mult_part
  Scalar r_unit_part = 0;  // sup_x ‖id - λ_{1x}‖
  Scalar r_mult_part = 0;  // sup_{(g,h)} ‖λ_{gh} - λ_g λ_h‖
  ArrowId b_witness{};
  ObjectId unit_witness{};
  ArrowPair mult_witness{};
};

namespace detail {

template <typename Scalar>
DefectReport<Scalar> defects_impl(const FiniteGroupoid& g, const PseudoRep<Scalar>& lambda,
                                  const FiberMetric<Scalar>& metric, const ObjectSet* subset) {
  auto inside = [&](ObjectId x) { return subset == nullptr || contains(*subset, x); };
  auto arrow_inside = [&](ArrowId a) { return inside(g.source(a)) && inside(g.target(a)); };

  DefectReport<Scalar> d;
  for (std::size_t a = 0; a < g.n_arrows(); ++a) {
    const ArrowId ga{a};
    if (!arrow_inside(ga)) continue;
    const Scalar n = operator_norm(lambda[ga], g.source(ga), g.target(ga), metric);
    if (n > d.b) {
      d.b = n;
      d.b_witness = ga;
    }
  }
  for (std::size_t x = 0; x < g.n_objects(); ++x) {
    const ObjectId ox{x};
    if (!inside(ox)) continue;
    const Mat<Scalar>& u = lambda[g.unit(ox)];
    const Mat<Scalar> diff = Mat<Scalar>::Identity(u.rows(), u.cols()) - u;
    const Scalar n = operator_norm(diff, ox, ox, metric);
    if (n > d.r_unit_part) {
      d.r_unit_part = n;
      d.unit_witness = ox;
    }
  }
  for (const ArrowPair& p : g.composable_pairs()) {
    if (!arrow_inside(p.first) || !arrow_inside(p.second)) continue;
    const ArrowId gh = g.product(p.first, p.second);
    const Mat<Scalar> diff = lambda[gh] - lambda[p.first] * lambda[p.second];
    const Scalar n = operator_norm(diff, g.source(p.second), g.target(p.first), metric);
    if (n > d.r_mult_part) {
      d.r_mult_part = n;
      d.mult_witness = p;
    }
  }
  d.r = d.r_unit_part + d.r_mult_part;
  return d;
}

}  // namespace detail

/// b(λ) and r(λ) with the arrows, objects and pairs attaining each sup
/// (first one in ascending order on ties).
template <typename Scalar>
DefectReport<Scalar> defects(const FiniteGroupoid& g, const PseudoRep<Scalar>& lambda,
                             const FiberMetric<Scalar>& metric) {
  return detail::defects_impl(g, lambda, metric, nullptr);
}

/// Same sups, restricted to objects in S and to arrows of Γ|S.
template <typename Scalar>
DefectReport<Scalar> defects_over(const FiniteGroupoid& g, const PseudoRep<Scalar>& lambda,
                                  const FiberMetric<Scalar>& metric, const ObjectSet& subset) {
  return detail::defects_impl(g, lambda, metric, &subset);
}

template <typename Scalar>
struct NearRepReport {
  Scalar b = 0;
  Scalar r = 0;
  Scalar threshold = 0;  // min{1/4, 1/(9 b²)}
  bool is_near = false;
};

template <typename Scalar>
NearRepReport<Scalar> near_rep_from_defects(const DefectReport<Scalar>& d) {
  const Scalar quarter(0.25);
  const Scalar by_norm = d.b > Scalar(0) ? Scalar(1) / (Scalar(9) * d.b * d.b)
                                         : std::numeric_limits<Scalar>::infinity();
  const Scalar threshold = std::min(quarter, by_norm);
  return {d.b, d.r, threshold, std::isfinite(d.b) && d.r <= threshold};
}

/// Near-representation test against the supplied metric only.
template <typename Scalar>
NearRepReport<Scalar> near_representation_gate(const FiniteGroupoid& g, const PseudoRep<Scalar>& lambda,
                                               const FiberMetric<Scalar>& metric) {
  return near_rep_from_defects(defects(g, lambda, metric));
}

/// Arrow-wise matrix inverses; the map stored at g goes from E_{tg} to E_{sg}.
template <typename Scalar>
PseudoRep<Scalar> invert_maps(const PseudoRep<Scalar>& lambda) {
  PseudoRep<Scalar> out;
  out.maps.reserve(lambda.maps.size());
  for (std::size_t a = 0; a < lambda.maps.size(); ++a) {
    auto inv = invert_matrix<Scalar>(lambda.maps[a]);
    if (!inv) throw Error("map at arrow " + std::to_string(a) + " is singular");
    out.maps.push_back(std::move(*inv));
  }
  return out;
}

template <typename Scalar>
struct Inversion {
  PseudoRep<Scalar> inverse;
  bool bound_checked = false;  // only when r(λ) < 1
  Scalar max_inverse_norm = 0;
  Scalar bound = 0;            // b / (1 - r)
  ArrowId worst_arrow{};
  bool bound_holds = true;
};

/// Arrow-wise inverse, plus the check ‖λ_g⁻¹‖ ≤ b/(1 - r) when r < 1.
template <typename Scalar>
Inversion<Scalar> invert(const FiniteGroupoid& g, const PseudoRep<Scalar>& lambda,
                         const FiberMetric<Scalar>& metric) {
  Inversion<Scalar> out{invert_maps(lambda)};
  const auto d = defects(g, lambda, metric);
  if (d.r < Scalar(1)) {
    out.bound_checked = true;
    out.bound = d.b / (Scalar(1) - d.r);
    for (std::size_t a = 0; a < g.n_arrows(); ++a) {
      const ArrowId ga{a};
      const Scalar n = operator_norm(out.inverse[ga], g.target(ga), g.source(ga), metric);
      if (n > out.max_inverse_norm) {
        out.max_inverse_norm = n;
        out.worst_arrow = ga;
      }
    }
    out.bound_holds = out.max_inverse_norm <= out.bound * (Scalar(1) + Scalar(1e-9));
  }
  return out;
}

/// Mean ratio: λ̂_g = Σ_{h ∈ Γ^{sg}} c(sh)·weight(h)·λ_{gh} λ_h⁻¹.
///
/// Fixes representations and is unital for every invertible input.
template <typename Scalar>
PseudoRep<Scalar> mean_ratio(const FiniteGroupoid& g, const PseudoRep<Scalar>& lambda,
                             const HaarSystem<Scalar>& mu, const NormalizingFunction<Scalar>& c) {
  const PseudoRep<Scalar> inv = invert_maps(lambda);
  std::vector<ObjectId> base(g.n_arrows());
  for (std::size_t a = 0; a < g.n_arrows(); ++a) base[a] = g.source({a});
  auto integrand = [&](std::size_t a, ArrowId h) -> Mat<Scalar> {
    return lambda[g.product({a}, h)] * inv[h];
  };
  return {haar_integrate(g, mu, c, std::span<const ObjectId>(base), integrand)};
}

/// sup_g ‖λ_g - ρ_g‖_{sg,tg}.
template <typename Scalar>
Scalar sup_distance(const FiniteGroupoid& g, const PseudoRep<Scalar>& lambda,
                    const PseudoRep<Scalar>& rho, const FiberMetric<Scalar>& metric) {
  if (lambda.maps.size() != rho.maps.size() || lambda.maps.size() != g.n_arrows())
    throw Error("pseudo-representations have different arrow counts");
  Scalar out = 0;
  for (std::size_t a = 0; a < g.n_arrows(); ++a) {
    const ArrowId ga{a};
    if (lambda[ga].rows() != rho[ga].rows() || lambda[ga].cols() != rho[ga].cols())
      throw Error("shape mismatch at arrow " + std::to_string(a));
    out = std::max(out, operator_norm(Mat<Scalar>(lambda[ga] - rho[ga]), g.source(ga), g.target(ga), metric));
  }
  return out;
}

template <typename Scalar>
bool is_representation(const FiniteGroupoid& g, const PseudoRep<Scalar>& lambda,
                       const FiberMetric<Scalar>& metric, Scalar tol) {
  return defects(g, lambda, metric).r <= tol;
}

/// Unit and multiplicative defects over Γ|S are within tol; vacuous for S = ∅.
template <typename Scalar>
bool is_representation_over(const FiniteGroupoid& g, const PseudoRep<Scalar>& lambda,
                            const FiberMetric<Scalar>& metric, const ObjectSet& subset, Scalar tol) {
  if (subset.empty()) return true;
  return defects_over(g, lambda, metric, subset).r <= tol;
}

template <typename Scalar>
struct RestrictedRep {
  Subgroupoid sub;
  PseudoRep<Scalar> rep;
};

template <typename Scalar>
RestrictedRep<Scalar> restrict_rep(const FiniteGroupoid& g, const PseudoRep<Scalar>& lambda,
                                   const ObjectSet& subset, bool allow_non_invariant = false) {
  RestrictedRep<Scalar> out{restrict(g, subset, allow_non_invariant), {}};
  for (ArrowId a : out.sub.arrows) out.rep.maps.push_back(lambda[a]);
  return out;
}

/// λ_g = ρ_g + magnitude·N_g with N_g uniform in [-1, 1], drawn row-major,
/// arrow by arrow, from a generator seeded with `seed`. Unit arrows are
/// left exact when keep_units is set (their draws are still consumed).
template <typename Scalar>
PseudoRep<Scalar> perturb_representation(const FiniteGroupoid& g, const PseudoRep<Scalar>& rho,
                                         const FiberMetric<Scalar>& metric, Scalar magnitude,
                                         std::uint64_t seed, bool keep_units = false) {
  const auto d = defects(g, rho, metric);
  if (!(d.r <= Scalar(1e-12)))
    throw Error("perturbation base is not a representation (r = " + std::to_string(double(d.r)) + ")");
  std::vector<bool> is_unit(g.n_arrows(), false);
  for (std::size_t x = 0; x < g.n_objects(); ++x) is_unit[g.unit({x}).index] = true;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> noise(-1.0, 1.0);
  PseudoRep<Scalar> out = rho;
  for (std::size_t a = 0; a < g.n_arrows(); ++a) {
    Mat<Scalar>& m = out.maps[a];
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const Scalar n = Scalar(noise(rng));
        if (!(keep_units && is_unit[a])) m(i, j) += magnitude * n;
      }
  }
  return out;
}

// Averaging iteration.

inline constexpr double kCertificateSlack = 1e-9;

struct IterationOptions {
  double tol = 1e-10;
  std::size_t max_iter = 60;
  bool force = false;  // run even when the near-representation gate fails
};

enum class Termination { converged, max_iter, diverged };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::max_iter: return "max_iter";
    case Termination::diverged: return "diverged";
  }
  return "unknown";
}

/// Transition from iterate i to iterate i + 1.
template <typename Scalar>
struct TraceRow {
  std::size_t i;
  Scalar b;           // b_i
  Scalar r;           // r_i
  Scalar step;        // sup_g ‖λ^{i+1}_g - λ^i_g‖
  Scalar quad_slack;  // 2(b_i/(1-r_i))² r_i² - r_{i+1}
};

struct CertificateCheck {
  std::string name;
  std::size_t row;  // iterate index the inequality refers to
  double lhs;
  double rhs;
  bool passed;
};

template <typename Scalar>
struct ConvergenceTrace {
  Scalar b0 = 0;
  Scalar r0 = 0;
  Scalar epsilon = 0;  // 6 b0² r0
  std::vector<TraceRow<Scalar>> rows;
  Scalar final_b = 0;
  Scalar final_r = 0;
  Termination reason = Termination::max_iter;
  NearRepReport<Scalar> gate;
  bool certified = false;  // certificates are only claimed for near representations
  std::vector<CertificateCheck> certificates;

  std::size_t iterations() const { return rows.size(); }
  bool certificates_pass() const {
    return std::all_of(certificates.begin(), certificates.end(), [](const auto& c) { return c.passed; });
  }
};

template <typename Scalar>
struct IterationResult {
  PseudoRep<Scalar> limit;
  ConvergenceTrace<Scalar> trace;
};

/// Thrown when the input fails the near-representation gate and the run
/// was not forced.
class GateRefused : public Error {
 public:
  GateRefused(double b, double r, double threshold)
      : Error("not a near representation: r = " + std::to_string(r) + " exceeds threshold " +
              std::to_string(threshold)),
        b(b), r(r), threshold(threshold) {}
  double b;
  double r;
  double threshold;
};

namespace detail {

template <typename Scalar>
void certify(ConvergenceTrace<Scalar>& trace, const std::vector<DefectReport<Scalar>>& iterates) {
  const double slack = 1.0 + kCertificateSlack;
  auto add = [&](const char* name, std::size_t row, double lhs, double rhs, bool passed) {
    trace.certificates.push_back({name, row, lhs, rhs, passed});
  };
  const double b0 = double(trace.b0);
  const double eps = double(trace.epsilon);
  double eps_power = eps;  // ε^{2^i}
  for (std::size_t i = 0; i < iterates.size(); ++i) {
    const double b = double(iterates[i].b);
    const double r = double(iterates[i].r);
    const double r_bound = eps_power / (6.0 * b0 * b0);
    add("doubly-exponential", i, r, r_bound, r <= r_bound * slack);
    const double ratio = b / (1.0 - r);
    add("norm-ratio", i, ratio, std::sqrt(3.0) * b0, ratio <= std::sqrt(3.0) * b0 * slack);
    eps_power *= eps_power;
  }
  for (const auto& row : trace.rows) {
    const double b = double(row.b);
    const double r = double(row.r);
    const double b_next = double(iterates[row.i + 1].b);
    const double r_next = double(iterates[row.i + 1].r);
    const double growth = b / (1.0 - r);
    add("norm-growth", row.i, b_next, growth, b_next <= growth * slack);
    const double quad = 2.0 * growth * growth * r * r;
    add("quadratic-defect", row.i, r_next, quad,
        double(row.quad_slack) >= -kCertificateSlack * std::max(1.0, r_next));
    const double step_bound = b * r / (1.0 - r);
    add("step-bound", row.i, double(row.step), step_bound, double(row.step) <= step_bound * slack);
  }
}

}  // namespace detail

/// Iterates the mean ratio from λ until r ≤ tol or max_iter steps.
///
/// Refuses inputs that fail the near-representation gate unless forced.
/// For gated inputs every trace row is checked against the one-step and
/// doubly exponential estimates; forced runs record the trace only, and
/// stop as diverged when r grows three steps in a row or an iterate turns
/// singular.
template <typename Scalar>
IterationResult<Scalar> iterate_average(const FiniteGroupoid& g, const PseudoRep<Scalar>& lambda,
                                        const HaarSystem<Scalar>& mu,
                                        const NormalizingFunction<Scalar>& c,
                                        const FiberMetric<Scalar>& metric,
                                        const IterationOptions& options = {}) {
  IterationResult<Scalar> result{lambda, {}};
  ConvergenceTrace<Scalar>& trace = result.trace;
  std::vector<DefectReport<Scalar>> history{defects(g, lambda, metric)};
  trace.b0 = history.front().b;
  trace.r0 = history.front().r;
  trace.epsilon = Scalar(6) * trace.b0 * trace.b0 * trace.r0;
  trace.gate = near_rep_from_defects(history.front());
  trace.certified = trace.gate.is_near;
  if (!trace.gate.is_near && !options.force)
    throw GateRefused(double(trace.gate.b), double(trace.gate.r), double(trace.gate.threshold));

  std::size_t growing = 0;
  for (std::size_t i = 0;; ++i) {
    const DefectReport<Scalar>& d = history.back();
    if (d.r <= Scalar(options.tol)) {
      trace.reason = Termination::converged;
      break;
    }
    if (i == options.max_iter) {
      trace.reason = Termination::max_iter;
      break;
    }
    PseudoRep<Scalar> next;
    try {
      next = mean_ratio(g, result.limit, mu, c);
    } catch (const Error&) {
      if (trace.certified) throw;
      trace.reason = Termination::diverged;
      break;
    }
    DefectReport<Scalar> nd = defects(g, next, metric);
    const Scalar growth = d.b / (Scalar(1) - d.r);
    trace.rows.push_back({i, d.b, d.r, sup_distance(g, next, result.limit, metric),
                          Scalar(2) * growth * growth * d.r * d.r - nd.r});
    growing = nd.r > d.r ? growing + 1 : 0;
    result.limit = std::move(next);
    history.push_back(nd);
    if (!trace.certified && (growing >= 3 || !std::isfinite(double(nd.r)))) {
      trace.reason = Termination::diverged;
      break;
    }
  }
  trace.final_b = history.back().b;
  trace.final_r = history.back().r;
  if (trace.certified) detail::certify(trace, history);
  return result;
}

}  // namespace meanratio
