#pragma once

#include "meanratio/pseudorep.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>
#include <vector>

namespace meanratio {

struct AverageMetricOptions {
  /// Require supp c ∩ saturation(S) ⊆ S before averaging.
  bool certify_support = false;
  /// Certify positivity on saturation(S) rather than on S.
  bool positivity_on_saturation = false;
  /// Smallest eigenvalue the blend must restore off the certified set.
  double eigen_floor = 1e-8;
};

template <typename Scalar>
struct InvariantMetricReport {
  FiberMetric<Scalar> metric;
  Scalar invariance_defect = 0;          // sup over Γ|S, max abs entry
  std::vector<Scalar> min_eigenvalues;   // per object, after blending
  ObjectSet subset;
  Scalar tau = 0;                        // blend weight used off the certified set
};

/// sup over g ∈ Γ|S of max |λ_gᵀ G(tg) λ_g - G(sg)| entrywise.
template <typename Scalar>
Scalar isometry_defect(const FiniteGroupoid& g, const PseudoRep<Scalar>& lambda,
                       const FiberMetric<Scalar>& metric, const ObjectSet& subset) {
  Scalar worst = 0;
  for (std::size_t a = 0; a < g.n_arrows(); ++a) {
    const ArrowId ga{a};
    const ObjectId s = g.source(ga), t = g.target(ga);
    if (!contains(subset, s) || !contains(subset, t)) continue;
    const Mat<Scalar> pulled = lambda[ga].transpose() * metric.gram(t) * lambda[ga];
    const Mat<Scalar> diff = pulled - metric.gram(s);
    if (diff.size() > 0) worst = std::max(worst, Scalar(diff.cwiseAbs().maxCoeff()));
  }
  return worst;
}

template <typename Scalar>
bool check_isometry(const FiniteGroupoid& g, const PseudoRep<Scalar>& lambda,
                    const FiberMetric<Scalar>& metric, const ObjectSet& subset, Scalar tol) {
  return isometry_defect(g, lambda, metric, subset) <= tol;
}

namespace detail {
template <typename Scalar>
Scalar min_eigenvalue(const Mat<Scalar>& m) {
  if (m.size() == 0) return Scalar(0);
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}
}  // namespace detail

/// Haar average of a fiber metric along λ:
///   Ĝ(x) = Σ_{h ∈ Γ^x} c(sh)·weight(h)·λ_{h⁻¹}ᵀ G(sh) λ_{h⁻¹}.
///
/// λ_{h⁻¹} is the map stored at the inverse arrow. When λ is a
/// representation over an invariant S the result makes every λ_g, g ∈ Γ|S,
/// an isometry. Objects outside the certified set get Ĝ + τ·G for the
/// smallest τ ∈ {0, 2⁻⁶⁰, ..., 1/2, 1} that lifts their eigenvalues above
/// the floor.
template <typename Scalar>
InvariantMetricReport<Scalar> average_metric(const FiniteGroupoid& g, const FiberMetric<Scalar>& phi,
                                             const PseudoRep<Scalar>& lambda,
                                             const HaarSystem<Scalar>& mu,
                                             const NormalizingFunction<Scalar>& c,
                                             const ObjectSet& subset,
                                             const AverageMetricOptions& options = {}) {
  const ObjectSet sat = saturation(g, subset);
  if (options.certify_support) {
    for (ObjectId x : sat)
      if (c.values[x.index] != Scalar(0) && !contains(subset, x))
        throw Error("support of c meets saturation(S) at object " + std::to_string(x.index) +
                    " outside S");
  }
  const ObjectSet& certified = options.positivity_on_saturation ? sat : subset;

  const ObjectSet objects = all_objects(g);
  auto integrand = [&](std::size_t, ArrowId h) -> Mat<Scalar> {
    const Mat<Scalar>& back = lambda[g.inverse(h)];
    return (back.transpose() * phi.gram(g.source(h))) * back;
  };
  std::vector<Mat<Scalar>> grams = haar_integrate(g, mu, c, std::span<const ObjectId>(objects), integrand);
  for (auto& m : grams) m = Mat<Scalar>((m + m.transpose()) * Scalar(0.5));

  InvariantMetricReport<Scalar> report;
  report.subset = subset;
  for (ObjectId x : certified) {
    if (grams[x.index].size() > 0 && !(detail::min_eigenvalue(grams[x.index]) > Scalar(0)))
      throw Error("averaged metric is not positive definite at object " + std::to_string(x.index));
  }

  const Scalar floor(options.eigen_floor);
  auto blended_ok = [&](Scalar tau) {
    for (std::size_t x = 0; x < g.n_objects(); ++x) {
      if (contains(certified, {x}) || grams[x].size() == 0) continue;
      const Mat<Scalar> m = grams[x] + tau * phi.gram({x});
      if (!(detail::min_eigenvalue(m) >= floor)) return false;
    }
    return true;
  };
  Scalar tau = 0;
  if (!blended_ok(tau)) {
    bool found = false;
    for (int k = 60; k >= 0 && !found; --k) {
      tau = std::ldexp(Scalar(1), -k);
      found = blended_ok(tau);
    }
    if (!found) throw Error("no blend weight tau <= 1 restores the eigenvalue floor");
  }
  if (tau > Scalar(0)) {
    for (std::size_t x = 0; x < g.n_objects(); ++x)
      if (!contains(certified, {x})) grams[x] = Mat<Scalar>(grams[x] + tau * phi.gram({x}));
  }
  report.tau = tau;
  for (const auto& m : grams) report.min_eigenvalues.push_back(detail::min_eigenvalue(m));
  report.metric = FiberMetric<Scalar>(std::move(grams));
  report.invariance_defect = isometry_defect(g, lambda, report.metric, subset);
  return report;
}

template <typename Scalar>
struct GateSearch {
  NearRepReport<Scalar> report;
  std::string metric_name;  // "supplied", "euclidean" or "orbit-averaged"
  FiberMetric<Scalar> metric;
};

/// Tries the near-representation gate under a small dictionary of metrics
/// and returns the first that passes, or the supplied one when none does.
template <typename Scalar>
GateSearch<Scalar> near_representation_search(const FiniteGroupoid& g, const VectorBundle& bundle,
                                              const PseudoRep<Scalar>& lambda,
                                              const FiberMetric<Scalar>& supplied,
                                              const HaarSystem<Scalar>& mu,
                                              const NormalizingFunction<Scalar>& c) {
  GateSearch<Scalar> first{near_representation_gate(g, lambda, supplied), "supplied", supplied};
  if (first.report.is_near) return first;

  const auto euclid = FiberMetric<Scalar>::euclidean(bundle);
  if (auto r = near_representation_gate(g, lambda, euclid); r.is_near) return {r, "euclidean", euclid};

  try {
    auto averaged = average_metric(g, euclid, lambda, mu, c, all_objects(g)).metric;
    if (auto r = near_representation_gate(g, lambda, averaged); r.is_near)
      return {r, "orbit-averaged", std::move(averaged)};
  } catch (const Error&) {
    // the averaged form can degenerate for badly singular λ
  }
  return first;
}

}  // namespace meanratio
