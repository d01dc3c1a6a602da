#pragma once

#include "meanratio/groupoid.hpp"

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace meanratio {

/// Haar system on a finite groupoid: weight[h] is the mass of the single
/// arrow h in the measure on its target fiber.
template <typename Scalar>
struct HaarSystem {
  std::vector<Scalar> weight;
};

/// Nonnegative object weight that meets every orbit.
template <typename Scalar>
struct CutoffFunction {
  std::vector<Scalar> values;
};

/// Cut-off function whose fiber integral of c∘s is 1 at every object.
template <typename Scalar>
struct NormalizingFunction {
  std::vector<Scalar> values;
};

/// Absolute tolerance for normalization and invariance identities.
inline constexpr double kHaarTolerance = 1e-12;

template <typename Scalar = double>
HaarSystem<Scalar> counting_haar(const FiniteGroupoid& g) {
  return {std::vector<Scalar>(g.n_arrows(), Scalar(1))};
}

/// Positivity and left invariance: weight(g·h) = weight(h) for h in Γ^{sg}.
template <typename Scalar>
ValidationReport check_left_invariance(const FiniteGroupoid& g, const HaarSystem<Scalar>& mu) {
  ValidationReport report;
  if (mu.weight.size() != g.n_arrows()) {
    report.add("haar-shape", {}, "one weight per arrow required");
    return report;
  }
  for (std::size_t a = 0; a < g.n_arrows(); ++a)
    if (!(mu.weight[a] > Scalar(0))) report.add("haar-positivity", {a}, "weight must be positive");
  for (std::size_t a = 0; a < g.n_arrows(); ++a) {
    const ArrowId ga{a};
    for (ArrowId h : g.target_fiber(g.source(ga))) {
      const ArrowId gh = g.product(ga, h);
      if (std::abs(mu.weight[gh.index] - mu.weight[h.index]) > Scalar(kHaarTolerance))
        report.add("haar-left-invariance", {a, h.index, gh.index}, "weight(gh) != weight(h)");
    }
  }
  return report;
}

/// D(x) = Σ_{h ∈ Γ^x} c(sh)·weight(h), summed in ascending arrow order.
template <typename Scalar>
std::vector<Scalar> fiber_mass(const FiniteGroupoid& g, const HaarSystem<Scalar>& mu,
                               std::span<const Scalar> c) {
  std::vector<Scalar> mass(g.n_objects(), Scalar(0));
  for (std::size_t x = 0; x < g.n_objects(); ++x)
    for (ArrowId h : g.target_fiber({x})) mass[x] += c[g.source(h).index] * mu.weight[h.index];
  return mass;
}

/// Divides a cut-off function by its fiber mass.
///
/// When `support` is given, c must vanish outside it and the support must
/// meet every orbit (its saturation is the whole object set).
template <typename Scalar>
NormalizingFunction<Scalar> normalize_cutoff(const FiniteGroupoid& g, const HaarSystem<Scalar>& mu,
                                             const CutoffFunction<Scalar>& c,
                                             const std::optional<ObjectSet>& support = std::nullopt) {
  if (c.values.size() != g.n_objects()) throw Error("cut-off needs one value per object");
  if (mu.weight.size() != g.n_arrows()) throw Error("Haar system needs one weight per arrow");
  for (std::size_t x = 0; x < g.n_objects(); ++x)
    if (!(c.values[x] >= Scalar(0)))
      throw Error("cut-off value at object " + std::to_string(x) + " is negative");
  if (support) {
    for (std::size_t x = 0; x < g.n_objects(); ++x)
      if (c.values[x] != Scalar(0) && !contains(*support, {x}))
        throw Error("cut-off is nonzero at object " + std::to_string(x) + " outside the support set");
    if (saturation(g, *support).size() != g.n_objects())
      throw Error("support set does not meet every orbit");
  }
  const auto mass = fiber_mass(g, mu, std::span<const Scalar>(c.values));
  NormalizingFunction<Scalar> out{std::vector<Scalar>(g.n_objects())};
  const OrbitPartition part = orbits(g);
  for (std::size_t x = 0; x < g.n_objects(); ++x) {
    if (!(mass[x] > Scalar(0))) {
      std::string members;
      for (ObjectId y : part.orbits[part.orbit_of[x]])
        members += (members.empty() ? "" : ",") + std::to_string(y.index);
      throw Error("cut-off vanishes on the orbit {" + members + "}");
    }
    out.values[x] = c.values[x] / mass[x];
  }
  return out;
}

/// Lists every object where the normalizing identity misses 1 by more
/// than the tolerance.
template <typename Scalar>
ValidationReport check_normalizing(const FiniteGroupoid& g, const HaarSystem<Scalar>& mu,
                                   const NormalizingFunction<Scalar>& c) {
  ValidationReport report;
  if (c.values.size() != g.n_objects()) {
    report.add("normalizing-shape", {}, "one value per object required");
    return report;
  }
  const auto mass = fiber_mass(g, mu, std::span<const Scalar>(c.values));
  for (std::size_t x = 0; x < g.n_objects(); ++x)
    if (std::abs(mass[x] - Scalar(1)) > Scalar(kHaarTolerance))
      report.add("normalizing-identity", {x}, "fiber integral of c∘s is not 1");
  return report;
}

/// Haar integral depending on parameters.
///
/// For each parameter z with base point base[z], returns
/// Σ_{h ∈ Γ^{base[z]}} (c(sh)·weight(h))·f(z, h), accumulated in ascending
/// arrow order. `f` returns an Eigen matrix; all values at one z must share
/// a shape.
template <typename Scalar, typename Integrand>
std::vector<Mat<Scalar>> haar_integrate(const FiniteGroupoid& g, const HaarSystem<Scalar>& mu,
                                        const NormalizingFunction<Scalar>& c,
                                        std::span<const ObjectId> base, Integrand&& f) {
  std::vector<Mat<Scalar>> out(base.size());
  for (std::size_t z = 0; z < base.size(); ++z) {
    bool first = true;
    Mat<Scalar> acc;
    for (ArrowId h : g.target_fiber(base[z])) {
      const Scalar w = c.values[g.source(h).index] * mu.weight[h.index];
      Mat<Scalar> value = f(z, h);
      if (first) {
        acc = Mat<Scalar>::Zero(value.rows(), value.cols());
        first = false;
      } else if (value.rows() != acc.rows() || value.cols() != acc.cols()) {
        throw Error("integrand shape changes inside the fiber of parameter " + std::to_string(z));
      }
      acc += w * value;
    }
    out[z] = std::move(acc);
  }
  return out;
}

}  // namespace meanratio
