#include "meanratio/fiber_linalg.hpp"

namespace meanratio {

ValidationReport check_bundle(const FiniteGroupoid& g, const VectorBundle& bundle) {
  ValidationReport report;
  if (bundle.dims.size() != g.n_objects()) {
    report.add("bundle-shape", {}, "one dimension per object required");
    return report;
  }
  for (std::size_t a = 0; a < g.n_arrows(); ++a) {
    const ObjectId s = g.source({a}), t = g.target({a});
    if (bundle.dim(s) != bundle.dim(t))
      report.add("bundle-orbit-dim", {a, s.index, t.index}, "dimension must be constant on orbits");
  }
  return report;
}

}  // namespace meanratio
