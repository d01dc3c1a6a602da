#pragma once

#include "meanratio/pseudorep.hpp"

#include <optional>
#include <random>
#include <vector>

namespace meanratio {

/// Coefficients for groupoid cochains: a fiber C_x per object and an action
/// ρ_g: C_{sg} → C_{tg} per arrow.
///
/// Two flavours share the interface. Vector coefficients hold column
/// vectors and act by a matrix per arrow. Factored coefficients hold maps
/// X: U_x → W_x and act by ρ_g(X) = α_g ∘ X ∘ λ_g⁻¹.
template <typename Scalar>
class CoefficientSystem {
 public:
  static CoefficientSystem from_action(const FiniteGroupoid& g, const VectorBundle& bundle,
                                       std::vector<Mat<Scalar>> action) {
    if (action.size() != g.n_arrows()) throw Error("coefficient action needs one matrix per arrow");
    CoefficientSystem sys;
    for (std::size_t x = 0; x < g.n_objects(); ++x) {
      sys.rows_.push_back(static_cast<Eigen::Index>(bundle.dims[x]));
      sys.cols_.push_back(1);
    }
    for (std::size_t a = 0; a < g.n_arrows(); ++a) {
      if (action[a].rows() != sys.rows_[g.target({a}).index] ||
          action[a].cols() != sys.rows_[g.source({a}).index])
        throw Error("coefficient action shape mismatch at arrow " + std::to_string(a));
    }
    sys.left_ = std::move(action);
    return sys;
  }

  /// ρ_g = id on a bundle with dims constant along orbits.
  static CoefficientSystem trivial(const FiniteGroupoid& g, const VectorBundle& bundle) {
    return from_action(g, bundle, identity_rep<Scalar>(g, bundle).maps);
  }

  /// C_x = L(U_x, W_x) with ρ_g(X) = α_g X λ_g⁻¹; α acts on W, λ on U.
  static CoefficientSystem factored(const FiniteGroupoid& g, const PseudoRep<Scalar>& alpha,
                                    const PseudoRep<Scalar>& lambda) {
    if (alpha.maps.size() != g.n_arrows() || lambda.maps.size() != g.n_arrows())
      throw Error("factored coefficients need one map per arrow");
    CoefficientSystem sys;
    sys.factored_ = true;
    for (std::size_t x = 0; x < g.n_objects(); ++x) {
      const ArrowId u = g.unit({x});
      sys.rows_.push_back(alpha[u].rows());
      sys.cols_.push_back(lambda[u].cols());
    }
    sys.left_ = alpha.maps;
    sys.right_ = invert_maps(lambda).maps;
    for (std::size_t a = 0; a < g.n_arrows(); ++a) {
      const ObjectId s = g.source({a}), t = g.target({a});
      if (sys.left_[a].rows() != sys.rows_[t.index] || sys.left_[a].cols() != sys.rows_[s.index] ||
          sys.right_[a].rows() != sys.cols_[s.index] || sys.right_[a].cols() != sys.cols_[t.index])
        throw Error("factored coefficient shape mismatch at arrow " + std::to_string(a));
    }
    return sys;
  }

  bool is_factored() const { return factored_; }
  Eigen::Index rows(ObjectId x) const { return rows_[x.index]; }
  Eigen::Index cols(ObjectId x) const { return cols_[x.index]; }

  /// ρ_g(value) for value in C_{sg}.
  Mat<Scalar> apply(ArrowId g, const Mat<Scalar>& value) const {
    if (factored_) return (left_[g.index] * value) * right_[g.index];
    return left_[g.index] * value;
  }

  /// Matrix of ρ_g on row-major vectorized coefficients.
  Mat<Scalar> action_matrix(ArrowId g) const {
    if (!factored_) return left_[g.index];
    // vec(A X B) = (A ⊗ Bᵀ) vec(X) for row-major vec
    const Mat<Scalar>& a = left_[g.index];
    const Mat<Scalar> bt = right_[g.index].transpose();
    Mat<Scalar> k(a.rows() * bt.rows(), a.cols() * bt.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      for (Eigen::Index j = 0; j < a.cols(); ++j)
        k.block(i * bt.rows(), j * bt.cols(), bt.rows(), bt.cols()) = a(i, j) * bt;
    return k;
  }

 private:
  bool factored_ = false;
  std::vector<Eigen::Index> rows_;
  std::vector<Eigen::Index> cols_;
  std::vector<Mat<Scalar>> left_;
  std::vector<Mat<Scalar>> right_;
};

/// Checks ρ_{1x} = id and ρ_{gh} = ρ_g ρ_h entrywise within tol.
template <typename Scalar>
ValidationReport check_representation(const FiniteGroupoid& g, const CoefficientSystem<Scalar>& rho,
                                      Scalar tol = Scalar(1e-12)) {
  ValidationReport report;
  std::vector<Mat<Scalar>> act;
  for (std::size_t a = 0; a < g.n_arrows(); ++a) act.push_back(rho.action_matrix({a}));
  for (std::size_t x = 0; x < g.n_objects(); ++x) {
    const Mat<Scalar>& u = act[g.unit({x}).index];
    if (u.size() > 0 && (u - Mat<Scalar>::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() > tol)
      report.add("coefficient-unit", {x}, "ρ at the unit is not the identity");
  }
  for (const auto& [a, b] : g.composable_pairs()) {
    const Mat<Scalar> diff = act[g.product(a, b).index] - act[a.index] * act[b.index];
    if (diff.size() > 0 && diff.cwiseAbs().maxCoeff() > tol)
      report.add("coefficient-multiplicativity", {a.index, b.index}, "ρ_{gh} != ρ_g ρ_h");
  }
  return report;
}

/// 0-cochain: one coefficient per object.
template <typename Scalar>
struct Cochain0 {
  std::vector<Mat<Scalar>> values;
};

/// 1-cochain: one coefficient in C_{tg} per arrow g.
template <typename Scalar>
struct Cochain1 {
  std::vector<Mat<Scalar>> values;
};

/// 2-cochain: one coefficient in C_{tg} per composable pair (g, h), stored
/// in composable_pairs() order.
template <typename Scalar>
struct Cochain2 {
  std::vector<Mat<Scalar>> values;
};

/// Values on composable triples, in composable_triples() order.
template <typename Scalar>
struct Cochain3 {
  std::vector<Mat<Scalar>> values;
};

/// (δY)(g) = ρ_g(Y(sg)) - Y(tg)
template <typename Scalar>
Cochain1<Scalar> coboundary0(const FiniteGroupoid& g, const Cochain0<Scalar>& y,
                             const CoefficientSystem<Scalar>& rho) {
  Cochain1<Scalar> out;
  out.values.reserve(g.n_arrows());
  for (std::size_t a = 0; a < g.n_arrows(); ++a) {
    const ArrowId ga{a};
    out.values.push_back(rho.apply(ga, y.values[g.source(ga).index]) - y.values[g.target(ga).index]);
  }
  return out;
}

/// (δX)(g,h) = ρ_g(X(h)) - X(gh) + X(g)
template <typename Scalar>
Cochain2<Scalar> coboundary1(const FiniteGroupoid& g, const Cochain1<Scalar>& x,
                             const CoefficientSystem<Scalar>& rho) {
  Cochain2<Scalar> out;
  out.values.reserve(g.composable_pairs().size());
  for (const auto& [a, b] : g.composable_pairs()) {
    const ArrowId ab = g.product(a, b);
    out.values.push_back(rho.apply(a, x.values[b.index]) - x.values[ab.index] + x.values[a.index]);
  }
  return out;
}

/// (δZ)(g,h,k) = ρ_g(Z(h,k)) - Z(gh,k) + Z(g,hk) - Z(g,h)
template <typename Scalar>
Cochain3<Scalar> coboundary2(const FiniteGroupoid& g, const Cochain2<Scalar>& z,
                             const CoefficientSystem<Scalar>& rho) {
  Cochain3<Scalar> out;
  for (const auto& [a, b, c] : g.composable_triples()) {
    const ArrowId ab = g.product(a, b);
    const ArrowId bc = g.product(b, c);
    out.values.push_back(rho.apply(a, z.values[g.pair_index(b, c)]) - z.values[g.pair_index(ab, c)] +
                         z.values[g.pair_index(a, bc)] - z.values[g.pair_index(a, b)]);
  }
  return out;
}

/// Largest Frobenius norm among cochain values, with its position.
template <typename Scalar>
std::pair<Scalar, std::size_t> sup_norm(const std::vector<Mat<Scalar>>& values) {
  Scalar best = 0;
  std::size_t where = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const Scalar n = values[i].norm();
    if (n > best) {
      best = n;
      where = i;
    }
  }
  return {best, where};
}

template <typename Scalar>
struct CocycleCheck {
  bool is_cocycle;
  Scalar sup;                          // sup over triples of ‖δZ‖
  std::optional<ArrowTriple> witness;  // worst triple when not a cocycle
};

template <typename Scalar>
CocycleCheck<Scalar> is_cocycle(const FiniteGroupoid& g, const Cochain2<Scalar>& z,
                                const CoefficientSystem<Scalar>& rho, Scalar tol) {
  const auto dz = coboundary2(g, z, rho);
  const auto [sup, where] = sup_norm(dz.values);
  CocycleCheck<Scalar> out{sup <= tol, sup, std::nullopt};
  if (!out.is_cocycle) out.witness = g.composable_triples()[where];
  return out;
}

/// Ẑ(g) = Σ_{h ∈ Γ^{sg}} c(sh)·weight(h)·Z(g,h); δẐ = Z whenever Z is a cocycle.
template <typename Scalar>
Cochain1<Scalar> contract2(const FiniteGroupoid& g, const Cochain2<Scalar>& z,
                           const HaarSystem<Scalar>& mu, const NormalizingFunction<Scalar>& c) {
  std::vector<ObjectId> base(g.n_arrows());
  for (std::size_t a = 0; a < g.n_arrows(); ++a) base[a] = g.source({a});
  auto integrand = [&](std::size_t a, ArrowId h) -> Mat<Scalar> {
    return z.values[g.pair_index({a}, h)];
  };
  return {haar_integrate(g, mu, c, std::span<const ObjectId>(base), integrand)};
}

/// Y(x) = -Σ_{h ∈ Γ^x} c(sh)·weight(h)·X(h); δY = X whenever X is a cocycle.
template <typename Scalar>
Cochain0<Scalar> contract1(const FiniteGroupoid& g, const Cochain1<Scalar>& x,
                           const HaarSystem<Scalar>& mu, const NormalizingFunction<Scalar>& c) {
  const ObjectSet objects = all_objects(g);
  auto integrand = [&](std::size_t, ArrowId h) -> Mat<Scalar> { return x.values[h.index]; };
  Cochain0<Scalar> out{haar_integrate(g, mu, c, std::span<const ObjectId>(objects), integrand)};
  for (auto& v : out.values) v = -v;
  return out;
}

/// Conjugation coefficients on End(E): ρ_g(X) = λ_g X λ_g⁻¹.
template <typename Scalar>
CoefficientSystem<Scalar> conjugation_system(const FiniteGroupoid& g, const PseudoRep<Scalar>& lambda) {
  return CoefficientSystem<Scalar>::factored(g, lambda, lambda);
}

/// Δ(g,h) = (λ_{gh} - λ_g λ_h) λ_h⁻¹ λ_g⁻¹ in End(E_{tg}).
///
/// With this sign Δ(g,h)·λ_g = λ_{gh} λ_h⁻¹ - λ_g, so averaging over h
/// gives λ̂ = λ + contract2(Δ)·λ.
template <typename Scalar>
Cochain2<Scalar> defect_cochain(const FiniteGroupoid& g, const PseudoRep<Scalar>& lambda) {
  const PseudoRep<Scalar> inv = invert_maps(lambda);
  Cochain2<Scalar> out;
  out.values.reserve(g.composable_pairs().size());
  for (const auto& [a, b] : g.composable_pairs()) {
    const Mat<Scalar> defect = lambda[g.product(a, b)] - lambda[a] * lambda[b];
    out.values.push_back((defect * inv[b]) * inv[a]);
  }
  return out;
}

/// λ_g + contract2(Δ)(g)·λ_g, the mean ratio rebuilt from the defect cochain.
template <typename Scalar>
PseudoRep<Scalar> mean_ratio_from_defect(const FiniteGroupoid& g, const PseudoRep<Scalar>& lambda,
                                         const HaarSystem<Scalar>& mu,
                                         const NormalizingFunction<Scalar>& c) {
  const auto averaged = contract2(g, defect_cochain(g, lambda), mu, c);
  PseudoRep<Scalar> out;
  for (std::size_t a = 0; a < g.n_arrows(); ++a)
    out.maps.push_back(lambda.maps[a] + averaged.values[a] * lambda.maps[a]);
  return out;
}

// Seeded random cochains with entries uniform in [-1, 1].

namespace detail {
template <typename Scalar>
Mat<Scalar> random_value(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat<Scalar> m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = Scalar(u(rng));
  return m;
}
}  // namespace detail

template <typename Scalar>
Cochain0<Scalar> random_cochain0(const FiniteGroupoid& g, const CoefficientSystem<Scalar>& rho,
                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Cochain0<Scalar> out;
  for (std::size_t x = 0; x < g.n_objects(); ++x)
    out.values.push_back(detail::random_value<Scalar>(rng, rho.rows({x}), rho.cols({x})));
  return out;
}

template <typename Scalar>
Cochain1<Scalar> random_cochain1(const FiniteGroupoid& g, const CoefficientSystem<Scalar>& rho,
                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Cochain1<Scalar> out;
  for (std::size_t a = 0; a < g.n_arrows(); ++a) {
    const ObjectId t = g.target({a});
    out.values.push_back(detail::random_value<Scalar>(rng, rho.rows(t), rho.cols(t)));
  }
  return out;
}

template <typename Scalar>
Cochain2<Scalar> random_cochain2(const FiniteGroupoid& g, const CoefficientSystem<Scalar>& rho,
                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Cochain2<Scalar> out;
  for (const auto& p : g.composable_pairs()) {
    const ObjectId t = g.target(p.first);
    out.values.push_back(detail::random_value<Scalar>(rng, rho.rows(t), rho.cols(t)));
  }
  return out;
}

}  // namespace meanratio
