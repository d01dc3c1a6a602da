#pragma once

#include "meanratio/groupoid.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace meanratio {

/// Fiber dimension per object.
struct VectorBundle {
  std::vector<std::size_t> dims;

  std::size_t dim(ObjectId x) const { return dims[x.index]; }
  friend bool operator==(const VectorBundle&, const VectorBundle&) = default;
};

/// Dimension must be constant along orbits so that arrow maps are square.
ValidationReport check_bundle(const FiniteGroupoid& g, const VectorBundle& bundle);

/// Symmetric positive-definite inner product on every fiber.
///
/// The upper Cholesky factor R with gram = RᵀR is cached so that operator
/// norms reduce to spectral norms of whitened matrices.
template <typename Scalar>
class FiberMetric {
 public:
  static constexpr double kSymmetryTolerance = 1e-12;

  FiberMetric() = default;

  explicit FiberMetric(std::vector<Mat<Scalar>> grams) : gram_(std::move(grams)) {
    factor_.reserve(gram_.size());
    for (std::size_t x = 0; x < gram_.size(); ++x) {
      const Mat<Scalar>& G = gram_[x];
      if (G.rows() != G.cols())
        throw Error("Gram matrix at object " + std::to_string(x) + " is not square");
      if (G.size() > 0 && (G - G.transpose()).cwiseAbs().maxCoeff() > Scalar(kSymmetryTolerance))
        throw Error("Gram matrix at object " + std::to_string(x) + " is not symmetric");
      Eigen::LLT<Mat<Scalar>> llt(G);
      if (llt.info() != Eigen::Success)
        throw Error("Gram matrix at object " + std::to_string(x) + " is not positive definite");
      factor_.push_back(llt.matrixU());
    }
  }

  static FiberMetric euclidean(const VectorBundle& bundle) {
    std::vector<Mat<Scalar>> grams;
    for (std::size_t d : bundle.dims) grams.push_back(Mat<Scalar>::Identity(d, d));
    return FiberMetric(std::move(grams));
  }

  std::size_t n_objects() const { return gram_.size(); }
  const Mat<Scalar>& gram(ObjectId x) const { return gram_[x.index]; }
  /// Upper triangular R with gram(x) = RᵀR.
  const Mat<Scalar>& factor(ObjectId x) const { return factor_[x.index]; }
  const std::vector<Mat<Scalar>>& grams() const { return gram_; }

 private:
  std::vector<Mat<Scalar>> gram_;
  std::vector<Mat<Scalar>> factor_;
};

/// Linear map from the fiber over `src` to the fiber over `dst`.
template <typename Scalar>
struct FiberMap {
  ObjectId src;
  ObjectId dst;
  Mat<Scalar> matrix;  // dim(dst) x dim(src)
};

/// ‖A‖_{src,dst} = sup_{|e|_src ≤ 1} |A e|_dst, the largest singular value
/// of R_dst A R_src⁻¹.
template <typename Scalar, typename Derived>
Scalar operator_norm(const Eigen::MatrixBase<Derived>& a, ObjectId src, ObjectId dst,
                     const FiberMetric<Scalar>& metric) {
  const Mat<Scalar>& r_src = metric.factor(src);
  const Mat<Scalar>& r_dst = metric.factor(dst);
  if (a.rows() != r_dst.rows() || a.cols() != r_src.rows())
    throw Error("fiber map shape does not match the metric at objects " +
                std::to_string(src.index) + " -> " + std::to_string(dst.index));
  if (a.size() == 0) return Scalar(0);
  const Mat<Scalar> left = r_dst * a;
  // W = left * R_src⁻¹, i.e. Wᵀ = R_src⁻ᵀ leftᵀ
  const Mat<Scalar> whitened =
      r_src.transpose().template triangularView<Eigen::Lower>().solve(left.transpose()).transpose();
  Eigen::JacobiSVD<Mat<Scalar>> svd(whitened);
  return svd.singularValues()(0);
}

template <typename Scalar>
Scalar operator_norm(const FiberMap<Scalar>& map, const FiberMetric<Scalar>& metric) {
  return operator_norm(map.matrix, map.src, map.dst, metric);
}

/// Matrices whose LU reciprocal condition estimate falls below this are
/// treated as singular.
inline constexpr double kConditionLimit = 1e12;

/// LU inverse with partial pivoting; empty when numerically singular.
template <typename Scalar>
std::optional<Mat<Scalar>> invert_matrix(const Mat<Scalar>& a) {
  if (a.rows() != a.cols()) return std::nullopt;
  if (a.size() == 0) return Mat<Scalar>(0, 0);
  if (!a.allFinite()) return std::nullopt;
  Eigen::PartialPivLU<Mat<Scalar>> lu(a);
  const Scalar rcond = lu.rcond();
  if (!(rcond * Scalar(kConditionLimit) >= Scalar(1))) return std::nullopt;
  return Mat<Scalar>(lu.inverse());
}

template <typename Scalar>
struct SubmultiplicativityReport {
  Scalar composite_norm;     // ‖B∘A‖
  Scalar product_of_norms;   // ‖A‖‖B‖
  bool holds;
};

/// ‖B∘A‖ ≤ ‖A‖·‖B‖ + 1e-12 for A: x → y, B: y → z.
template <typename Scalar>
SubmultiplicativityReport<Scalar> submultiplicativity_check(const FiberMap<Scalar>& a,
                                                            const FiberMap<Scalar>& b,
                                                            const FiberMetric<Scalar>& metric) {
  if (a.dst != b.src || a.matrix.rows() != b.matrix.cols())
    throw Error("fiber maps are not composable");
  const Mat<Scalar> ba = b.matrix * a.matrix;
  const Scalar lhs = operator_norm(ba, a.src, b.dst, metric);
  const Scalar rhs = operator_norm(a, metric) * operator_norm(b, metric);
  return {lhs, rhs, lhs <= rhs + Scalar(1e-12)};
}

template <typename Scalar>
struct NeumannReport {
  Mat<Scalar> inverse;  // (1 - a)⁻¹
  Scalar deviation;     // ‖(1 - a)⁻¹ - 1‖
  Scalar bound;         // r / (1 - r)
  bool holds;
};

/// Inverts 1 - a for an endomorphism with ‖a‖ ≤ r < 1 and checks the
/// geometric-series bound on the distance of the inverse from the unit.
template <typename Scalar>
NeumannReport<Scalar> neumann_inverse_bound(const FiberMap<Scalar>& a, const FiberMetric<Scalar>& metric,
                                            Scalar r) {
  if (a.src != a.dst || a.matrix.rows() != a.matrix.cols())
    throw Error("Neumann bound needs an endomorphism of one fiber");
  if (!(r >= Scalar(0) && r < Scalar(1))) throw Error("Neumann bound needs 0 <= r < 1");
  const Scalar norm = operator_norm(a, metric);
  if (!(norm < Scalar(1))) throw Error("Neumann bound needs ‖a‖ < 1");
  if (norm > r) throw Error("Neumann bound needs ‖a‖ <= r");
  const auto n = a.matrix.rows();
  const Mat<Scalar> one = Mat<Scalar>::Identity(n, n);
  auto inverse = invert_matrix<Scalar>(one - a.matrix);
  if (!inverse) throw Error("1 - a is numerically singular");
  const Scalar deviation = operator_norm(Mat<Scalar>(*inverse - one), a.src, a.dst, metric);
  const Scalar bound = r / (Scalar(1) - r);
  return {std::move(*inverse), deviation, bound, deviation <= bound * (Scalar(1) + Scalar(1e-12)) + Scalar(1e-15)};
}

}  // namespace meanratio
