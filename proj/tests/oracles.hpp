#pragma once

// Naive reference evaluations used only by tests.
//
// Each oracle walks the raw structure tables with plain loops (no fiber
// caches, no haar_integrate, no Eigen products) and accumulates in the
// mandated ascending-arrow order, so results can be compared with the
// library bit for bit. Matrix inverses and operator norms are shared
// primitives and come from fiber_linalg.

#include "meanratio/cohomology.hpp"
#include "meanratio/metric_avg.hpp"

#include <map>
#include <vector>

namespace oracle {

using meanratio::ArrowId;
using meanratio::FiniteGroupoid;
using meanratio::Mat;
using meanratio::ObjectId;

inline Mat<double> mul(const Mat<double>& a, const Mat<double>& b) {
  Mat<double> out(a.rows(), b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      double s = 0;
      for (Eigen::Index k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  return out;
}

inline Mat<double> transpose(const Mat<double>& a) {
  Mat<double> out(a.cols(), a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

inline Mat<double> sub(const Mat<double>& a, const Mat<double>& b) {
  Mat<double> out(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out(i, j) = a(i, j) - b(i, j);
  return out;
}

/// acc += w * v, entry by entry.
inline void axpy(Mat<double>& acc, double w, const Mat<double>& v) {
  for (Eigen::Index i = 0; i < acc.rows(); ++i)
    for (Eigen::Index j = 0; j < acc.cols(); ++j) acc(i, j) += w * v(i, j);
}

inline std::size_t src(const FiniteGroupoid& g, std::size_t a) { return g.source_table()[a]; }
inline std::size_t tgt(const FiniteGroupoid& g, std::size_t a) { return g.target_table()[a]; }
inline std::size_t product(const FiniteGroupoid& g, std::size_t a, std::size_t b) {
  return g.compose({a}, {b})->index;
}

/// Composable pairs by brute force double loop, lexicographic.
inline std::vector<std::pair<std::size_t, std::size_t>> pairs(const FiniteGroupoid& g) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t a = 0; a < g.n_arrows(); ++a)
    for (std::size_t b = 0; b < g.n_arrows(); ++b)
      if (src(g, a) == tgt(g, b)) out.emplace_back(a, b);
  return out;
}

inline meanratio::PseudoRep<double> mean_ratio(const FiniteGroupoid& g,
                                               const meanratio::PseudoRep<double>& lambda,
                                               const std::vector<double>& weight,
                                               const std::vector<double>& c) {
  const auto inv = meanratio::invert_maps(lambda);
  meanratio::PseudoRep<double> out;
  for (std::size_t a = 0; a < g.n_arrows(); ++a) {
    Mat<double> acc = Mat<double>::Zero(lambda.maps[a].rows(), lambda.maps[a].cols());
    for (std::size_t h = 0; h < g.n_arrows(); ++h) {
      if (tgt(g, h) != src(g, a)) continue;
      const double w = c[src(g, h)] * weight[h];
      axpy(acc, w, mul(lambda.maps[product(g, a, h)], inv.maps[h]));
    }
    out.maps.push_back(acc);
  }
  return out;
}

struct Defects {
  double b = 0, unit = 0, mult = 0;
};

inline Defects defects(const FiniteGroupoid& g, const meanratio::PseudoRep<double>& lambda,
                       const meanratio::FiberMetric<double>& metric) {
  Defects d;
  for (std::size_t a = 0; a < g.n_arrows(); ++a)
    d.b = std::max(d.b, meanratio::operator_norm(lambda.maps[a], ObjectId{src(g, a)}, ObjectId{tgt(g, a)}, metric));
  for (std::size_t x = 0; x < g.n_objects(); ++x) {
    const Mat<double>& u = lambda.maps[g.unit_table()[x]];
    d.unit = std::max(d.unit, meanratio::operator_norm(sub(Mat<double>::Identity(u.rows(), u.cols()), u),
                                                       ObjectId{x}, ObjectId{x}, metric));
  }
  for (const auto& [a, b] : pairs(g)) {
    const Mat<double> diff = sub(lambda.maps[product(g, a, b)], mul(lambda.maps[a], lambda.maps[b]));
    d.mult = std::max(d.mult, meanratio::operator_norm(diff, ObjectId{src(g, b)}, ObjectId{tgt(g, a)}, metric));
  }
  return d;
}

inline std::vector<Mat<double>> contract2(const FiniteGroupoid& g, const std::vector<Mat<double>>& z,
                                          const std::vector<double>& weight, const std::vector<double>& c) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> index;
  const auto ps = pairs(g);
  for (std::size_t i = 0; i < ps.size(); ++i) index[ps[i]] = i;
  std::vector<Mat<double>> out;
  for (std::size_t a = 0; a < g.n_arrows(); ++a) {
    Mat<double> acc;
    bool first = true;
    for (std::size_t h = 0; h < g.n_arrows(); ++h) {
      if (tgt(g, h) != src(g, a)) continue;
      const Mat<double>& v = z[index.at({a, h})];
      if (first) acc = Mat<double>::Zero(v.rows(), v.cols()), first = false;
      axpy(acc, c[src(g, h)] * weight[h], v);
    }
    out.push_back(acc);
  }
  return out;
}

inline std::vector<Mat<double>> contract1(const FiniteGroupoid& g, const std::vector<Mat<double>>& x,
                                          const std::vector<double>& weight, const std::vector<double>& c) {
  std::vector<Mat<double>> out;
  for (std::size_t o = 0; o < g.n_objects(); ++o) {
    Mat<double> acc;
    bool first = true;
    for (std::size_t h = 0; h < g.n_arrows(); ++h) {
      if (tgt(g, h) != o) continue;
      if (first) acc = Mat<double>::Zero(x[h].rows(), x[h].cols()), first = false;
      axpy(acc, c[src(g, h)] * weight[h], x[h]);
    }
    for (Eigen::Index i = 0; i < acc.size(); ++i) acc.data()[i] = -acc.data()[i];
    out.push_back(acc);
  }
  return out;
}

/// Averaged Gram matrices before any positivity blend.
inline std::vector<Mat<double>> average_metric(const FiniteGroupoid& g, const meanratio::FiberMetric<double>& phi,
                                               const meanratio::PseudoRep<double>& lambda,
                                               const std::vector<double>& weight, const std::vector<double>& c) {
  std::vector<Mat<double>> out;
  for (std::size_t o = 0; o < g.n_objects(); ++o) {
    Mat<double> acc;
    bool first = true;
    for (std::size_t h = 0; h < g.n_arrows(); ++h) {
      if (tgt(g, h) != o) continue;
      const Mat<double>& back = lambda.maps[g.inverse_table()[h]];
      const Mat<double> term = mul(mul(transpose(back), phi.gram(ObjectId{src(g, h)})), back);
      if (first) acc = Mat<double>::Zero(term.rows(), term.cols()), first = false;
      axpy(acc, c[src(g, h)] * weight[h], term);
    }
    Mat<double> sym(acc.rows(), acc.cols());
    for (Eigen::Index i = 0; i < acc.rows(); ++i)
      for (Eigen::Index j = 0; j < acc.cols(); ++j) sym(i, j) = (acc(i, j) + acc(j, i)) * 0.5;
    out.push_back(sym);
  }
  return out;
}

/// Bitwise equality of two matrix lists.
inline bool identical(const std::vector<Mat<double>>& a, const std::vector<Mat<double>>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].rows() != b[i].rows() || a[i].cols() != b[i].cols()) return false;
    for (Eigen::Index k = 0; k < a[i].size(); ++k)
      if (a[i].data()[k] != b[i].data()[k]) return false;
  }
  return true;
}

}  // namespace oracle
