#pragma once

// Seeded genuine representations and near representations for tests.

#include "meanratio/cohomology.hpp"
#include "meanratio/metric_avg.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace fixtures {

using meanratio::FiberMetric;
using meanratio::FiniteGroupoid;
using meanratio::Mat;
using meanratio::ObjectId;
using meanratio::PseudoRep;
using meanratio::VectorBundle;

struct Case {
  std::string name;
  FiniteGroupoid groupoid;
  VectorBundle bundle;
  PseudoRep<double> rho;
  FiberMetric<double> adapted;  // metric in which every ρ_g is an isometry
  meanratio::HaarSystem<double> haar;
  meanratio::NormalizingFunction<double> c;
};

inline Mat<double> random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat<double> m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = u(rng);
  return m;
}

/// I + 0.3·U with |U_ij| ≤ 1; invertible for rank ≤ 3.
inline Mat<double> gauge(std::mt19937_64& rng, Eigen::Index k) {
  return Mat<double>::Identity(k, k) + 0.3 * random_matrix(rng, k, k);
}

/// Orthogonal representation of ℤ/n on R^k: a rotation block by 2πqa/n
/// and, in odd rank, a sign (−1)^{sa} with s = 0 unless n is even.
inline Mat<double> cyclic_rep(std::size_t n, std::size_t a, Eigen::Index k, std::size_t q, std::size_t s) {
  Mat<double> m = Mat<double>::Identity(k, k);
  Eigen::Index at = 0;
  if (k >= 2) {
    const double t = 2.0 * std::numbers::pi * double((q * a) % n) / double(n);
    m(0, 0) = std::cos(t);
    m(0, 1) = -std::sin(t);
    m(1, 0) = std::sin(t);
    m(1, 1) = std::cos(t);
    at = 2;
  }
  if (at < k && n % 2 == 0 && s % 2 == 1 && a % 2 == 1) m(at, at) = -1.0;
  return m;
}

inline FiberMetric<double> adapted_metric(const std::vector<Mat<double>>& gauges) {
  std::vector<Mat<double>> grams;
  for (const auto& p : gauges) {
    const Mat<double> inv = p.inverse();
    grams.push_back(inv.transpose() * inv);
  }
  return FiberMetric<double>(std::move(grams));
}

inline Case finish(std::string name, FiniteGroupoid g, VectorBundle bundle, PseudoRep<double> rho,
                   const std::vector<Mat<double>>& gauges, std::mt19937_64& rng, bool random_cutoff) {
  auto mu = meanratio::counting_haar(g);
  meanratio::CutoffFunction<double> cut{std::vector<double>(g.n_objects(), 1.0)};
  if (random_cutoff) {
    std::uniform_real_distribution<double> u(0.2, 1.0);
    for (auto& v : cut.values) v = u(rng);
  }
  auto c = meanratio::normalize_cutoff(g, mu, cut);
  auto metric = adapted_metric(gauges);
  return {std::move(name), std::move(g), std::move(bundle), std::move(rho), std::move(metric), std::move(mu),
          std::move(c)};
}

/// Pair groupoid on n objects, λ_{(y,x)} = P_y P_x⁻¹.
inline Case pair_case(std::uint64_t seed, std::size_t n, Eigen::Index k) {
  std::mt19937_64 rng(seed);
  auto g = meanratio::pair_groupoid(n);
  std::vector<Mat<double>> p;
  for (std::size_t x = 0; x < n; ++x) p.push_back(gauge(rng, k));
  PseudoRep<double> rho;
  for (std::size_t a = 0; a < g.n_arrows(); ++a) {
    const auto s = g.source({a}).index, t = g.target({a}).index;
    rho.maps.push_back(p[t] * p[s].inverse());
  }
  VectorBundle bundle{std::vector<std::size_t>(n, std::size_t(k))};
  return finish("pair n=" + std::to_string(n) + " k=" + std::to_string(k), std::move(g), std::move(bundle),
                std::move(rho), p, rng, seed % 2 == 1);
}

/// ℤ/n acting on m points, by rotation when m divides n and trivially
/// otherwise; λ_{(a,x)} = P_{a·x} R(a) P_x⁻¹.
inline Case action_case(std::uint64_t seed, std::size_t n, std::size_t m, Eigen::Index k, bool rotate) {
  std::mt19937_64 rng(seed);
  const auto group = meanratio::cyclic_group(n);
  std::vector<std::size_t> act(n * m);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t x = 0; x < m; ++x) act[a * m + x] = rotate ? (x + a) % m : x;
  auto g = meanratio::action_groupoid(group, m, act);
  std::vector<Mat<double>> p;
  for (std::size_t x = 0; x < m; ++x) p.push_back(gauge(rng, k));
  const std::size_t q = 1 + seed % n, s = seed / 7;
  PseudoRep<double> rho;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t x = 0; x < m; ++x)
      rho.maps.push_back(p[act[a * m + x]] * cyclic_rep(n, a, k, q, s) * p[x].inverse());
  VectorBundle bundle{std::vector<std::size_t>(m, std::size_t(k))};
  return finish("action z" + std::to_string(n) + " on " + std::to_string(m) + (rotate ? " rotate" : " trivial") +
                    " k=" + std::to_string(k),
                std::move(g), std::move(bundle), std::move(rho), p, rng, seed % 2 == 0);
}

/// Bundle of cyclic groups with per-object rank; λ_a = P_x R_x(a) P_x⁻¹.
inline Case bundle_case(std::uint64_t seed, const std::vector<std::size_t>& orders,
                        const std::vector<std::size_t>& ranks) {
  std::mt19937_64 rng(seed);
  std::vector<meanratio::FiniteGroup> groups;
  for (auto n : orders) groups.push_back(meanratio::cyclic_group(n));
  auto g = meanratio::group_bundle(groups);
  std::vector<Mat<double>> p;
  PseudoRep<double> rho;
  std::string name = "bundle";
  for (std::size_t x = 0; x < orders.size(); ++x) {
    const auto k = Eigen::Index(ranks[x]);
    p.push_back(gauge(rng, k));
    const Mat<double> pinv = p.back().inverse();
    for (std::size_t a = 0; a < orders[x]; ++a)
      rho.maps.push_back(p.back() * cyclic_rep(orders[x], a, k, 1 + x, seed + x) * pinv);
    name += " z" + std::to_string(orders[x]);
  }
  return finish(name, std::move(g), VectorBundle{ranks}, std::move(rho), p, rng, seed % 2 == 0);
}

/// Deterministic suite member number `i`, cycling through the three
/// families with sizes n ≤ 5 and ranks ≤ 3.
inline Case suite_case(std::size_t i) {
  const std::uint64_t seed = 1000 + i;
  std::mt19937_64 pick(seed * 7919);
  auto draw = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(pick);
  };
  const auto k = Eigen::Index(draw(1, 3));
  switch (i % 3) {
    case 0:
      return pair_case(seed, draw(1, 5), k);
    case 1: {
      const std::size_t n = draw(2, 5);
      const bool rotate = draw(0, 2) != 0;
      std::size_t m = rotate ? n : draw(1, 3);
      if (rotate && n % 2 == 0 && draw(0, 1) == 0) m = n / 2;
      return action_case(seed, n, m, k, rotate);
    }
    default: {
      const std::size_t objects = draw(1, 3);
      std::vector<std::size_t> orders, ranks;
      for (std::size_t x = 0; x < objects; ++x) {
        orders.push_back(draw(1, 4));
        ranks.push_back(draw(1, 3));
      }
      return bundle_case(seed, orders, ranks);
    }
  }
}

/// The adapted metric or the euclidean one, alternating with i.
inline FiberMetric<double> suite_metric(const Case& c, std::size_t i) {
  return i % 2 == 0 ? c.adapted : FiberMetric<double>::euclidean(c.bundle);
}

struct NearCase {
  Case base;
  FiberMetric<double> metric;
  PseudoRep<double> lambda;
  double magnitude;
  bool keep_units;
};

/// Perturbation of suite_case(i) that passes the near-representation gate,
/// shrinking the magnitude until it does.
inline NearCase near_case(std::size_t i, double start_magnitude = 0.03) {
  Case base = suite_case(i);
  FiberMetric<double> metric = suite_metric(base, i);
  const bool keep_units = i % 4 == 3;
  double magnitude = start_magnitude * (0.25 + 0.75 * double((i * 37) % 100) / 100.0);
  for (;;) {
    auto lambda = meanratio::perturb_representation(base.groupoid, base.rho, metric, magnitude, 5000 + i, keep_units);
    const auto gate = meanratio::near_representation_gate(base.groupoid, lambda, metric);
    if (gate.is_near && gate.r > 0) return {std::move(base), std::move(metric), std::move(lambda), magnitude, keep_units};
    magnitude *= 0.5;
  }
}

/// Scalar η-example on the pair groupoid of two objects, rank 1:
/// the unit λ_(1,1) = 1 + η and every other map 1.
inline PseudoRep<double> eta_example(double eta) {
  PseudoRep<double> lambda;
  for (std::size_t a = 0; a < 4; ++a) lambda.maps.push_back(Mat<double>::Constant(1, 1, a == 3 ? 1.0 + eta : 1.0));
  return lambda;
}

}  // namespace fixtures
