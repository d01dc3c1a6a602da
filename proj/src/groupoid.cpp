#include "meanratio/groupoid.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <string>

namespace meanratio {

namespace {

void require(bool condition, const std::string& message) {
  if (!condition) throw Error(message);
}

}  // namespace

FiniteGroupoid::FiniteGroupoid(std::size_t n_objects, std::vector<std::size_t> source,
                               std::vector<std::size_t> target, std::vector<std::size_t> unit,
                               std::vector<std::size_t> inverse,
                               std::vector<std::size_t> compose)
    : n_objects_(n_objects),
      source_(std::move(source)),
      target_(std::move(target)),
      unit_(std::move(unit)),
      inverse_(std::move(inverse)),
      compose_(std::move(compose)) {
  require(n_objects_ > 0, "groupoid must have at least one object");
  const std::size_t n = source_.size();
  require(target_.size() == n, "target table size differs from source table size");
  require(inverse_.size() == n, "inverse table size differs from arrow count");
  require(unit_.size() == n_objects_, "unit table size differs from object count");
  require(compose_.size() == n * n, "compose table must be n_arrows x n_arrows");
  for (std::size_t a = 0; a < n; ++a) {
    require(source_[a] < n_objects_, "source of arrow " + std::to_string(a) + " out of range");
    require(target_[a] < n_objects_, "target of arrow " + std::to_string(a) + " out of range");
    require(inverse_[a] < n, "inverse of arrow " + std::to_string(a) + " out of range");
  }
  for (std::size_t x = 0; x < n_objects_; ++x)
    require(unit_[x] < n, "unit of object " + std::to_string(x) + " out of range");
  for (std::size_t v : compose_)
    require(v == kUndefined || v < n, "compose table entry out of range");

  target_fibers_.resize(n_objects_);
  source_fibers_.resize(n_objects_);
  target_position_.resize(n);
  for (std::size_t a = 0; a < n; ++a) {
    target_position_[a] = target_fibers_[target_[a]].size();
    target_fibers_[target_[a]].push_back({a});
    source_fibers_[source_[a]].push_back({a});
  }
  pair_offset_.resize(n);
  for (std::size_t a = 0; a < n; ++a) {
    pair_offset_[a] = pairs_.size();
    for (ArrowId h : target_fibers_[source_[a]]) pairs_.push_back({{a}, h});
  }
}

std::optional<ArrowId> FiniteGroupoid::compose(ArrowId g, ArrowId h) const {
  const std::size_t v = compose_[g.index * n_arrows() + h.index];
  if (v == kUndefined) return std::nullopt;
  return ArrowId{v};
}

ArrowId FiniteGroupoid::product(ArrowId g, ArrowId h) const {
  auto gh = compose(g, h);
  if (!gh)
    throw Error("arrows " + std::to_string(g.index) + " and " + std::to_string(h.index) +
                " are not composable");
  return *gh;
}

std::vector<ArrowTriple> FiniteGroupoid::composable_triples() const {
  std::vector<ArrowTriple> triples;
  for (const auto& [g, h] : pairs_)
    for (ArrowId k : target_fibers_[source_[h.index]]) triples.push_back({g, h, k});
  return triples;
}

ValidationReport validate(const FiniteGroupoid& g) {
  ValidationReport report;
  const std::size_t n = g.n_arrows();

  for (std::size_t x = 0; x < g.n_objects(); ++x) {
    const ArrowId u = g.unit({x});
    if (g.source(u).index != x || g.target(u).index != x)
      report.add("unit-endpoints", {x, u.index}, "unit arrow must start and end at its object");
  }

  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      const ArrowId ga{a}, hb{b};
      const auto gh = g.compose(ga, hb);
      const bool should = g.composable(ga, hb);
      if (should != gh.has_value()) {
        report.add("compose-domain", {a, b},
                   should ? "composable pair has no product" : "non-composable pair has a product");
        continue;
      }
      if (!gh) continue;
      if (g.source(*gh) != g.source(hb) || g.target(*gh) != g.target(ga))
        report.add("compose-endpoints", {a, b, gh->index},
                   "s(gh) must equal s(h) and t(gh) must equal t(g)");
    }
  }

  for (std::size_t a = 0; a < n; ++a) {
    const ArrowId ga{a};
    const ArrowId left_unit = g.unit(g.target(ga));
    const ArrowId right_unit = g.unit(g.source(ga));
    if (g.compose(left_unit, ga) != ga)
      report.add("unit-law-left", {left_unit.index, a}, "1_{tg}·g must equal g");
    if (g.compose(ga, right_unit) != ga)
      report.add("unit-law-right", {a, right_unit.index}, "g·1_{sg} must equal g");
    const ArrowId inv = g.inverse(ga);
    if (g.compose(ga, inv) != left_unit)
      report.add("inverse-law", {a, inv.index}, "g·g^-1 must equal 1_{tg}");
    if (g.compose(inv, ga) != right_unit)
      report.add("inverse-law", {inv.index, a}, "g^-1·g must equal 1_{sg}");
  }

  for (const auto& [a, b, c] : g.composable_triples()) {
    const auto ab = g.compose(a, b);
    const auto bc = g.compose(b, c);
    if (!ab || !bc) continue;  // already reported as a domain breach
    const bool left_ok = g.composable(*ab, c), right_ok = g.composable(a, *bc);
    if (!left_ok && !right_ok) continue;
    const auto left = left_ok ? g.compose(*ab, c) : std::nullopt;
    const auto right = right_ok ? g.compose(a, *bc) : std::nullopt;
    if (left != right) report.add("associativity", {a.index, b.index, c.index}, "(gh)k != g(hk)");
  }
  return report;
}

FiberSlice fiber(const FiniteGroupoid& g, FiberKind kind, ObjectId x) {
  if (x.index >= g.n_objects()) throw Error("object " + std::to_string(x.index) + " out of range");
  FiberSlice slice{kind, x, {}};
  switch (kind) {
    case FiberKind::source: {
      auto f = g.source_fiber(x);
      slice.arrows.assign(f.begin(), f.end());
      break;
    }
    case FiberKind::target: {
      auto f = g.target_fiber(x);
      slice.arrows.assign(f.begin(), f.end());
      break;
    }
    case FiberKind::isotropy:
      for (ArrowId h : g.target_fiber(x))
        if (g.source(h) == x) slice.arrows.push_back(h);
      break;
  }
  return slice;
}

OrbitPartition orbits(const FiniteGroupoid& g) {
  OrbitPartition partition;
  partition.orbit_of.assign(g.n_objects(), SIZE_MAX);
  for (std::size_t x = 0; x < g.n_objects(); ++x) {
    if (partition.orbit_of[x] != SIZE_MAX) continue;
    const std::size_t id = partition.orbits.size();
    std::vector<ObjectId> members;
    for (ArrowId h : g.source_fiber({x})) {
      const std::size_t y = g.target(h).index;
      if (partition.orbit_of[y] == SIZE_MAX) {
        partition.orbit_of[y] = id;
        members.push_back({y});
      }
    }
    std::sort(members.begin(), members.end());
    partition.orbits.push_back(std::move(members));
  }
  return partition;
}

ObjectSet make_object_set(const FiniteGroupoid& g, std::vector<std::size_t> indices) {
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  ObjectSet set;
  for (std::size_t i : indices) {
    if (i >= g.n_objects()) throw Error("object " + std::to_string(i) + " out of range");
    set.push_back({i});
  }
  return set;
}

ObjectSet all_objects(const FiniteGroupoid& g) {
  ObjectSet set(g.n_objects());
  for (std::size_t x = 0; x < set.size(); ++x) set[x] = {x};
  return set;
}

bool contains(const ObjectSet& subset, ObjectId x) {
  return std::binary_search(subset.begin(), subset.end(), x);
}

ObjectSet saturation(const FiniteGroupoid& g, const ObjectSet& subset) {
  std::vector<std::size_t> out;
  for (ObjectId x : subset) {
    if (x.index >= g.n_objects()) throw Error("object " + std::to_string(x.index) + " out of range");
    for (ArrowId h : g.source_fiber(x)) out.push_back(g.target(h).index);
  }
  return make_object_set(g, std::move(out));
}

bool is_invariant(const FiniteGroupoid& g, const ObjectSet& subset) {
  std::vector<std::size_t> raw;
  for (ObjectId x : subset) raw.push_back(x.index);
  return saturation(g, subset) == make_object_set(g, std::move(raw));
}

Subgroupoid restrict(const FiniteGroupoid& g, const ObjectSet& subset, bool allow_non_invariant) {
  std::vector<std::size_t> raw;
  for (ObjectId x : subset) raw.push_back(x.index);
  const ObjectSet set = make_object_set(g, raw);
  if (set.empty()) throw Error("cannot restrict to an empty object set");
  if (!allow_non_invariant && saturation(g, set) != set)
    throw Error("restriction requires an invariant object set");

  std::vector<std::size_t> object_map(g.n_objects(), SIZE_MAX);
  for (std::size_t i = 0; i < set.size(); ++i) object_map[set[i].index] = i;

  std::vector<ArrowId> arrows;
  std::vector<std::size_t> arrow_map(g.n_arrows(), SIZE_MAX);
  for (std::size_t a = 0; a < g.n_arrows(); ++a) {
    if (object_map[g.source({a}).index] != SIZE_MAX && object_map[g.target({a}).index] != SIZE_MAX) {
      arrow_map[a] = arrows.size();
      arrows.push_back({a});
    }
  }
  const std::size_t m = arrows.size();
  std::vector<std::size_t> source(m), target(m), inverse(m), unit(set.size());
  std::vector<std::size_t> compose(m * m, FiniteGroupoid::kUndefined);
  for (std::size_t i = 0; i < m; ++i) {
    const ArrowId a = arrows[i];
    source[i] = object_map[g.source(a).index];
    target[i] = object_map[g.target(a).index];
    inverse[i] = arrow_map[g.inverse(a).index];
    for (std::size_t j = 0; j < m; ++j) {
      if (auto ab = g.compose(a, arrows[j]); ab && arrow_map[ab->index] != SIZE_MAX)
        compose[i * m + j] = arrow_map[ab->index];
    }
  }
  for (std::size_t i = 0; i < set.size(); ++i) unit[i] = arrow_map[g.unit(set[i]).index];
  return {FiniteGroupoid(set.size(), std::move(source), std::move(target), std::move(unit),
                         std::move(inverse), std::move(compose)),
          set, std::move(arrows)};
}

std::size_t FiniteGroup::inverse(std::size_t a) const {
  for (std::size_t b = 0; b < order; ++b)
    if (multiply(a, b) == identity) return b;
  throw Error("group element " + std::to_string(a) + " has no inverse");
}

ValidationReport validate(const FiniteGroup& group) {
  ValidationReport report;
  const std::size_t n = group.order;
  if (n == 0) {
    report.add("group-order", {}, "group must be nonempty");
    return report;
  }
  if (group.table.size() != n * n) {
    report.add("group-table-shape", {}, "table must be order x order");
    return report;
  }
  if (group.identity >= n) {
    report.add("group-identity", {group.identity}, "identity out of range");
    return report;
  }
  for (std::size_t v : group.table) {
    if (v >= n) {
      report.add("group-closure", {v}, "table entry out of range");
      return report;
    }
  }
  for (std::size_t a = 0; a < n; ++a) {
    if (group.multiply(group.identity, a) != a || group.multiply(a, group.identity) != a)
      report.add("group-identity", {a}, "e·a = a = a·e fails");
    bool has_inverse = false;
    for (std::size_t b = 0; b < n && !has_inverse; ++b)
      has_inverse = group.multiply(a, b) == group.identity && group.multiply(b, a) == group.identity;
    if (!has_inverse) report.add("group-inverse", {a}, "element has no two-sided inverse");
  }
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t c = 0; c < n; ++c)
        if (group.multiply(group.multiply(a, b), c) != group.multiply(a, group.multiply(b, c)))
          report.add("group-associativity", {a, b, c}, "(ab)c != a(bc)");
  return report;
}

FiniteGroup cyclic_group(std::size_t n) {
  if (n == 0) throw Error("cyclic group order must be positive");
  FiniteGroup group{n, std::vector<std::size_t>(n * n), 0};
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) group.table[a * n + b] = (a + b) % n;
  return group;
}

FiniteGroup parse_group(std::string_view name) {
  if (name == "trivial") return cyclic_group(1);
  if (name.size() >= 2 && (name[0] == 'z' || name[0] == 'Z')) {
    std::size_t n = 0;
    auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), n);
    if (ec == std::errc{} && ptr == name.data() + name.size() && n > 0) return cyclic_group(n);
  }
  throw Error("unknown group '" + std::string(name) + "' (expected zN or trivial)");
}

FiniteGroupoid pair_groupoid(std::size_t n) {
  if (n == 0) throw Error("pair groupoid needs at least one object");
  const std::size_t m = n * n;
  auto id = [n](std::size_t y, std::size_t x) { return y * n + x; };
  std::vector<std::size_t> source(m), target(m), inverse(m), unit(n);
  std::vector<std::size_t> compose(m * m, FiniteGroupoid::kUndefined);
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t x = 0; x < n; ++x) {
      source[id(y, x)] = x;
      target[id(y, x)] = y;
      inverse[id(y, x)] = id(x, y);
      for (std::size_t w = 0; w < n; ++w) compose[id(y, x) * m + id(x, w)] = id(y, w);
    }
    unit[y] = id(y, y);
  }
  return FiniteGroupoid(n, std::move(source), std::move(target), std::move(unit),
                        std::move(inverse), std::move(compose));
}

FiniteGroupoid action_groupoid(const FiniteGroup& group, std::size_t n_points,
                               const std::vector<std::size_t>& action) {
  if (auto report = validate(group); !report.ok())
    throw Error("invalid group table: " + report.violations.front().rule);
  if (n_points == 0) throw Error("action groupoid needs at least one point");
  const std::size_t k = group.order;
  if (action.size() != k * n_points) throw Error("action table must be order x n_points");
  auto act = [&](std::size_t a, std::size_t x) { return action[a * n_points + x]; };
  for (std::size_t x = 0; x < n_points; ++x) {
    for (std::size_t a = 0; a < k; ++a)
      if (act(a, x) >= n_points)
        throw Error("action of " + std::to_string(a) + " on " + std::to_string(x) + " out of range");
    if (act(group.identity, x) != x)
      throw Error("identity law fails at point " + std::to_string(x));
  }
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b)
      for (std::size_t x = 0; x < n_points; ++x)
        if (act(group.multiply(a, b), x) != act(a, act(b, x)))
          throw Error("compatibility law fails at (" + std::to_string(a) + ", " +
                      std::to_string(b) + ", " + std::to_string(x) + ")");

  const std::size_t m = k * n_points;
  auto id = [n_points](std::size_t a, std::size_t x) { return a * n_points + x; };
  std::vector<std::size_t> source(m), target(m), inverse(m), unit(n_points);
  std::vector<std::size_t> compose(m * m, FiniteGroupoid::kUndefined);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t x = 0; x < n_points; ++x) {
      const std::size_t g = id(a, x);
      source[g] = x;
      target[g] = act(a, x);
      inverse[g] = id(group.inverse(a), act(a, x));
      // (b, a·x)·(a, x) = (ba, x)
      for (std::size_t b = 0; b < k; ++b)
        compose[id(b, act(a, x)) * m + g] = id(group.multiply(b, a), x);
    }
  }
  for (std::size_t x = 0; x < n_points; ++x) unit[x] = id(group.identity, x);
  return FiniteGroupoid(n_points, std::move(source), std::move(target), std::move(unit),
                        std::move(inverse), std::move(compose));
}

FiniteGroupoid group_bundle(const std::vector<FiniteGroup>& groups) {
  if (groups.empty()) throw Error("group bundle needs at least one group");
  std::vector<std::size_t> offset;
  std::size_t m = 0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (auto report = validate(groups[i]); !report.ok())
      throw Error("invalid group table at object " + std::to_string(i) + ": " +
                  report.violations.front().rule);
    offset.push_back(m);
    m += groups[i].order;
  }
  std::vector<std::size_t> source(m), target(m), inverse(m), unit(groups.size());
  std::vector<std::size_t> compose(m * m, FiniteGroupoid::kUndefined);
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const FiniteGroup& grp = groups[i];
    const std::size_t o = offset[i];
    for (std::size_t a = 0; a < grp.order; ++a) {
      source[o + a] = target[o + a] = i;
      inverse[o + a] = o + grp.inverse(a);
      for (std::size_t b = 0; b < grp.order; ++b) compose[(o + a) * m + o + b] = o + grp.multiply(a, b);
    }
    unit[i] = o + grp.identity;
  }
  return FiniteGroupoid(groups.size(), std::move(source), std::move(target), std::move(unit),
                        std::move(inverse), std::move(compose));
}

}  // namespace meanratio
