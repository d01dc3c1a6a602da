#pragma once

#include "meanratio/types.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace meanratio {

/// Finite groupoid stored as dense structure tables.
///
/// Arrows and objects are dense indices. Composition is a full
/// n_arrows x n_arrows table with `kUndefined` outside the composable
/// pairs. The constructor only checks table shapes and index ranges;
/// the groupoid axioms are checked by `validate`, so a corrupted table
/// can still be loaded and diagnosed.
class FiniteGroupoid {
 public:
  static constexpr std::size_t kUndefined = SIZE_MAX;

  FiniteGroupoid(std::size_t n_objects, std::vector<std::size_t> source,
                 std::vector<std::size_t> target, std::vector<std::size_t> unit,
                 std::vector<std::size_t> inverse, std::vector<std::size_t> compose);

  std::size_t n_objects() const { return n_objects_; }
  std::size_t n_arrows() const { return source_.size(); }

  ObjectId source(ArrowId g) const { return {source_[g.index]}; }
  ObjectId target(ArrowId g) const { return {target_[g.index]}; }
  ArrowId unit(ObjectId x) const { return {unit_[x.index]}; }
  ArrowId inverse(ArrowId g) const { return {inverse_[g.index]}; }

  bool composable(ArrowId g, ArrowId h) const { return source_[g.index] == target_[h.index]; }

  /// Raw table entry for g·h; empty when the table marks it undefined.
  std::optional<ArrowId> compose(ArrowId g, ArrowId h) const;

  /// g·h for a composable pair; throws when undefined.
  ArrowId product(ArrowId g, ArrowId h) const;

  /// Arrows with target x, ascending.
  std::span<const ArrowId> target_fiber(ObjectId x) const { return target_fibers_[x.index]; }
  /// Arrows with source x, ascending.
  std::span<const ArrowId> source_fiber(ObjectId x) const { return source_fibers_[x.index]; }
  /// Position of h inside target_fiber(t h).
  std::size_t target_fiber_position(ArrowId h) const { return target_position_[h.index]; }

  /// All (g, h) with s g = t h, ordered lexicographically by (g, h).
  const std::vector<ArrowPair>& composable_pairs() const { return pairs_; }
  /// Index of (g, h) inside composable_pairs().
  std::size_t pair_index(ArrowId g, ArrowId h) const {
    return pair_offset_[g.index] + target_position_[h.index];
  }

  /// All (g, h, k) with s g = t h and s h = t k, lexicographic.
  std::vector<ArrowTriple> composable_triples() const;

  const std::vector<std::size_t>& source_table() const { return source_; }
  const std::vector<std::size_t>& target_table() const { return target_; }
  const std::vector<std::size_t>& unit_table() const { return unit_; }
  const std::vector<std::size_t>& inverse_table() const { return inverse_; }

  friend bool operator==(const FiniteGroupoid& a, const FiniteGroupoid& b) {
    return a.n_objects_ == b.n_objects_ && a.source_ == b.source_ && a.target_ == b.target_ &&
           a.unit_ == b.unit_ && a.inverse_ == b.inverse_ && a.compose_ == b.compose_;
  }

 private:
  std::size_t n_objects_;
  std::vector<std::size_t> source_;
  std::vector<std::size_t> target_;
  std::vector<std::size_t> unit_;
  std::vector<std::size_t> inverse_;
  std::vector<std::size_t> compose_;

  std::vector<std::vector<ArrowId>> target_fibers_;
  std::vector<std::vector<ArrowId>> source_fibers_;
  std::vector<std::size_t> target_position_;
  std::vector<ArrowPair> pairs_;
  std::vector<std::size_t> pair_offset_;
};

/// Exhaustive scan of the groupoid axioms. Empty report iff all hold.
ValidationReport validate(const FiniteGroupoid& g);

enum class FiberKind { source, target, isotropy };

struct FiberSlice {
  FiberKind kind;
  ObjectId base;
  std::vector<ArrowId> arrows;
};

FiberSlice fiber(const FiniteGroupoid& g, FiberKind kind, ObjectId x);

struct OrbitPartition {
  std::vector<std::size_t> orbit_of;
  std::vector<std::vector<ObjectId>> orbits;
};

OrbitPartition orbits(const FiniteGroupoid& g);

/// Least invariant superset of S: all targets of arrows sourced in S.
ObjectSet saturation(const FiniteGroupoid& g, const ObjectSet& subset);

bool is_invariant(const FiniteGroupoid& g, const ObjectSet& subset);

/// Restriction to the arrows with both ends in S, together with the
/// embedding of its objects and arrows into the ambient groupoid.
struct Subgroupoid {
  FiniteGroupoid groupoid;
  std::vector<ObjectId> objects;
  std::vector<ArrowId> arrows;
};

/// Full subgroupoid on S. Requires S invariant unless allow_non_invariant.
Subgroupoid restrict(const FiniteGroupoid& g, const ObjectSet& subset,
                     bool allow_non_invariant = false);

/// Sorts, dedups and range-checks an object list.
ObjectSet make_object_set(const FiniteGroupoid& g, std::vector<std::size_t> indices);
ObjectSet all_objects(const FiniteGroupoid& g);
bool contains(const ObjectSet& subset, ObjectId x);

// Finite groups, generators.

/// Multiplication table of a finite group with elements 0..order-1.
struct FiniteGroup {
  std::size_t order = 0;
  std::vector<std::size_t> table;  // table[a * order + b] = a·b
  std::size_t identity = 0;

  std::size_t multiply(std::size_t a, std::size_t b) const { return table[a * order + b]; }
  std::size_t inverse(std::size_t a) const;
};

ValidationReport validate(const FiniteGroup& group);

FiniteGroup cyclic_group(std::size_t n);

/// Parses names like "z3" (cyclic of order 3) or "trivial".
FiniteGroup parse_group(std::string_view name);

/// Pair groupoid: arrow (y, x) has index y*n + x, source x, target y.
FiniteGroupoid pair_groupoid(std::size_t n);

/// Action groupoid of a left action; action[g * n_points + x] = g·x.
/// Arrow (g, x) has index g*n_points + x, source x, target g·x.
FiniteGroupoid action_groupoid(const FiniteGroup& group, std::size_t n_points,
                               const std::vector<std::size_t>& action);

/// Disjoint union of groups, one per object; arrows are numbered
/// object by object.
FiniteGroupoid group_bundle(const std::vector<FiniteGroup>& groups);

}  // namespace meanratio
