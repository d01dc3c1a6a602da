#pragma once

#include <Eigen/Dense>

#include <compare>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace meanratio {

/// Dense fiber matrices are small and stored row-major.
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ObjectId {
  std::size_t index = 0;
  friend auto operator<=>(const ObjectId&, const ObjectId&) = default;
};

struct ArrowId {
  std::size_t index = 0;
  friend auto operator<=>(const ArrowId&, const ArrowId&) = default;
};

/// A composable pair (g, h) with s(g) = t(h); the product is g·h.
struct ArrowPair {
  ArrowId first;
  ArrowId second;
  friend auto operator<=>(const ArrowPair&, const ArrowPair&) = default;
};

struct ArrowTriple {
  ArrowId first;
  ArrowId second;
  ArrowId third;
  friend auto operator<=>(const ArrowTriple&, const ArrowTriple&) = default;
};

/// Sorted, duplicate-free list of objects.
using ObjectSet = std::vector<ObjectId>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One failed axiom or identity, with the arrows that witness it.
struct Violation {
  std::string rule;
  std::vector<std::size_t> witness;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  void add(std::string rule, std::vector<std::size_t> witness, std::string detail = {}) {
    violations.push_back({std::move(rule), std::move(witness), std::move(detail)});
  }
  void append(const ValidationReport& other) {
    violations.insert(violations.end(), other.violations.begin(), other.violations.end());
  }
};

}  // namespace meanratio
