#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace hji {

inline constexpr int kMaxDimension = 2;

/// A state-space point; only the first `d` coordinates are meaningful.
using Point = std::array<double, kMaxDimension>;

/// Uniform mesh of the box [-R, R]^d with spacing h.
///
/// Nodes sit at -R + k h for k = 0..2n (n = R/h) along each axis. Nodes on the
/// faces of the box are boundary nodes (Dirichlet zero); the rest are
/// interior. Interior nodes are numbered contiguously in lexicographic order
/// with the first axis varying slowest; every operator, eigenvector and
/// strategy field in the library is indexed by that interior numbering.
class Grid {
 public:
  Grid() = default;

  /// Throws ConfigurationError unless d is 1 or 2, h > 0 and R is a positive
  /// integer multiple of h (to 1e-9 relative).
  Grid(int d, double radius, double h);

  int dimension() const { return d_; }
  double radius() const { return radius_; }
  double spacing() const { return h_; }
  int halfCells() const { return n_; }
  int nodesPerAxis() const { return 2 * n_ + 1; }

  std::size_t nodeCount() const { return interiorOfNode_.size(); }
  std::size_t interiorCount() const { return interior_.size(); }
  std::size_t boundaryCount() const { return boundary_.size(); }

  /// Node ids of interior / boundary nodes.
  std::span<const std::size_t> interiorNodes() const { return interior_; }
  std::span<const std::size_t> boundaryNodes() const { return boundary_; }

  /// Interior index of the grid point of minimal norm.
  std::size_t originIndex() const { return origin_; }

  Point nodePoint(std::size_t node) const;
  Point point(std::size_t interiorIndex) const { return nodePoint(interior_[interiorIndex]); }

  /// Interior index of a node, or -1 for boundary nodes.
  long interiorIndexOfNode(std::size_t node) const { return interiorOfNode_[node]; }

  /// Per-axis node coordinate k in [0, 2n].
  std::array<int, kMaxDimension> nodeMultiIndex(std::size_t node) const;
  std::size_t nodeId(const std::array<int, kMaxDimension>& k) const;

  /// Interior index of the node displaced by `steps` (per axis) from interior
  /// point i; -1 when the displaced node is on the boundary.
  long shifted(std::size_t i, const std::array<int, kMaxDimension>& steps) const;
  long neighbor(std::size_t i, int axis, int step) const;

  /// Nearest interior point, clamping coordinates into the interior; points
  /// outside the box resolve to the adjacent edge point.
  std::size_t nearestInterior(std::span<const double> x) const;

  bool contains(std::span<const double> x) const;

  /// Same dimension, radius and spacing.
  bool sameAs(const Grid& other) const;

 private:
  int d_ = 0;
  double radius_ = 0.0;
  double h_ = 0.0;
  int n_ = 0;
  std::vector<std::size_t> interior_;
  std::vector<std::size_t> boundary_;
  std::vector<long> interiorOfNode_;
  std::size_t origin_ = 0;
};

/// Builds the truncated-domain grid.
Grid build_grid(int d, double radius, double h);

}  // namespace hji
