#include "hji/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hji/error.hpp"

namespace hji {

Grid::Grid(int d, double radius, double h) : d_(d), radius_(radius), h_(h) {
  if (d != 1 && d != 2)
    throw ConfigurationError("grid dimension must be 1 or 2, got " + std::to_string(d));
  if (!(h > 0.0) || !std::isfinite(h)) throw ConfigurationError("grid spacing must be positive");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ConfigurationError("grid radius must be positive");
  const double ratio = radius / h;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio))
    throw ConfigurationError("grid radius " + std::to_string(radius) +
                             " is not a positive integer multiple of spacing " + std::to_string(h));
  if (rounded > 1e6) throw ConfigurationError("grid too fine: radius/h exceeds 1e6");
  n_ = static_cast<int>(rounded);

  const std::size_t perAxis = static_cast<std::size_t>(nodesPerAxis());
  const std::size_t total = d_ == 1 ? perAxis : perAxis * perAxis;
  if (total > 50'000'000) throw ConfigurationError("grid too large");
  interiorOfNode_.assign(total, -1);
  for (std::size_t node = 0; node < total; ++node) {
    const auto k = nodeMultiIndex(node);
    bool inside = true;
    for (int a = 0; a < d_; ++a) inside = inside && k[a] > 0 && k[a] < 2 * n_;
    if (inside) {
      interiorOfNode_[node] = static_cast<long>(interior_.size());
      interior_.push_back(node);
    } else {
      boundary_.push_back(node);
    }
  }
  std::array<int, kMaxDimension> centre{n_, n_};
  origin_ = static_cast<std::size_t>(interiorOfNode_[nodeId(centre)]);
}

std::array<int, kMaxDimension> Grid::nodeMultiIndex(std::size_t node) const {
  const int perAxis = nodesPerAxis();
  if (d_ == 1) return {static_cast<int>(node), 0};
  return {static_cast<int>(node / perAxis), static_cast<int>(node % perAxis)};
}

std::size_t Grid::nodeId(const std::array<int, kMaxDimension>& k) const {
  if (d_ == 1) return static_cast<std::size_t>(k[0]);
  return static_cast<std::size_t>(k[0]) * nodesPerAxis() + static_cast<std::size_t>(k[1]);
}

Point Grid::nodePoint(std::size_t node) const {
  const auto k = nodeMultiIndex(node);
  Point p{0.0, 0.0};
  for (int a = 0; a < d_; ++a) p[a] = (k[a] - n_) * h_;
  return p;
}

long Grid::shifted(std::size_t i, const std::array<int, kMaxDimension>& steps) const {
  auto k = nodeMultiIndex(interior_[i]);
  for (int a = 0; a < d_; ++a) {
    k[a] += steps[a];
    if (k[a] < 0 || k[a] > 2 * n_) return -1;
  }
  return interiorOfNode_[nodeId(k)];
}

long Grid::neighbor(std::size_t i, int axis, int step) const {
  std::array<int, kMaxDimension> s{0, 0};
  s[axis] = step;
  return shifted(i, s);
}

std::size_t Grid::nearestInterior(std::span<const double> x) const {
  std::array<int, kMaxDimension> k{n_, n_};
  for (int a = 0; a < d_; ++a) {
    const double t = std::round(x[a] / h_) + n_;
    k[a] = static_cast<int>(std::clamp(std::isfinite(t) ? t : n_, 1.0, 2.0 * n_ - 1.0));
  }
  return static_cast<std::size_t>(interiorOfNode_[nodeId(k)]);
}

bool Grid::contains(std::span<const double> x) const {
  for (int a = 0; a < d_; ++a)
    if (!(std::abs(x[a]) < radius_)) return false;
  return true;
}

bool Grid::sameAs(const Grid& other) const {
  return d_ == other.d_ && n_ == other.n_ && std::abs(h_ - other.h_) <= 1e-12 * h_;
}

Grid build_grid(int d, double radius, double h) { return Grid(d, radius, h); }

}  // namespace hji
