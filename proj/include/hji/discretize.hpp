#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "hji/grid.hpp"
#include "hji/matrixgame.hpp"
#include "hji/model.hpp"

namespace hji {

/// A stationary Markov relaxed control sampled on a grid: one probability
/// vector over a player's action set per interior point.
class StrategyField {
 public:
  StrategyField() = default;
  /// All points start on the uniform mixture.
  StrategyField(std::size_t points, std::size_t actions);

  static StrategyField pure(std::size_t points, std::size_t actions, std::size_t action);

  std::size_t points() const { return points_; }
  std::size_t actions() const { return actions_; }

  std::span<const double> at(std::size_t i) const { return {weights_.data() + i * actions_, actions_}; }
  /// Validates the weights (ConfigurationError otherwise).
  void set(std::size_t i, std::span<const double> w);
  void setPure(std::size_t i, std::size_t action);

  const std::vector<double>& weights() const { return weights_; }

  /// Sum over points of the l1 distance between mixtures.
  double distance(const StrategyField& other) const;
  bool operator==(const StrategyField& other) const = default;

 private:
  std::size_t points_ = 0;
  std::size_t actions_ = 0;
  std::vector<double> weights_;
};

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Finite-difference approximation of L_v + c_v on the interior of a grid,
/// Dirichlet zero on the boundary.
struct DiscreteOperator {
  SparseMatrix matrix;       // generator + diag(cost)
  Eigen::VectorXd cost;      // the zeroth-order part on its own
  bool monotone = true;      // every off-diagonal entry >= 0
  bool upwindUsed = false;   // some point fell back to one-sided drift differences
  std::size_t upwindPoints = 0;
  double pecletMargin = 0.0;  // max over points and axes of h |b_i| / a_ii
  std::size_t originIndex = 0;

  /// matrix - diag(cost).
  SparseMatrix generator() const;
};

/// Assembles the operator under fixed relaxed strategies. At each point the
/// drift is central when h |b_i| < a_ii - |a_12| on every axis and
/// first-order upwind otherwise; cross derivatives use the 7-point splitting
/// oriented by the sign of a_12. Throws NondegeneracyError when a(x) is not
/// positive definite at an interior point.
DiscreteOperator assemble_fixed(const GameModel& model, const Grid& grid, const StrategyField& f1,
                                const StrategyField& f2);

/// Local Isaacs payoff at one interior point: H(i, j) is the operator row
/// under the pure pair (i, j) applied to the value field.
struct LocalHamiltonian {
  MatrixGame game;
  /// True when every pure pair admits central drift differences, so the
  /// payoff is bilinear in mixtures and the mixed game is exact.
  bool bilinear = true;
};

/// `value` holds one entry per interior point; boundary values are zero.
LocalHamiltonian local_hamiltonian(const GameModel& model, const Grid& grid, std::size_t point,
                                   std::span<const double> value);

/// The row of assemble_fixed at `point`, under the mixtures (nu1, nu2),
/// applied to `value`.
double apply_row(const GameModel& model, const Grid& grid, std::size_t point, std::span<const double> nu1,
                 std::span<const double> nu2, std::span<const double> value);

/// Piecewise-(bi)linear interpolation of an interior field with zero
/// boundary values; zero outside the box.
double interpolate_field(const Grid& grid, std::span<const double> value, std::span<const double> x);

MatrixGame hamiltonian_matrix(const GameModel& model, const Grid& grid, std::size_t point,
                              std::span<const double> value);

}  // namespace hji
