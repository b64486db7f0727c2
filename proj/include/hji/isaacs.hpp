#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hji/discretize.hpp"
#include "hji/principal_eigen.hpp"

namespace hji {

struct SolverOptions {
  double tol = 1e-10;        // eigen envelope width
  int maxOuter = 200;
  double damping = 0.5;      // weight of the old value field once a cycle is seen
  /// A previous selector is kept while it stays an eps-saddle of the new
  /// local game, eps = selectorTol * |V|_inf. Prevents flip-flopping between
  /// tied actions.
  double selectorTol = 1e-10;
  /// Starting value field over the interior (default V = 1).
  std::optional<Eigen::VectorXd> initialValue;
  int workers = 1;
};

/// The Dirichlet Isaacs eigenpair on one grid and the selectors behind it.
struct IsaacsSolve {
  Grid grid;
  EigenPair eigen;  // (psi, lambda) of the operator under (v1, v2)
  StrategyField v1;
  StrategyField v2;
  int iterations = 0;
  std::vector<double> selectorChanges;  // l1 change of (v1, v2) per iteration
  std::vector<double> lambdaHistory;
  /// max_x |value of the local game at psi - lambda psi(x)|, plus pure-game
  /// gaps where the payoff is not bilinear.
  double hamiltonianResidual = 0.0;
  double pureGap = 0.0;
  std::size_t nonBilinearPoints = 0;
  bool monotone = true;
  bool upwindUsed = false;
  bool dampingUsed = false;
  bool converged = false;
  std::string message;
};

/// Policy iteration for  max_nu2 min_nu1 (L psi + c psi) = lambda psi,
/// psi = 0 on the boundary: local games at the current value field give
/// selectors, the selectors give a linear operator, its principal eigenpair
/// gives the next value field. Converged once the selectors reproduce
/// themselves. A repeated selector configuration switches to damped value
/// updates; after maxOuter the solve is reported unconverged.
IsaacsSolve dirichlet_isaacs(const GameModel& model, const Grid& grid, const SolverOptions& options = {});

struct SweepReport {
  std::vector<double> radii;
  std::vector<double> lambdas;
  std::vector<int> iterations;
  bool allSolvesConverged = true;
  bool converged = false;  // last increment <= sweepTol
  double extrapolated = 0.0;
  bool extrapolationValid = false;
  std::vector<std::size_t> monotonicityViolations;  // k with lambda_{k+1} < lambda_k - slack
  std::vector<std::string> warnings;
  IsaacsSolve final;
};

struct SweepOptions {
  SolverOptions solver;
  double sweepTol = 1e-4;
  double monotoneSlack = 1e-10;
  bool warmStart = true;
};

/// Solves on boxes of increasing radius with common spacing h; each solve
/// starts from the previous value field interpolated onto the larger box.
/// The extrapolated value adds the geometric tail fitted to the last three
/// increments (valid only for a decaying fit).
SweepReport radius_sweep(const GameModel& model, int dimension, const std::vector<double>& radii, double h,
                         const SweepOptions& options = {});

struct GeometricTail {
  double tail = 0.0;
  double ratio = 0.0;
  bool valid = false;
};

/// Fits d_k ~ C r^k to the last three increments of `values`.
GeometricTail geometric_tail(const std::vector<double>& values);

/// The saddle selectors of a converged solve. Throws ConfigurationError for
/// an unconverged one.
std::pair<StrategyField, StrategyField> extract_saddle(const IsaacsSolve& solve);

enum class SinglePlayerMode { Maximize, Minimize };

/// Cost perturbation of the single-player problem: bounded costs become
/// r_m = zeta_m r + (1 - zeta_m)(|r|_inf + delta) with zeta_m a smooth cutoff
/// from 1 on |x| <= m to 0 for |x| >= m + 1; unbounded costs become
/// r_m = r + ell / m.
struct Perturbation {
  enum class Kind { Bounded, Unbounded };
  Kind kind = Kind::Bounded;
  std::vector<double> ms;
  double delta = 0.1;
  ScalarFieldFn ell;
  /// |r|_inf; estimated on the grid when absent.
  std::optional<double> costSup;
};

struct PerturbedEigenvalue {
  double m = 0.0;
  double lambda = 0.0;
  bool converged = false;
};

struct SinglePlayerReport {
  IsaacsSolve solve;
  std::vector<PerturbedEigenvalue> perturbed;
};

/// One player optimizes over pure actions while the other is frozen at
/// `frozen` (maximize: player 1 frozen; minimize: player 2 frozen). When the
/// frozen player's action set is a singleton the field may be omitted.
SinglePlayerReport solve_single_player(const GameModel& model, const Grid& grid, SinglePlayerMode mode,
                                       const std::optional<StrategyField>& frozen = std::nullopt,
                                       const std::optional<Perturbation>& perturbation = std::nullopt,
                                       const SolverOptions& options = {});

/// The model with its cost replaced by the perturbed r_m.
GameModel perturbed_model(const GameModel& model, const Perturbation& perturbation, double m, double costSup);

/// Interpolates an interior field of `from` onto the interior of `to`,
/// floored at a small positive multiple of its maximum.
Eigen::VectorXd transfer_field(const Grid& from, const Eigen::VectorXd& value, const Grid& to);

}  // namespace hji
