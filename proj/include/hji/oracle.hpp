#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <vector>

#include <Eigen/Dense>

#include "hji/discretize.hpp"
#include "hji/isaacs.hpp"
#include "hji/montecarlo.hpp"

namespace hji {

/// Every probability vector over `actions` with weights in {0, 1/m, ..., 1},
/// lexicographic in the weight of the first action (descending), so the
/// first entry is the point mass on action 0 and the last on the last action.
std::vector<std::vector<double>> simplex_mesh(std::size_t actions, int meshSteps);

/// Field number `index` of the product enumeration: the per-point choice is
/// the mixed-radix digit of `index`, point 0 most significant.
StrategyField field_from_index(const std::vector<std::vector<double>>& choices, std::size_t points,
                               std::size_t index);

struct OracleResult {
  Grid grid;
  int meshSteps = 0;
  double meshResolution = 0.0;  // 1 / meshSteps
  std::size_t pureFields1 = 0;
  std::size_t pureFields2 = 0;
  std::size_t meshFields1 = 0;
  std::size_t meshFields2 = 0;
  /// Perron eigenvalue per pair of fields; rows index player 1's field,
  /// columns player 2's.
  Eigen::MatrixXd pureTensor;
  Eigen::MatrixXd meshTensor;
  double pureMaxMin = 0.0;  // max over columns of the column minimum
  double pureMinMax = 0.0;
  double meshMaxMin = 0.0;
  double meshMinMax = 0.0;
  /// Largest |d lambda| / (l1 change of the weights) between mesh fields
  /// that differ at one point, per player.
  double lipschitz1 = 0.0;
  double lipschitz2 = 0.0;
  /// Lipschitz bound on how far an off-mesh field can move the eigenvalue:
  /// max over players of lipschitz * points * (actions - 1) / meshSteps.
  double defaultSlack = 0.0;
  bool allConverged = true;
};

/// Number of eigen-solves enumerate() would run.
std::size_t oracle_pair_count(const GameModel& model, const Grid& grid, int meshSteps);

/// Exhaustive enumeration of stationary fields on a tiny grid: Perron
/// eigenvalues (tol 1e-12) of every pure pair and of every pair drawn from
/// the per-point probability mesh.
///
/// Requires at most 5 interior points, at most 3 actions per player and
/// 1 <= meshSteps <= 6 (ConfigurationError); refuses with BudgetError when
/// pure plus mesh pairs exceed 10^6.
OracleResult enumerate(const GameModel& model, const Grid& grid, int meshSteps, int workers = 1);

struct Certificate {
  double lambda = 0.0;
  double lower = 0.0;  // meshMaxMin - slack
  double upper = 0.0;  // meshMinMax + slack
  double slack = 0.0;
  bool passed = false;
};

/// Passes iff meshMaxMin - slack <= solve.eigen.lambda <= meshMinMax + slack.
/// Slack defaults to oracle.defaultSlack. ConfigurationError when the grids
/// differ.
Certificate certify(const IsaacsSolve& solve, const OracleResult& oracle, std::optional<double> slack = {});

struct PairAgreement {
  std::size_t field1 = 0;  // pure-field indices into pureTensor
  std::size_t field2 = 0;
  double lambda = 0.0;
  RiskEstimate estimate;
  double z = 0.0;  // (estimate - lambda) / se
  bool agrees = false;  // |z| <= 3
};

/// Simulates the Markov chain behind the operator of `count` random pure
/// pairs (distinct while possible, drawn with `seed`) from the origin and
/// compares each growth-rate estimate with the pair's Perron eigenvalue.
std::vector<PairAgreement> pair_agreement(const GameModel& model, const OracleResult& oracle, std::size_t count,
                                          std::uint64_t seed, const SimConfig& cfg);

/// Long-format CSV: field1,field2,lambda with fields written as the
/// per-point action indices joined by '-'.
void write_pure_tensor_csv(const OracleResult& oracle, std::size_t actions1, std::size_t actions2,
                           std::ostream& out);

}  // namespace hji
