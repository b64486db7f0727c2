#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hji/discretize.hpp"
#include "hji/grid.hpp"
#include "hji/model.hpp"

namespace hji {

struct SimConfig {
  Point x0{0.0, 0.0};
  double T = 20.0;
  double dt = 1e-3;
  std::size_t paths = 100000;
  std::uint64_t seed = 1;
  /// When positive, the estimator differences out the first burnIn time
  /// units: (log E e^{S_T} - log E e^{S_burnIn}) / (T - burnIn).
  double burnIn = 0.0;
  int workers = 0;  // 0: HJI_WORKERS or logical cores

  /// Throws ConfigurationError unless T >= 10 dt, paths >= 100, dt > 0 and
  /// 0 <= burnIn <= T / 2.
  void validate() const;
};

/// splitmix64 finalizer; used to derive independent per-path seeds.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t path_seed(std::uint64_t seed, std::uint64_t path);

/// Accumulated costs of every path at each checkpoint time.
struct PathEnsemble {
  std::vector<double> checkpoints;            // increasing, last == T
  std::vector<std::vector<double>> integral;  // [checkpoint][path] of int_0^t c
  std::vector<Point> finalState;
  std::vector<char> diverged;
  std::size_t divergedPaths = 0;
  std::size_t leftGrid = 0;  // paths that used the edge strategy outside the box
};

/// Euler-Maruyama under the relaxed strategy pair (f1, f2) looked up at the
/// nearest interior grid point; cost by the left-endpoint rule. Every path
/// draws from its own generator seeded by path_seed(seed, path), so results
/// do not depend on the worker count. Checkpoints are T/4, T/2, T and the
/// burn-in time when set.
PathEnsemble simulate_paths(const GameModel& model, const Grid& grid, const StrategyField& f1,
                            const StrategyField& f2, const SimConfig& cfg);

/// Lockstep simulation of several strategy pairs on common random numbers:
/// path k of every pair sees the same Gaussian increments.
std::vector<PathEnsemble> simulate_common(const GameModel& model, const Grid& grid,
                                          const std::vector<std::pair<const StrategyField*, const StrategyField*>>& pairs,
                                          const SimConfig& cfg);

struct TrendPoint {
  double T = 0.0;
  double value = 0.0;
};

struct RiskEstimate {
  double value = 0.0;
  double standardError = 0.0;
  std::vector<double> logMoments;  // per-batch estimates (10 batches)
  double effectiveTail = 0.0;      // share of the exponential mass in the top 1% of paths
  bool unreliable = false;         // effectiveTail > 0.5
  bool burnInUsed = false;
  std::vector<TrendPoint> trend;   // plain estimator at T/4, T/2, T
  std::size_t paths = 0;
  std::size_t divergedPaths = 0;
  std::size_t leftGrid = 0;
};

/// (1/T) log of the path average of e^{S_T} via log-sum-exp, delta-method
/// standard error. Throws EstimationError when more than 1% of paths diverged.
RiskEstimate estimate_from(const PathEnsemble& ensemble, const SimConfig& cfg);

RiskEstimate estimate_risk_sensitive(const GameModel& model, const Grid& grid, const StrategyField& f1,
                                     const StrategyField& f2, const SimConfig& cfg);

struct Deviation {
  std::string label;
  StrategyField field;
};

struct DeviationLibrary {
  std::vector<Deviation> player1;
  std::vector<Deviation> player2;
};

/// `count` deviations per player: constant-action fields, eps-mixtures of the
/// saddle field toward a random action, then random point-mass fields.
DeviationLibrary make_deviations(const GameModel& model, const StrategyField& v1, const StrategyField& v2,
                                 std::size_t count, std::uint64_t seed, double eps = 0.2);

struct DeviationMargin {
  int player = 0;
  std::string label;
  double estimate = 0.0;
  double standardError = 0.0;
  /// Player 2 deviations: lambdaHat + 3 se - estimate; player 1 deviations:
  /// estimate - (lambdaHat - 3 se). Negative means violated.
  double margin = 0.0;
  bool violated = false;
};

struct VerifyReport {
  RiskEstimate saddle;  // estimate at (v1*, v2*)
  double lambdaHat = 0.0;
  bool saddleMatches = false;  // |saddle.value - lambdaHat| <= 3 se
  std::vector<DeviationMargin> margins;
  bool passed = false;  // no violated margin and saddleMatches
};

/// Checks E(v1*, U2) <= lambdaHat <= E(U1, v2*) over a deviation library, all
/// pairs on common random numbers. "Passed" means no violation was found.
VerifyReport verify_saddle(const GameModel& model, const Grid& grid, const StrategyField& v1,
                           const StrategyField& v2, double lambdaHat, const DeviationLibrary& deviations,
                           const SimConfig& cfg);

struct RepresentationReport {
  double lhs = 0.0;  // V(x0)
  double rhs = 0.0;  // E[exp(int_0^{tau ^ T} (c - Lambda)) V(X_{tau ^ T})]
  double standardError = 0.0;
  double relativeError = 0.0;
  std::size_t capped = 0;  // paths still outside the ball at T
  bool inconclusive = false;  // capped > 5%
};

/// Monte Carlo check of the stochastic representation of V outside a ball,
/// V linearly interpolated from the grid (zero outside the box).
RepresentationReport check_representation(const GameModel& model, const Grid& grid, const Eigen::VectorXd& V,
                                          double lambdaHat, const StrategyField& f1, const StrategyField& f2,
                                          double ballRadius, const SimConfig& cfg);

struct IndependenceReport {
  std::vector<Point> starts;
  std::vector<RiskEstimate> estimates;
  /// max over start pairs of |difference| / sqrt(se_a^2 + se_b^2)
  double maxJointZ = 0.0;
  bool passed = false;  // maxJointZ <= 3
};

/// Estimates the cost of (f1, f2) from each start point on independent
/// streams (seed + k for the k-th start) and compares every pair.
IndependenceReport check_value_independence(const GameModel& model, const Grid& grid, const StrategyField& f1,
                                            const StrategyField& f2, const std::vector<Point>& starts,
                                            const SimConfig& cfg);

/// Risk-sensitive growth rate of the continuous-time Markov chain whose
/// generator is the off-diagonal part of A (rates between interior points),
/// with running cost equal to the row sums of A. Its exact value is the
/// Perron root of A, so this estimates the eigenvalue by simulation. Uses
/// the same estimator as estimate_from, started at the origin index.
RiskEstimate estimate_chain(const SparseMatrix& A, std::size_t start, const SimConfig& cfg);

}  // namespace hji
