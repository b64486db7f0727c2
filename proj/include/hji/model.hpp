#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hji/grid.hpp"

namespace hji {

/// A finite discretization of one player's compact action space.
struct ActionSet {
  std::vector<std::string> labels;
  std::vector<double> values;

  ActionSet() = default;
  /// Throws ConfigurationError when empty, mismatched, non-finite or when
  /// labels repeat.
  ActionSet(std::vector<std::string> labels, std::vector<double> values);

  static ActionSet singleton(double value = 0.0, std::string label = "none");

  std::size_t size() const { return values.size(); }
};

/// Throws ConfigurationError unless w is a probability vector (entries >= 0,
/// sum within 1e-12 of one).
void validate_weights(std::span<const double> w);

/// A relaxed (mixed) action: probability weights over an ActionSet.
class MixedAction {
 public:
  explicit MixedAction(std::vector<double> weights);

  static MixedAction pure(std::size_t actions, std::size_t index);
  static MixedAction uniform(std::size_t actions);

  std::span<const double> weights() const { return weights_; }
  std::size_t size() const { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }

 private:
  std::vector<double> weights_;
};

/// x -> b(x, u1, u2), written into `out` (length d).
using DriftFn = std::function<void(std::span<const double> x, double u1, double u2, std::span<double> out)>;
/// x -> sigma(x), row-major d x d, written into `out`.
using DiffusionFn = std::function<void(std::span<const double> x, std::span<double> out)>;
/// x -> c(x, u1, u2) >= 0.
using CostFn = std::function<double(std::span<const double> x, double u1, double u2)>;
using ScalarFieldFn = std::function<double(std::span<const double> x)>;
/// Drift (layout [i][j][axis]) and cost (layout [i][j]) of every pure action
/// pair at x in one call; an optional fast path for simulation.
using PairEvaluatorFn = std::function<void(std::span<const double> x, std::span<double> drift, std::span<double> cost)>;

/// The game: controlled SDE dX = b(X, U1, U2) dt + sigma(X) dW with running
/// cost c. Player 1 (actions1) minimizes, player 2 (actions2) maximizes.
///
/// Immutable after construction; evaluators must be pure so that the model
/// can be shared across worker threads.
class GameModel {
 public:
  GameModel() = default;
  GameModel(std::string name, int dimension, DriftFn drift, DiffusionFn diffusion, CostFn cost,
            ActionSet actions1, ActionSet actions2);

  const std::string& name() const { return name_; }
  int dimension() const { return d_; }
  const ActionSet& actions1() const { return actions1_; }
  const ActionSet& actions2() const { return actions2_; }

  /// Drift under the pure action pair (actions1[i], actions2[j]).
  void drift(std::span<const double> x, std::size_t i, std::size_t j, std::span<double> out) const {
    drift_(x, actions1_.values[i], actions2_.values[j], out);
  }
  double cost(std::span<const double> x, std::size_t i, std::size_t j) const {
    return cost_(x, actions1_.values[i], actions2_.values[j]);
  }
  void sigma(std::span<const double> x, std::span<double> out) const { diffusion_(x, out); }

  /// a(x) = sigma sigma^T, row-major d x d.
  void diffusionMatrix(std::span<const double> x, std::span<double> out) const;

  const DriftFn& driftFunction() const { return drift_; }
  const DiffusionFn& diffusionFunction() const { return diffusion_; }
  const CostFn& costFunction() const { return cost_; }

  /// Installs a batched evaluator; it must agree with drift() and cost().
  void setPairEvaluator(PairEvaluatorFn fn) { pairs_ = std::move(fn); }
  bool hasPairEvaluator() const { return static_cast<bool>(pairs_); }
  void evaluatePairs(std::span<const double> x, std::span<double> drift, std::span<double> cost) const;

  /// True when the model is declared to have a bounded running cost.
  bool costBounded() const { return costBounded_; }
  void setCostBounded(bool bounded) { costBounded_ = bounded; }

 private:
  std::string name_;
  int d_ = 1;
  DriftFn drift_;
  DiffusionFn diffusion_;
  CostFn cost_;
  ActionSet actions1_;
  ActionSet actions2_;
  bool costBounded_ = false;
  PairEvaluatorFn pairs_;
};

/// b(x, nu1, nu2) = sum_ij nu1_i nu2_j b(x, u1_i, u2_j). Throws
/// ModelEvaluationError on a non-finite evaluation.
void relaxed_drift(const GameModel& model, std::span<const double> x, std::span<const double> nu1,
                   std::span<const double> nu2, std::span<double> out);
std::vector<double> relaxed_drift(const GameModel& model, std::span<const double> x, const MixedAction& nu1,
                                  const MixedAction& nu2);

/// c(x, nu1, nu2) = sum_ij nu1_i nu2_j c(x, u1_i, u2_j).
double relaxed_cost(const GameModel& model, std::span<const double> x, std::span<const double> nu1,
                    std::span<const double> nu2);
double relaxed_cost(const GameModel& model, std::span<const double> x, const MixedAction& nu1,
                    const MixedAction& nu2);

/// A Lyapunov certificate for one of the two geometric stability conditions:
///
///  - ConstantRate:   max_u L^u V <= beta 1_K - gamma V,  and sup c < gamma;
///  - InfCompactRate: max_u L^u V <= beta 1_K - ell V,    and
///                    max_u c / ell <= theta outside K, ell inf-compact.
///
/// K is the closed ball of radius compactRadius. When beta is absent the
/// checker reports the smallest beta that works on the probe.
struct LyapunovCertificate {
  enum class Kind { ConstantRate, InfCompactRate };

  Kind kind = Kind::ConstantRate;
  ScalarFieldFn lyapunov;
  double gamma = 0.0;
  ScalarFieldFn ell;
  double theta = 0.5;
  double compactRadius = 1.0;
  std::optional<double> beta;
};

const char* to_string(LyapunovCertificate::Kind kind);

struct ConditionViolation {
  Point x{};
  double margin = 0.0;  // negative: by how much the inequality failed
  std::string what;
};

struct ConditionReport {
  LyapunovCertificate::Kind kind = LyapunovCertificate::Kind::ConstantRate;
  bool passed = false;
  bool lyapunovHolds = false;  // drift inequality on every probe point
  bool costHolds = false;      // sup c < gamma, or c / ell <= theta outside K
  bool infCompactProbed = true;  // ell increasing along probe rays beyond K (probed, not proven)
  double beta = 0.0;             // value used (supplied or smallest feasible)
  double worstMargin = 0.0;      // min over probe points of rhs + slack - lhs
  Point worstPoint{};
  double maxCost = 0.0;
  double maxCostRatio = 0.0;     // InfCompactRate only
  double minLyapunov = 0.0;
  std::size_t probePoints = 0;
  std::vector<ConditionViolation> violations;  // capped at 50 entries
};

/// Audits a Lyapunov certificate on the interior points of `probe`.
///
/// Derivatives of V use central differences at the probe spacing h; the
/// inequality is accepted up to a slack h^2 (1 + |a| + |b|) max(1, V(x))
/// that dominates the O(h^2) truncation error. Violations flag the report;
/// non-finite evaluations throw ModelEvaluationError.
ConditionReport check_condition(const GameModel& model, const LyapunovCertificate& cert, const Grid& probe);

struct AssumptionBand {
  double radius = 0.0;
  double lipschitzRatio = 0.0;  // max sampled |b(x)-b(y)| + |sigma(x)-sigma(y)| over |x-y|
  double growthRatio = 0.0;     // max (<b,x>^+ + |sigma|^2) / (1 + |x|^2)
  double minEigenvalue = 0.0;   // smallest eigenvalue of a(x) seen in the band
  bool nondegenerate = true;    // minEigenvalue >= 1e-10
};

struct AssumptionReport {
  std::vector<AssumptionBand> bands;
  double growthConstant = 0.0;  // max growthRatio over bands
  std::size_t nonFinite = 0;
  bool passed = false;          // every band nondegenerate and no non-finite value
};

/// Samples local Lipschitz ratios, the affine-growth ratio and the
/// nondegeneracy of a(x) on four nested balls up to the probe radius.
/// `pairSamples` (>= 100) random point pairs are drawn per band.
AssumptionReport check_assumptions(const GameModel& model, const Grid& probe, std::size_t pairSamples = 200,
                                   std::uint64_t seed = 7);

}  // namespace hji
