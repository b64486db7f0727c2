#include "hji/isaacs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hji/error.hpp"
#include "hji/parallel.hpp"

namespace hji {

namespace {

enum class Rule { Game, Maximize, Minimize };

struct LocalResult {
  double value = 0.0;
  double gap = 0.0;
  bool bilinear = true;
};

struct Selection {
  StrategyField f1;
  StrategyField f2;
  std::vector<LocalResult> local;
};

std::vector<double> to_vec(std::span<const double> s) { return {s.begin(), s.end()}; }

class SelectorEngine {
 public:
  SelectorEngine(const GameModel& model, const Grid& grid, Rule rule, const std::optional<StrategyField>& frozen,
                 int workers)
      : model_(model), grid_(grid), rule_(rule), frozen_(frozen), workers_(workers) {}

  // Selectors at every point for the value field V. With `old`, a previous
  // selector survives while it is still eps-optimal.
  Selection select(const Eigen::VectorXd& V, const Selection* old, double eps) const {
    const std::size_t n = grid_.interiorCount();
    Selection s{StrategyField(n, model_.actions1().size()), StrategyField(n, model_.actions2().size()),
                std::vector<LocalResult>(n)};
    const std::span<const double> v(V.data(), static_cast<std::size_t>(V.size()));
    parallel_for(n, workers_, [&](std::size_t i) {
      switch (rule_) {
        case Rule::Game: game_point(i, v, old, eps, s); break;
        case Rule::Maximize:
        case Rule::Minimize: single_point(i, v, old, eps, s); break;
      }
    });
    return s;
  }

 private:
  void game_point(std::size_t i, std::span<const double> v, const Selection* old, double eps, Selection& s) const {
    const LocalHamiltonian lh = local_hamiltonian(model_, grid_, i, v);
    const Eigen::MatrixXd& H = lh.game.payoff();
    GameSolution sol = lh.bilinear ? solve_game(lh.game) : solve_pure_game(lh.game);
    std::vector<double> p = sol.p, q = sol.q;
    if (old) {
      auto po = to_vec(old->f1.at(i));
      auto qo = to_vec(old->f2.at(i));
      bool keep;
      if (lh.bilinear) {
        keep = is_eps_saddle(H, po, qo, sol.value, eps);
      } else {
        const Eigen::Map<const Eigen::VectorXd> pv(po.data(), po.size()), qv(qo.data(), qo.size());
        const Eigen::VectorXd col = H * qv;
        keep = col.minCoeff() >= sol.value - eps && pv.dot(col) <= col.minCoeff() + eps;
      }
      if (keep) {
        p = std::move(po);
        q = std::move(qo);
      }
    }
    s.f1.set(i, p);
    s.f2.set(i, q);
    s.local[i] = {sol.value, lh.bilinear ? 0.0 : sol.gap, lh.bilinear};
  }

  void single_point(std::size_t i, std::span<const double> v, const Selection* old, double eps,
                    Selection& s) const {
    const bool maximize = rule_ == Rule::Maximize;
    const std::size_t k = maximize ? model_.actions2().size() : model_.actions1().size();
    const std::size_t otherSize = maximize ? model_.actions1().size() : model_.actions2().size();
    const std::vector<double> other =
        frozen_ ? to_vec(frozen_->at(i)) : std::vector<double>(otherSize, 1.0 / otherSize);
    std::vector<double> values(k);
    std::vector<double> e(k, 0.0);
    for (std::size_t a = 0; a < k; ++a) {
      std::fill(e.begin(), e.end(), 0.0);
      e[a] = 1.0;
      values[a] = maximize ? apply_row(model_, grid_, i, other, e, v) : apply_row(model_, grid_, i, e, other, v);
    }
    std::size_t best = 0;
    for (std::size_t a = 1; a < k; ++a)
      if (maximize ? values[a] > values[best] : values[a] < values[best]) best = a;
    const double bestValue = values[best];
    if (old) {
      const auto prev = maximize ? old->f2.at(i) : old->f1.at(i);
      const std::size_t prevAction = static_cast<std::size_t>(std::max_element(prev.begin(), prev.end()) - prev.begin());
      if (maximize ? values[prevAction] >= bestValue - eps : values[prevAction] <= bestValue + eps) best = prevAction;
    }
    if (maximize) {
      s.f1.set(i, other);
      s.f2.setPure(i, best);
    } else {
      s.f1.setPure(i, best);
      s.f2.set(i, other);
    }
    s.local[i] = {bestValue, 0.0, true};
  }

  const GameModel& model_;
  const Grid& grid_;
  Rule rule_;
  const std::optional<StrategyField>& frozen_;
  int workers_;
};

bool same(const Selection& a, const Selection& b) { return a.f1 == b.f1 && a.f2 == b.f2; }

IsaacsSolve policy_iteration(const GameModel& model, const Grid& grid, Rule rule,
                             const std::optional<StrategyField>& frozen, const SolverOptions& options) {
  if (model.dimension() != grid.dimension()) throw ConfigurationError("model and grid dimensions differ");
  if (options.maxOuter < 1) throw ConfigurationError("maxOuter must be positive");
  if (!(options.damping >= 0.0 && options.damping < 1.0)) throw ConfigurationError("damping must lie in [0, 1)");
  const std::size_t n = grid.interiorCount();
  const auto origin = static_cast<Eigen::Index>(grid.originIndex());
  const SelectorEngine engine(model, grid, rule, frozen, resolve_workers(options.workers));
  EigenOptions eopt;
  eopt.tol = options.tol;

  Eigen::VectorXd V = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
  if (options.initialValue) {
    if (options.initialValue->size() != V.size()) throw ConfigurationError("initial value field has the wrong size");
    V = *options.initialValue;
    if (!(V.minCoeff() > 0.0) || !V.allFinite()) throw ConfigurationError("initial value field must be positive");
  }
  const auto eps_for = [&](const Eigen::VectorXd& f) { return options.selectorTol * f.cwiseAbs().maxCoeff(); };

  IsaacsSolve out;
  out.grid = grid;
  std::vector<Selection> history;
  Selection current = engine.select(V, nullptr, eps_for(V));
  bool damping = false;
  EigenPair eig;
  for (int it = 1;; ++it) {
    const DiscreteOperator op = assemble_fixed(model, grid, current.f1, current.f2);
    out.monotone = op.monotone;
    out.upwindUsed = op.upwindUsed;
    eig = principal_eigenpair(op, eopt);
    out.lambdaHistory.push_back(eig.lambda);
    out.iterations = it;
    history.push_back(current);

    Selection fresh = engine.select(eig.phi, &current, eps_for(eig.phi));
    const double change = fresh.f1.distance(current.f1) + fresh.f2.distance(current.f2);
    out.selectorChanges.push_back(change);
    if (same(fresh, current)) {
      out.converged = eig.converged;
      if (!eig.converged) out.message = "eigen solve did not reach tolerance";
      break;
    }
    if (it >= options.maxOuter) {
      out.message = "policy iteration did not settle within maxOuter iterations";
      break;
    }
    if (!damping)
      for (std::size_t k = 0; k + 1 < history.size(); ++k)
        if (same(history[k], fresh)) {
          damping = true;
          out.dampingUsed = true;
          break;
        }
    if (damping) {
      V = options.damping * (V / V(origin)) + (1.0 - options.damping) * eig.phi;
      current = engine.select(V, &current, eps_for(V));
    } else {
      V = eig.phi;
      current = std::move(fresh);
    }
  }

  out.eigen = eig;
  out.v1 = current.f1;
  out.v2 = current.f2;
  // Fresh local values at the final eigenfunction.
  const Selection check = engine.select(eig.phi, nullptr, 0.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = check.local[i];
    const double miss = std::abs(r.value - eig.lambda * eig.phi(static_cast<Eigen::Index>(i)));
    worst = std::max(worst, miss + r.gap);
    out.pureGap = std::max(out.pureGap, r.gap);
    if (!r.bilinear) ++out.nonBilinearPoints;
  }
  out.hamiltonianResidual = worst;
  return out;
}

double smooth_cutoff(double r, double m) {
  const double s = r - m;
  if (s <= 0.0) return 1.0;
  if (s >= 1.0) return 0.0;
  return 1.0 - s * s * (3.0 - 2.0 * s);
}

double norm_of(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

}  // namespace

IsaacsSolve dirichlet_isaacs(const GameModel& model, const Grid& grid, const SolverOptions& options) {
  return policy_iteration(model, grid, Rule::Game, std::nullopt, options);
}

Eigen::VectorXd transfer_field(const Grid& from, const Eigen::VectorXd& value, const Grid& to) {
  const std::span<const double> v(value.data(), static_cast<std::size_t>(value.size()));
  Eigen::VectorXd out(static_cast<Eigen::Index>(to.interiorCount()));
  const double floor = 1e-6 * value.cwiseAbs().maxCoeff();
  for (std::size_t i = 0; i < to.interiorCount(); ++i) {
    const Point x = to.point(i);
    out(static_cast<Eigen::Index>(i)) =
        std::max(interpolate_field(from, v, std::span<const double>(x.data(), to.dimension())), floor);
  }
  return out;
}

GeometricTail geometric_tail(const std::vector<double>& values) {
  GeometricTail g;
  if (values.size() < 4) return g;
  const std::size_t n = values.size();
  const double d1 = values[n - 3] - values[n - 4];
  const double d2 = values[n - 2] - values[n - 3];
  const double d3 = values[n - 1] - values[n - 2];
  const double scale = 1.0 + std::abs(values.back());
  if (std::max({std::abs(d1), std::abs(d2), std::abs(d3)}) <= 1e-12 * scale) {
    g.valid = true;
    return g;
  }
  if (d1 <= 0.0 || d2 <= 0.0 || d3 <= 0.0) return g;
  // Least-squares slope of log d_k on k = 0, 1, 2.
  g.ratio = std::exp(0.5 * (std::log(d3) - std::log(d1)));
  if (g.ratio >= 1.0) return g;
  g.tail = d3 * g.ratio / (1.0 - g.ratio);
  g.valid = true;
  return g;
}

SweepReport radius_sweep(const GameModel& model, int dimension, const std::vector<double>& radii, double h,
                         const SweepOptions& options) {
  if (radii.empty()) throw ConfigurationError("radius list is empty");
  for (std::size_t k = 1; k < radii.size(); ++k)
    if (!(radii[k] > radii[k - 1])) throw ConfigurationError("radii must be strictly increasing");

  SweepReport rep;
  std::optional<Grid> previous;
  Eigen::VectorXd prevValue;
  for (double R : radii) {
    const Grid grid(dimension, R, h);
    SolverOptions so = options.solver;
    if (options.warmStart && previous) so.initialValue = transfer_field(*previous, prevValue, grid);
    IsaacsSolve s = dirichlet_isaacs(model, grid, so);
    rep.radii.push_back(R);
    rep.lambdas.push_back(s.eigen.lambda);
    rep.iterations.push_back(s.iterations);
    if (!s.converged) {
      rep.allSolvesConverged = false;
      rep.warnings.push_back("radius " + std::to_string(R) + ": " + s.message);
    }
    if (s.upwindUsed)
      rep.warnings.push_back("radius " + std::to_string(R) + ": upwind differences used at " +
                             std::to_string(s.nonBilinearPoints) + " local games");
    previous = grid;
    prevValue = s.eigen.phi;
    rep.final = std::move(s);
  }
  for (std::size_t k = 0; k + 1 < rep.lambdas.size(); ++k)
    if (rep.lambdas[k + 1] < rep.lambdas[k] - options.monotoneSlack) {
      rep.monotonicityViolations.push_back(k);
      rep.warnings.push_back("lambda decreased between radii " + std::to_string(rep.radii[k]) + " and " +
                             std::to_string(rep.radii[k + 1]) + "; refine h");
    }
  const std::size_t n = rep.lambdas.size();
  rep.converged = n >= 2 && std::abs(rep.lambdas[n - 1] - rep.lambdas[n - 2]) <= options.sweepTol;
  const GeometricTail tail = geometric_tail(rep.lambdas);
  rep.extrapolationValid = tail.valid;
  rep.extrapolated = rep.lambdas.back() + (tail.valid ? tail.tail : 0.0);
  return rep;
}

std::pair<StrategyField, StrategyField> extract_saddle(const IsaacsSolve& solve) {
  if (!solve.converged) throw ConfigurationError("cannot extract selectors from an unconverged solve");
  return {solve.v1, solve.v2};
}

GameModel perturbed_model(const GameModel& model, const Perturbation& perturbation, double m, double costSup) {
  if (!(m > 0.0)) throw ConfigurationError("perturbation index m must be positive");
  const CostFn base = model.costFunction();
  CostFn cost;
  if (perturbation.kind == Perturbation::Kind::Bounded) {
    const double top = costSup + perturbation.delta;
    cost = [base, m, top](std::span<const double> x, double u1, double u2) {
      const double z = smooth_cutoff(norm_of(x), m);
      return z * base(x, u1, u2) + (1.0 - z) * top;
    };
  } else {
    if (!perturbation.ell) throw ConfigurationError("unbounded perturbation needs ell");
    const ScalarFieldFn ell = perturbation.ell;
    cost = [base, ell, m](std::span<const double> x, double u1, double u2) { return base(x, u1, u2) + ell(x) / m; };
  }
  GameModel out(model.name() + "/perturbed", model.dimension(), model.driftFunction(), model.diffusionFunction(),
                cost, model.actions1(), model.actions2());
  out.setCostBounded(model.costBounded());
  return out;
}

SinglePlayerReport solve_single_player(const GameModel& model, const Grid& grid, SinglePlayerMode mode,
                                       const std::optional<StrategyField>& frozen,
                                       const std::optional<Perturbation>& perturbation,
                                       const SolverOptions& options) {
  const bool maximize = mode == SinglePlayerMode::Maximize;
  const std::size_t frozenActions = maximize ? model.actions1().size() : model.actions2().size();
  if (frozen) {
    if (frozen->points() != grid.interiorCount() || frozen->actions() != frozenActions)
      throw ConfigurationError("frozen strategy field does not match the grid or action set");
  } else if (frozenActions != 1) {
    throw ConfigurationError("the frozen player has several actions; supply its strategy field");
  }
  const Rule rule = maximize ? Rule::Maximize : Rule::Minimize;
  SinglePlayerReport rep;
  rep.solve = policy_iteration(model, grid, rule, frozen, options);
  if (perturbation) {
    double sup = 0.0;
    if (perturbation->costSup) {
      sup = *perturbation->costSup;
    } else {
      for (std::size_t i = 0; i < grid.interiorCount(); ++i) {
        const Point x = grid.point(i);
        for (std::size_t a = 0; a < model.actions1().size(); ++a)
          for (std::size_t b = 0; b < model.actions2().size(); ++b)
            sup = std::max(sup, model.cost(std::span<const double>(x.data(), grid.dimension()), a, b));
      }
    }
    for (double m : perturbation->ms) {
      const GameModel pm = perturbed_model(model, *perturbation, m, sup);
      const IsaacsSolve s = policy_iteration(pm, grid, rule, frozen, options);
      rep.perturbed.push_back({m, s.eigen.lambda, s.converged});
    }
  }
  return rep;
}

}  // namespace hji
