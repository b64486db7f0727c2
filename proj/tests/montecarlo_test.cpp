#include <doctest.h>

#include <cmath>

#include "hji/builtin_models.hpp"
#include "hji/error.hpp"
#include "hji/isaacs.hpp"
#include "hji/montecarlo.hpp"

using namespace hji;

namespace {

// dX = drift(x, u2) dt + sigma dW in one dimension, cost(x, u2).
GameModel scalar_model(std::function<double(double, double)> drift, double sigma,
                       std::function<double(double, double)> cost, ActionSet a2 = ActionSet::singleton()) {
  auto b = [drift](std::span<const double> x, double, double u2, std::span<double> out) { out[0] = drift(x[0], u2); };
  auto s = [sigma](std::span<const double>, std::span<double> out) { out[0] = sigma; };
  auto c = [cost](std::span<const double> x, double, double u2) { return cost(x[0], u2); };
  return GameModel("scalar", 1, b, s, c, ActionSet::singleton(), std::move(a2));
}

SimConfig small(double x0, double T, double dt, std::size_t paths, std::uint64_t seed = 7) {
  SimConfig c;
  c.x0 = {x0, 0.0};
  c.T = T;
  c.dt = dt;
  c.paths = paths;
  c.seed = seed;
  c.workers = 1;
  return c;
}

StrategyField single(const Grid& g) { return StrategyField::pure(g.interiorCount(), 1, 0); }

ActionSet binary() { return ActionSet({"u2=0", "u2=1"}, {0.0, 1.0}); }

}  // namespace

TEST_SUITE("montecarlo") {
  TEST_CASE("configuration is validated") {
    SimConfig c = small(0, 1, 0.1, 100);
    CHECK_NOTHROW(c.validate());
    c.T = 0.5;
    CHECK_THROWS_AS(c.validate(), ConfigurationError);
    c = small(0, 1, 0.1, 99);
    CHECK_THROWS_AS(c.validate(), ConfigurationError);
    c = small(0, 1, 0.0, 100);
    CHECK_THROWS_AS(c.validate(), ConfigurationError);
    c = small(0, 1, 0.1, 100);
    c.burnIn = 0.6;
    CHECK_THROWS_AS(c.validate(), ConfigurationError);
  }

  TEST_CASE("noiseless Euler steps by hand") {
    const GameModel m = scalar_model([](double x, double) { return -x; }, 0.0, [](double x, double) { return x; });
    const Grid g(1, 2.0, 0.1);
    const SimConfig c = small(1.0, 1.0, 0.1, 100);
    const PathEnsemble e = simulate_paths(m, g, single(g), single(g), c);
    const double last = std::pow(0.9, 10);
    for (std::size_t p = 0; p < c.paths; ++p) {
      CHECK(std::abs(e.finalState[p][0] - last) <= 1e-14);
      CHECK(std::abs(e.integral.back()[p] - (1.0 - last)) <= 1e-13);  // 0.1 * sum_k 0.9^k
    }
    const RiskEstimate r = estimate_from(e, c);
    CHECK(std::abs(r.value - (1.0 - last)) <= 1e-13);
    CHECK(r.standardError <= 1e-13);
    // one step
    const PathEnsemble one = simulate_paths(m, g, single(g), single(g), small(1.0, 1.0, 0.1, 100));
    CHECK(e.checkpoints.back() == 1.0);
    CHECK(one.integral.front()[0] == doctest::Approx(0.1 * (1 + 0.9 + 0.81)));  // T/4 rounds to 3 steps
  }

  TEST_CASE("constant cost is estimated exactly") {
    const GameModel m = scalar_model([](double x, double) { return -x; }, 1.0, [](double, double) { return 0.3; });
    const Grid g(1, 4.0, 0.1);
    SimConfig c = small(0.5, 10.0, 0.01, 200);
    const RiskEstimate r = estimate_risk_sensitive(m, g, single(g), single(g), c);
    CHECK(std::abs(r.value - 0.3) <= 1e-12);
    CHECK(r.standardError <= 1e-12);
    c.burnIn = 2.5;
    const RiskEstimate b = estimate_risk_sensitive(m, g, single(g), single(g), c);
    CHECK(b.burnInUsed);
    CHECK(std::abs(b.value - 0.3) <= 1e-12);
    const std::vector<Point> starts{{-1.0, 0}, {0.0, 0}, {2.0, 0}};
    const IndependenceReport ind = check_value_independence(m, g, single(g), single(g), starts, c);
    CHECK(ind.passed);
    CHECK(ind.maxJointZ == 0.0);
    CHECK_THROWS_AS(check_value_independence(m, g, single(g), single(g), {{0.0, 0}}, c), ConfigurationError);
  }

  TEST_CASE("results do not depend on the worker count") {
    const GameModel m = make_builtin_model("game-1d");
    const Grid g(1, 3.0, 0.05);
    const IsaacsSolve s = dirichlet_isaacs(m, g);
    SimConfig c = small(0.0, 2.0, 0.01, 2000);
    c.workers = 1;
    const RiskEstimate a = estimate_risk_sensitive(m, g, s.v1, s.v2, c);
    c.workers = 3;
    const RiskEstimate b = estimate_risk_sensitive(m, g, s.v1, s.v2, c);
    CHECK(a.value == b.value);
    CHECK(a.standardError == b.standardError);
    CHECK(a.logMoments == b.logMoments);
    c.seed = 8;
    CHECK(estimate_risk_sensitive(m, g, s.v1, s.v2, c).value != a.value);
  }

  TEST_CASE("common random numbers: pathwise ordering of costs") {
    // Drift does not see the control, so both pairs follow the same path and
    // the cost under u2 = 1 dominates path by path.
    const GameModel m = scalar_model([](double x, double) { return -x; }, 1.0,
                                     [](double x, double u2) { return 0.1 * x * x * (1.0 + u2); }, binary());
    const Grid g(1, 5.0, 0.1);
    const std::size_t n = g.interiorCount();
    const StrategyField lo = StrategyField::pure(n, 2, 0), hi = StrategyField::pure(n, 2, 1), one = single(g);
    const SimConfig c = small(0.0, 2.0, 0.01, 500);
    const auto runs = simulate_common(m, g, {{&one, &lo}, {&one, &hi}}, c);
    for (std::size_t p = 0; p < c.paths; ++p) {
      CHECK(runs[0].finalState[p][0] == runs[1].finalState[p][0]);
      CHECK(std::abs(runs[1].integral.back()[p] - 2.0 * runs[0].integral.back()[p]) <= 1e-12);
    }
    // a lone simulation reproduces the lockstep one
    const PathEnsemble alone = simulate_paths(m, g, one, hi, c);
    CHECK(alone.integral.back() == runs[1].integral.back());
  }

  TEST_CASE("OU stationary variance") {
    const GameModel m = scalar_model([](double x, double) { return -x; }, 1.0, [](double, double) { return 0.0; });
    const Grid g(1, 8.0, 0.1);
    const SimConfig c = small(0.0, 8.0, 0.01, 20000);
    const PathEnsemble e = simulate_paths(m, g, single(g), single(g), c);
    double s = 0.0, s2 = 0.0;
    for (const Point& x : e.finalState) {
      s += x[0];
      s2 += x[0] * x[0];
    }
    const double n = static_cast<double>(c.paths), mean = s / n, var = s2 / n - mean * mean;
    // Euler-Maruyama for this SDE has stationary variance 1 / (2 - dt)
    CHECK(std::abs(mean) <= 4 * std::sqrt(0.5 / n));
    CHECK(std::abs(var - 1.0 / (2.0 - c.dt)) <= 4 * 0.5 * std::sqrt(2.0 / n));
  }

  TEST_CASE("chain simulation estimates the Perron root") {
    const GameModel m = make_builtin_model("game-1d");
    const Grid g(1, 1.0, 0.25);
    const IsaacsSolve s = dirichlet_isaacs(m, g);
    const DiscreteOperator op = assemble_fixed(m, g, s.v1, s.v2);
    const EigenPair e = principal_eigenpair(op);
    SimConfig c = small(0.0, 20.0, 0.01, 20000);
    c.burnIn = 5.0;
    const RiskEstimate r = estimate_chain(op.matrix, op.originIndex, c);
    CHECK(std::abs(r.value - e.lambda) <= 4 * r.standardError);
    CHECK(r.standardError < 0.01);
    CHECK_THROWS_AS(estimate_chain(op.matrix, 100, c), ConfigurationError);
  }

  TEST_CASE("deviation library") {
    const GameModel m = make_builtin_model("game-1d");
    const Grid g(1, 1.0, 0.1);
    const std::size_t n = g.interiorCount();
    const StrategyField v1(n, 2), v2 = StrategyField::pure(n, 2, 1);
    const DeviationLibrary lib = make_deviations(m, v1, v2, 10, 11);
    REQUIRE(lib.player1.size() == 10);
    REQUIRE(lib.player2.size() == 10);
    CHECK(lib.player2[0].field == StrategyField::pure(n, 2, 0));
    CHECK(lib.player2[1].field == StrategyField::pure(n, 2, 1));
    // eps-mixtures stay within 2 eps per point of the saddle field
    CHECK(lib.player2[2].field.distance(v2) <= 2 * 0.2 * n + 1e-12);
    CHECK(lib.player2[2].field.distance(v2) >= 0.0);
    const DeviationLibrary again = make_deviations(m, v1, v2, 10, 11);
    for (std::size_t k = 0; k < 10; ++k) CHECK(again.player1[k].field == lib.player1[k].field);
    const DeviationLibrary none = make_deviations(m, v1, v2, 0, 11);
    CHECK(none.player1.empty());
    CHECK(none.player2.empty());
  }

  TEST_CASE("verify with no deviations reduces to the saddle estimate") {
    const GameModel m = scalar_model([](double x, double) { return -x; }, 1.0, [](double, double) { return 0.2; });
    const Grid g(1, 3.0, 0.1);
    const SimConfig c = small(0.0, 2.0, 0.01, 200);
    const VerifyReport ok = verify_saddle(m, g, single(g), single(g), 0.2, {}, c);
    CHECK(ok.passed);
    CHECK(ok.margins.empty());
    const VerifyReport off = verify_saddle(m, g, single(g), single(g), 1.2, {}, c);
    CHECK_FALSE(off.passed);
    CHECK_FALSE(off.saddleMatches);
  }

  TEST_CASE("a deviation that raises the cost is flagged for the maximizer") {
    const GameModel m = scalar_model([](double x, double) { return -x; }, 1.0,
                                     [](double, double u2) { return 0.1 + 0.2 * u2; }, binary());
    const Grid g(1, 3.0, 0.1);
    const std::size_t n = g.interiorCount();
    const SimConfig c = small(0.0, 2.0, 0.01, 200);
    DeviationLibrary lib;
    lib.player2.push_back({"up", StrategyField::pure(n, 2, 1)});
    const VerifyReport r = verify_saddle(m, g, single(g), StrategyField::pure(n, 2, 0), 0.1, lib, c);
    CHECK(r.saddleMatches);
    REQUIRE(r.margins.size() == 1);
    CHECK(r.margins[0].violated);
    CHECK(r.margins[0].margin == doctest::Approx(-0.2));
    CHECK_FALSE(r.passed);
  }

  TEST_CASE("representation of a constant eigenfunction") {
    // c = kappa and V = 1 solve L V + c V = kappa V on the whole line.
    const double kappa = 0.3;
    const GameModel m = scalar_model([](double x, double) { return -x; }, 1.0, [=](double, double) { return kappa; });
    const Grid g(1, 10.0, 0.1);
    const Eigen::VectorXd V = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(g.interiorCount()));
    const RepresentationReport r =
        check_representation(m, g, V, kappa, single(g), single(g), 1.0, small(3.0, 10.0, 0.01, 1000));
    CHECK(r.lhs == 1.0);
    CHECK(std::abs(r.rhs - 1.0) <= 1e-12);
    CHECK(r.relativeError <= 1e-12);
    CHECK_FALSE(r.inconclusive);
    // a wrong Lambda shows up
    const RepresentationReport w =
        check_representation(m, g, V, kappa + 0.5, single(g), single(g), 1.0, small(3.0, 10.0, 0.01, 1000));
    CHECK(w.relativeError > 0.1);
  }

  TEST_CASE("diverging paths are an estimation error") {
    const GameModel m = scalar_model([](double x, double) { return x * x * x; }, 1.0, [](double, double) { return 0.0; });
    const Grid g(1, 3.0, 0.1);
    const SimConfig c = small(2.9, 5.0, 0.05, 200);
    const PathEnsemble e = simulate_paths(m, g, single(g), single(g), c);
    CHECK(e.divergedPaths > 2);
    CHECK(e.leftGrid > 0);
    CHECK_THROWS_AS(estimate_from(e, c), EstimationError);
  }

  TEST_CASE("seeds per path") {
    CHECK(path_seed(1, 0) != path_seed(1, 1));
    CHECK(path_seed(1, 0) != path_seed(2, 0));
    CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
  }
}
