#include <doctest.h>

#include <cmath>
#include <random>

#include "hji/builtin_models.hpp"
#include "hji/error.hpp"
#include "hji/model.hpp"

using namespace hji;

namespace {

void unit_sigma(std::span<const double> x, std::span<double> out) {
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = 0.0;
  for (std::size_t a = 0; a < x.size(); ++a) out[a * x.size() + a] = 1.0;
}

GameModel difference_game() {
  // b = u1 - u2, c = u1 u2 on {0,1}^2
  return GameModel(
      "diff", 1, [](std::span<const double>, double u1, double u2, std::span<double> out) { out[0] = u1 - u2; },
      unit_sigma, [](std::span<const double>, double u1, double u2) { return u1 * u2; },
      ActionSet({"a0", "a1"}, {0.0, 1.0}), ActionSet({"b0", "b1"}, {0.0, 1.0}));
}

std::vector<double> random_mixture(std::mt19937_64& rng, std::size_t k) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> w(k);
  double s = 0.0;
  for (auto& x : w) s += (x = e(rng));
  for (auto& x : w) x /= s;
  return w;
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("action sets and mixtures validate") {
    CHECK_THROWS_AS(ActionSet({}, {}), ConfigurationError);
    CHECK_THROWS_AS(ActionSet({"a", "a"}, {0.0, 1.0}), ConfigurationError);
    CHECK_THROWS_AS(ActionSet({"a"}, {0.0, 1.0}), ConfigurationError);
    CHECK_THROWS_AS(ActionSet({"a"}, {NAN}), ConfigurationError);
    CHECK_THROWS_AS(MixedAction({0.5, 0.6}), ConfigurationError);
    CHECK_THROWS_AS(MixedAction({1.5, -0.5}), ConfigurationError);
    CHECK_NOTHROW(MixedAction({0.25, 0.75}));
  }

  TEST_CASE("relaxed coefficients by hand expansion") {
    const GameModel m = difference_game();
    const double x[1] = {0.3};
    const auto half = MixedAction::uniform(2);
    CHECK(relaxed_drift(m, x, half, half)[0] == 0.0);
    CHECK(relaxed_cost(m, x, half, half) == 0.25);
    CHECK(relaxed_drift(m, x, MixedAction::pure(2, 1), MixedAction::pure(2, 0))[0] == 1.0);
    CHECK(relaxed_cost(m, x, MixedAction::pure(2, 1), MixedAction::pure(2, 1)) == 1.0);
  }

  TEST_CASE("marginal collapse and constant cost") {
    GameModel m("m", 1, [](std::span<const double>, double u1, double, std::span<double> out) { out[0] = 2 * u1; },
                unit_sigma, [](std::span<const double>, double, double) { return 0.7; },
                ActionSet({"a0", "a1"}, {0.0, 1.0}), ActionSet({"b0", "b1", "b2"}, {0.0, 1.0, 2.0}));
    const double x[1] = {0.0};
    const MixedAction nu1({0.3, 0.7});
    for (auto nu2 : {MixedAction::pure(3, 2), MixedAction({0.2, 0.3, 0.5})}) {
      CHECK(relaxed_drift(m, x, nu1, nu2)[0] == doctest::Approx(1.4));
      CHECK(relaxed_cost(m, x, nu1, nu2) == doctest::Approx(0.7));
    }
  }

  TEST_CASE("bilinearity and the cost range") {
    const GameModel m = make_builtin_model("game-1d");
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> xs(-4.0, 4.0), alpha(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
      const double x[1] = {xs(rng)};
      const auto a = random_mixture(rng, 2), b = random_mixture(rng, 2), c = random_mixture(rng, 2);
      const double al = alpha(rng);
      std::vector<double> mix(2);
      for (int k = 0; k < 2; ++k) mix[k] = al * a[k] + (1 - al) * b[k];
      double d1[1], d2[1], d3[1];
      relaxed_drift(m, x, mix, c, d1);
      relaxed_drift(m, x, a, c, d2);
      relaxed_drift(m, x, b, c, d3);
      CHECK(std::abs(d1[0] - (al * d2[0] + (1 - al) * d3[0])) <= 1e-12);
      const double cost = relaxed_cost(m, x, mix, c);
      double lo = INFINITY, hi = -INFINITY;
      for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
          lo = std::min(lo, m.cost(x, i, j));
          hi = std::max(hi, m.cost(x, i, j));
        }
      CHECK(cost >= lo - 1e-15);
      CHECK(cost <= hi + 1e-15);
    }
  }

  TEST_CASE("non-finite evaluation is reported") {
    GameModel m("bad", 1, [](std::span<const double> x, double, double, std::span<double> out) { out[0] = 1.0 / x[0]; },
                unit_sigma, [](std::span<const double>, double, double) { return 0.0; }, ActionSet::singleton(),
                ActionSet::singleton());
    const double x[1] = {0.0};
    CHECK_THROWS_AS(relaxed_drift(m, x, MixedAction::pure(1, 0), MixedAction::pure(1, 0)), ModelEvaluationError);
  }

  TEST_CASE("pair evaluator agrees with the scalar evaluators") {
    for (const char* name : {"game-1d", "example-2.2", "example-2.3", "example-2.5", "ou-benchmark"}) {
      const GameModel m = make_builtin_model(name);
      const std::size_t n1 = m.actions1().size(), n2 = m.actions2().size();
      std::vector<double> drift(n1 * n2), cost(n1 * n2);
      for (double xv : {-3.2, -1.0, -0.4, 0.0, 0.7, 2.5}) {
        const double x[1] = {xv};
        m.evaluatePairs(x, drift, cost);
        for (std::size_t i = 0; i < n1; ++i)
          for (std::size_t j = 0; j < n2; ++j) {
            double b[1];
            m.drift(x, i, j, b);
            CHECK(drift[i * n2 + j] == b[0]);
            CHECK(cost[i * n2 + j] == m.cost(x, i, j));
          }
      }
    }
  }

  TEST_CASE("example 2.2 constant-rate certificate: gamma 0.4 passes, 0.6 fails") {
    const GameModel m = make_builtin_model("example-2.2", 1);
    auto cert = *builtin_certificate("example-2.2");
    const Grid probe(1, 10.0, 0.05);
    cert.gamma = 0.4;
    const ConditionReport ok = check_condition(m, cert, probe);
    CHECK(ok.passed);
    CHECK(ok.lyapunovHolds);
    CHECK(ok.costHolds);
    cert.gamma = 0.6;
    const ConditionReport bad = check_condition(m, cert, probe);
    CHECK_FALSE(bad.passed);
    CHECK_FALSE(bad.lyapunovHolds);
    CHECK_FALSE(bad.violations.empty());
  }

  TEST_CASE("example 2.2 in two dimensions") {
    const GameModel m = make_builtin_model("example-2.2", 2);
    auto cert = *builtin_certificate("example-2.2", 2);
    CHECK(cert.compactRadius == 5.0);
    CHECK(check_condition(m, cert, Grid(2, 8.0, 0.1)).passed);
  }

  TEST_CASE("example 2.3 saturating certificate passes at gamma 0.5") {
    const GameModel m = make_builtin_model("example-2.3");
    const auto cert = *builtin_certificate("example-2.3");
    CHECK(cert.gamma == 0.5);
    const ConditionReport r = check_condition(m, cert, Grid(1, 10.0, 0.05));
    CHECK(r.passed);
    CHECK(r.maxCost < 0.5);
  }

  TEST_CASE("constant Lyapunov candidate fails") {
    const GameModel m = make_builtin_model("example-2.2", 1);
    LyapunovCertificate cert;
    cert.kind = LyapunovCertificate::Kind::ConstantRate;
    cert.lyapunov = [](std::span<const double>) { return 1.0; };
    cert.gamma = 0.4;
    cert.compactRadius = 2.0;
    const ConditionReport r = check_condition(m, cert, Grid(1, 10.0, 0.05));
    CHECK_FALSE(r.passed);
    CHECK_FALSE(r.lyapunovHolds);
  }

  TEST_CASE("inf-compact certificates of the shipped unbounded models") {
    for (const char* name : {"example-2.5", "ou-benchmark"}) {
      const auto cert = *builtin_certificate(name);
      CHECK(cert.kind == LyapunovCertificate::Kind::InfCompactRate);
      const ConditionReport r = check_condition(make_builtin_model(name), cert, Grid(1, 10.0, 0.05));
      CHECK_MESSAGE(r.passed, name);
      CHECK(r.infCompactProbed);
    }
  }

  TEST_CASE("assumption audit") {
    const AssumptionReport ou = check_assumptions(make_builtin_model("ou-benchmark"), Grid(1, 8.0, 0.1));
    CHECK(ou.passed);
    for (const auto& b : ou.bands) CHECK(b.minEigenvalue == doctest::Approx(1.0));
    // b = -x is dissipative: <b, x>^+ = 0, so the ratio is |sigma|^2 / (1 + |x|^2) <= 1
    CHECK(ou.growthConstant <= 1.0 + 1e-12);

    GameModel unstable("unstable", 1,
                       [](std::span<const double> x, double, double, std::span<double> out) { out[0] = x[0]; },
                       unit_sigma, [](std::span<const double>, double, double) { return 0.1; },
                       ActionSet::singleton(), ActionSet::singleton());
    CHECK(check_assumptions(unstable, Grid(1, 8.0, 0.1)).passed);
    LyapunovCertificate cert;
    cert.lyapunov = exp_radial_lyapunov;
    cert.gamma = 0.4;
    cert.compactRadius = 2.0;
    CHECK_FALSE(check_condition(unstable, cert, Grid(1, 8.0, 0.1)).passed);

    GameModel flat("flat", 1, [](std::span<const double>, double, double, std::span<double> out) { out[0] = 0.0; },
                   [](std::span<const double>, std::span<double> out) { out[0] = 0.0; },
                   [](std::span<const double>, double, double) { return 0.0; }, ActionSet::singleton(),
                   ActionSet::singleton());
    const AssumptionReport f = check_assumptions(flat, Grid(1, 4.0, 0.1));
    CHECK_FALSE(f.passed);
    CHECK_FALSE(f.bands.front().nondegenerate);
  }

  TEST_CASE("built-in names") {
    CHECK(builtin_model_names().size() == 5);
    CHECK_THROWS_AS(make_builtin_model("nope"), ConfigurationError);
    CHECK_THROWS_AS(make_builtin_model("game-1d", 2), ConfigurationError);
    CHECK(make_builtin_model("example-2.2", 2).dimension() == 2);
  }

  TEST_CASE("grid construction") {
    const Grid g1(1, 1.0, 0.5);
    REQUIRE(g1.interiorCount() == 3);
    CHECK(g1.point(0)[0] == -0.5);
    CHECK(g1.point(2)[0] == 0.5);
    CHECK(g1.boundaryCount() == 2);
    CHECK(g1.point(g1.originIndex())[0] == 0.0);
    const Grid g2(2, 1.0, 1.0);
    CHECK(g2.interiorCount() == 1);
    CHECK(g2.boundaryCount() == 8);
    CHECK(Grid(1, 6.0, 0.01).interiorCount() == 1199);
    CHECK_THROWS_AS(Grid(1, 1.0, 0.3), ConfigurationError);
    CHECK_THROWS_AS(Grid(3, 1.0, 0.5), ConfigurationError);
    CHECK_THROWS_AS(Grid(1, 1.0, -0.5), ConfigurationError);
  }
}
