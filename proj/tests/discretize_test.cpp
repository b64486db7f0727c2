#include <doctest.h>

#include <cmath>

#include "hji/builtin_models.hpp"
#include "hji/discretize.hpp"
#include "hji/error.hpp"

using namespace hji;

namespace {

GameModel scalar_model(std::function<double(double)> b, double sigma, double c) {
  return GameModel(
      "scalar", 1, [b](std::span<const double> x, double, double, std::span<double> out) { out[0] = b(x[0]); },
      [sigma](std::span<const double>, std::span<double> out) { out[0] = sigma; },
      [c](std::span<const double>, double, double) { return c; }, ActionSet::singleton(), ActionSet::singleton());
}

// a = [[1, rho], [rho, 1]] from a lower-triangular sigma.
GameModel correlated_model(double rho) {
  return GameModel(
      "corr", 2, [](std::span<const double>, double, double, std::span<double> out) { out[0] = out[1] = 0.0; },
      [rho](std::span<const double>, std::span<double> out) {
        out[0] = 1.0;
        out[1] = 0.0;
        out[2] = rho;
        out[3] = std::sqrt(1.0 - rho * rho);
      },
      [](std::span<const double>, double, double) { return 0.0; }, ActionSet::singleton(), ActionSet::singleton());
}

DiscreteOperator fixed(const GameModel& m, const Grid& g) {
  return assemble_fixed(m, g, StrategyField(g.interiorCount(), m.actions1().size()),
                        StrategyField(g.interiorCount(), m.actions2().size()));
}

Eigen::VectorXd sample(const Grid& g, std::function<double(const Point&)> f) {
  Eigen::VectorXd v(g.interiorCount());
  for (std::size_t i = 0; i < g.interiorCount(); ++i) v(i) = f(g.point(i));
  return v;
}

bool away_from_boundary(const Grid& g, std::size_t i) {
  for (int s0 = -1; s0 <= 1; ++s0)
    for (int s1 = -1; s1 <= 1; ++s1) {
      if (g.dimension() == 1 && s1 != 0) continue;
      if (g.shifted(i, {s0, s1}) < 0) return false;
    }
  return true;
}

}  // namespace

TEST_SUITE("discretize") {
  TEST_CASE("pure Laplacian stencil") {
    const Grid g(1, 1.0, 0.1);
    const DiscreteOperator op = fixed(scalar_model([](double) { return 0.0; }, 1.0, 0.0), g);
    const double w = 1.0 / (2 * 0.01);
    const std::size_t i = g.originIndex();
    CHECK(op.matrix.coeff(i, i) == doctest::Approx(-2 * w));
    CHECK(op.matrix.coeff(i, i - 1) == doctest::Approx(w));
    CHECK(op.matrix.coeff(i, i + 1) == doctest::Approx(w));
    CHECK(op.monotone);
    CHECK_FALSE(op.upwindUsed);
    CHECK(op.originIndex == i);
  }

  TEST_CASE("constant cost shifts the diagonal") {
    const Grid g(1, 1.0, 0.1);
    const DiscreteOperator a = fixed(scalar_model([](double x) { return -x; }, 1.0, 0.0), g);
    const DiscreteOperator b = fixed(scalar_model([](double x) { return -x; }, 1.0, 0.7), g);
    for (std::size_t i = 0; i < g.interiorCount(); ++i) {
      CHECK(b.matrix.coeff(i, i) - a.matrix.coeff(i, i) == doctest::Approx(0.7));
      CHECK(b.cost(i) == 0.7);
    }
    CHECK((b.generator() - a.matrix).norm() < 1e-12);
  }

  TEST_CASE("central differences are exact on quadratics") {
    const Grid g(1, 1.0, 0.01);
    const auto q = sample(g, [](const Point& x) { return x[0] * x[0]; });
    const Eigen::VectorXd lap = fixed(scalar_model([](double) { return 0.0; }, 1.0, 0.0), g).matrix * q;
    const Eigen::VectorXd ou = fixed(scalar_model([](double x) { return -x; }, 1.0, 0.0), g).matrix * q;
    for (std::size_t i = 0; i < g.interiorCount(); ++i) {
      if (!away_from_boundary(g, i)) continue;
      const double x = g.point(i)[0];
      CHECK(std::abs(lap(i) - 1.0) <= 1e-9);
      CHECK(std::abs(ou(i) - (1.0 - 2 * x * x)) <= 1e-9);
    }
  }

  TEST_CASE("cross derivative splitting is exact on quadratics") {
    for (double rho : {0.4, -0.4}) {
      const Grid g(2, 1.0, 0.1);
      const DiscreteOperator op = fixed(correlated_model(rho), g);
      CHECK(op.monotone);
      const Eigen::VectorXd xy = op.matrix * sample(g, [](const Point& x) { return x[0] * x[1]; });
      const Eigen::VectorXd xx = op.matrix * sample(g, [](const Point& x) { return x[0] * x[0]; });
      const Eigen::VectorXd yy = op.matrix * sample(g, [](const Point& x) { return x[1] * x[1]; });
      for (std::size_t i = 0; i < g.interiorCount(); ++i) {
        if (!away_from_boundary(g, i)) continue;
        CHECK(std::abs(xy(i) - rho) <= 1e-9);
        CHECK(std::abs(xx(i) - 1.0) <= 1e-9);
        CHECK(std::abs(yy(i) - 1.0) <= 1e-9);
      }
    }
  }

  TEST_CASE("upwind fallback when drift dominates") {
    const Grid g(1, 1.0, 0.25);
    const DiscreteOperator op = fixed(scalar_model([](double x) { return -10 * x; }, 1.0, 0.0), g);
    CHECK(op.upwindUsed);
    CHECK(op.upwindPoints == 4);  // x = +-0.5, +-0.75 have h abs(b) > 1
    CHECK(op.monotone);
    CHECK(op.pecletMargin == doctest::Approx(1.875));
    for (int k = 0; k < op.matrix.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(op.matrix, k); it; ++it)
        if (it.row() != it.col()) CHECK(it.value() >= 0.0);
  }

  TEST_CASE("generator rows: zero sums inside, killing at the edge") {
    const Grid g(1, 2.0, 0.1);
    const DiscreteOperator op = fixed(make_builtin_model("game-1d"), g);
    const SparseMatrix gen = op.generator();
    for (std::size_t i = 0; i < g.interiorCount(); ++i) {
      double s = 0.0;
      for (SparseMatrix::InnerIterator it(gen, i); it; ++it) s += it.value();
      if (away_from_boundary(g, i))
        CHECK(std::abs(s) <= 1e-9);
      else
        CHECK(s < 0.0);
    }
  }

  TEST_CASE("degenerate diffusion is rejected") {
    const Grid g(1, 1.0, 0.1);
    CHECK_THROWS_AS(fixed(scalar_model([](double) { return 0.0; }, 0.0, 0.0), g), NondegeneracyError);
  }

  TEST_CASE("local payoff by hand: b = u1 - u2 on V = x") {
    const GameModel m(
        "diff", 1, [](std::span<const double>, double u1, double u2, std::span<double> out) { out[0] = u1 - u2; },
        [](std::span<const double>, std::span<double> out) { out[0] = 1.0; },
        [](std::span<const double> x, double u1, double u2) { return std::abs(x[0]) * (1 + u1 + u2); },
        ActionSet({"a0", "a1"}, {0.0, 1.0}), ActionSet({"b0", "b1"}, {0.0, 1.0}));
    const Grid g(1, 2.0, 0.5);
    const auto V = sample(g, [](const Point& x) { return x[0]; });
    const std::size_t o = g.originIndex();
    const LocalHamiltonian lh = local_hamiltonian(m, g, o, {V.data(), static_cast<std::size_t>(V.size())});
    CHECK(lh.bilinear);
    // second difference of a linear field is 0, slope 1, c V = 0 at x = 0
    const Eigen::MatrixXd& H = lh.game.payoff();
    CHECK(H(0, 0) == doctest::Approx(0.0));
    CHECK(H(0, 1) == doctest::Approx(-1.0));
    CHECK(H(1, 0) == doctest::Approx(1.0));
    CHECK(H(1, 1) == doctest::Approx(0.0));

    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(V.size());
    const Eigen::MatrixXd H0 = local_hamiltonian(m, g, 1, {zero.data(), static_cast<std::size_t>(zero.size())}).game.payoff();
    CHECK(H0.cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("control-independent model gives a constant payoff") {
    const GameModel m = make_builtin_model("ou-benchmark");
    const Grid g(1, 2.0, 0.1);
    const auto V = sample(g, [](const Point& x) { return std::exp(0.25 * x[0] * x[0]); });
    const std::span<const double> v(V.data(), V.size());
    const DiscreteOperator op = fixed(m, g);
    const Eigen::VectorXd AV = op.matrix * V;
    for (std::size_t i = 0; i < g.interiorCount(); i += 7) {
      const auto lh = local_hamiltonian(m, g, i, v);
      CHECK(lh.game.payoff().size() == 1);
      CHECK(lh.game.payoff()(0, 0) == doctest::Approx(AV(i)).epsilon(1e-12));
    }
  }

  TEST_CASE("both assembly paths agree under the game's selectors") {
    const GameModel m = make_builtin_model("game-1d");
    const Grid g(1, 3.0, 0.05);
    const auto V = sample(g, [](const Point& x) { return 1.0 + 0.3 * std::sin(2 * x[0]) + 0.1 * x[0]; });
    const std::span<const double> v(V.data(), V.size());
    int mixed = 0;
    for (std::size_t i = 0; i < g.interiorCount(); ++i) {
      const LocalHamiltonian lh = local_hamiltonian(m, g, i, v);
      REQUIRE(lh.bilinear);
      const GameSolution s = solve_game(lh.game);
      if (s.path != SolvePath::PureSaddle) ++mixed;
      CHECK(std::abs(apply_row(m, g, i, s.p, s.q, v) - s.value) <= 1e-10);
      for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b) {
          const double pa[2] = {a == 0 ? 1.0 : 0.0, a == 1 ? 1.0 : 0.0};
          const double pb[2] = {b == 0 ? 1.0 : 0.0, b == 1 ? 1.0 : 0.0};
          CHECK(std::abs(apply_row(m, g, i, pa, pb, v) - lh.game.payoff()(a, b)) <= 1e-10);
        }
    }
    CHECK(mixed > 0);
  }

  TEST_CASE("strategy fields") {
    StrategyField f(3, 2);
    CHECK(f.at(1)[0] == 0.5);
    f.setPure(1, 1);
    CHECK(f.at(1)[1] == 1.0);
    const double bad[2] = {0.7, 0.7};
    CHECK_THROWS_AS(f.set(0, bad), ConfigurationError);
    CHECK_THROWS_AS(f.setPure(0, 2), ConfigurationError);
    CHECK(f.distance(StrategyField(3, 2)) == doctest::Approx(1.0));
    CHECK(StrategyField::pure(3, 2, 0) == StrategyField::pure(3, 2, 0));
  }

  TEST_CASE("field interpolation") {
    const Grid g(1, 1.0, 0.25);
    const auto V = sample(g, [](const Point& x) { return 1.0 - x[0] * x[0]; });
    const std::span<const double> v(V.data(), V.size());
    for (std::size_t i = 0; i < g.interiorCount(); ++i) {
      const double x[1] = {g.point(i)[0]};
      CHECK(interpolate_field(g, v, x) == doctest::Approx(V(i)));
    }
    const double mid[1] = {0.125};
    CHECK(interpolate_field(g, v, mid) == doctest::Approx(0.5 * (1.0 + (1.0 - 0.0625))));
    const double edge[1] = {0.875};  // halfway to the zero boundary value
    CHECK(interpolate_field(g, v, edge) == doctest::Approx(0.5 * (1.0 - 0.5625)));
    const double out[1] = {1.5};
    CHECK(interpolate_field(g, v, out) == 0.0);

    const Grid g2(2, 1.0, 0.5);
    const auto W = sample(g2, [](const Point& x) { return 2.0 + x[0] + 3 * x[1]; });
    const double p[2] = {0.25, -0.25};
    CHECK(interpolate_field(g2, {W.data(), static_cast<std::size_t>(W.size())}, p) == doctest::Approx(1.5));
  }
}
