#include <doctest.h>

#include <cmath>
#include <random>

#include "hji/error.hpp"
#include "hji/matrixgame.hpp"

using namespace hji;

namespace {

Eigen::MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
  Eigen::MatrixXd m(rows.size(), rows.begin()->size());
  int i = 0;
  for (auto r : rows) {
    int j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

double payoff(const Eigen::MatrixXd& H, const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (int i = 0; i < H.rows(); ++i)
    for (int j = 0; j < H.cols(); ++j) s += p[i] * H(i, j) * q[j];
  return s;
}

// Pure max-min and min-max of the matrix: brackets the mixed value.
std::pair<double, double> pure_bounds(const Eigen::MatrixXd& H) {
  return {H.colwise().minCoeff().maxCoeff(), H.rowwise().maxCoeff().minCoeff()};
}

}  // namespace

TEST_SUITE("matrixgame") {
  TEST_CASE("one by one game") {
    const GameSolution s = solve_game(MatrixGame(mat({{0.0}})));
    CHECK(s.value == 0.0);
    CHECK(s.p == std::vector<double>{1.0});
    CHECK(s.q == std::vector<double>{1.0});
  }

  TEST_CASE("matching pennies is uniform") {
    const GameSolution s = solve_game(MatrixGame(mat({{1, -1}, {-1, 1}})));
    CHECK(std::abs(s.value) <= 1e-12);
    CHECK(s.p[0] == doctest::Approx(0.5));
    CHECK(s.q[0] == doctest::Approx(0.5));
  }

  TEST_CASE("two by two indifference") {
    // Rows minimize: 3 p1 = p1 + 2 (1 - p1) gives p1 = 1/2; columns: 3 q1 + q2 = 2 q2 gives q1 = 1/4.
    const Eigen::MatrixXd H = mat({{3, 1}, {0, 2}});
    const GameSolution s = solve_game(MatrixGame(H));
    CHECK(std::abs(s.value - 1.5) <= 1e-10);
    CHECK(std::abs(s.p[0] - 0.5) <= 1e-10);
    CHECK(std::abs(s.p[1] - 0.5) <= 1e-10);
    CHECK(std::abs(s.q[0] - 0.25) <= 1e-10);
    CHECK(std::abs(s.q[1] - 0.75) <= 1e-10);
    CHECK(s.path == SolvePath::SupportEnumeration);
  }

  TEST_CASE("pure saddle shortcut") {
    // Column minima 1, 2, 0 -> max-min 2 at column 1; row maxima 4, 2 -> min-max 2 at row 1.
    const GameSolution s = solve_game(MatrixGame(mat({{1, 3, 4}, {2, 2, 0}})));
    CHECK(s.path == SolvePath::PureSaddle);
    CHECK(s.value == 2.0);
    CHECK(s.p[1] == 1.0);
    CHECK(s.q[1] == 1.0);
  }

  TEST_CASE("rock paper scissors") {
    const Eigen::MatrixXd H = mat({{0, 1, -1}, {-1, 0, 1}, {1, -1, 0}});
    const GameSolution s = solve_game(MatrixGame(H));
    CHECK(std::abs(s.value) <= 1e-10);
    for (int k = 0; k < 3; ++k) {
      CHECK(s.p[k] == doctest::Approx(1.0 / 3));
      CHECK(s.q[k] == doctest::Approx(1.0 / 3));
    }
  }

  TEST_CASE("non-finite or empty payoff is rejected") {
    CHECK_THROWS_AS(MatrixGame(mat({{1, std::nan("")}})), InvalidGameError);
    CHECK_THROWS_AS(MatrixGame(Eigen::MatrixXd(0, 2)), InvalidGameError);
    CHECK_THROWS_AS(MatrixGame(mat({{INFINITY}})), InvalidGameError);
  }

  TEST_CASE("random games satisfy the duality certificate") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> size(2, 6);
    std::uniform_real_distribution<double> entry(-5.0, 5.0);
    int lp = 0;
    for (int t = 0; t < 1000; ++t) {
      const int m = size(rng), n = size(rng);
      Eigen::MatrixXd H(m, n);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) H(i, j) = entry(rng);
      const GameSolution s = solve_game(MatrixGame(H));
      if (s.path == SolvePath::LinearProgram) ++lp;
      REQUIRE(s.gap <= 1e-10);
      CHECK(duality_gap(H, s.p, s.q) <= 1e-10);
      CHECK(is_eps_saddle(H, s.p, s.q, s.value, 1e-9));
      const auto [lo, hi] = pure_bounds(H);
      CHECK(s.value >= lo - 1e-12);
      CHECK(s.value <= hi + 1e-12);
      CHECK(std::abs(payoff(H, s.p, s.q) - s.value) <= 1e-9);
    }
    CHECK(lp > 0);  // both large-support paths get exercised
  }

  TEST_CASE("shift and positive scaling") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> entry(-1.0, 1.0);
    for (int t = 0; t < 200; ++t) {
      Eigen::MatrixXd H = Eigen::MatrixXd::NullaryExpr(4, 5, [&] { return entry(rng); });
      const GameSolution s = solve_game(MatrixGame(H));
      const double kappa = 3.7, alpha = 2.5;
      const Eigen::MatrixXd shifted = (H.array() + kappa).matrix();
      const GameSolution s2 = solve_game(MatrixGame(shifted));
      CHECK(std::abs(s2.value - (s.value + kappa)) <= 1e-10);
      CHECK(std::abs(payoff(shifted, s.p, s.q) - (s.value + kappa)) <= 1e-10);
      const GameSolution s3 = solve_game(MatrixGame(alpha * H));
      CHECK(std::abs(s3.value - alpha * s.value) <= 1e-10);
      CHECK(is_eps_saddle(alpha * H, s.p, s.q, s3.value, 1e-9));
      CHECK(is_eps_saddle(H, s3.p, s3.q, s.value, 1e-9));
    }
  }

  TEST_CASE("skew-symmetric games have value zero") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> entry(-2.0, 2.0);
    for (int t = 0; t < 200; ++t) {
      const int n = 2 + t % 5;
      Eigen::MatrixXd A = Eigen::MatrixXd::NullaryExpr(n, n, [&] { return entry(rng); });
      const Eigen::MatrixXd H = A - A.transpose();
      CHECK(std::abs(solve_game(MatrixGame(H)).value) <= 1e-10);
    }
  }

  TEST_CASE("large games go through the linear program") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> entry(0.0, 1.0);
    Eigen::MatrixXd H = Eigen::MatrixXd::NullaryExpr(8, 9, [&] { return entry(rng); });
    const GameSolution s = solve_game(MatrixGame(H));
    CHECK(s.gap <= 1e-10);
    CHECK(is_eps_saddle(H, s.p, s.q, s.value, 1e-9));
  }

  TEST_CASE("pure game reports its max-min and gap") {
    const Eigen::MatrixXd H = mat({{3, 1}, {0, 2}});
    const GameSolution s = solve_pure_game(MatrixGame(H));
    CHECK(s.path == SolvePath::PureOnly);
    CHECK(s.value == 1.0);  // max over columns of the column minimum: min(3,0)=0, min(1,2)=1
    CHECK(s.q[1] == 1.0);
    CHECK(s.p[0] == 1.0);   // best reply to column 1
    CHECK(s.gap == 1.0);    // min-max is 2
  }

  TEST_CASE("deterministic tie breaking") {
    const Eigen::MatrixXd H = mat({{1, 1}, {1, 1}});
    const GameSolution a = solve_game(MatrixGame(H));
    const GameSolution b = solve_game(MatrixGame(H));
    CHECK(a.p == b.p);
    CHECK(a.q == b.q);
    CHECK(a.p[0] == 1.0);
  }
}
