#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hji {

/// Finite zero-sum game. Rows belong to the minimizer (player 1, u1), columns
/// to the maximizer (player 2, u2); the row player pays H(i, j).
class MatrixGame {
 public:
  MatrixGame() = default;
  /// Throws InvalidGameError on an empty matrix or a non-finite entry.
  explicit MatrixGame(Eigen::MatrixXd payoff);

  const Eigen::MatrixXd& payoff() const { return payoff_; }
  Eigen::Index rows() const { return payoff_.rows(); }
  Eigen::Index cols() const { return payoff_.cols(); }

 private:
  Eigen::MatrixXd payoff_;
};

enum class SolvePath { PureSaddle, SupportEnumeration, LinearProgram, PureOnly };

const char* to_string(SolvePath path);

struct GameSolution {
  double value = 0.0;
  std::vector<double> p;  // over rows (minimizer)
  std::vector<double> q;  // over columns (maximizer)
  /// max_j (p^T H)_j - min_i (H q)_i. For PureOnly solutions this is the
  /// pure min-max minus the pure max-min instead.
  double gap = 0.0;
  SolvePath path = SolvePath::PureSaddle;
};

/// Value and optimal mixed strategies.
///
/// Tries a pure saddle first, then support enumeration over equal-size
/// square supports (min(m, n) <= 4), else a dense simplex on the shifted game
/// LP. Among equally good answers the lexicographically first support wins,
/// so results are deterministic.
GameSolution solve_game(const MatrixGame& game);

/// Restriction to pure strategies, used where the payoff is not bilinear in
/// the mixtures. Player 2 moves outermost: value = max_j min_i H(i, j), q is
/// that column and p the first best reply to it; gap = min_i max_j - value.
GameSolution solve_pure_game(const MatrixGame& game);

/// max_j (p^T H)_j - min_i (H q)_i; zero exactly at a saddle.
double duality_gap(const Eigen::MatrixXd& H, const std::vector<double>& p, const std::vector<double>& q);

/// True when (p, q) guarantees within eps: every column pays at most
/// value + eps against p and every row pays at least value - eps against q.
bool is_eps_saddle(const Eigen::MatrixXd& H, const std::vector<double>& p, const std::vector<double>& q,
                   double value, double eps);

}  // namespace hji
