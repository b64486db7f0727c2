#include "hji/matrixgame.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hji/error.hpp"

namespace hji {

namespace {

double scale_of(const Eigen::MatrixXd& H) { return 1.0 + H.cwiseAbs().maxCoeff(); }

void normalize(std::vector<double>& w) {
  double s = 0.0;
  for (double& v : w) {
    v = std::max(v, 0.0);
    s += v;
  }
  for (double& v : w) v /= s;
}

// Advances `idx` (strictly increasing, values < n) to the next k-subset in
// lexicographic order. Returns false after the last one.
bool next_combination(std::vector<int>& idx, int n) {
  const int k = static_cast<int>(idx.size());
  for (int i = k - 1; i >= 0; --i) {
    if (idx[i] < n - k + i) {
      ++idx[i];
      for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
      return true;
    }
  }
  return false;
}

GameSolution finish(const Eigen::MatrixXd& H, std::vector<double> p, std::vector<double> q, SolvePath path) {
  GameSolution s;
  normalize(p);
  normalize(q);
  const Eigen::Map<const Eigen::VectorXd> pv(p.data(), p.size());
  const Eigen::Map<const Eigen::VectorXd> qv(q.data(), q.size());
  s.value = pv.dot(H * qv);
  s.gap = duality_gap(H, p, q);
  s.p = std::move(p);
  s.q = std::move(q);
  s.path = path;
  return s;
}

bool find_pure_saddle(const Eigen::MatrixXd& H, GameSolution& out) {
  const double tol = 1e-12 * scale_of(H);
  for (Eigen::Index i = 0; i < H.rows(); ++i) {
    for (Eigen::Index j = 0; j < H.cols(); ++j) {
      const double h = H(i, j);
      if (h + tol < H.row(i).maxCoeff()) continue;  // column player would deviate
      if (h - tol > H.col(j).minCoeff()) continue;  // row player would deviate
      std::vector<double> p(H.rows(), 0.0), q(H.cols(), 0.0);
      p[i] = 1.0;
      q[j] = 1.0;
      out = finish(H, std::move(p), std::move(q), SolvePath::PureSaddle);
      return true;
    }
  }
  return false;
}

// Solves the indifference system M^T w = v 1, sum w = 1 for w on a square
// support; false when singular or infeasible.
bool indifferent(const Eigen::MatrixXd& M, Eigen::VectorXd& w) {
  const Eigen::Index k = M.rows();
  Eigen::MatrixXd A(k + 1, k + 1);
  A.topLeftCorner(k, k) = M.transpose();
  A.topRightCorner(k, 1).setConstant(-1.0);
  A.bottomLeftCorner(1, k).setOnes();
  A(k, k) = 0.0;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
  rhs(k) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  lu.setThreshold(1e-13);
  if (!lu.isInvertible()) return false;
  const Eigen::VectorXd sol = lu.solve(rhs);
  w = sol.head(k);
  return (w.array() >= -1e-12).all();
}

bool support_enumeration(const Eigen::MatrixXd& H, GameSolution& out) {
  const int m = static_cast<int>(H.rows());
  const int n = static_cast<int>(H.cols());
  const double tol = 1e-11 * scale_of(H);
  for (int k = 1; k <= std::min(m, n); ++k) {
    std::vector<int> S(k);
    for (int a = 0; a < k; ++a) S[a] = a;
    do {
      std::vector<int> T(k);
      for (int a = 0; a < k; ++a) T[a] = a;
      do {
        Eigen::MatrixXd M(k, k);
        for (int a = 0; a < k; ++a)
          for (int b = 0; b < k; ++b) M(a, b) = H(S[a], T[b]);
        Eigen::VectorXd ps, qs;
        if (!indifferent(M, ps) || !indifferent(M.transpose(), qs)) continue;
        std::vector<double> p(m, 0.0), q(n, 0.0);
        for (int a = 0; a < k; ++a) {
          p[S[a]] = ps(a);
          q[T[a]] = qs(a);
        }
        GameSolution s = finish(H, std::move(p), std::move(q), SolvePath::SupportEnumeration);
        if (s.gap <= tol) {
          out = std::move(s);
          return true;
        }
      } while (next_combination(T, n));
    } while (next_combination(S, m));
  }
  return false;
}

// Dense tableau simplex with Bland's rule on
//   max 1^T x  s.t.  H'^T x <= 1, x >= 0,   H' = H - min H + 1 > 0.
// The optimum is 1/v' with v' the min-max of H'; the slack reduced costs are
// the dual solution y, and p = x v', q = y v'.
GameSolution linear_program(const Eigen::MatrixXd& H) {
  const Eigen::Index m = H.rows();
  const Eigen::Index n = H.cols();
  const Eigen::MatrixXd Hs = H.array() - H.minCoeff() + 1.0;
  const Eigen::Index cols = m + n + 1;
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n + 1, cols);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) T(j, i) = Hs(i, j);
    T(j, m + j) = 1.0;
    T(j, cols - 1) = 1.0;
  }
  for (Eigen::Index i = 0; i < m; ++i) T(n, i) = -1.0;
  std::vector<Eigen::Index> basis(n);
  for (Eigen::Index j = 0; j < n; ++j) basis[j] = m + j;

  const double eps = 1e-13;
  const int maxPivots = 10000;
  for (int pivot = 0;; ++pivot) {
    if (pivot > maxPivots) throw InvalidGameError("simplex failed to terminate");
    Eigen::Index enter = -1;
    for (Eigen::Index c = 0; c < m + n; ++c)
      if (T(n, c) < -eps) {
        enter = c;
        break;
      }
    if (enter < 0) break;
    Eigen::Index leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < n; ++r) {
      if (T(r, enter) <= eps) continue;
      const double ratio = T(r, cols - 1) / T(r, enter);
      if (ratio < best - 1e-15 || (ratio <= best + 1e-15 && leave >= 0 && basis[r] < basis[leave])) {
        best = ratio;
        leave = r;
      }
    }
    if (leave < 0) throw InvalidGameError("game LP unbounded");
    T.row(leave) /= T(leave, enter);
    for (Eigen::Index r = 0; r <= n; ++r)
      if (r != leave && T(r, enter) != 0.0) T.row(r) -= T(r, enter) * T.row(leave);
    basis[leave] = enter;
  }

  std::vector<double> x(m, 0.0), y(n, 0.0);
  for (Eigen::Index r = 0; r < n; ++r)
    if (basis[r] < m) x[basis[r]] = T(r, cols - 1);
  for (Eigen::Index j = 0; j < n; ++j) y[j] = T(n, m + j);
  return finish(H, std::move(x), std::move(y), SolvePath::LinearProgram);
}

}  // namespace

MatrixGame::MatrixGame(Eigen::MatrixXd payoff) : payoff_(std::move(payoff)) {
  if (payoff_.rows() < 1 || payoff_.cols() < 1) throw InvalidGameError("payoff matrix is empty");
  if (!payoff_.allFinite()) throw InvalidGameError("payoff matrix has a non-finite entry");
}

const char* to_string(SolvePath path) {
  switch (path) {
    case SolvePath::PureSaddle: return "pure-saddle";
    case SolvePath::SupportEnumeration: return "support-enumeration";
    case SolvePath::LinearProgram: return "linear-program";
    case SolvePath::PureOnly: return "pure-only";
  }
  return "?";
}

double duality_gap(const Eigen::MatrixXd& H, const std::vector<double>& p, const std::vector<double>& q) {
  const Eigen::Map<const Eigen::VectorXd> pv(p.data(), p.size());
  const Eigen::Map<const Eigen::VectorXd> qv(q.data(), q.size());
  return (H.transpose() * pv).maxCoeff() - (H * qv).minCoeff();
}

bool is_eps_saddle(const Eigen::MatrixXd& H, const std::vector<double>& p, const std::vector<double>& q,
                   double value, double eps) {
  const Eigen::Map<const Eigen::VectorXd> pv(p.data(), p.size());
  const Eigen::Map<const Eigen::VectorXd> qv(q.data(), q.size());
  return (H.transpose() * pv).maxCoeff() <= value + eps && (H * qv).minCoeff() >= value - eps;
}

GameSolution solve_game(const MatrixGame& game) {
  const Eigen::MatrixXd& H = game.payoff();
  GameSolution s;
  if (find_pure_saddle(H, s)) return s;
  if (std::min(H.rows(), H.cols()) <= 4 && support_enumeration(H, s)) return s;
  return linear_program(H);
}

GameSolution solve_pure_game(const MatrixGame& game) {
  const Eigen::MatrixXd& H = game.payoff();
  Eigen::Index jStar = 0;
  double lower = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < H.cols(); ++j) {
    const double v = H.col(j).minCoeff();
    if (v > lower) {
      lower = v;
      jStar = j;
    }
  }
  Eigen::Index iStar = 0;
  H.col(jStar).minCoeff(&iStar);
  double upper = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < H.rows(); ++i) upper = std::min(upper, H.row(i).maxCoeff());

  GameSolution s;
  s.p.assign(H.rows(), 0.0);
  s.q.assign(H.cols(), 0.0);
  s.p[iStar] = 1.0;
  s.q[jStar] = 1.0;
  s.value = lower;
  s.gap = upper - lower;
  s.path = SolvePath::PureOnly;
  return s;
}

}  // namespace hji
