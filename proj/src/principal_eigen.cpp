#include "hji/principal_eigen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/SparseLU>

#include "hji/error.hpp"

namespace hji {

namespace {

bool reaches_all(const SparseMatrix& A, bool transpose) {
  const Eigen::Index n = A.rows();
  std::vector<std::vector<Eigen::Index>> adj(n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (SparseMatrix::InnerIterator it(A, i); it; ++it)
      if (it.col() != i && it.value() != 0.0) {
        if (transpose)
          adj[it.col()].push_back(i);
        else
          adj[i].push_back(it.col());
      }
  std::vector<char> seen(n, 0);
  std::vector<Eigen::Index> stack{0};
  seen[0] = 1;
  Eigen::Index count = 1;
  while (!stack.empty()) {
    const Eigen::Index v = stack.back();
    stack.pop_back();
    for (Eigen::Index w : adj[v])
      if (!seen[w]) {
        seen[w] = 1;
        ++count;
        stack.push_back(w);
      }
  }
  return count == n;
}

bool is_tridiagonal(const SparseMatrix& A) {
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (SparseMatrix::InnerIterator it(A, i); it; ++it)
      if (std::abs(it.col() - i) > 1 && it.value() != 0.0) return false;
  return true;
}

// Solves (sigma I - A) x = rhs for a fixed shift.
class ShiftedSolver {
 public:
  ShiftedSolver(const SparseMatrix& A, bool tridiagonal) : A_(A), tridiagonal_(tridiagonal) {
    const Eigen::Index n = A.rows();
    if (tridiagonal_) {
      lower_.setZero(n);
      diag_.setZero(n);
      upper_.setZero(n);
      for (Eigen::Index i = 0; i < n; ++i)
        for (SparseMatrix::InnerIterator it(A, i); it; ++it) {
          if (it.col() == i - 1) lower_(i) = -it.value();
          if (it.col() == i) diag_(i) = -it.value();
          if (it.col() == i + 1) upper_(i) = -it.value();
        }
    }
  }

  void factor(double sigma) {
    sigma_ = sigma;
    if (tridiagonal_) {
      const Eigen::Index n = diag_.size();
      cprime_.resize(n);
      denom_.resize(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double b = diag_(i) + sigma;
        denom_(i) = i == 0 ? b : b - lower_(i) * cprime_(i - 1);
        cprime_(i) = upper_(i) / denom_(i);
      }
      return;
    }
    Eigen::SparseMatrix<double> M = -A_;
    for (Eigen::Index i = 0; i < M.rows(); ++i) M.coeffRef(i, i) += sigma;
    M.makeCompressed();
    if (!lu_) {
      lu_.emplace();
      lu_->analyzePattern(M);
    }
    lu_->factorize(M);
    if (lu_->info() != Eigen::Success) throw StructureError("shifted operator is singular");
  }

  double sigma() const { return sigma_; }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    if (!tridiagonal_) return lu_->solve(rhs);
    const Eigen::Index n = rhs.size();
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i)
      x(i) = (rhs(i) - (i == 0 ? 0.0 : lower_(i) * x(i - 1))) / denom_(i);
    for (Eigen::Index i = n - 2; i >= 0; --i) x(i) -= cprime_(i) * x(i + 1);
    return x;
  }

 private:
  const SparseMatrix& A_;
  bool tridiagonal_;
  double sigma_ = 0.0;
  Eigen::VectorXd lower_, diag_, upper_, cprime_, denom_;
  std::optional<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
};

struct Envelope {
  double lower;
  double upper;
};

Envelope envelope(const SparseMatrix& A, const Eigen::VectorXd& phi) {
  const Eigen::VectorXd Aphi = A * phi;
  Envelope e{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (Eigen::Index i = 0; i < phi.size(); ++i) {
    const double r = Aphi(i) / phi(i);
    e.lower = std::min(e.lower, r);
    e.upper = std::max(e.upper, r);
  }
  return e;
}

}  // namespace

bool is_irreducible(const SparseMatrix& A) {
  if (A.rows() <= 1) return true;
  return reaches_all(A, false) && reaches_all(A, true);
}

EigenPair principal_eigenpair(const SparseMatrix& A, std::size_t originIndex, const EigenOptions& options) {
  const Eigen::Index n = A.rows();
  if (n == 0 || A.cols() != n) throw StructureError("principal eigenpair needs a non-empty square matrix");
  if (static_cast<Eigen::Index>(originIndex) >= n) throw StructureError("origin index out of range");
  for (Eigen::Index i = 0; i < n; ++i)
    for (SparseMatrix::InnerIterator it(A, i); it; ++it) {
      if (!std::isfinite(it.value())) throw StructureError("matrix has a non-finite entry");
      if (it.col() != i && it.value() < 0.0 && !options.allowNonMonotone)
        throw StructureError("matrix has a negative off-diagonal entry; Perron theory does not apply");
    }
  if (!is_irreducible(A)) throw StructureError("matrix is reducible (disconnected grid?)");

  EigenPair out;
  if (n == 1) {
    out.lambda = out.cwLower = out.cwUpper = A.coeff(0, 0);
    out.phi = Eigen::VectorXd::Ones(1);
    out.converged = true;
    return out;
  }

  ShiftedSolver solver(A, is_tridiagonal(A));
  Eigen::VectorXd phi = Eigen::VectorXd::Ones(n);
  Envelope env = envelope(A, phi);
  if (options.observer) options.observer(env.lower, env.upper);

  const auto margin = [](const Envelope& e) {
    return std::max(0.1 * (e.upper - e.lower), 1e-9 * (1.0 + std::abs(e.upper)));
  };
  solver.factor(env.upper + margin(env));

  double bestWidth = env.upper - env.lower;
  int sinceBest = 0;
  int it = 0;
  const int patience = 60;
  while (env.upper - env.lower > options.tol && it < options.maxIter) {
    ++it;
    Eigen::VectorXd next = solver.solve(phi).cwiseAbs();
    const double top = next.maxCoeff();
    if (!(top > 0.0) || !std::isfinite(top)) throw StructureError("inverse iteration broke down");
    next /= top;
    // Entries that underflowed would make the envelope undefined.
    for (Eigen::Index i = 0; i < n; ++i) next(i) = std::max(next(i), std::numeric_limits<double>::min());
    phi = std::move(next);
    env = envelope(A, phi);
    if (options.observer) options.observer(env.lower, env.upper);

    const double width = env.upper - env.lower;
    if (width < 0.999 * bestWidth) {
      bestWidth = width;
      sinceBest = 0;
    } else if (++sinceBest > patience) {
      break;
    }
    const double wanted = margin(env);
    if (solver.sigma() - env.upper > 4.0 * wanted || solver.sigma() <= env.upper) solver.factor(env.upper + wanted);
  }

  out.iterations = it;
  out.cwLower = env.lower;
  out.cwUpper = env.upper;
  out.lambda = 0.5 * (env.lower + env.upper);
  const Eigen::VectorXd r = A * phi - out.lambda * phi;
  out.residual = r.cwiseAbs().maxCoeff() / phi.cwiseAbs().maxCoeff();
  out.converged = env.upper - env.lower <= options.tol && out.residual <= options.tol;
  out.phi = phi / phi(static_cast<Eigen::Index>(originIndex));
  return out;
}

EigenPair principal_eigenpair(const DiscreteOperator& op, const EigenOptions& options) {
  return principal_eigenpair(op.matrix, op.originIndex, options);
}

}  // namespace hji
