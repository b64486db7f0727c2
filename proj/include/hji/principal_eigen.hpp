#pragma once

#include <cstddef>
#include <functional>

#include <Eigen/Dense>

#include "hji/discretize.hpp"

namespace hji {

struct EigenPair {
  double lambda = 0.0;
  Eigen::VectorXd phi;  // > 0, phi[origin] = 1
  double residual = 0.0;  // |A phi - lambda phi|_inf / |phi|_inf
  double cwLower = 0.0;
  double cwUpper = 0.0;
  bool converged = false;
  int iterations = 0;
};

struct EigenOptions {
  double tol = 1e-10;
  int maxIter = 2000;
  /// Accept matrices with negative off-diagonal entries (Perron theory then
  /// no longer guarantees a positive eigenvector).
  bool allowNonMonotone = false;
  /// Called with the Collatz-Wielandt envelope after every iterate.
  std::function<void(double lower, double upper)> observer;
};

/// Principal (maximal real part) eigenpair of a matrix with nonnegative
/// off-diagonal entries.
///
/// Shifted inverse power iteration from the all-ones vector. The shift is
/// kept strictly above the Collatz-Wielandt upper bound, where sigma I - A is
/// a nonsingular M-matrix with a nonnegative inverse, so every iterate stays
/// positive and its envelope [min (A phi)_i / phi_i, max (A phi)_i / phi_i]
/// brackets the eigenvalue. Converged once the envelope width and the
/// residual are both at most tol (the first bounds the second). On
/// stagnation or after maxIter it returns converged = false with the last
/// envelope. Tridiagonal matrices use a Thomas solve, others sparse LU.
///
/// Throws StructureError for reducible matrices or negative off-diagonals
/// (unless allowed).
EigenPair principal_eigenpair(const SparseMatrix& A, std::size_t originIndex, const EigenOptions& options = {});

EigenPair principal_eigenpair(const DiscreteOperator& op, const EigenOptions& options = {});

/// True when the directed graph of nonzero off-diagonal entries is strongly
/// connected.
bool is_irreducible(const SparseMatrix& A);

}  // namespace hji
