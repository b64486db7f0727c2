#include "hji/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hji/error.hpp"

namespace hji {

StrategyField::StrategyField(std::size_t points, std::size_t actions)
    : points_(points), actions_(actions), weights_(points * actions, actions ? 1.0 / actions : 0.0) {
  if (actions == 0) throw ConfigurationError("strategy field needs at least one action");
}

StrategyField StrategyField::pure(std::size_t points, std::size_t actions, std::size_t action) {
  StrategyField f(points, actions);
  for (std::size_t i = 0; i < points; ++i) f.setPure(i, action);
  return f;
}

void StrategyField::set(std::size_t i, std::span<const double> w) {
  if (w.size() != actions_) throw ConfigurationError("mixture has the wrong number of actions");
  validate_weights(w);
  std::copy(w.begin(), w.end(), weights_.begin() + i * actions_);
}

void StrategyField::setPure(std::size_t i, std::size_t action) {
  if (action >= actions_) throw ConfigurationError("action index out of range");
  std::fill_n(weights_.begin() + i * actions_, actions_, 0.0);
  weights_[i * actions_ + action] = 1.0;
}

double StrategyField::distance(const StrategyField& other) const {
  if (other.points_ != points_ || other.actions_ != actions_)
    throw ConfigurationError("strategy fields have different shapes");
  double s = 0.0;
  for (std::size_t k = 0; k < weights_.size(); ++k) s += std::abs(weights_[k] - other.weights_[k]);
  return s;
}

SparseMatrix DiscreteOperator::generator() const {
  SparseMatrix g = matrix;
  for (Eigen::Index i = 0; i < cost.size(); ++i) g.coeffRef(i, i) -= cost(i);
  return g;
}

namespace {

struct Stencil {
  struct Tap {
    std::array<int, kMaxDimension> step;
    double coeff;
  };
  double diag = 0.0;
  std::array<Tap, 8> taps{};
  int count = 0;
  bool upwind = false;

  void add(int s0, int s1, double c) {
    for (int k = 0; k < count; ++k)
      if (taps[k].step[0] == s0 && taps[k].step[1] == s1) {
        taps[k].coeff += c;
        return;
      }
    taps[count++] = {{s0, s1}, c};
  }
};

// a is row-major d x d, b has d entries.
void check_elliptic(int d, const double* a, const Point& x) {
  const bool ok = d == 1 ? a[0] > 1e-14 : (a[0] > 1e-14 && a[0] * a[3] - a[1] * a[2] > 1e-14);
  if (!ok) {
    std::string where = std::to_string(x[0]);
    if (d == 2) where += ", " + std::to_string(x[1]);
    throw NondegeneracyError("diffusion matrix is not positive definite at (" + where + ")");
  }
}

// Effective axis diffusion available to absorb central drift differences.
double effective_diffusion(int d, const double* a, int axis) {
  return d == 1 ? a[0] : a[axis * 3] - std::abs(a[1]);
}

// Strict: a tie would zero a neighbour coefficient and disconnect the chain.
bool central_ok(int d, const double* a, const double* b, double h) {
  for (int ax = 0; ax < d; ++ax)
    if (h * std::abs(b[ax]) >= effective_diffusion(d, a, ax)) return false;
  return true;
}

Stencil build_stencil(int d, const double* a, const double* b, double h) {
  Stencil s;
  const double h2 = h * h;
  const bool central = central_ok(d, a, b, h);
  s.upwind = !central;
  if (d == 2) {
    const double a12 = a[1];
    // a12 d_12 with the 7-point formula that keeps the diagonal taps >= 0.
    if (a12 >= 0.0) {
      s.add(1, 1, a12 / (2 * h2));
      s.add(-1, -1, a12 / (2 * h2));
    } else {
      s.add(1, -1, -a12 / (2 * h2));
      s.add(-1, 1, -a12 / (2 * h2));
    }
    const double axial = -std::abs(a12) / (2 * h2);
    s.add(1, 0, axial);
    s.add(-1, 0, axial);
    s.add(0, 1, axial);
    s.add(0, -1, axial);
    s.diag += std::abs(a12) / h2;
  }
  for (int ax = 0; ax < d; ++ax) {
    const double aii = a[ax * (d + 1)];
    const int e0 = ax == 0 ? 1 : 0;
    const int e1 = ax == 1 ? 1 : 0;
    double plus = aii / (2 * h2), minus = aii / (2 * h2);
    s.diag -= aii / h2;
    if (central) {
      plus += b[ax] / (2 * h);
      minus -= b[ax] / (2 * h);
    } else {
      plus += std::max(b[ax], 0.0) / h;
      minus += std::max(-b[ax], 0.0) / h;
      s.diag -= std::abs(b[ax]) / h;
    }
    s.add(e0, e1, plus);
    s.add(-e0, -e1, minus);
  }
  return s;
}

double peclet(int d, const double* a, const double* b, double h) {
  double worst = 0.0;
  for (int ax = 0; ax < d; ++ax) worst = std::max(worst, h * std::abs(b[ax]) / a[ax * (d + 1)]);
  return worst;
}

}  // namespace

DiscreteOperator assemble_fixed(const GameModel& model, const Grid& grid, const StrategyField& f1,
                                const StrategyField& f2) {
  const int d = grid.dimension();
  if (model.dimension() != d) throw ConfigurationError("model and grid dimensions differ");
  const std::size_t n = grid.interiorCount();
  if (f1.points() != n || f2.points() != n)
    throw ConfigurationError("strategy field does not cover the grid interior");
  if (f1.actions() != model.actions1().size() || f2.actions() != model.actions2().size())
    throw ConfigurationError("strategy field does not match the action sets");

  DiscreteOperator op;
  op.cost.resize(static_cast<Eigen::Index>(n));
  op.originIndex = grid.originIndex();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(n * (d == 1 ? 3 : 9));
  const double h = grid.spacing();
  for (std::size_t i = 0; i < n; ++i) {
    const Point x = grid.point(i);
    const std::span<const double> xs(x.data(), d);
    double a[4], b[2];
    model.diffusionMatrix(xs, {a, static_cast<std::size_t>(d * d)});
    check_elliptic(d, a, x);
    relaxed_drift(model, xs, f1.at(i), f2.at(i), {b, static_cast<std::size_t>(d)});
    const double c = relaxed_cost(model, xs, f1.at(i), f2.at(i));
    const Stencil s = build_stencil(d, a, b, h);
    op.pecletMargin = std::max(op.pecletMargin, peclet(d, a, b, h));
    if (s.upwind) {
      op.upwindUsed = true;
      ++op.upwindPoints;
    }
    op.cost(static_cast<Eigen::Index>(i)) = c;
    triplets.emplace_back(i, i, s.diag + c);
    for (int k = 0; k < s.count; ++k) {
      if (s.taps[k].coeff < 0.0) op.monotone = false;
      const long j = grid.shifted(i, s.taps[k].step);
      if (j >= 0) triplets.emplace_back(i, static_cast<std::size_t>(j), s.taps[k].coeff);
    }
  }
  op.matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  op.matrix.setFromTriplets(triplets.begin(), triplets.end());
  op.matrix.makeCompressed();
  return op;
}

LocalHamiltonian local_hamiltonian(const GameModel& model, const Grid& grid, std::size_t point,
                                   std::span<const double> value) {
  const int d = grid.dimension();
  if (value.size() != grid.interiorCount()) throw ConfigurationError("value field does not cover the grid");
  const Point x = grid.point(point);
  const std::span<const double> xs(x.data(), d);
  double a[4];
  model.diffusionMatrix(xs, {a, static_cast<std::size_t>(d * d)});
  check_elliptic(d, a, x);

  const auto m = model.actions1().size();
  const auto k = model.actions2().size();
  Eigen::MatrixXd H(m, k);
  LocalHamiltonian out;
  const double h = grid.spacing();
  const double vx = value[point];
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      double b[2];
      model.drift(xs, i, j, {b, static_cast<std::size_t>(d)});
      const double c = model.cost(xs, i, j);
      if (!std::isfinite(c) || !std::isfinite(b[0]) || (d == 2 && !std::isfinite(b[1])))
        throw ModelEvaluationError("non-finite coefficient in the local Hamiltonian");
      const Stencil s = build_stencil(d, a, b, h);
      if (s.upwind) out.bilinear = false;
      double row = (s.diag + c) * vx;
      for (int t = 0; t < s.count; ++t) {
        const long nb = grid.shifted(point, s.taps[t].step);
        if (nb >= 0) row += s.taps[t].coeff * value[static_cast<std::size_t>(nb)];
      }
      H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row;
    }
  }
  out.game = MatrixGame(std::move(H));
  return out;
}

double apply_row(const GameModel& model, const Grid& grid, std::size_t point, std::span<const double> nu1,
                 std::span<const double> nu2, std::span<const double> value) {
  const int d = grid.dimension();
  const Point x = grid.point(point);
  const std::span<const double> xs(x.data(), d);
  double a[4], b[2];
  model.diffusionMatrix(xs, {a, static_cast<std::size_t>(d * d)});
  check_elliptic(d, a, x);
  relaxed_drift(model, xs, nu1, nu2, {b, static_cast<std::size_t>(d)});
  const double c = relaxed_cost(model, xs, nu1, nu2);
  const Stencil s = build_stencil(d, a, b, grid.spacing());
  double row = (s.diag + c) * value[point];
  for (int t = 0; t < s.count; ++t) {
    const long nb = grid.shifted(point, s.taps[t].step);
    if (nb >= 0) row += s.taps[t].coeff * value[static_cast<std::size_t>(nb)];
  }
  return row;
}

double interpolate_field(const Grid& grid, std::span<const double> value, std::span<const double> x) {
  const int d = grid.dimension();
  const double h = grid.spacing();
  const int last = 2 * grid.halfCells();
  std::array<int, kMaxDimension> base{0, 0};
  std::array<double, kMaxDimension> frac{0.0, 0.0};
  for (int a = 0; a < d; ++a) {
    const double t = (x[a] + grid.radius()) / h;
    if (!(t >= 0.0 && t <= last)) return 0.0;
    base[a] = std::min(static_cast<int>(std::floor(t)), last - 1);
    frac[a] = t - base[a];
  }
  double sum = 0.0;
  const int corners = d == 1 ? 2 : 4;
  for (int corner = 0; corner < corners; ++corner) {
    std::array<int, kMaxDimension> k = base;
    double w = 1.0;
    for (int a = 0; a < d; ++a) {
      const int bit = (corner >> a) & 1;
      k[a] += bit;
      w *= bit ? frac[a] : 1.0 - frac[a];
    }
    if (w == 0.0) continue;
    const long i = grid.interiorIndexOfNode(grid.nodeId(k));
    if (i >= 0) sum += w * value[static_cast<std::size_t>(i)];
  }
  return sum;
}

MatrixGame hamiltonian_matrix(const GameModel& model, const Grid& grid, std::size_t point,
                              std::span<const double> value) {
  return local_hamiltonian(model, grid, point, value).game;
}

}  // namespace hji
