#include "hji/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "hji/error.hpp"
#include "hji/parallel.hpp"
#include "hji/principal_eigen.hpp"

namespace hji {

namespace {

constexpr std::size_t kPairBudget = 1000000;

void compositions(std::size_t actions, int remaining, std::vector<int>& prefix,
                  std::vector<std::vector<int>>& out) {
  if (prefix.size() + 1 == actions) {
    prefix.push_back(remaining);
    out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int k = remaining; k >= 0; --k) {
    prefix.push_back(k);
    compositions(actions, remaining - k, prefix, out);
    prefix.pop_back();
  }
}

std::size_t checked_power(std::size_t base, std::size_t exponent) {
  std::size_t r = 1;
  for (std::size_t k = 0; k < exponent; ++k) {
    if (r > std::numeric_limits<std::size_t>::max() / std::max<std::size_t>(base, 1))
      return std::numeric_limits<std::size_t>::max();
    r *= base;
  }
  return r;
}

std::size_t mesh_size(std::size_t actions, int m) {
  // C(m + actions - 1, actions - 1)
  double c = 1.0;
  for (std::size_t k = 1; k < actions; ++k) c = c * (m + k) / k;
  return static_cast<std::size_t>(std::llround(c));
}

std::vector<std::vector<double>> pure_choices(std::size_t actions) {
  std::vector<std::vector<double>> out(actions, std::vector<double>(actions, 0.0));
  for (std::size_t a = 0; a < actions; ++a) out[a][a] = 1.0;
  return out;
}

double saturating_product(std::size_t a, std::size_t b) {
  return static_cast<double>(a) * static_cast<double>(b);
}

Eigen::MatrixXd tensor(const GameModel& model, const Grid& grid, const std::vector<std::vector<double>>& c1,
                       const std::vector<std::vector<double>>& c2, std::size_t n1, std::size_t n2, int workers,
                       bool& converged) {
  const std::size_t points = grid.interiorCount();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n1), static_cast<Eigen::Index>(n2));
  std::vector<char> ok(n1 * n2, 1);
  EigenOptions opts;
  opts.tol = 1e-12;
  parallel_for(n1 * n2, workers, [&](std::size_t k) {
    const std::size_t a = k / n2, b = k % n2;
    const StrategyField f1 = field_from_index(c1, points, a);
    const StrategyField f2 = field_from_index(c2, points, b);
    const EigenPair e = principal_eigenpair(assemble_fixed(model, grid, f1, f2), opts);
    ok[k] = e.converged;
    out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = e.lambda;
  });
  converged = std::all_of(ok.begin(), ok.end(), [](char c) { return c != 0; });
  return out;
}

double max_min(const Eigen::MatrixXd& t) { return t.colwise().minCoeff().maxCoeff(); }
double min_max(const Eigen::MatrixXd& t) { return t.rowwise().maxCoeff().minCoeff(); }

// Largest |change| / l1 distance over mesh fields of one player that differ
// in a single point's digit (incremented by one), across every opponent.
double lipschitz(const Eigen::MatrixXd& t, bool rows, const std::vector<std::vector<double>>& choices,
                 std::size_t points) {
  const std::size_t r = choices.size();
  if (r < 2) return 0.0;
  const std::size_t own = rows ? t.rows() : t.cols();
  const std::size_t other = rows ? t.cols() : t.rows();
  std::vector<double> step(r - 1);
  for (std::size_t k = 0; k + 1 < r; ++k) {
    double d = 0.0;
    for (std::size_t a = 0; a < choices[k].size(); ++a) d += std::abs(choices[k + 1][a] - choices[k][a]);
    step[k] = d;
  }
  double best = 0.0;
  for (std::size_t f = 0; f < own; ++f) {
    std::size_t rest = f, place = 1;
    for (std::size_t p = 0; p < points; ++p) {
      const std::size_t digit = rest % r;  // digit of point points - 1 - p
      rest /= r;
      if (digit + 1 < r) {
        const std::size_t g = f + place;
        for (std::size_t o = 0; o < other; ++o) {
          const double a = rows ? t(f, o) : t(o, f);
          const double b = rows ? t(g, o) : t(o, g);
          best = std::max(best, std::abs(b - a) / step[digit]);
        }
      }
      place *= r;
    }
  }
  return best;
}

std::string field_label(std::size_t index, std::size_t actions, std::size_t points) {
  std::vector<std::size_t> digits(points);
  for (std::size_t p = points; p-- > 0;) {
    digits[p] = index % actions;
    index /= actions;
  }
  std::string out;
  for (std::size_t p = 0; p < points; ++p) {
    if (p) out += '-';
    out += std::to_string(digits[p]);
  }
  return out;
}

}  // namespace

std::vector<std::vector<double>> simplex_mesh(std::size_t actions, int meshSteps) {
  if (actions == 0 || meshSteps < 1) throw ConfigurationError("simplex mesh needs actions and meshSteps >= 1");
  std::vector<std::vector<int>> counts;
  std::vector<int> prefix;
  if (actions == 1) {
    counts.push_back({meshSteps});
  } else {
    compositions(actions, meshSteps, prefix, counts);
  }
  std::vector<std::vector<double>> out;
  out.reserve(counts.size());
  for (const auto& c : counts) {
    std::vector<double> w(actions);
    for (std::size_t a = 0; a < actions; ++a) w[a] = static_cast<double>(c[a]) / meshSteps;
    out.push_back(std::move(w));
  }
  return out;
}

StrategyField field_from_index(const std::vector<std::vector<double>>& choices, std::size_t points,
                               std::size_t index) {
  const std::size_t r = choices.size();
  StrategyField f(points, choices.front().size());
  for (std::size_t p = points; p-- > 0;) {
    f.set(p, choices[index % r]);
    index /= r;
  }
  return f;
}

std::size_t oracle_pair_count(const GameModel& model, const Grid& grid, int meshSteps) {
  const std::size_t points = grid.interiorCount();
  const std::size_t a1 = model.actions1().size(), a2 = model.actions2().size();
  const double pure = saturating_product(checked_power(a1, points), checked_power(a2, points));
  const double mesh = saturating_product(checked_power(mesh_size(a1, meshSteps), points),
                                         checked_power(mesh_size(a2, meshSteps), points));
  const double total = pure + mesh;
  return total >= 1.8e19 ? std::numeric_limits<std::size_t>::max() : static_cast<std::size_t>(total);
}

OracleResult enumerate(const GameModel& model, const Grid& grid, int meshSteps, int workers) {
  const std::size_t points = grid.interiorCount();
  const std::size_t a1 = model.actions1().size(), a2 = model.actions2().size();
  if (points > 5) throw ConfigurationError("oracle grids have at most 5 interior points, got " + std::to_string(points));
  if (a1 > 3 || a2 > 3) throw ConfigurationError("oracle action sets have at most 3 actions");
  if (meshSteps < 1 || meshSteps > 6) throw ConfigurationError("oracle meshSteps must lie in 1..6");
  const std::size_t count = oracle_pair_count(model, grid, meshSteps);
  if (count > kPairBudget)
    throw BudgetError("oracle enumeration needs " + std::to_string(count) + " eigen-solves, budget is " +
                      std::to_string(kPairBudget));
  workers = resolve_workers(workers);

  OracleResult r;
  r.grid = grid;
  r.meshSteps = meshSteps;
  r.meshResolution = 1.0 / meshSteps;
  const auto p1 = pure_choices(a1), p2 = pure_choices(a2);
  const auto m1 = simplex_mesh(a1, meshSteps), m2 = simplex_mesh(a2, meshSteps);
  r.pureFields1 = checked_power(a1, points);
  r.pureFields2 = checked_power(a2, points);
  r.meshFields1 = checked_power(m1.size(), points);
  r.meshFields2 = checked_power(m2.size(), points);

  bool ok1 = true, ok2 = true;
  r.pureTensor = tensor(model, grid, p1, p2, r.pureFields1, r.pureFields2, workers, ok1);
  r.meshTensor = tensor(model, grid, m1, m2, r.meshFields1, r.meshFields2, workers, ok2);
  r.allConverged = ok1 && ok2;
  r.pureMaxMin = max_min(r.pureTensor);
  r.pureMinMax = min_max(r.pureTensor);
  r.meshMaxMin = max_min(r.meshTensor);
  r.meshMinMax = min_max(r.meshTensor);
  r.lipschitz1 = lipschitz(r.meshTensor, true, m1, points);
  r.lipschitz2 = lipschitz(r.meshTensor, false, m2, points);
  const double reach1 = static_cast<double>(points * (a1 - 1)) / meshSteps;
  const double reach2 = static_cast<double>(points * (a2 - 1)) / meshSteps;
  r.defaultSlack = std::max(r.lipschitz1 * reach1, r.lipschitz2 * reach2);
  return r;
}

Certificate certify(const IsaacsSolve& solve, const OracleResult& oracle, std::optional<double> slack) {
  if (!solve.grid.sameAs(oracle.grid)) throw ConfigurationError("solve and oracle use different grids");
  Certificate c;
  c.slack = slack.value_or(oracle.defaultSlack);
  if (c.slack < 0.0) throw ConfigurationError("certificate slack must be nonnegative");
  c.lambda = solve.eigen.lambda;
  c.lower = oracle.meshMaxMin - c.slack;
  c.upper = oracle.meshMinMax + c.slack;
  c.passed = c.lower <= c.lambda && c.lambda <= c.upper;
  return c;
}

std::vector<PairAgreement> pair_agreement(const GameModel& model, const OracleResult& oracle, std::size_t count,
                                          std::uint64_t seed, const SimConfig& cfg) {
  const std::size_t points = oracle.grid.interiorCount();
  const auto p1 = pure_choices(model.actions1().size()), p2 = pure_choices(model.actions2().size());
  const std::size_t total = oracle.pureFields1 * oracle.pureFields2;
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(splitmix64(seed));
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<PairAgreement> out;
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t pick = order[k % total];
    PairAgreement a;
    a.field1 = pick / oracle.pureFields2;
    a.field2 = pick % oracle.pureFields2;
    a.lambda = oracle.pureTensor(static_cast<Eigen::Index>(a.field1), static_cast<Eigen::Index>(a.field2));
    const DiscreteOperator op = assemble_fixed(model, oracle.grid, field_from_index(p1, points, a.field1),
                                               field_from_index(p2, points, a.field2));
    SimConfig c = cfg;
    c.seed = cfg.seed + k;
    a.estimate = estimate_chain(op.matrix, op.originIndex, c);
    a.z = (a.estimate.value - a.lambda) / a.estimate.standardError;
    a.agrees = std::abs(a.z) <= 3.0;
    out.push_back(std::move(a));
  }
  return out;
}

void write_pure_tensor_csv(const OracleResult& oracle, std::size_t actions1, std::size_t actions2,
                           std::ostream& out) {
  const std::size_t points = oracle.grid.interiorCount();
  const auto old = out.precision(17);
  out << "field1,field2,lambda\n";
  for (Eigen::Index a = 0; a < oracle.pureTensor.rows(); ++a)
    for (Eigen::Index b = 0; b < oracle.pureTensor.cols(); ++b)
      out << field_label(a, actions1, points) << ',' << field_label(b, actions2, points) << ','
          << oracle.pureTensor(a, b) << '\n';
  out.precision(old);
}

}  // namespace hji
