#include "hji/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <boost/random/normal_distribution.hpp>

#include "hji/error.hpp"
#include "hji/parallel.hpp"

namespace hji {

void SimConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigurationError("mc.dt must be positive");
  if (!(T >= 10.0 * dt) || !std::isfinite(T)) throw ConfigurationError("mc.T must be at least 10 dt");
  if (paths < 100) throw ConfigurationError("mc.paths must be at least 100");
  if (!(burnIn >= 0.0 && burnIn <= 0.5 * T)) throw ConfigurationError("mc.burnIn must lie in [0, T/2]");
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t path_seed(std::uint64_t seed, std::uint64_t path) { return splitmix64(splitmix64(seed) ^ path); }

namespace {

std::vector<double> checkpoint_times(const SimConfig& cfg) {
  std::vector<double> t{0.25 * cfg.T, 0.5 * cfg.T, cfg.T};
  if (cfg.burnIn > 0.0) t.push_back(cfg.burnIn);
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

std::size_t checkpoint_index(const std::vector<double>& times, double t) {
  const auto it = std::find(times.begin(), times.end(), t);
  return static_cast<std::size_t>(it - times.begin());
}

// Nonzero pair weights w1_i w2_j of one strategy pair, per grid point.
struct PairTable {
  std::vector<std::uint32_t> offset;  // points + 1
  std::vector<std::uint32_t> pair;    // i * |A2| + j
  std::vector<double> weight;
};

PairTable make_table(const StrategyField& f1, const StrategyField& f2) {
  PairTable t;
  const std::size_t n2 = f2.actions();
  t.offset.reserve(f1.points() + 1);
  t.offset.push_back(0);
  for (std::size_t p = 0; p < f1.points(); ++p) {
    const auto w1 = f1.at(p);
    const auto w2 = f2.at(p);
    for (std::size_t i = 0; i < w1.size(); ++i)
      for (std::size_t j = 0; j < n2; ++j)
        if (w1[i] * w2[j] > 0.0) {
          t.pair.push_back(static_cast<std::uint32_t>(i * n2 + j));
          t.weight.push_back(w1[i] * w2[j]);
        }
    t.offset.push_back(static_cast<std::uint32_t>(t.pair.size()));
  }
  return t;
}

struct Walker {
  Point x{};
  double integral = 0.0;
  bool dead = false;
  bool left = false;
};

// Euler-Maruyama stepping with nearest-interior strategy lookup, for a
// fixed dimension D.
template <int D>
class Stepper {
 public:
  Stepper(const GameModel& model, const Grid& grid, double dt)
      : model_(model),
        invH_(1.0 / grid.spacing()),
        radius_(grid.radius()),
        n_(grid.halfCells()),
        n2_(static_cast<std::uint32_t>(model.actions2().size())),
        pairs_(model.actions1().size() * model.actions2().size()),
        batched_(model.hasPairEvaluator() && pairs_ <= 64),
        dt_(dt),
        sqdt_(std::sqrt(dt)) {}

  // Interior index of the nearest point, clamped into the interior.
  std::size_t locate(const Point& x, bool& outside) const {
    long k[D];
    for (int a = 0; a < D; ++a) {
      outside = outside || !(std::abs(x[a]) < radius_);
      const long v = static_cast<long>(std::floor(x[a] * invH_ + 0.5)) + n_;
      k[a] = v < 1 ? 1 : (v > 2 * n_ - 1 ? 2 * n_ - 1 : v);
    }
    if constexpr (D == 1) return static_cast<std::size_t>(k[0] - 1);
    else return static_cast<std::size_t>((k[0] - 1) * (2 * n_ - 1) + (k[1] - 1));
  }

  // One step; `xi` holds D standard normals. `shift` is subtracted from the
  // running cost.
  void step(const PairTable& t, const double* xi, Walker& w, double shift = 0.0) const {
    const std::size_t idx = locate(w.x, w.left);
    const std::span<const double> xs(w.x.data(), D);
    double b[D] = {}, c = 0.0, s[D * D];
    const std::uint32_t begin = t.offset[idx], end = t.offset[idx + 1];
    if (batched_) {
      double drifts[64 * D], costs[64];
      model_.evaluatePairs(xs, {drifts, pairs_ * D}, {costs, pairs_});
      for (std::uint32_t e = begin; e < end; ++e) {
        const std::uint32_t q = t.pair[e];
        const double wt = t.weight[e];
        for (int a = 0; a < D; ++a) b[a] += wt * drifts[q * D + a];
        c += wt * costs[q];
      }
    } else {
      double tmp[D];
      for (std::uint32_t e = begin; e < end; ++e) {
        const std::uint32_t q = t.pair[e];
        const double wt = t.weight[e];
        model_.drift(xs, q / n2_, q % n2_, {tmp, static_cast<std::size_t>(D)});
        for (int a = 0; a < D; ++a) b[a] += wt * tmp[a];
        c += wt * model_.cost(xs, q / n2_, q % n2_);
      }
    }
    model_.sigma(xs, {s, static_cast<std::size_t>(D * D)});
    bool ok = std::isfinite(c);
    for (int a = 0; a < D; ++a) {
      double noise = 0.0;
      for (int k = 0; k < D; ++k) noise += s[a * D + k] * xi[k];
      w.x[a] += b[a] * dt_ + noise * sqdt_;
      ok = ok && std::isfinite(w.x[a]);
    }
    w.integral += (c - shift) * dt_;
    if (!ok) w.dead = true;
  }

 private:
  const GameModel& model_;
  double invH_;
  double radius_;
  long n_;
  std::uint32_t n2_;
  std::size_t pairs_;
  bool batched_;
  double dt_;
  double sqdt_;
};

// Calls fn.template operator()<D>() for the runtime dimension d.
template <class Fn>
void with_dimension(int d, Fn&& fn) {
  if (d == 1)
    fn.template operator()<1>();
  else
    fn.template operator()<2>();
}

// Pairwise summation keeps reductions reproducible and accurate.
double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

double lse_mean(const std::vector<double>& s, std::vector<double>& scratch, double& shift) {
  shift = *std::max_element(s.begin(), s.end());
  scratch.resize(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) scratch[k] = std::exp(s[k] - shift);
  return pairwise_sum(scratch.data(), scratch.size()) / static_cast<double>(s.size());
}

struct Estimator {
  double value = 0.0;
  double se = 0.0;
};

// Plain or burn-in differenced estimator over the given path samples.
Estimator estimate_core(const std::vector<double>& sT, const std::vector<double>* s0, double T, double T0) {
  const std::size_t n = sT.size();
  std::vector<double> a, b;
  double ma, mb = 0.0;
  const double meanA = lse_mean(sT, a, ma);
  Estimator e;
  if (!s0) {
    std::vector<double> dev(n);
    for (std::size_t k = 0; k < n; ++k) dev[k] = (a[k] - meanA) * (a[k] - meanA);
    const double var = n > 1 ? pairwise_sum(dev.data(), n) / static_cast<double>(n - 1) : 0.0;
    e.value = (ma + std::log(meanA)) / T;
    e.se = std::sqrt(var / static_cast<double>(n)) / meanA / T;
    return e;
  }
  const double meanB = lse_mean(*s0, b, mb);
  std::vector<double> va(n), vb(n), cab(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double da = a[k] / meanA - 1.0, db = b[k] / meanB - 1.0;
    va[k] = da * da;
    vb[k] = db * db;
    cab[k] = da * db;
  }
  const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
  const double var = (pairwise_sum(va.data(), n) + pairwise_sum(vb.data(), n) - 2.0 * pairwise_sum(cab.data(), n)) /
                     denom / static_cast<double>(n);
  e.value = (ma + std::log(meanA) - mb - std::log(meanB)) / (T - T0);
  e.se = std::sqrt(std::max(var, 0.0)) / (T - T0);
  return e;
}

}  // namespace

std::vector<PathEnsemble> simulate_common(const GameModel& model, const Grid& grid,
                                          const std::vector<std::pair<const StrategyField*, const StrategyField*>>& pairs,
                                          const SimConfig& cfg) {
  cfg.validate();
  if (model.dimension() != grid.dimension()) throw ConfigurationError("model and grid dimensions differ");
  for (const auto& [f1, f2] : pairs)
    if (f1->points() != grid.interiorCount() || f2->points() != grid.interiorCount() ||
        f1->actions() != model.actions1().size() || f2->actions() != model.actions2().size())
      throw ConfigurationError("strategy field does not match the grid or the action sets");

  const std::vector<double> times = checkpoint_times(cfg);
  const auto steps = static_cast<std::size_t>(std::llround(cfg.T / cfg.dt));
  std::vector<std::size_t> cpStep(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) cpStep[k] = static_cast<std::size_t>(std::llround(times[k] / cfg.dt));
  const int d = model.dimension();
  const std::size_t jobs = pairs.size();

  std::vector<PathEnsemble> out(jobs);
  for (auto& e : out) {
    e.checkpoints = times;
    e.integral.assign(times.size(), std::vector<double>(cfg.paths, 0.0));
    e.finalState.assign(cfg.paths, Point{});
    e.diverged.assign(cfg.paths, 0);
  }
  std::vector<char> leftFlags(jobs * cfg.paths, 0);
  std::vector<PairTable> tables;
  for (const auto& [f1, f2] : pairs) tables.push_back(make_table(*f1, *f2));
  with_dimension(d, [&]<int D>() {
    const Stepper<D> stepper(model, grid, cfg.dt);
    parallel_for(cfg.paths, resolve_workers(cfg.workers), [&](std::size_t p) {
      std::mt19937_64 rng(path_seed(cfg.seed, p));
      boost::random::normal_distribution<double> normal;
      std::vector<Walker> walkers(jobs);
      for (auto& w : walkers) w.x = cfg.x0;
      std::size_t nextCp = 0;
      double xi[2] = {0.0, 0.0};
      for (std::size_t k = 0; k < steps; ++k) {
        for (int a = 0; a < D; ++a) xi[a] = normal(rng);
        for (std::size_t j = 0; j < jobs; ++j)
          if (!walkers[j].dead) stepper.step(tables[j], xi, walkers[j]);
        while (nextCp < cpStep.size() && cpStep[nextCp] == k + 1) {
          for (std::size_t j = 0; j < jobs; ++j) out[j].integral[nextCp][p] = walkers[j].integral;
          ++nextCp;
        }
      }
      for (std::size_t j = 0; j < jobs; ++j) {
        out[j].finalState[p] = walkers[j].x;
        out[j].diverged[p] = walkers[j].dead ? 1 : 0;
        leftFlags[j * cfg.paths + p] = walkers[j].left ? 1 : 0;
      }
    });
  });
  for (std::size_t j = 0; j < jobs; ++j) {
    out[j].divergedPaths = static_cast<std::size_t>(std::count(out[j].diverged.begin(), out[j].diverged.end(), 1));
    out[j].leftGrid = static_cast<std::size_t>(
        std::count(leftFlags.begin() + j * cfg.paths, leftFlags.begin() + (j + 1) * cfg.paths, 1));
  }
  return out;
}

PathEnsemble simulate_paths(const GameModel& model, const Grid& grid, const StrategyField& f1,
                            const StrategyField& f2, const SimConfig& cfg) {
  return std::move(simulate_common(model, grid, {{&f1, &f2}}, cfg).front());
}

RiskEstimate estimate_from(const PathEnsemble& ensemble, const SimConfig& cfg) {
  const std::size_t total = ensemble.diverged.size();
  if (total == 0) throw EstimationError("no paths simulated");
  if (ensemble.divergedPaths == total) throw EstimationError("every path diverged");
  if (ensemble.divergedPaths * 100 > total)
    throw EstimationError(std::to_string(ensemble.divergedPaths) + " of " + std::to_string(total) +
                          " paths diverged (more than 1%)");

  const auto gather = [&](std::size_t cp, std::size_t begin, std::size_t end) {
    std::vector<double> v;
    v.reserve(end - begin);
    for (std::size_t p = begin; p < end; ++p)
      if (!ensemble.diverged[p]) v.push_back(ensemble.integral[cp][p]);
    return v;
  };
  const std::size_t last = ensemble.checkpoints.size() - 1;
  const double T = ensemble.checkpoints[last];
  const bool burn = cfg.burnIn > 0.0;
  const std::size_t cp0 = burn ? checkpoint_index(ensemble.checkpoints, cfg.burnIn) : 0;

  RiskEstimate r;
  r.paths = total - ensemble.divergedPaths;
  r.divergedPaths = ensemble.divergedPaths;
  r.leftGrid = ensemble.leftGrid;
  r.burnInUsed = burn;

  const auto run = [&](std::size_t begin, std::size_t end) {
    const std::vector<double> sT = gather(last, begin, end);
    if (!burn) return estimate_core(sT, nullptr, T, 0.0);
    const std::vector<double> s0 = gather(cp0, begin, end);
    return estimate_core(sT, &s0, T, cfg.burnIn);
  };
  const Estimator e = run(0, total);
  r.value = e.value;
  r.standardError = e.se;

  const std::size_t batches = 10;
  for (std::size_t b = 0; b < batches; ++b) {
    const std::size_t begin = total * b / batches, end = total * (b + 1) / batches;
    if (end > begin + 1) r.logMoments.push_back(run(begin, end).value);
  }

  const std::vector<double> sT = gather(last, 0, total);
  std::vector<double> w;
  double shift;
  lse_mean(sT, w, shift);
  const double mass = pairwise_sum(w.data(), w.size());
  const std::size_t top = std::max<std::size_t>(1, (w.size() + 99) / 100);
  std::nth_element(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(top) - 1, w.end(), std::greater<>());
  std::sort(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(top), std::greater<>());
  r.effectiveTail = pairwise_sum(w.data(), top) / mass;
  r.unreliable = r.effectiveTail > 0.5;

  for (std::size_t cp = 0; cp < ensemble.checkpoints.size(); ++cp) {
    const double t = ensemble.checkpoints[cp];
    if (burn && t == cfg.burnIn && t != 0.25 * T && t != 0.5 * T && t != T) continue;
    r.trend.push_back({t, estimate_core(gather(cp, 0, total), nullptr, t, 0.0).value});
  }
  return r;
}

RiskEstimate estimate_risk_sensitive(const GameModel& model, const Grid& grid, const StrategyField& f1,
                                     const StrategyField& f2, const SimConfig& cfg) {
  return estimate_from(simulate_paths(model, grid, f1, f2, cfg), cfg);
}

DeviationLibrary make_deviations(const GameModel& model, const StrategyField& v1, const StrategyField& v2,
                                 std::size_t count, std::uint64_t seed, double eps) {
  std::mt19937_64 rng(splitmix64(seed));
  const auto build = [&](const StrategyField& saddle, const ActionSet& actions, std::vector<Deviation>& out) {
    const std::size_t n = saddle.points(), k = actions.size();
    for (std::size_t a = 0; a < k && out.size() < count; ++a)
      out.push_back({"constant " + actions.labels[a], StrategyField::pure(n, k, a)});
    std::uniform_int_distribution<std::size_t> pick(0, k - 1);
    for (int e = 0; e < 2 && out.size() < count; ++e) {
      const std::size_t a = pick(rng);
      StrategyField f(n, k);
      std::vector<double> w(k);
      for (std::size_t i = 0; i < n; ++i) {
        const auto s = saddle.at(i);
        for (std::size_t b = 0; b < k; ++b) w[b] = (1.0 - eps) * s[b] + (b == a ? eps : 0.0);
        f.set(i, w);
      }
      out.push_back({"saddle mixed toward " + actions.labels[a], std::move(f)});
    }
    for (int r = 0; out.size() < count; ++r) {
      StrategyField f(n, k);
      for (std::size_t i = 0; i < n; ++i) f.setPure(i, pick(rng));
      out.push_back({"random pure field " + std::to_string(r), std::move(f)});
    }
  };
  DeviationLibrary lib;
  build(v1, model.actions1(), lib.player1);
  build(v2, model.actions2(), lib.player2);
  return lib;
}

VerifyReport verify_saddle(const GameModel& model, const Grid& grid, const StrategyField& v1,
                           const StrategyField& v2, double lambdaHat, const DeviationLibrary& deviations,
                           const SimConfig& cfg) {
  std::vector<std::pair<const StrategyField*, const StrategyField*>> pairs{{&v1, &v2}};
  for (const auto& dv : deviations.player2) pairs.push_back({&v1, &dv.field});
  for (const auto& dv : deviations.player1) pairs.push_back({&dv.field, &v2});
  const std::vector<PathEnsemble> runs = simulate_common(model, grid, pairs, cfg);

  VerifyReport rep;
  rep.lambdaHat = lambdaHat;
  rep.saddle = estimate_from(runs[0], cfg);
  // Round-off floor so that exact (zero-variance) estimates compare equal.
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(lambdaHat));
  rep.saddleMatches = std::abs(rep.saddle.value - lambdaHat) <= 3.0 * rep.saddle.standardError + floor;
  std::size_t k = 1;
  for (const auto& dv : deviations.player2) {
    const RiskEstimate e = estimate_from(runs[k++], cfg);
    DeviationMargin m{2, dv.label, e.value, e.standardError, lambdaHat + 3.0 * e.standardError - e.value, false};
    m.violated = m.margin < -floor;
    rep.margins.push_back(m);
  }
  for (const auto& dv : deviations.player1) {
    const RiskEstimate e = estimate_from(runs[k++], cfg);
    DeviationMargin m{1, dv.label, e.value, e.standardError, e.value - (lambdaHat - 3.0 * e.standardError), false};
    m.violated = m.margin < -floor;
    rep.margins.push_back(m);
  }
  rep.passed = rep.saddleMatches && std::none_of(rep.margins.begin(), rep.margins.end(),
                                                 [](const DeviationMargin& m) { return m.violated; });
  return rep;
}

RepresentationReport check_representation(const GameModel& model, const Grid& grid, const Eigen::VectorXd& V,
                                          double lambdaHat, const StrategyField& f1, const StrategyField& f2,
                                          double ballRadius, const SimConfig& cfg) {
  cfg.validate();
  if (static_cast<std::size_t>(V.size()) != grid.interiorCount())
    throw ConfigurationError("value field does not cover the grid");
  const int d = model.dimension();
  const std::span<const double> v(V.data(), static_cast<std::size_t>(V.size()));
  const auto norm = [d](const Point& x) {
    double s = 0.0;
    for (int a = 0; a < d; ++a) s += x[a] * x[a];
    return std::sqrt(s);
  };
  const auto steps = static_cast<std::size_t>(std::llround(cfg.T / cfg.dt));
  const PairTable table = make_table(f1, f2);

  std::vector<double> logWeight(cfg.paths, 0.0);
  std::vector<double> endValue(cfg.paths, 0.0);
  std::vector<char> capped(cfg.paths, 0), dead(cfg.paths, 0);
  with_dimension(d, [&]<int D>() {
    const Stepper<D> stepper(model, grid, cfg.dt);
    parallel_for(cfg.paths, resolve_workers(cfg.workers), [&](std::size_t p) {
      std::mt19937_64 rng(path_seed(cfg.seed, p));
      boost::random::normal_distribution<double> normal;
      Walker w;
      w.x = cfg.x0;
      double xi[2] = {0.0, 0.0};
      for (std::size_t k = 0; k < steps && norm(w.x) > ballRadius && !w.dead; ++k) {
        for (int a = 0; a < D; ++a) xi[a] = normal(rng);
        stepper.step(table, xi, w, lambdaHat);
      }
      dead[p] = w.dead ? 1 : 0;
      capped[p] = !w.dead && norm(w.x) > ballRadius ? 1 : 0;
      logWeight[p] = w.integral;
      endValue[p] = interpolate_field(grid, v, std::span<const double>(w.x.data(), d));
    });
  });

  RepresentationReport rep;
  const std::size_t deadCount = static_cast<std::size_t>(std::count(dead.begin(), dead.end(), 1));
  if (deadCount * 100 > cfg.paths) throw EstimationError("more than 1% of representation paths diverged");
  std::vector<double> terms;
  terms.reserve(cfg.paths);
  for (std::size_t p = 0; p < cfg.paths; ++p)
    if (!dead[p]) terms.push_back(std::exp(logWeight[p]) * endValue[p]);
  const double n = static_cast<double>(terms.size());
  rep.rhs = pairwise_sum(terms.data(), terms.size()) / n;
  std::vector<double> dev(terms.size());
  for (std::size_t k = 0; k < terms.size(); ++k) dev[k] = (terms[k] - rep.rhs) * (terms[k] - rep.rhs);
  rep.standardError = std::sqrt(pairwise_sum(dev.data(), dev.size()) / std::max(1.0, n - 1.0) / n);
  rep.lhs = interpolate_field(grid, v, std::span<const double>(cfg.x0.data(), d));
  rep.relativeError = std::abs(rep.lhs - rep.rhs) / std::abs(rep.lhs);
  rep.capped = static_cast<std::size_t>(std::count(capped.begin(), capped.end(), 1));
  rep.inconclusive = rep.capped * 20 > cfg.paths;
  return rep;
}

IndependenceReport check_value_independence(const GameModel& model, const Grid& grid, const StrategyField& f1,
                                            const StrategyField& f2, const std::vector<Point>& starts,
                                            const SimConfig& cfg) {
  if (starts.size() < 2) throw ConfigurationError("value independence needs at least two start points");
  IndependenceReport rep;
  rep.starts = starts;
  for (std::size_t k = 0; k < starts.size(); ++k) {
    SimConfig c = cfg;
    c.x0 = starts[k];
    c.seed = cfg.seed + k;
    rep.estimates.push_back(estimate_risk_sensitive(model, grid, f1, f2, c));
  }
  for (std::size_t a = 0; a < starts.size(); ++a)
    for (std::size_t b = a + 1; b < starts.size(); ++b) {
      const RiskEstimate& ea = rep.estimates[a];
      const RiskEstimate& eb = rep.estimates[b];
      const double se = std::hypot(ea.standardError, eb.standardError);
      const double z = se > 0.0 ? std::abs(ea.value - eb.value) / se : (ea.value == eb.value ? 0.0 : HUGE_VAL);
      rep.maxJointZ = std::max(rep.maxJointZ, z);
    }
  rep.passed = rep.maxJointZ <= 3.0;
  return rep;
}

RiskEstimate estimate_chain(const SparseMatrix& A, std::size_t start, const SimConfig& cfg) {
  cfg.validate();
  const Eigen::Index n = A.rows();
  if (static_cast<Eigen::Index>(start) >= n) throw ConfigurationError("chain start index out of range");
  std::vector<double> rowSum(n, 0.0), outRate(n, 0.0);
  std::vector<std::vector<std::pair<Eigen::Index, double>>> jumps(n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (SparseMatrix::InnerIterator it(A, i); it; ++it) {
      rowSum[i] += it.value();
      if (it.col() != i && it.value() > 0.0) {
        outRate[i] += it.value();
        jumps[i].push_back({it.col(), it.value()});
      }
    }

  const std::vector<double> times = checkpoint_times(cfg);
  PathEnsemble e;
  e.checkpoints = times;
  e.integral.assign(times.size(), std::vector<double>(cfg.paths, 0.0));
  e.finalState.assign(cfg.paths, Point{});
  e.diverged.assign(cfg.paths, 0);
  parallel_for(cfg.paths, resolve_workers(cfg.workers), [&](std::size_t p) {
    std::mt19937_64 rng(path_seed(cfg.seed, p));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::Index state = static_cast<Eigen::Index>(start);
    double t = 0.0, s = 0.0;
    std::size_t cp = 0;
    while (cp < times.size()) {
      const double hold = outRate[state] > 0.0 ? -std::log1p(-unif(rng)) / outRate[state]
                                               : std::numeric_limits<double>::infinity();
      const double jumpAt = t + hold;
      while (cp < times.size() && times[cp] <= jumpAt) {
        e.integral[cp][p] = s + rowSum[state] * (times[cp] - t);
        ++cp;
      }
      if (cp == times.size()) break;
      s += rowSum[state] * hold;
      t = jumpAt;
      double u = unif(rng) * outRate[state];
      Eigen::Index next = jumps[state].back().first;
      for (const auto& [j, rate] : jumps[state]) {
        if (u < rate) {
          next = j;
          break;
        }
        u -= rate;
      }
      state = next;
    }
  });
  return estimate_from(e, cfg);
}

}  // namespace hji
