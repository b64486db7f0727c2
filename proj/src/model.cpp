#include "hji/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "hji/error.hpp"

namespace hji {

namespace {

void require_finite(double v, const char* what, std::span<const double> x) {
  if (!std::isfinite(v)) {
    std::string where = "(";
    for (std::size_t a = 0; a < x.size(); ++a) where += (a ? ", " : "") + std::to_string(x[a]);
    throw ModelEvaluationError(std::string(what) + " is not finite at x = " + where + ")");
  }
}

double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

// Smallest eigenvalue of a symmetric 1x1 or 2x2 matrix.
double min_eigenvalue(std::span<const double> a, int d) {
  if (d == 1) return a[0];
  const double m = 0.5 * (a[0] + a[3]);
  const double q = std::sqrt(0.25 * (a[0] - a[3]) * (a[0] - a[3]) + 0.25 * (a[1] + a[2]) * (a[1] + a[2]));
  return m - q;
}

}  // namespace

ActionSet::ActionSet(std::vector<std::string> l, std::vector<double> v) : labels(std::move(l)), values(std::move(v)) {
  if (values.empty()) throw ConfigurationError("action set must not be empty");
  if (labels.size() != values.size())
    throw ConfigurationError("action set has " + std::to_string(labels.size()) + " labels for " +
                             std::to_string(values.size()) + " values");
  std::set<std::string> seen;
  for (const auto& s : labels)
    if (!seen.insert(s).second) throw ConfigurationError("duplicate action label '" + s + "'");
  for (double x : values)
    if (!std::isfinite(x)) throw ConfigurationError("action values must be finite");
}

ActionSet ActionSet::singleton(double value, std::string label) {
  return ActionSet({std::move(label)}, {value});
}

void validate_weights(std::span<const double> w) {
  if (w.empty()) throw ConfigurationError("mixed action has no weights");
  double sum = 0.0;
  for (double v : w) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigurationError("mixed action weight outside [0, 1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw ConfigurationError("mixed action weights sum to " + std::to_string(sum));
}

MixedAction::MixedAction(std::vector<double> weights) : weights_(std::move(weights)) { validate_weights(weights_); }

MixedAction MixedAction::pure(std::size_t actions, std::size_t index) {
  std::vector<double> w(actions, 0.0);
  w.at(index) = 1.0;
  return MixedAction(std::move(w));
}

MixedAction MixedAction::uniform(std::size_t actions) {
  return MixedAction(std::vector<double>(actions, 1.0 / static_cast<double>(actions)));
}

GameModel::GameModel(std::string name, int dimension, DriftFn drift, DiffusionFn diffusion, CostFn cost,
                     ActionSet actions1, ActionSet actions2)
    : name_(std::move(name)),
      d_(dimension),
      drift_(std::move(drift)),
      diffusion_(std::move(diffusion)),
      cost_(std::move(cost)),
      actions1_(std::move(actions1)),
      actions2_(std::move(actions2)) {
  if (d_ != 1 && d_ != 2) throw ConfigurationError("model dimension must be 1 or 2");
  if (!drift_ || !diffusion_ || !cost_) throw ConfigurationError("model evaluators must be set");
  if (actions1_.size() == 0 || actions2_.size() == 0) throw ConfigurationError("model action sets must be non-empty");
}

void GameModel::evaluatePairs(std::span<const double> x, std::span<double> drift, std::span<double> cost) const {
  if (pairs_) {
    pairs_(x, drift, cost);
    return;
  }
  const std::size_t m = actions1_.size(), n = actions2_.size(), d = static_cast<std::size_t>(d_);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      drift_(x, actions1_.values[i], actions2_.values[j], drift.subspan((i * n + j) * d, d));
      cost[i * n + j] = cost_(x, actions1_.values[i], actions2_.values[j]);
    }
}

void GameModel::diffusionMatrix(std::span<const double> x, std::span<double> out) const {
  double s[kMaxDimension * kMaxDimension] = {0.0, 0.0, 0.0, 0.0};
  diffusion_(x, std::span<double>(s, static_cast<std::size_t>(d_ * d_)));
  for (int i = 0; i < d_; ++i)
    for (int j = 0; j < d_; ++j) {
      double acc = 0.0;
      for (int k = 0; k < d_; ++k) acc += s[i * d_ + k] * s[j * d_ + k];
      out[i * d_ + j] = acc;
    }
}

void relaxed_drift(const GameModel& model, std::span<const double> x, std::span<const double> nu1,
                   std::span<const double> nu2, std::span<double> out) {
  const int d = model.dimension();
  double tmp[kMaxDimension];
  std::fill(out.begin(), out.begin() + d, 0.0);
  for (std::size_t i = 0; i < nu1.size(); ++i) {
    if (nu1[i] == 0.0) continue;
    for (std::size_t j = 0; j < nu2.size(); ++j) {
      const double w = nu1[i] * nu2[j];
      if (w == 0.0) continue;
      model.drift(x, i, j, std::span<double>(tmp, d));
      for (int a = 0; a < d; ++a) {
        require_finite(tmp[a], "drift", x);
        out[a] += w * tmp[a];
      }
    }
  }
}

std::vector<double> relaxed_drift(const GameModel& model, std::span<const double> x, const MixedAction& nu1,
                                  const MixedAction& nu2) {
  if (nu1.size() != model.actions1().size() || nu2.size() != model.actions2().size())
    throw ConfigurationError("mixed action size does not match the action set");
  std::vector<double> out(model.dimension(), 0.0);
  relaxed_drift(model, x, nu1.weights(), nu2.weights(), out);
  return out;
}

double relaxed_cost(const GameModel& model, std::span<const double> x, std::span<const double> nu1,
                    std::span<const double> nu2) {
  double acc = 0.0;
  for (std::size_t i = 0; i < nu1.size(); ++i) {
    if (nu1[i] == 0.0) continue;
    for (std::size_t j = 0; j < nu2.size(); ++j) {
      const double w = nu1[i] * nu2[j];
      if (w == 0.0) continue;
      const double c = model.cost(x, i, j);
      require_finite(c, "cost", x);
      acc += w * c;
    }
  }
  return acc;
}

double relaxed_cost(const GameModel& model, std::span<const double> x, const MixedAction& nu1,
                    const MixedAction& nu2) {
  if (nu1.size() != model.actions1().size() || nu2.size() != model.actions2().size())
    throw ConfigurationError("mixed action size does not match the action set");
  return relaxed_cost(model, x, nu1.weights(), nu2.weights());
}

const char* to_string(LyapunovCertificate::Kind kind) {
  return kind == LyapunovCertificate::Kind::ConstantRate ? "constant-rate" : "inf-compact-rate";
}

ConditionReport check_condition(const GameModel& model, const LyapunovCertificate& cert, const Grid& probe) {
  const int d = model.dimension();
  if (probe.dimension() != d) throw ConfigurationError("probe grid dimension does not match the model");
  if (!cert.lyapunov) throw ConfigurationError("certificate has no Lyapunov function");
  const bool constantRate = cert.kind == LyapunovCertificate::Kind::ConstantRate;
  if (constantRate && !(cert.gamma > 0.0)) throw ConfigurationError("certificate gamma must be positive");
  if (!constantRate) {
    if (!cert.ell) throw ConfigurationError("inf-compact-rate certificate needs ell");
    if (!(cert.theta > 0.0 && cert.theta < 1.0)) throw ConfigurationError("certificate theta must lie in (0, 1)");
  }
  if (probe.radius() <= cert.compactRadius)
    throw ConfigurationError("probe grid must extend beyond the compact radius");

  const double h = probe.spacing();
  const std::size_t n1 = model.actions1().size();
  const std::size_t n2 = model.actions2().size();

  auto V = [&](const Point& p) {
    const double v = cert.lyapunov(std::span<const double>(p.data(), d));
    require_finite(v, "Lyapunov function", std::span<const double>(p.data(), d));
    return v;
  };

  struct Sample {
    Point x;
    bool inK;
    double lhs;    // max_u L^u V
    double rate;   // gamma V or ell V
    double slack;
  };
  std::vector<Sample> samples;
  samples.reserve(probe.interiorCount());

  ConditionReport rep;
  rep.kind = cert.kind;
  rep.probePoints = probe.interiorCount();
  rep.minLyapunov = std::numeric_limits<double>::infinity();
  bool costOk = true;

  for (std::size_t i = 0; i < probe.interiorCount(); ++i) {
    const Point x = probe.point(i);
    const std::span<const double> xs(x.data(), d);
    const double v0 = V(x);
    rep.minLyapunov = std::min(rep.minLyapunov, v0);

    double grad[kMaxDimension] = {0.0, 0.0};
    double hess[kMaxDimension * kMaxDimension] = {0.0, 0.0, 0.0, 0.0};
    for (int a = 0; a < d; ++a) {
      Point xp = x, xm = x;
      xp[a] += h;
      xm[a] -= h;
      const double vp = V(xp), vm = V(xm);
      grad[a] = (vp - vm) / (2.0 * h);
      hess[a * d + a] = (vp - 2.0 * v0 + vm) / (h * h);
    }
    if (d == 2) {
      Point pp = x, pm = x, mp = x, mm = x;
      pp[0] += h; pp[1] += h;
      pm[0] += h; pm[1] -= h;
      mp[0] -= h; mp[1] += h;
      mm[0] -= h; mm[1] -= h;
      hess[1] = hess[2] = (V(pp) - V(pm) - V(mp) + V(mm)) / (4.0 * h * h);
    }

    double amat[kMaxDimension * kMaxDimension];
    model.diffusionMatrix(xs, std::span<double>(amat, d * d));
    double diffusionTerm = 0.0, aNorm = 0.0;
    for (int k = 0; k < d * d; ++k) {
      require_finite(amat[k], "diffusion", xs);
      diffusionTerm += 0.5 * amat[k] * hess[k];
      aNorm = std::max(aNorm, std::abs(amat[k]));
    }

    double lhs = -std::numeric_limits<double>::infinity();
    double bNorm = 0.0, maxCost = 0.0;
    for (std::size_t ia = 0; ia < n1; ++ia)
      for (std::size_t ja = 0; ja < n2; ++ja) {
        double b[kMaxDimension];
        model.drift(xs, ia, ja, std::span<double>(b, d));
        double lv = diffusionTerm;
        for (int a = 0; a < d; ++a) {
          require_finite(b[a], "drift", xs);
          lv += b[a] * grad[a];
          bNorm = std::max(bNorm, std::abs(b[a]));
        }
        lhs = std::max(lhs, lv);
        const double c = model.cost(xs, ia, ja);
        require_finite(c, "cost", xs);
        maxCost = std::max(maxCost, c);
      }
    rep.maxCost = std::max(rep.maxCost, maxCost);

    const bool inK = norm(xs) <= cert.compactRadius;
    double rate = 0.0;
    if (constantRate) {
      rate = cert.gamma * v0;
    } else {
      const double l = cert.ell(xs);
      require_finite(l, "ell", xs);
      rate = l * v0;
      if (!inK) {
        const double ratio = l > 0.0 ? maxCost / l : std::numeric_limits<double>::infinity();
        rep.maxCostRatio = std::max(rep.maxCostRatio, ratio);
        if (!(ratio <= cert.theta)) {
          costOk = false;
          if (rep.violations.size() < 50)
            rep.violations.push_back({x, cert.theta - ratio, "cost / ell exceeds theta"});
        }
      }
    }
    const double slack = h * h * (1.0 + aNorm + bNorm) * std::max(1.0, std::abs(v0));
    samples.push_back({x, inK, lhs, rate, slack});
  }

  if (constantRate) costOk = rep.maxCost < cert.gamma;

  double beta = 0.0;
  if (cert.beta) {
    beta = *cert.beta;
  } else {
    for (const auto& s : samples)
      if (s.inK) beta = std::max(beta, s.lhs + s.rate - s.slack);
  }
  rep.beta = beta;

  bool lyapOk = true;
  rep.worstMargin = std::numeric_limits<double>::infinity();
  for (const auto& s : samples) {
    const double margin = (s.inK ? beta : 0.0) - (s.lhs + s.rate - s.slack);
    if (margin < rep.worstMargin) {
      rep.worstMargin = margin;
      rep.worstPoint = s.x;
    }
    if (margin < 0.0) {
      lyapOk = false;
      if (rep.violations.size() < 50) rep.violations.push_back({s.x, margin, "drift inequality fails"});
    }
  }

  // ell must grow along probe rays once outside K.
  if (!constantRate) {
    const int n = probe.halfCells();
    std::vector<std::array<int, kMaxDimension>> dirs;
    if (d == 1) {
      dirs = {{1, 0}, {-1, 0}};
    } else {
      dirs = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
    }
    for (const auto& dir : dirs) {
      double prev = -std::numeric_limits<double>::infinity();
      for (int k = 0; k <= n; ++k) {
        Point p{dir[0] * k * h, d == 2 ? dir[1] * k * h : 0.0};
        const std::span<const double> ps(p.data(), d);
        if (norm(ps) <= cert.compactRadius) continue;
        const double l = cert.ell(ps);
        require_finite(l, "ell", ps);
        if (!(l > prev)) rep.infCompactProbed = false;
        prev = l;
      }
    }
    if (!rep.infCompactProbed && rep.violations.size() < 50)
      rep.violations.push_back({Point{}, 0.0, "ell does not increase along a probe ray beyond K"});
  }

  if (!(rep.minLyapunov > 0.0)) {
    lyapOk = false;
    rep.violations.push_back({Point{}, rep.minLyapunov, "Lyapunov function not positive on the probe"});
  }

  rep.lyapunovHolds = lyapOk;
  rep.costHolds = costOk;
  rep.passed = lyapOk && costOk && rep.infCompactProbed;
  return rep;
}

AssumptionReport check_assumptions(const GameModel& model, const Grid& probe, std::size_t pairSamples,
                                   std::uint64_t seed) {
  const int d = model.dimension();
  if (probe.dimension() != d) throw ConfigurationError("probe grid dimension does not match the model");
  if (pairSamples < 100) throw ConfigurationError("check_assumptions needs at least 100 pair samples per band");

  const std::size_t n1 = model.actions1().size();
  const std::size_t n2 = model.actions2().size();
  std::mt19937_64 rng(seed);
  AssumptionReport rep;

  struct Eval {
    double growth = 0.0;
    double minEig = 0.0;
    bool finite = true;
  };
  auto evaluate = [&](std::span<const double> x) {
    Eval e;
    double s[4] = {0, 0, 0, 0}, a[4] = {0, 0, 0, 0};
    model.sigma(x, std::span<double>(s, d * d));
    model.diffusionMatrix(x, std::span<double>(a, d * d));
    double sigmaSq = 0.0;
    for (int k = 0; k < d * d; ++k) {
      e.finite = e.finite && std::isfinite(s[k]);
      sigmaSq += s[k] * s[k];
    }
    e.minEig = min_eigenvalue(std::span<const double>(a, d * d), d);
    double xx = 0.0;
    for (int k = 0; k < d; ++k) xx += x[k] * x[k];
    for (std::size_t i = 0; i < n1; ++i)
      for (std::size_t j = 0; j < n2; ++j) {
        double b[2];
        model.drift(x, i, j, std::span<double>(b, d));
        double bx = 0.0;
        for (int k = 0; k < d; ++k) {
          e.finite = e.finite && std::isfinite(b[k]);
          bx += b[k] * x[k];
        }
        e.growth = std::max(e.growth, (std::max(bx, 0.0) + sigmaSq) / (1.0 + xx));
      }
    return e;
  };

  constexpr int kBands = 4;
  for (int band = 1; band <= kBands; ++band) {
    AssumptionBand b;
    b.radius = probe.radius() * band / kBands;
    b.minEigenvalue = std::numeric_limits<double>::infinity();
    std::uniform_real_distribution<double> unif(-b.radius, b.radius);
    auto draw = [&]() {
      Point p{0.0, 0.0};
      for (;;) {
        double r2 = 0.0;
        for (int k = 0; k < d; ++k) {
          p[k] = unif(rng);
          r2 += p[k] * p[k];
        }
        if (r2 <= b.radius * b.radius) return p;
      }
    };
    for (std::size_t s = 0; s < pairSamples; ++s) {
      const Point x = draw(), y = draw();
      const std::span<const double> xs(x.data(), d), ys(y.data(), d);
      double dist = 0.0;
      for (int k = 0; k < d; ++k) dist += (x[k] - y[k]) * (x[k] - y[k]);
      dist = std::sqrt(dist);
      double sx[4] = {0, 0, 0, 0}, sy[4] = {0, 0, 0, 0};
      model.sigma(xs, std::span<double>(sx, d * d));
      model.sigma(ys, std::span<double>(sy, d * d));
      double sigmaDiff = 0.0;
      for (int k = 0; k < d * d; ++k) sigmaDiff += (sx[k] - sy[k]) * (sx[k] - sy[k]);
      sigmaDiff = std::sqrt(sigmaDiff);
      for (std::size_t i = 0; i < n1; ++i)
        for (std::size_t j = 0; j < n2; ++j) {
          double bx[2], by[2];
          model.drift(xs, i, j, std::span<double>(bx, d));
          model.drift(ys, i, j, std::span<double>(by, d));
          double bd = 0.0;
          for (int k = 0; k < d; ++k) bd += (bx[k] - by[k]) * (bx[k] - by[k]);
          const double ratio = dist > 0.0 ? (std::sqrt(bd) + sigmaDiff) / dist : 0.0;
          if (!std::isfinite(ratio)) {
            ++rep.nonFinite;
            continue;
          }
          b.lipschitzRatio = std::max(b.lipschitzRatio, ratio);
        }
      for (const Point* p : {&x, &y}) {
        const Eval e = evaluate(std::span<const double>(p->data(), d));
        if (!e.finite || !std::isfinite(e.growth) || !std::isfinite(e.minEig)) {
          ++rep.nonFinite;
          continue;
        }
        b.growthRatio = std::max(b.growthRatio, e.growth);
        b.minEigenvalue = std::min(b.minEigenvalue, e.minEig);
      }
    }
    for (std::size_t i = 0; i < probe.interiorCount(); ++i) {
      const Point x = probe.point(i);
      const std::span<const double> xs(x.data(), d);
      if (norm(xs) > b.radius) continue;
      const Eval e = evaluate(xs);
      if (!e.finite || !std::isfinite(e.growth) || !std::isfinite(e.minEig)) {
        ++rep.nonFinite;
        continue;
      }
      b.growthRatio = std::max(b.growthRatio, e.growth);
      b.minEigenvalue = std::min(b.minEigenvalue, e.minEig);
    }
    b.nondegenerate = b.minEigenvalue >= 1e-10;
    rep.growthConstant = std::max(rep.growthConstant, b.growthRatio);
    rep.bands.push_back(b);
  }
  rep.passed = rep.nonFinite == 0;
  for (const auto& b : rep.bands) rep.passed = rep.passed && b.nondegenerate;
  return rep;
}

}  // namespace hji
