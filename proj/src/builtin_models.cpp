#include "hji/builtin_models.hpp"

#include <cmath>
#include <numbers>

#include "hji/error.hpp"

namespace hji {

namespace {

double radius_of(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

double sgn(double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); }

void identity_diffusion(std::span<const double> x, std::span<double> out) {
  if (x.size() == 1) {
    out[0] = 1.0;
  } else {
    out[0] = 1.0;
    out[1] = 0.0;
    out[2] = 0.0;
    out[3] = 1.0;
  }
}

ActionSet binary(const char* player) {
  return ActionSet({std::string(player) + "=0", std::string(player) + "=1"}, {0.0, 1.0});
}

GameModel example_2_2(int d) {
  auto drift = [](std::span<const double> x, double u1, double u2, std::span<double> out) {
    const double scale = (1.0 + 0.5 * u1 * u2) / std::max(radius_of(x), 1.0);
    for (std::size_t a = 0; a < x.size(); ++a) out[a] = -scale * x[a];
  };
  auto cost = [](std::span<const double> x, double u1, double u2) {
    return 0.15 * (1.0 - std::exp(-radius_of(x))) * (1.0 + u1 * (1.0 - u2));
  };
  GameModel m("example-2.2", d, drift, identity_diffusion, cost, binary("u1"), binary("u2"));
  m.setCostBounded(true);
  return m;
}

GameModel example_2_3() {
  auto drift = [](std::span<const double> x, double, double u2, std::span<double> out) {
    out[0] = -sgn(x[0]) * x[0] * x[0] + u2;
  };
  auto cost = [](std::span<const double> x, double, double u2) {
    return 0.2 * (1.0 - std::exp(-std::abs(x[0]))) * (1.0 + u2);
  };
  GameModel m("example-2.3", 1, drift, identity_diffusion, cost, ActionSet::singleton(0.0, "u1=none"),
              ActionSet({"u2=0", "u2=0.5", "u2=1"}, {0.0, 0.5, 1.0}));
  m.setCostBounded(true);
  return m;
}

GameModel example_2_5() {
  auto drift = [](std::span<const double> x, double u1, double u2, std::span<double> out) {
    out[0] = -x[0] + 0.5 * (u2 - u1);
  };
  auto cost = [](std::span<const double> x, double u1, double u2) {
    return 0.1 * std::abs(x[0]) * (1.0 + u1 * (1.0 - u2));
  };
  return GameModel("example-2.5", 1, drift, identity_diffusion, cost, binary("u1"), binary("u2"));
}

GameModel ou_benchmark() {
  auto drift = [](std::span<const double> x, double, double, std::span<double> out) { out[0] = -x[0]; };
  auto cost = [](std::span<const double> x, double, double) { return 0.375 * x[0] * x[0]; };
  return GameModel("ou-benchmark", 1, drift, identity_diffusion, cost, ActionSet::singleton(0.0, "u1=none"),
                   ActionSet::singleton(0.0, "u2=none"));
}

GameModel game_1d() {
  auto drift = [](std::span<const double> x, double u1, double u2, std::span<double> out) {
    out[0] = -2.0 * sgn(x[0]) * std::max(std::abs(x[0]), 1.0) + u1 - u2;
  };
  auto cost = [](std::span<const double> x, double u1, double u2) {
    return (1.0 - std::exp(-std::abs(x[0]))) * (1.0 + u1 * (1.0 - u2)) * 0.3;
  };
  GameModel m("game-1d", 1, drift, identity_diffusion, cost, binary("u1"), binary("u2"));
  m.setCostBounded(true);
  m.setPairEvaluator([](std::span<const double> x, std::span<double> b, std::span<double> c) {
    const double base = -2.0 * sgn(x[0]) * std::max(std::abs(x[0]), 1.0);
    const double k = 0.3 * (1.0 - std::exp(-std::abs(x[0])));
    for (int u1 = 0; u1 < 2; ++u1)
      for (int u2 = 0; u2 < 2; ++u2) {
        b[u1 * 2 + u2] = base + u1 - u2;
        c[u1 * 2 + u2] = k * (1.0 + u1 * (1 - u2));
      }
  });
  return m;
}

// |x|/(1+|x|) for |x| >= 1, continued inside by the even quartic matching
// value, slope and curvature at |x| = 1.
double saturating_lyapunov(std::span<const double> x) {
  const double r = radius_of(x);
  if (r >= 1.0) return r / (1.0 + r);
  const double r2 = r * r;
  return 5.0 / 16.0 + 0.25 * r2 - r2 * r2 / 16.0;
}

}  // namespace

double exp_radial_lyapunov(std::span<const double> x) {
  const double r = radius_of(x);
  if (r >= 1.0) return std::exp(r);
  return 0.5 * std::numbers::e * (1.0 + r * r);
}

std::vector<std::string> builtin_model_names() {
  return {"example-2.2", "example-2.3", "example-2.5", "ou-benchmark", "game-1d"};
}

GameModel make_builtin_model(std::string_view name, int dimension) {
  const auto check_dim = [&](int allowedMax) {
    if (dimension < 0 || dimension > allowedMax)
      throw ConfigurationError("built-in model '" + std::string(name) + "' does not support dimension " +
                               std::to_string(dimension));
  };
  if (name == "example-2.2") {
    check_dim(2);
    return example_2_2(dimension == 0 ? 1 : dimension);
  }
  check_dim(1);
  if (name == "example-2.3") return example_2_3();
  if (name == "example-2.5") return example_2_5();
  if (name == "ou-benchmark") return ou_benchmark();
  if (name == "game-1d") return game_1d();
  throw ConfigurationError("unknown built-in model '" + std::string(name) + "'");
}

std::optional<LyapunovCertificate> builtin_certificate(std::string_view name, int dimension) {
  LyapunovCertificate c;
  if (name == "example-2.2") {
    c.kind = LyapunovCertificate::Kind::ConstantRate;
    c.lyapunov = exp_radial_lyapunov;
    c.gamma = 0.4;
    // In the plane the Laplacian of e^{|x|} adds V / (2|x|); the margin
    // 1/2 - 1/(2|x|) reaches 0.4 at |x| = 5.
    c.compactRadius = dimension == 2 ? 5.0 : 2.0;
    return c;
  }
  if (name == "example-2.3") {
    c.kind = LyapunovCertificate::Kind::ConstantRate;
    c.lyapunov = saturating_lyapunov;
    c.gamma = 0.5;
    c.compactRadius = 3.0;
    return c;
  }
  if (name == "example-2.5") {
    c.kind = LyapunovCertificate::Kind::InfCompactRate;
    c.lyapunov = exp_radial_lyapunov;
    c.ell = [](std::span<const double> x) { return radius_of(x) - 2.0; };
    c.theta = 0.5;
    c.compactRadius = 4.0;
    return c;
  }
  if (name == "ou-benchmark") {
    c.kind = LyapunovCertificate::Kind::InfCompactRate;
    c.lyapunov = [](std::span<const double> x) { return std::exp(0.5 * x[0] * x[0]); };
    c.ell = [](std::span<const double> x) { return 0.5 * x[0] * x[0] - 1.0; };
    c.theta = 0.8;
    c.compactRadius = 6.0;
    return c;
  }
  if (name == "game-1d") {
    c.kind = LyapunovCertificate::Kind::ConstantRate;
    c.lyapunov = exp_radial_lyapunov;
    c.gamma = 1.0;
    c.compactRadius = 2.0;
    return c;
  }
  return std::nullopt;
}

}  // namespace hji
