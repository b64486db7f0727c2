#include "hji/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <memory>
#include <set>

#include "hji/builtin_models.hpp"
#include "hji/error.hpp"
#include "hji/expression.hpp"

namespace hji {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& pointer, const std::string& what) {
  throw ConfigurationError(pointer + ": " + what);
}

void only_keys(const json& obj, const std::string& pointer, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) fail(pointer, "expected an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) fail(pointer + "/" + it.key(), "unknown field");
}

const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

const json& require(const json& obj, const char* key, const std::string& pointer) {
  const json* v = find(obj, key);
  if (!v) fail(pointer + "/" + key, "required field is missing");
  return *v;
}

double as_number(const json& v, const std::string& pointer) {
  if (!v.is_number()) fail(pointer, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(pointer, "must be finite");
  return x;
}

double positive(const json& v, const std::string& pointer) {
  const double x = as_number(v, pointer);
  if (!(x > 0.0)) fail(pointer, "must be positive");
  return x;
}

long long integer(const json& v, const std::string& pointer, long long lo, long long hi) {
  if (!v.is_number_integer()) fail(pointer, "expected an integer");
  const long long x = v.get<long long>();
  if (x < lo || x > hi) fail(pointer, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return x;
}

std::uint64_t seed_value(const json& v, const std::string& pointer) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    fail(pointer, "expected a nonnegative integer");
  return v.get<std::uint64_t>();
}

bool boolean(const json& v, const std::string& pointer) {
  if (!v.is_boolean()) fail(pointer, "expected true or false");
  return v.get<bool>();
}

std::string text(const json& v, const std::string& pointer) {
  if (!v.is_string()) fail(pointer, "expected a string");
  return v.get<std::string>();
}

Point point_value(const json& v, const std::string& pointer, int d) {
  Point p{0.0, 0.0};
  if (v.is_number() && d == 1) {
    p[0] = as_number(v, pointer);
    return p;
  }
  if (!v.is_array() || static_cast<int>(v.size()) != d)
    fail(pointer, "expected an array of " + std::to_string(d) + " coordinates");
  for (int a = 0; a < d; ++a) p[a] = as_number(v[a], pointer + "/" + std::to_string(a));
  return p;
}

Expression expression(const json& v, const std::string& pointer) {
  if (v.is_number()) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "(%.17g)", as_number(v, pointer));
    return Expression::parse(buf);
  }
  try {
    return Expression::parse(text(v, pointer));
  } catch (const ConfigurationError& e) {
    fail(pointer, e.what());
  }
}

ExpressionVariables bind(std::span<const double> x, double u1, double u2) {
  ExpressionVariables vars;
  vars.x1 = x[0];
  vars.x2 = x.size() > 1 ? x[1] : 0.0;
  double s = 0.0;
  for (double c : x) s += c * c;
  vars.r = std::sqrt(s);
  vars.u1 = u1;
  vars.u2 = u2;
  return vars;
}

ActionSet action_set(const json& v, const std::string& pointer) {
  only_keys(v, pointer, {"labels", "values"});
  const json& values = require(v, "values", pointer);
  if (!values.is_array() || values.empty()) fail(pointer + "/values", "expected a non-empty array");
  std::vector<double> vals;
  for (std::size_t k = 0; k < values.size(); ++k)
    vals.push_back(as_number(values[k], pointer + "/values/" + std::to_string(k)));
  std::vector<std::string> labels;
  if (const json* l = find(v, "labels")) {
    if (!l->is_array() || l->size() != vals.size()) fail(pointer + "/labels", "expected one label per value");
    for (std::size_t k = 0; k < l->size(); ++k) labels.push_back(text((*l)[k], pointer + "/labels/" + std::to_string(k)));
  } else {
    for (double x : vals) labels.push_back(std::to_string(x));
  }
  try {
    return ActionSet(std::move(labels), std::move(vals));
  } catch (const ConfigurationError& e) {
    fail(pointer, e.what());
  }
}

ScalarFieldFn scalar_field(const json& v, const std::string& pointer) {
  auto e = std::make_shared<Expression>(expression(v, pointer));
  return [e](std::span<const double> x) { return e->evaluate(bind(x, 0.0, 0.0)); };
}

LyapunovCertificate certificate_from_json(const json& v, const std::string& pointer) {
  only_keys(v, pointer, {"kind", "lyapunov", "gamma", "ell", "theta", "compactRadius", "beta"});
  LyapunovCertificate c;
  const std::string kind = text(require(v, "kind", pointer), pointer + "/kind");
  if (kind == "constant-rate") {
    c.kind = LyapunovCertificate::Kind::ConstantRate;
    c.gamma = positive(require(v, "gamma", pointer), pointer + "/gamma");
  } else if (kind == "inf-compact-rate") {
    c.kind = LyapunovCertificate::Kind::InfCompactRate;
    c.ell = scalar_field(require(v, "ell", pointer), pointer + "/ell");
    if (const json* t = find(v, "theta")) c.theta = positive(*t, pointer + "/theta");
  } else {
    fail(pointer + "/kind", "expected \"constant-rate\" or \"inf-compact-rate\"");
  }
  c.lyapunov = scalar_field(require(v, "lyapunov", pointer), pointer + "/lyapunov");
  c.compactRadius = positive(require(v, "compactRadius", pointer), pointer + "/compactRadius");
  if (const json* b = find(v, "beta")) c.beta = as_number(*b, pointer + "/beta");
  return c;
}

}  // namespace

GameModel model_from_json(const json& def, const std::string& pointer) {
  only_keys(def, pointer, {"name", "dimension", "drift", "diffusion", "cost", "actions1", "actions2", "costBounded",
                           "certificate"});
  const std::string name = find(def, "name") ? text(def["name"], pointer + "/name") : "inline";
  const int d = static_cast<int>(integer(require(def, "dimension", pointer), pointer + "/dimension", 1, 2));

  const json& drift = require(def, "drift", pointer);
  if (!drift.is_array() || static_cast<int>(drift.size()) != d)
    fail(pointer + "/drift", "expected " + std::to_string(d) + " expressions");
  auto b = std::make_shared<std::vector<Expression>>();
  for (int a = 0; a < d; ++a) b->push_back(expression(drift[a], pointer + "/drift/" + std::to_string(a)));

  const json& diffusion = require(def, "diffusion", pointer);
  if (!diffusion.is_array() || static_cast<int>(diffusion.size()) != d)
    fail(pointer + "/diffusion", "expected a " + std::to_string(d) + "x" + std::to_string(d) + " array");
  auto s = std::make_shared<std::vector<Expression>>();
  bool sigmaUsesControls = false;
  for (int r = 0; r < d; ++r) {
    const std::string rp = pointer + "/diffusion/" + std::to_string(r);
    if (!diffusion[r].is_array() || static_cast<int>(diffusion[r].size()) != d)
      fail(rp, "expected " + std::to_string(d) + " expressions");
    for (int c = 0; c < d; ++c) {
      s->push_back(expression(diffusion[r][c], rp + "/" + std::to_string(c)));
      sigmaUsesControls = sigmaUsesControls || s->back().dependsOnControls();
    }
  }
  if (sigmaUsesControls) fail(pointer + "/diffusion", "the diffusion may not depend on u1 or u2");

  auto c = std::make_shared<Expression>(expression(require(def, "cost", pointer), pointer + "/cost"));
  const ActionSet a1 = find(def, "actions1") ? action_set(def["actions1"], pointer + "/actions1") : ActionSet::singleton();
  const ActionSet a2 = find(def, "actions2") ? action_set(def["actions2"], pointer + "/actions2") : ActionSet::singleton();

  DriftFn driftFn = [b](std::span<const double> x, double u1, double u2, std::span<double> out) {
    const ExpressionVariables v = bind(x, u1, u2);
    for (std::size_t a = 0; a < b->size(); ++a) out[a] = (*b)[a].evaluate(v);
  };
  DiffusionFn sigmaFn = [s](std::span<const double> x, std::span<double> out) {
    const ExpressionVariables v = bind(x, 0.0, 0.0);
    for (std::size_t k = 0; k < s->size(); ++k) out[k] = (*s)[k].evaluate(v);
  };
  CostFn costFn = [c](std::span<const double> x, double u1, double u2) { return c->evaluate(bind(x, u1, u2)); };
  GameModel m(name, d, driftFn, sigmaFn, costFn, a1, a2);
  if (const json* cb = find(def, "costBounded")) m.setCostBounded(boolean(*cb, pointer + "/costBounded"));
  return m;
}

RunConfig parse_config(const json& doc) {
  only_keys(doc, "", {"model", "grid", "solver", "mc", "verify", "check", "oracle", "output", "workers"});
  RunConfig cfg;

  // model
  const json& model = require(doc, "model", "");
  if (model.is_string()) {
    cfg.modelName = model.get<std::string>();
    try {
      cfg.model = make_builtin_model(cfg.modelName);
    } catch (const ConfigurationError& e) {
      fail("/model", e.what());
    }
    cfg.certificate = builtin_certificate(cfg.modelName, cfg.model.dimension());
  } else if (model.is_object() && find(model, "builtin")) {
    only_keys(model, "/model", {"builtin", "dimension"});
    cfg.modelName = text(model["builtin"], "/model/builtin");
    const int d = find(model, "dimension") ? static_cast<int>(integer(model["dimension"], "/model/dimension", 1, 2)) : 0;
    try {
      cfg.model = make_builtin_model(cfg.modelName, d);
    } catch (const ConfigurationError& e) {
      fail("/model", e.what());
    }
    cfg.certificate = builtin_certificate(cfg.modelName, cfg.model.dimension());
  } else if (model.is_object()) {
    cfg.model = model_from_json(model);
    cfg.modelName = cfg.model.name();
    if (const json* c = find(model, "certificate")) cfg.certificate = certificate_from_json(*c, "/model/certificate");
  } else {
    fail("/model", "expected a built-in model name or an inline definition");
  }
  const int d = cfg.model.dimension();

  // grid
  const json& grid = require(doc, "grid", "");
  only_keys(grid, "/grid", {"radiusList", "h"});
  const json& radii = require(grid, "radiusList", "/grid");
  if (!radii.is_array() || radii.empty()) fail("/grid/radiusList", "expected a non-empty array");
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double r = positive(radii[k], "/grid/radiusList/" + std::to_string(k));
    if (!cfg.radii.empty() && r <= cfg.radii.back()) fail("/grid/radiusList/" + std::to_string(k), "radii must increase");
    cfg.radii.push_back(r);
  }
  cfg.h = positive(require(grid, "h", "/grid"), "/grid/h");
  for (std::size_t k = 0; k < cfg.radii.size(); ++k) {
    const double cells = cfg.radii[k] / cfg.h;
    if (std::abs(cells - std::round(cells)) > 1e-9 * cells)
      fail("/grid/radiusList/" + std::to_string(k), "radius is not a multiple of h");
  }

  // solver
  if (const json* s = find(doc, "solver")) {
    only_keys(*s, "/solver", {"tol", "maxOuter", "damping", "selectorTol", "sweepTol"});
    if (const json* v = find(*s, "tol")) cfg.sweep.solver.tol = positive(*v, "/solver/tol");
    if (const json* v = find(*s, "maxOuter")) cfg.sweep.solver.maxOuter = static_cast<int>(integer(*v, "/solver/maxOuter", 1, 100000));
    if (const json* v = find(*s, "damping")) {
      const double x = as_number(*v, "/solver/damping");
      if (!(x > 0.0 && x < 1.0)) fail("/solver/damping", "must lie in (0, 1)");
      cfg.sweep.solver.damping = x;
    }
    if (const json* v = find(*s, "selectorTol")) cfg.sweep.solver.selectorTol = positive(*v, "/solver/selectorTol");
    if (const json* v = find(*s, "sweepTol")) cfg.sweep.sweepTol = positive(*v, "/solver/sweepTol");
  }

  // mc
  cfg.mc.x0 = {0.0, 0.0};
  if (const json* m = find(doc, "mc")) {
    only_keys(*m, "/mc", {"x0", "T", "dt", "paths", "seed", "burnIn"});
    if (const json* v = find(*m, "x0")) cfg.mc.x0 = point_value(*v, "/mc/x0", d);
    if (const json* v = find(*m, "T")) cfg.mc.T = positive(*v, "/mc/T");
    if (const json* v = find(*m, "dt")) cfg.mc.dt = positive(*v, "/mc/dt");
    if (const json* v = find(*m, "paths")) cfg.mc.paths = static_cast<std::size_t>(integer(*v, "/mc/paths", 100, 100000000));
    if (const json* v = find(*m, "seed")) cfg.mc.seed = seed_value(*v, "/mc/seed");
    if (const json* v = find(*m, "burnIn")) {
      cfg.mc.burnIn = as_number(*v, "/mc/burnIn");
      if (cfg.mc.burnIn < 0.0) fail("/mc/burnIn", "must be nonnegative");
    }
  }
  try {
    cfg.mc.validate();
  } catch (const ConfigurationError& e) {
    fail("/mc", e.what());
  }

  // verify
  cfg.independenceBurnIn = cfg.mc.T / 4;
  if (const json* v = find(doc, "verify")) {
    only_keys(*v, "/verify", {"deviations", "seed", "epsilon", "ballRadius", "representationStart",
                              "representationTolerance", "startPoints", "burnIn"});
    if (const json* x = find(*v, "deviations")) cfg.deviations = static_cast<std::size_t>(integer(*x, "/verify/deviations", 0, 1000));
    if (const json* x = find(*v, "seed")) cfg.deviationSeed = seed_value(*x, "/verify/seed");
    if (const json* x = find(*v, "epsilon")) {
      cfg.epsilon = as_number(*x, "/verify/epsilon");
      if (!(cfg.epsilon > 0.0 && cfg.epsilon <= 1.0)) fail("/verify/epsilon", "must lie in (0, 1]");
    }
    if (const json* x = find(*v, "ballRadius")) cfg.ballRadius = positive(*x, "/verify/ballRadius");
    if (const json* x = find(*v, "representationStart")) cfg.representationStart = point_value(*x, "/verify/representationStart", d);
    if (const json* x = find(*v, "representationTolerance"))
      cfg.representationTolerance = positive(*x, "/verify/representationTolerance");
    if (const json* x = find(*v, "startPoints")) {
      if (!x->is_array()) fail("/verify/startPoints", "expected an array of points");
      for (std::size_t k = 0; k < x->size(); ++k)
        cfg.startPoints.push_back(point_value((*x)[k], "/verify/startPoints/" + std::to_string(k), d));
    }
    if (const json* x = find(*v, "burnIn")) {
      cfg.independenceBurnIn = as_number(*x, "/verify/burnIn");
      if (cfg.independenceBurnIn < 0.0 || cfg.independenceBurnIn > cfg.mc.T / 2)
        fail("/verify/burnIn", "must lie in [0, T/2]");
    }
  }
  if (cfg.startPoints.empty()) {
    for (double x : {-1.0, 0.0, 1.0}) cfg.startPoints.push_back({x, 0.0});
  }

  // check
  if (const json* c = find(doc, "check")) {
    only_keys(*c, "/check", {"probeRadius", "probeH"});
    if (const json* v = find(*c, "probeRadius")) cfg.probeRadius = positive(*v, "/check/probeRadius");
    if (const json* v = find(*c, "probeH")) cfg.probeH = positive(*v, "/check/probeH");
  }

  // oracle
  if (const json* o = find(doc, "oracle")) {
    only_keys(*o, "/oracle", {"enabled", "meshSteps", "radius", "h", "slack"});
    if (const json* v = find(*o, "enabled")) cfg.oracleEnabled = boolean(*v, "/oracle/enabled");
    if (const json* v = find(*o, "meshSteps")) cfg.meshSteps = static_cast<int>(integer(*v, "/oracle/meshSteps", 1, 6));
    if (const json* v = find(*o, "radius")) cfg.oracleRadius = positive(*v, "/oracle/radius");
    if (const json* v = find(*o, "h")) cfg.oracleH = positive(*v, "/oracle/h");
    if (const json* v = find(*o, "slack")) {
      cfg.oracleSlack = as_number(*v, "/oracle/slack");
      if (*cfg.oracleSlack < 0.0) fail("/oracle/slack", "must be nonnegative");
    }
  }

  if (const json* o = find(doc, "output")) cfg.output = text(*o, "/output");
  if (const json* w = find(doc, "workers")) cfg.workers = static_cast<int>(integer(*w, "/workers", 0, 4096));
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError(path.string() + ": cannot open config");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigurationError(path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

}  // namespace hji
