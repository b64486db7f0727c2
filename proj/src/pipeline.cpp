#include "hji/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "hji/config.hpp"
#include "hji/error.hpp"
#include "hji/oracle.hpp"
#include "hji/parallel.hpp"
#include "hji/report_io.hpp"

namespace hji {

using nlohmann::json;

namespace {

struct Context {
  RunConfig cfg;
  std::filesystem::path out;
  json doc;
  std::ostream& log;
};

json point_json(const Point& p, int d) {
  json a = json::array();
  for (int k = 0; k < d; ++k) a.push_back(p[k]);
  return a;
}

int stage_check(Context& c) {
  const RunConfig& cfg = c.cfg;
  const int d = cfg.model.dimension();
  const Grid probe(d, cfg.probeRadius, cfg.probeH);
  json section;
  const AssumptionReport a = check_assumptions(cfg.model, probe);
  section["assumptions"] = to_json(a);
  bool ok = a.passed;
  if (cfg.certificate) {
    const ConditionReport r = check_condition(cfg.model, *cfg.certificate, probe);
    ok = ok && r.passed;
    section["condition"] = to_json(r);
    c.log << "check: assumptions " << (a.passed ? "pass" : "FAIL") << ", " << to_string(r.kind) << " condition "
          << (r.passed ? "pass" : "FAIL") << '\n';
  } else {
    section["condition"] = nullptr;
    c.log << "check: assumptions " << (a.passed ? "pass" : "FAIL") << ", no certificate supplied\n";
  }
  section["passed"] = ok;
  c.doc["check"] = section;
  return ok ? kExitOk : kExitViolation;
}

int stage_solve(Context& c) {
  const RunConfig& cfg = c.cfg;
  const Grid grid(cfg.model.dimension(), cfg.radii.back(), cfg.h);
  const IsaacsSolve s = dirichlet_isaacs(cfg.model, grid, cfg.sweep.solver);
  c.doc["solve"] = to_json(s);
  c.log << "solve: R = " << grid.radius() << ", lambda = " << format_number(s.eigen.lambda) << " after "
        << s.iterations << " iterations" << (s.converged ? "" : " (NOT converged)") << '\n';
  return s.converged ? kExitOk : kExitNonConvergence;
}

int stage_sweep(Context& c) {
  const RunConfig& cfg = c.cfg;
  const SweepReport r = radius_sweep(cfg.model, cfg.model.dimension(), cfg.radii, cfg.h, cfg.sweep);
  c.doc["sweep"] = save_sweep_artifacts(c.out, cfg.model, r);
  for (std::size_t k = 0; k < r.lambdas.size(); ++k)
    c.log << "sweep: R = " << r.radii[k] << "  lambda = " << format_number(r.lambdas[k]) << '\n';
  c.log << "sweep: Lambda-hat = " << format_number(lambda_hat(r))
        << (r.extrapolationValid ? " (extrapolated)" : " (last radius)") << '\n';
  for (const auto& w : r.warnings) c.log << "sweep: warning: " << w << '\n';
  return r.allSolvesConverged ? kExitOk : kExitNonConvergence;
}

int stage_verify(Context& c) {
  const RunConfig& cfg = c.cfg;
  const SweepArtifacts a = load_sweep_artifacts(c.out, cfg.model);
  const int d = cfg.model.dimension();
  c.log << "verify: Lambda-hat = " << format_number(a.lambdaHat) << " on R = " << a.grid.radius() << '\n';

  const DeviationLibrary devs = make_deviations(cfg.model, a.v1, a.v2, cfg.deviations, cfg.deviationSeed, cfg.epsilon);
  const VerifyReport saddle = verify_saddle(cfg.model, a.grid, a.v1, a.v2, a.lambdaHat, devs, cfg.mc);
  c.log << "verify: saddle estimate " << format_number(saddle.saddle.value) << " +- "
        << format_number(saddle.saddle.standardError) << (saddle.saddleMatches ? " matches" : " does NOT match")
        << '\n';
  for (const auto& m : saddle.margins)
    if (m.violated) c.log << "verify: player " << m.player << " deviation '" << m.label << "' violates by " << -m.margin << '\n';

  for (int k = 0; k < d; ++k)
    if (std::abs(cfg.representationStart[k]) >= a.grid.radius())
      throw ConfigurationError("/verify/representationStart: outside the solved box");
  SimConfig rc = cfg.mc;
  rc.x0 = cfg.representationStart;
  rc.burnIn = 0.0;
  const RepresentationReport rep = check_representation(cfg.model, a.grid, a.V, a.lambdaHat, a.v1, a.v2,
                                                        cfg.ballRadius, rc);
  const bool repOk = rep.inconclusive || rep.relativeError < cfg.representationTolerance;
  c.log << "verify: representation relative error " << format_number(rep.relativeError)
        << (rep.inconclusive ? " (inconclusive)" : "") << '\n';

  SimConfig ic = cfg.mc;
  ic.burnIn = cfg.independenceBurnIn;
  const IndependenceReport ind = check_value_independence(cfg.model, a.grid, a.v1, a.v2, cfg.startPoints, ic);
  c.log << "verify: start-point agreement, max joint z " << format_number(ind.maxJointZ) << '\n';

  json indJson;
  indJson["burnIn"] = ic.burnIn;
  indJson["maxJointZ"] = ind.maxJointZ;
  indJson["passed"] = ind.passed;
  indJson["estimates"] = json::array();
  for (std::size_t k = 0; k < ind.starts.size(); ++k) {
    json e = to_json(ind.estimates[k]);
    e["x0"] = point_json(ind.starts[k], d);
    indJson["estimates"].push_back(e);
  }
  json repJson = to_json(rep);
  repJson["x0"] = point_json(rc.x0, d);
  repJson["ballRadius"] = cfg.ballRadius;
  repJson["tolerance"] = cfg.representationTolerance;
  repJson["passed"] = repOk;

  json mc;
  mc["config"] = {{"x0", point_json(cfg.mc.x0, d)}, {"T", cfg.mc.T},       {"dt", cfg.mc.dt},
                  {"paths", cfg.mc.paths},          {"seed", cfg.mc.seed}, {"burnIn", cfg.mc.burnIn}};
  mc["saddle"] = to_json(saddle);
  mc["representation"] = repJson;
  mc["independence"] = indJson;
  write_json(c.out / "mc_report.json", mc);

  const bool ok = saddle.passed && repOk && ind.passed;
  c.doc["verify"] = {{"lambdaHat", a.lambdaHat},
                     {"saddlePassed", saddle.passed},
                     {"saddleMatches", saddle.saddleMatches},
                     {"violations", std::count_if(saddle.margins.begin(), saddle.margins.end(),
                                                  [](const DeviationMargin& m) { return m.violated; })},
                     {"representationPassed", repOk},
                     {"independencePassed", ind.passed},
                     {"passed", ok},
                     {"report", "mc_report.json"}};
  return ok ? kExitOk : kExitViolation;
}

int stage_oracle(Context& c) {
  const RunConfig& cfg = c.cfg;
  const Grid twin(cfg.model.dimension(), cfg.oracleRadius, cfg.oracleH);
  SolverOptions so = cfg.sweep.solver;
  so.tol = std::min(so.tol, 1e-12);
  const IsaacsSolve s = dirichlet_isaacs(cfg.model, twin, so);
  const OracleResult o = enumerate(cfg.model, twin, cfg.meshSteps, cfg.sweep.solver.workers);
  const Certificate cert = certify(s, o, cfg.oracleSlack);
  {
    std::ofstream csv(c.out / "oracle_tensor.csv");
    write_pure_tensor_csv(o, cfg.model.actions1().size(), cfg.model.actions2().size(), csv);
  }
  SimConfig pc = cfg.mc;
  pc.burnIn = cfg.independenceBurnIn;
  const auto pairs = pair_agreement(cfg.model, o, 10, cfg.deviationSeed, pc);
  json pj = json::array();
  bool pairsOk = true;
  for (const auto& p : pairs) {
    pairsOk = pairsOk && p.agrees;
    pj.push_back({{"field1", p.field1},
                  {"field2", p.field2},
                  {"lambda", p.lambda},
                  {"estimate", p.estimate.value},
                  {"stderr", p.estimate.standardError},
                  {"z", p.z},
                  {"agrees", p.agrees}});
  }
  c.log << "oracle: bracket [" << format_number(o.meshMaxMin) << ", " << format_number(o.meshMinMax)
        << "], policy iteration " << format_number(s.eigen.lambda) << ", slack " << format_number(cert.slack)
        << (cert.passed ? " -> certified" : " -> NOT certified") << '\n';
  c.log << "oracle: per-pair chain simulation " << (pairsOk ? "agrees" : "DISAGREES") << '\n';
  json section = to_json(o);
  section["solve"] = to_json(s);
  section["certificate"] = to_json(cert);
  section["pairAgreement"] = pj;
  section["tensor"] = "oracle_tensor.csv";
  section["passed"] = cert.passed && pairsOk && s.converged;
  c.doc["oracle"] = section;
  if (!s.converged) return kExitNonConvergence;
  return cert.passed && pairsOk ? kExitOk : kExitOracle;
}

int dispatch(Context& c, const std::string& sub) {
  if (sub == "check") return stage_check(c);
  if (sub == "solve") return stage_solve(c);
  if (sub == "sweep") return stage_sweep(c);
  if (sub == "verify") return stage_verify(c);
  if (sub == "oracle") return stage_oracle(c);
  // all
  int code = stage_check(c);
  const int sweep = stage_sweep(c);
  if (sweep != kExitOk) return sweep;
  write_json(c.out / "run.json", c.doc);  // verify reloads the sweep from disk
  const int verify = stage_verify(c);
  if (code == kExitOk) code = verify;
  if (c.cfg.oracleEnabled) {
    const int oracle = stage_oracle(c);
    if (code == kExitOk) code = oracle;
  }
  return code;
}

int code_for(const std::string& sub, const Error& e) {
  if (dynamic_cast<const EstimationError*>(&e)) return sub == "oracle" ? kExitOracle : kExitViolation;
  return kExitValidation;
}

}  // namespace

int run(const Invocation& inv, std::ostream& log) {
  static const char* known[] = {"check", "solve", "sweep", "verify", "oracle", "all"};
  if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return inv.subcommand == k; }) ==
      std::end(known)) {
    log << "error: unknown subcommand '" << inv.subcommand << "'\n";
    return kExitValidation;
  }

  RunConfig cfg;
  try {
    cfg = load_config(inv.config);
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    if (inv.out) {
      write_json(*inv.out / "run.json", {{"subcommand", inv.subcommand},
                                         {"config", inv.config.string()},
                                         {"exitCode", kExitValidation},
                                         {"status", "validation error"},
                                         {"diagnostics", {e.what()}}});
    }
    return kExitValidation;
  }
  if (inv.out) cfg.output = *inv.out;
  if (inv.seed) cfg.mc.seed = *inv.seed;
  const int workers = resolve_workers(inv.workers.value_or(cfg.workers));
  cfg.sweep.solver.workers = workers;
  cfg.mc.workers = workers;

  Context c{cfg, cfg.output, json::object(), log};
  std::filesystem::create_directories(c.out);
  if (std::filesystem::exists(c.out / "run.json")) {
    try {
      c.doc = read_json(c.out / "run.json");
      if (!c.doc.is_object()) c.doc = json::object();
    } catch (const Error&) {
      c.doc = json::object();
    }
  }
  c.doc["subcommand"] = inv.subcommand;
  c.doc["config"] = inv.config.string();
  c.doc["model"] = cfg.modelName;
  c.doc["workers"] = workers;
  c.doc["seed"] = cfg.mc.seed;
  c.doc["diagnostics"] = json::array();

  int code = kExitOk;
  try {
    code = dispatch(c, inv.subcommand);
  } catch (const Error& e) {
    code = code_for(inv.subcommand, e);
    c.doc["diagnostics"].push_back(e.what());
    log << "error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    code = kExitValidation;
    c.doc["diagnostics"].push_back(e.what());
    log << "error: " << e.what() << '\n';
  }
  static const char* status[] = {"ok", "validation error", "solver did not converge", "verification violation",
                                 "oracle certification failed"};
  c.doc["exitCode"] = code;
  c.doc["status"] = status[code];
  write_json(c.out / "run.json", c.doc);
  return code;
}

}  // namespace hji
