#include "hji/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hji/error.hpp"

namespace hji {

using nlohmann::json;

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigurationError(path.string() + ": cannot write");
  return out;
}

void write_coordinates(std::ostream& out, const Grid& grid, std::size_t i) {
  const Point x = grid.point(i);
  for (int a = 0; a < grid.dimension(); ++a) out << (a ? "," : "") << format_number(x[a]);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

double parse_cell(const std::string& cell, const std::filesystem::path& path, std::size_t row) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != cell.size())
    throw ConfigurationError(path.string() + ": row " + std::to_string(row) + ": bad number '" + cell + "'");
  return v;
}

// Reads an interior-point CSV: header, then one row per interior point in
// grid order with matching coordinates and `width` payload columns.
std::vector<std::vector<double>> read_grid_csv(const std::filesystem::path& path, const Grid& grid,
                                               std::size_t width, std::vector<std::string>* header) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError(path.string() + ": cannot open");
  const int d = grid.dimension();
  std::string line;
  if (!std::getline(in, line)) throw ConfigurationError(path.string() + ": empty file");
  const auto head = split(line);
  if (head.size() != d + width) throw ConfigurationError(path.string() + ": unexpected header '" + line + "'");
  if (header) header->assign(head.begin() + d, head.end());
  std::vector<std::vector<double>> rows;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++row;
    const auto cells = split(line);
    if (cells.size() != d + width) throw ConfigurationError(path.string() + ": row " + std::to_string(row) + " has the wrong width");
    const std::size_t i = rows.size();
    if (i >= grid.interiorCount()) throw ConfigurationError(path.string() + ": more rows than grid points");
    const Point x = grid.point(i);
    for (int a = 0; a < d; ++a)
      if (std::abs(parse_cell(cells[a], path, row) - x[a]) > 1e-9 * (1.0 + std::abs(x[a])))
        throw ConfigurationError(path.string() + ": row " + std::to_string(row) + " is not at the expected grid point");
    std::vector<double> payload;
    for (std::size_t k = 0; k < width; ++k) payload.push_back(parse_cell(cells[d + k], path, row));
    rows.push_back(std::move(payload));
  }
  if (rows.size() != grid.interiorCount())
    throw ConfigurationError(path.string() + ": " + std::to_string(rows.size()) + " rows for " +
                             std::to_string(grid.interiorCount()) + " grid points");
  return rows;
}

}  // namespace

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json to_json(const AssumptionReport& r) {
  json bands = json::array();
  for (const auto& b : r.bands)
    bands.push_back({{"radius", b.radius},
                     {"lipschitzRatio", b.lipschitzRatio},
                     {"growthRatio", b.growthRatio},
                     {"minEigenvalue", b.minEigenvalue},
                     {"nondegenerate", b.nondegenerate}});
  return {{"passed", r.passed}, {"growthConstant", r.growthConstant}, {"nonFinite", r.nonFinite}, {"bands", bands}};
}

json to_json(const ConditionReport& r) {
  json v = json::array();
  for (const auto& x : r.violations) v.push_back({{"x", {x.x[0], x.x[1]}}, {"margin", x.margin}, {"what", x.what}});
  return {{"kind", to_string(r.kind)},
          {"passed", r.passed},
          {"lyapunovHolds", r.lyapunovHolds},
          {"costHolds", r.costHolds},
          {"infCompactProbed", r.infCompactProbed},
          {"beta", r.beta},
          {"worstMargin", r.worstMargin},
          {"worstPoint", {r.worstPoint[0], r.worstPoint[1]}},
          {"maxCost", r.maxCost},
          {"maxCostRatio", r.maxCostRatio},
          {"minLyapunov", r.minLyapunov},
          {"probePoints", r.probePoints},
          {"violations", v}};
}

json to_json(const IsaacsSolve& s) {
  return {{"radius", s.grid.radius()},
          {"h", s.grid.spacing()},
          {"dimension", s.grid.dimension()},
          {"interiorPoints", s.grid.interiorCount()},
          {"lambda", s.eigen.lambda},
          {"cwLower", s.eigen.cwLower},
          {"cwUpper", s.eigen.cwUpper},
          {"eigenResidual", s.eigen.residual},
          {"iterations", s.iterations},
          {"selectorChanges", s.selectorChanges},
          {"lambdaHistory", s.lambdaHistory},
          {"hamiltonianResidual", s.hamiltonianResidual},
          {"pureGap", s.pureGap},
          {"nonBilinearPoints", s.nonBilinearPoints},
          {"monotone", s.monotone},
          {"upwindUsed", s.upwindUsed},
          {"dampingUsed", s.dampingUsed},
          {"converged", s.converged},
          {"message", s.message}};
}

json to_json(const SweepReport& r) {
  return {{"radii", r.radii},
          {"lambdas", r.lambdas},
          {"iterations", r.iterations},
          {"allSolvesConverged", r.allSolvesConverged},
          {"converged", r.converged},
          {"extrapolated", r.extrapolated},
          {"extrapolationValid", r.extrapolationValid},
          {"lambdaHat", lambda_hat(r)},
          {"monotonicityViolations", r.monotonicityViolations},
          {"warnings", r.warnings},
          {"final", to_json(r.final)}};
}

json to_json(const RiskEstimate& e) {
  json trend = json::array();
  for (const auto& t : e.trend) trend.push_back({{"T", t.T}, {"value", t.value}});
  return {{"value", e.value},
          {"stderr", e.standardError},
          {"logMoments", e.logMoments},
          {"effectiveTail", e.effectiveTail},
          {"unreliable", e.unreliable},
          {"burnInUsed", e.burnInUsed},
          {"trend", trend},
          {"paths", e.paths},
          {"divergedPaths", e.divergedPaths},
          {"leftGrid", e.leftGrid}};
}

json to_json(const VerifyReport& r) {
  json margins = json::array();
  for (const auto& m : r.margins)
    margins.push_back({{"player", m.player},
                       {"label", m.label},
                       {"estimate", m.estimate},
                       {"stderr", m.standardError},
                       {"margin", m.margin},
                       {"violated", m.violated}});
  return {{"lambdaHat", r.lambdaHat},
          {"saddle", to_json(r.saddle)},
          {"saddleMatches", r.saddleMatches},
          {"margins", margins},
          {"passed", r.passed},
          {"note", "no violation found among the listed deviations; this is not a proof of optimality"}};
}

json to_json(const RepresentationReport& r) {
  return {{"lhs", r.lhs},
          {"rhs", r.rhs},
          {"stderr", r.standardError},
          {"relativeError", r.relativeError},
          {"capped", r.capped},
          {"inconclusive", r.inconclusive}};
}

json to_json(const OracleResult& r) {
  return {{"radius", r.grid.radius()},
          {"h", r.grid.spacing()},
          {"interiorPoints", r.grid.interiorCount()},
          {"meshSteps", r.meshSteps},
          {"meshResolution", r.meshResolution},
          {"pureFields1", r.pureFields1},
          {"pureFields2", r.pureFields2},
          {"meshFields1", r.meshFields1},
          {"meshFields2", r.meshFields2},
          {"pureMaxMin", r.pureMaxMin},
          {"pureMinMax", r.pureMinMax},
          {"meshMaxMin", r.meshMaxMin},
          {"meshMinMax", r.meshMinMax},
          {"lipschitz1", r.lipschitz1},
          {"lipschitz2", r.lipschitz2},
          {"defaultSlack", r.defaultSlack},
          {"allConverged", r.allConverged}};
}

json to_json(const Certificate& c) {
  return {{"lambda", c.lambda}, {"lower", c.lower}, {"upper", c.upper}, {"slack", c.slack}, {"passed", c.passed}};
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError(path.string() + ": cannot open");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigurationError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& doc) {
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
}

void write_lambda_sweep_csv(const std::filesystem::path& path, const SweepReport& r) {
  auto out = open_out(path);
  out << "radius,lambda\n";
  for (std::size_t k = 0; k < r.lambdas.size(); ++k)
    out << format_number(r.radii[k]) << ',' << format_number(r.lambdas[k]) << '\n';
}

void write_value_csv(const std::filesystem::path& path, const Grid& grid, const Eigen::VectorXd& V) {
  auto out = open_out(path);
  out << (grid.dimension() == 1 ? "x1" : "x1,x2") << ",V\n";
  for (std::size_t i = 0; i < grid.interiorCount(); ++i) {
    write_coordinates(out, grid, i);
    out << ',' << format_number(V(static_cast<Eigen::Index>(i))) << '\n';
  }
}

void write_strategy_csv(const std::filesystem::path& path, const Grid& grid, const StrategyField& f,
                        const ActionSet& actions) {
  auto out = open_out(path);
  out << (grid.dimension() == 1 ? "x1" : "x1,x2");
  for (const auto& l : actions.labels) out << ',' << l;
  out << '\n';
  for (std::size_t i = 0; i < grid.interiorCount(); ++i) {
    write_coordinates(out, grid, i);
    for (double w : f.at(i)) out << ',' << format_number(w);
    out << '\n';
  }
}

Eigen::VectorXd read_value_csv(const std::filesystem::path& path, const Grid& grid) {
  const auto rows = read_grid_csv(path, grid, 1, nullptr);
  Eigen::VectorXd V(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) V(static_cast<Eigen::Index>(i)) = rows[i][0];
  return V;
}

StrategyField read_strategy_csv(const std::filesystem::path& path, const Grid& grid, const ActionSet& actions) {
  std::vector<std::string> header;
  const auto rows = read_grid_csv(path, grid, actions.size(), &header);
  if (header != actions.labels) throw ConfigurationError(path.string() + ": action labels do not match the model");
  StrategyField f(grid.interiorCount(), actions.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    try {
      f.set(i, rows[i]);
    } catch (const ConfigurationError& e) {
      throw ConfigurationError(path.string() + ": row " + std::to_string(i + 2) + ": " + e.what());
    }
  }
  return f;
}

double lambda_hat(const SweepReport& r) {
  if (r.extrapolationValid) return r.extrapolated;
  return r.lambdas.empty() ? 0.0 : r.lambdas.back();
}

json save_sweep_artifacts(const std::filesystem::path& dir, const GameModel& model, const SweepReport& r) {
  write_lambda_sweep_csv(dir / "lambda_sweep.csv", r);
  write_value_csv(dir / "value_function.csv", r.final.grid, r.final.eigen.phi);
  write_strategy_csv(dir / "strategy_p1.csv", r.final.grid, r.final.v1, model.actions1());
  write_strategy_csv(dir / "strategy_p2.csv", r.final.grid, r.final.v2, model.actions2());
  json j = to_json(r);
  j["model"] = model.name();
  return j;
}

SweepArtifacts load_sweep_artifacts(const std::filesystem::path& dir, const GameModel& model) {
  const json run = read_json(dir / "run.json");
  if (!run.contains("sweep")) throw ConfigurationError((dir / "run.json").string() + ": no sweep section; run sweep first");
  const json& s = run["sweep"];
  SweepArtifacts a;
  try {
    if (s.at("model").get<std::string>() != model.name())
      throw ConfigurationError("sweep was run for model '" + s.at("model").get<std::string>() + "'");
    const json& f = s.at("final");
    const int d = f.at("dimension").get<int>();
    if (d != model.dimension()) throw ConfigurationError("sweep dimension does not match the model");
    a.grid = Grid(d, f.at("radius").get<double>(), f.at("h").get<double>());
    a.lambdaHat = s.at("lambdaHat").get<double>();
    a.radii = s.at("radii").get<std::vector<double>>();
    a.lambdas = s.at("lambdas").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ConfigurationError((dir / "run.json").string() + ": malformed sweep section: " + e.what());
  }
  a.V = read_value_csv(dir / "value_function.csv", a.grid);
  a.v1 = read_strategy_csv(dir / "strategy_p1.csv", a.grid, model.actions1());
  a.v2 = read_strategy_csv(dir / "strategy_p2.csv", a.grid, model.actions2());
  return a;
}

}  // namespace hji
