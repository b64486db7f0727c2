#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "hji/isaacs.hpp"
#include "hji/model.hpp"
#include "hji/montecarlo.hpp"
#include "hji/oracle.hpp"

namespace hji {

/// %.17g; round-trips every finite double.
std::string format_number(double x);

nlohmann::json to_json(const AssumptionReport& r);
nlohmann::json to_json(const ConditionReport& r);
nlohmann::json to_json(const IsaacsSolve& s);
nlohmann::json to_json(const SweepReport& r);
nlohmann::json to_json(const RiskEstimate& e);
nlohmann::json to_json(const VerifyReport& r);
nlohmann::json to_json(const RepresentationReport& r);
nlohmann::json to_json(const OracleResult& r);
nlohmann::json to_json(const Certificate& c);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

/// radius,lambda
void write_lambda_sweep_csv(const std::filesystem::path& path, const SweepReport& r);
/// x1[,x2],V over the interior points.
void write_value_csv(const std::filesystem::path& path, const Grid& grid, const Eigen::VectorXd& V);
/// x1[,x2] then one weight column per action, headed by the action labels.
void write_strategy_csv(const std::filesystem::path& path, const Grid& grid, const StrategyField& f,
                        const ActionSet& actions);

Eigen::VectorXd read_value_csv(const std::filesystem::path& path, const Grid& grid);
StrategyField read_strategy_csv(const std::filesystem::path& path, const Grid& grid, const ActionSet& actions);

/// What verify needs from a finished sweep.
struct SweepArtifacts {
  Grid grid;
  double lambdaHat = 0.0;
  std::vector<double> radii;
  std::vector<double> lambdas;
  Eigen::VectorXd V;
  StrategyField v1;
  StrategyField v2;
};

/// Writes the sweep's CSV files into `dir` and returns the JSON section
/// that run.json stores under "sweep".
nlohmann::json save_sweep_artifacts(const std::filesystem::path& dir, const GameModel& model, const SweepReport& r);

/// Reloads from run.json's "sweep" section plus the CSV files. Throws
/// ConfigurationError when anything is missing or inconsistent with the
/// model.
SweepArtifacts load_sweep_artifacts(const std::filesystem::path& dir, const GameModel& model);

/// The sweep's Lambda estimate: the extrapolated value when the tail fit is
/// valid, else the last lambda.
double lambda_hat(const SweepReport& r);

}  // namespace hji
