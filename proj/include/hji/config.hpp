#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hji/isaacs.hpp"
#include "hji/model.hpp"
#include "hji/montecarlo.hpp"

namespace hji {

/// Everything one CLI invocation needs, validated up front.
struct RunConfig {
  std::string modelName;
  GameModel model;
  std::optional<LyapunovCertificate> certificate;

  std::vector<double> radii;  // strictly increasing
  double h = 0.0;

  SweepOptions sweep;
  SimConfig mc;

  // verify
  std::size_t deviations = 10;
  std::uint64_t deviationSeed = 11;
  double epsilon = 0.2;  // weight of the eps-mixture deviations
  double ballRadius = 1.0;
  Point representationStart{2.0, 0.0};
  double representationTolerance = 0.05;
  /// Start points of the value-independence comparison and the burn-in its
  /// estimator differences out.
  std::vector<Point> startPoints;
  double independenceBurnIn = 5.0;

  // check
  double probeRadius = 10.0;
  double probeH = 0.05;

  // oracle
  bool oracleEnabled = false;
  int meshSteps = 4;
  double oracleRadius = 0.6;
  double oracleH = 0.3;
  std::optional<double> oracleSlack;

  std::filesystem::path output = "out";
  int workers = 0;
};

/// Parses and validates a config document. Errors are ConfigurationError
/// messages that start with the JSON pointer of the offending field.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);

/// Builds a model from an inline definition:
///   {"name", "dimension", "drift": [expr per axis], "diffusion": [[expr]],
///    "cost": expr, "actions1"/"actions2": {"labels", "values"},
///    "costBounded"}
/// Expressions may use x, x1, x2, r, u1, u2.
GameModel model_from_json(const nlohmann::json& def, const std::string& pointer = "/model");

}  // namespace hji
