#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hji/builtin_models.hpp"
#include "hji/config.hpp"
#include "hji/error.hpp"
#include "hji/report_io.hpp"

using namespace hji;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hji_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(HJI_BINARY) + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const fs::path& dir, const json& doc) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << doc.dump(2);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string config_path(const char* name) { return std::string(HJI_SOURCE_DIR) + "/configs/" + name; }

// A quick game-1d run: coarse grid, short horizon, few paths.
json quick_game() {
  return {{"model", "game-1d"},
          {"grid", {{"radiusList", {1, 2, 3}}, {"h", 0.05}}},
          {"mc", {{"x0", {0}}, {"T", 4}, {"dt", 0.01}, {"paths", 2000}, {"seed", 5}}},
          {"verify", {{"deviations", 2}, {"ballRadius", 1}, {"representationStart", {1.5}}}}};
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("a missing grid spacing is a validation error with a pointer") {
    const fs::path dir = scratch("missing-h");
    json doc = quick_game();
    doc["grid"].erase("h");
    const fs::path cfg = write_config(dir, doc);
    CHECK(run_cli("solve --config " + cfg.string() + " --out " + (dir / "out").string()) == 1);
    const json run = read_json(dir / "out" / "run.json");
    CHECK(run["exitCode"] == 1);
    CHECK(run["diagnostics"][0].get<std::string>().find("/grid/h") != std::string::npos);
    CHECK_THROWS_WITH_AS(parse_config(doc), doctest::Contains("/grid/h"), ConfigurationError);
  }

  TEST_CASE("schema violations name the field") {
    json doc = quick_game();
    doc["mc"]["paths"] = -3;
    CHECK_THROWS_WITH_AS(parse_config(doc), doctest::Contains("/mc/paths"), ConfigurationError);
    doc = quick_game();
    doc["grid"]["spacing"] = 0.1;
    CHECK_THROWS_WITH_AS(parse_config(doc), doctest::Contains("/grid"), ConfigurationError);
    doc = quick_game();
    doc["model"] = "no-such-model";
    CHECK_THROWS_WITH_AS(parse_config(doc), doctest::Contains("/model"), ConfigurationError);
    doc = quick_game();
    doc["grid"]["radiusList"] = {3, 2};
    CHECK_THROWS_AS(parse_config(doc), ConfigurationError);
    doc = quick_game();
    doc["model"] = {{"name", "m"}, {"dimension", 1}, {"drift", {"-x +"}}, {"diffusion", {{"1"}}}, {"cost", "0"}};
    CHECK_THROWS_WITH_AS(parse_config(doc), doctest::Contains("/model/drift/0"), ConfigurationError);
  }

  TEST_CASE("command-line errors") {
    CHECK(run_cli("") == 1);
    CHECK(run_cli("solve") == 1);
    CHECK(run_cli("frobnicate --config x.json") == 1);
    CHECK(run_cli("solve --config /nonexistent/config.json --out " + scratch("nofile").string()) == 1);
  }

  TEST_CASE("solve on the OU benchmark") {
    const fs::path dir = scratch("ou-solve");
    REQUIRE(run_cli("solve --config " + config_path("ou-benchmark.json") + " --out " + dir.string() + " --workers 1") == 0);
    const json run = read_json(dir / "run.json");
    CHECK(run["status"] == "ok");
    CHECK(run["workers"] == 1);
    CHECK(std::abs(run["solve"]["lambda"].get<double>() - 0.25) <= 1e-3);
    CHECK(run["solve"]["converged"] == true);
  }

  TEST_CASE("check reports the certificate") {
    const fs::path dir = scratch("check");
    CHECK(run_cli("check --config " + config_path("example-2.2.json") + " --out " + dir.string()) == 0);
    const json run = read_json(dir / "run.json");
    CHECK(run["check"]["condition"]["passed"] == true);
    json doc = quick_game();
    doc["model"] = {{"name", "flat"},
                    {"dimension", 1},
                    {"drift", {"-x"}},
                    {"diffusion", {{"1"}}},
                    {"cost", "0.2"},
                    {"certificate", {{"kind", "constant-rate"}, {"lyapunov", "1"}, {"gamma", 0.5}, {"compactRadius", 2}}}};
    const fs::path bad = scratch("check-bad");
    CHECK(run_cli("check --config " + write_config(bad, doc).string() + " --out " + bad.string()) == 3);
  }

  TEST_CASE("sweep output reloads field for field and reruns are byte-identical") {
    const fs::path a = scratch("sweep-a"), b = scratch("sweep-b");
    const fs::path cfg = write_config(a, quick_game());
    REQUIRE(run_cli("sweep --config " + cfg.string() + " --out " + (a / "out").string() + " --workers 1") == 0);
    REQUIRE(run_cli("sweep --config " + cfg.string() + " --out " + (b / "out").string() + " --workers 2") == 0);
    for (const char* f : {"lambda_sweep.csv", "value_function.csv", "strategy_p1.csv", "strategy_p2.csv"}) {
      const std::string x = slurp(a / "out" / f);
      CHECK_FALSE(x.empty());
      CHECK(x == slurp(b / "out" / f));
    }
    CHECK(slurp(a / "out" / "strategy_p1.csv").rfind("x1,u1=0,u1=1\n", 0) == 0);

    const RunConfig rc = parse_config(quick_game());
    const SweepReport r = radius_sweep(rc.model, 1, rc.radii, rc.h, rc.sweep);
    const SweepArtifacts s = load_sweep_artifacts(a / "out", rc.model);
    CHECK(s.grid.sameAs(r.final.grid));
    CHECK(s.lambdaHat == lambda_hat(r));
    CHECK(s.radii == r.radii);
    CHECK(s.lambdas == r.lambdas);
    CHECK(s.V == r.final.eigen.phi);
    CHECK(s.v1 == r.final.v1);
    CHECK(s.v2 == r.final.v2);
    CHECK_THROWS_AS(load_sweep_artifacts(a / "out", make_builtin_model("ou-benchmark")), ConfigurationError);
  }

  TEST_CASE("verify against a corrupted Lambda-hat is a violation") {
    const fs::path dir = scratch("corrupt");
    const fs::path cfg = write_config(dir, quick_game());
    const std::string out = " --out " + (dir / "out").string();
    REQUIRE(run_cli("sweep --config " + cfg.string() + out) == 0);
    json run = read_json(dir / "out" / "run.json");
    run["sweep"]["lambdaHat"] = run["sweep"]["lambdaHat"].get<double>() + 1.0;
    write_json(dir / "out" / "run.json", run);
    CHECK(run_cli("verify --config " + cfg.string() + out) == 3);
    const json after = read_json(dir / "out" / "run.json");
    CHECK(after["verify"]["saddleMatches"] == false);
    CHECK(after["verify"]["violations"].get<int>() > 0);
    CHECK(after.contains("sweep"));  // earlier sections survive
    const json mc = read_json(dir / "out" / "mc_report.json");
    CHECK(mc["saddle"]["passed"] == false);
  }

  TEST_CASE("verify without a sweep is a validation error") {
    const fs::path dir = scratch("nosweep");
    CHECK(run_cli("verify --config " + write_config(dir, quick_game()).string() + " --out " + (dir / "out").string()) == 1);
  }

  TEST_CASE("seed and worker overrides") {
    const fs::path dir = scratch("flags");
    const fs::path cfg = write_config(dir, quick_game());
    REQUIRE(run_cli("solve --config " + cfg.string() + " --out " + dir.string() + " --seed 42 --workers 2") == 0);
    const json run = read_json(dir / "run.json");
    CHECK(run["seed"] == 42);
    CHECK(run["workers"] == 2);
    REQUIRE(std::system(("HJI_WORKERS=3 " + std::string(HJI_BINARY) + " solve --config " + cfg.string() +
                         " --out " + dir.string() + " 2>/dev/null")
                            .c_str()) == 0);
    CHECK(read_json(dir / "run.json")["workers"] == 3);
  }
}
