#include <iostream>

#include <CLI11.hpp>

#include "hji/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Risk-sensitive stochastic game solver"};
  app.require_subcommand(1, 1);

  hji::Invocation inv;
  std::string config, out;
  int workers = 0;
  std::uint64_t seed = 0;

  for (const char* name : {"check", "solve", "sweep", "verify", "oracle", "all"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "run config (JSON)")->required();
    sub->add_option("--workers", workers, "worker threads (default: HJI_WORKERS, then logical cores)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "Monte Carlo seed (overrides mc.seed)");
    sub->add_option("--out", out, "output directory (overrides output)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : hji::kExitValidation;
  }

  CLI::App* sub = app.get_subcommands().front();
  inv.subcommand = sub->get_name();
  inv.config = config;
  if (sub->count("--workers")) inv.workers = workers;
  if (sub->count("--seed")) inv.seed = seed;
  if (sub->count("--out")) inv.out = out;
  return hji::run(inv, std::cerr);
}
