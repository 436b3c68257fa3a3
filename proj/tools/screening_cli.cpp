#include <iostream>

#include <CLI11.hpp>

#include "screening/app.hpp"

int main(int argc, char** argv) {
  using namespace screening;
  CLI::App app{"Screening model solver"};
  app.require_subcommand(1);

  Invocation inv;
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  long long samples = 0;
  for (const char* name : {"solve", "figures", "verify", "compete", "sweep", "iron"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "JSON config document")->required();
    sub->add_option("--out", out, "output directory");
    sub->add_option("--seed", seed, "Monte Carlo seed override");
    sub->add_option("--samples", samples, "Monte Carlo sample budget override");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitConfig;
  }

  auto* sub = app.get_subcommands().front();
  inv.command = *parse_command(sub->get_name());
  inv.config = config;
  if (sub->count("--out")) inv.out = out;
  if (sub->count("--seed")) inv.seed = seed;
  if (sub->count("--samples")) inv.samples = samples;
  return run(inv, std::cerr);
}
