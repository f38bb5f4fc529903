#include "msid/run.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <thread>

int main(int argc, char** argv) {
  CLI::App app{"Multiple-shooting system identification toolkit"};
  app.set_version_flag("--version", msid::version());
  app.require_subcommand(1);

  msid::RunOptions options;
  std::uint64_t seed = 0;
  std::string out;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", options.config_path, "JSON run configuration")->required();
    sub->add_option("--profile", options.profile, "Override set: desk or paper")
        ->check(CLI::IsMember({"desk", "paper"}));
  };

  CLI::App* run = app.add_subcommand("run", "Execute a configuration");
  add_common(run);
  CLI::Option* seed_opt = run->add_option("--seed", seed, "Override the configured seed");
  CLI::Option* out_opt = run->add_option("--out", out, "Output directory");
  run->add_flag("--trace", options.trace, "Write per-iteration solver records (trace.jsonl)");
  run->add_option("--jobs", options.jobs, "Worker threads; 1 runs serially")
      ->default_val(std::max(1u, std::thread::hardware_concurrency()))
      ->check(CLI::PositiveNumber);

  CLI::App* validate = app.add_subcommand("validate", "Check a configuration without running it");
  add_common(validate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Bad command lines are schema errors of the invocation itself.
    const int code = app.exit(e);
    return code == 0 ? 0 : msid::exit_schema;
  }
  if (*seed_opt) options.seed = seed;
  if (*out_opt) options.out = out;

  if (validate->parsed()) return msid::validate(options, std::cout, std::cerr);
  return msid::run(options, std::cout, std::cerr);
}
