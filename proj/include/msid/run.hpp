#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace msid {

enum ExitCode : int {
  exit_ok = 0,
  exit_error = 1,
  exit_missing_file = 2,
  exit_schema = 3,
  exit_not_converged = 4,
};

struct RunOptions {
  std::filesystem::path config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::string profile = "desk";
  bool trace = false;
  int jobs = 0;  // 0: all available cores
};

// Executes the configured command and writes manifest.json, result.json and
// the command's tables into the output directory. result.json depends only on
// (config, profile, seed); wall-clock figures go to timings.json.
int run(const RunOptions& options, std::ostream& out, std::ostream& err);

// Parses and validates without computing anything.
int validate(const RunOptions& options, std::ostream& out, std::ostream& err);

std::string version();

}  // namespace msid
