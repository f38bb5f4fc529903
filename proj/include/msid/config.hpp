#pragma once

#include "msid/experiments.hpp"
#include "msid/smoothness.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace msid {

// Schema violation. `field` is the dotted path of the offending entry, e.g.
// "formulation.k" or "model.terms[1][0].lag".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class MissingFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CsvSource {
  std::filesystem::path path;
};
using DataSource = std::variant<GeneratorSpec, CsvSource>;

struct SingleSpec {
  bool optimize_x0 = true;
  std::optional<Vec> fixed_x0;
};
struct MultipleSpec {
  int max_len = 0;               // used when boundaries is empty
  std::vector<int> boundaries;  // explicit plan
};
struct MsaSpec {
  int k = 1;
  bool incremental = false;
  int k_max = 30;
  double tolerance = 1e-6;
};
using FormulationSpec = std::variant<SingleSpec, MultipleSpec, MsaSpec>;

// Where the initial seeds come from: the data ("data"), the generator's true
// trajectory ("truth"), or the true trajectory plus N(0, seed_noise^2)
// ("perturbed").
struct InitialSpec {
  std::optional<Vec> theta;  // default: generator truth
  std::string seeds = "data";
  double seed_noise = 0.0;
};

struct MultiStartSpec {
  std::vector<std::vector<double>> axes;  // one linspace per parameter
  std::vector<int> max_lens;              // empty: use the formulation as is
  double tolerance = 1e-3;
  bool relative = false;
};

struct MonteCarloSpec {
  int realizations = 20;
  std::vector<int> ms_lengths{2, 5, 10, 20};
  std::vector<int> msa_horizons{1, 3, 7, 10, 20};
  bool arx = true;
  bool oe_single = true;
  std::string initial_guess = "arx";
  std::optional<Vec> fixed_guess;
};

struct GridAxis {
  int param = 0;
  double lower = 0.0;
  double upper = 0.0;
  int points = 1;
};
struct GridScanSpec {
  std::vector<GridAxis> axes;  // one or two
};

struct TimingSpec {
  std::string vary = "msa";  // "msa" (K) or "multiple" (max_len)
  std::vector<int> settings;
  int repeats = 20;
  int batches = 7;
  bool solve = false;
};

struct IncrementalSpec {
  std::vector<std::vector<double>> axes;
};

using StudySpec =
    std::variant<MultiStartSpec, MonteCarloSpec, GridScanSpec, TimingSpec, IncrementalSpec>;

struct SmoothnessSpec {
  std::vector<int> lengths{10, 20, 40, 80};
  Box box;
  PairSampling sampling;
  std::optional<Box> state_box;  // for the contraction estimate
  int contraction_samples = 1000;
  std::vector<int> interval_max_lens;  // empty: skip the interval bound check
};

struct RunConfig {
  std::string command;  // simulate | estimate | smoothness | study
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  ModelFamily model;
  DataSource data;
  FormulationSpec formulation = SingleSpec{};
  SolverOptions solver;
  InitialSpec initial;
  std::optional<StudySpec> study;
  std::optional<SmoothnessSpec> smoothness;
  // Normalized configuration after profile overrides, echoed in the manifest.
  nlohmann::json echo;
};

// Applies profiles.<profile> as a JSON merge patch ("desk" needs no entry),
// then validates. Throws ConfigError.
RunConfig parse_config(const nlohmann::json& document, const std::string& profile = "desk");
// Throws MissingFileError when the file cannot be opened, ConfigError on
// malformed text or schema violations.
RunConfig load_config(const std::filesystem::path& path, const std::string& profile = "desk");

// Builds the dataset described by the config (generator or CSV) with `seed`.
Dataset load_dataset(const RunConfig& config, std::uint64_t seed);
Formulation make_formulation(const FormulationSpec& spec, int samples);

// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);

}  // namespace msid
