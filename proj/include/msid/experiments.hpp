#pragma once

#include "msid/dataset.hpp"
#include "msid/estimation.hpp"
#include "msid/model.hpp"
#include "msid/objective.hpp"
#include "msid/sqp.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace msid {

// ---------------------------------------------------------------------------
// Dataset generators. Every generator is a pure function of (spec, seed): the
// same pair gives a bit-identical dataset. True states are produced with the
// model's own transition so that simulate() reproduces them exactly.

// x[k] = theta x[k-1] (1 - x[k-1]), y = x (+ optional noise).
struct LogisticSpec {
  double theta = 3.78;
  double x0 = 0.5;
  int n = 200;
  double noise = 0.0;
};

// (a) held Gaussian force, sigma 10; (b) closed loop around the upright
// position; (c) as (a) with sigma 50.
struct PendulumSpec {
  char scenario = 'a';
  int n = 1024;
  std::optional<double> input_std;  // default 10 (a), 50 (c); unused in (b)
  std::optional<double> noise;      // default 0.03 (a, c), 0 (b)
  double reference_std = 0.2;       // (b) only
  // (b) only: factor on the error terms of the control law. As printed, the
  // law leaves the upright position of this plant unstable (closed-loop
  // spectral radius 1.054); m / delta^2 = 3e4 gives 0.989.
  double controller_gain = 3.0e4;
  int hold = 20;
};

// ybar[k] = t1 ybar[k-1] + t2 ybar[k-2] + t3 u[k-1], y = ybar + v.
struct Linear2ndSpec {
  char setting = 'a';
  int n = 300;
  double noise = 0.05;
  double input_std = 1.0;
  int hold = 5;
};

// ybar[k] = t1 u[k-1] u[k-2] + t2 u[k-1] ybar[k-1] with an AR(1) input.
struct FarinaSpec {
  double theta1 = 0.6;
  double theta2 = -0.5;
  int n = 500;
  double noise = 0.09;
  double ar = 0.99;
  double eta_scale = 0.1;
};

using GeneratorSpec = std::variant<LogisticSpec, PendulumSpec, Linear2ndSpec, FarinaSpec>;

Dataset generate(const GeneratorSpec& spec, std::uint64_t seed);
// Model family that produced the data, and its true parameters.
ModelFamily generator_model(const GeneratorSpec& spec);
Vec generator_theta(const GeneratorSpec& spec);
// "logistic", "pendulum-b", "linear2nd-c", "farina".
std::string generator_id(const GeneratorSpec& spec);
// Default spec for an id; throws std::invalid_argument on unknown ids.
GeneratorSpec generator_from_id(const std::string& id);

Dataset gen_logistic(double theta = 3.78, double x0 = 0.5, int n = 200, std::uint64_t seed = 0);
Dataset gen_pendulum(char scenario, std::uint64_t seed);
Dataset gen_linear2nd(char setting, std::uint64_t seed);
Dataset gen_farina(std::uint64_t seed);

Vec linear2nd_theta(char setting);
Vec pendulum_theta();

// ---------------------------------------------------------------------------
// Summary statistics.

// Linear interpolation between order statistics (the "type 7" rule).
double quantile(std::vector<double> values, double q);
double median(std::vector<double> values);

struct Summary {
  int count = 0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double mean = 0.0;
};
Summary summarize(const std::vector<double>& values);

struct Histogram {
  double lower = 0.0;
  double width = 0.0;
  std::vector<int> counts;
  int below = 0;
  int above = 0;
  int invalid = 0;  // NaN
};
// Bins are [lower + i w, lower + (i+1) w); the last one also takes `upper`.
Histogram histogram(const std::vector<double>& values, int bins, double lower, double upper);

// Ordinary least-squares line y = intercept + slope x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;  // 1 when y is constant and fitted exactly
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// ---------------------------------------------------------------------------
// Studies.

// Runs task(i) for i in [0, count) on up to `jobs` threads. Each index is
// handled exactly once; callers store results by index, so the assembled
// output does not depend on scheduling.
void parallel_for(int count, int jobs, const std::function<void(int)>& task);

struct RunRecord {
  int index = 0;
  std::string method;
  Vec initial_theta;
  Vec final_theta;
  double final_cost = 0.0;
  SolverStatus status = SolverStatus::max_iter;
  int iterations = 0;
  int function_evaluations = 0;
  double wall_seconds = 0.0;
};

struct ExperimentResult {
  std::vector<RunRecord> records;

  std::vector<const RunRecord*> with_method(const std::string& method) const;
};

RunRecord make_record(int index, std::string method, const Vec& initial_theta,
                      const EstimationResult& result);

ExperimentResult multi_start_study(const EstimationProblem& problem,
                                   const std::vector<ParameterPoint>& guesses,
                                   const SolverOptions& options, int jobs = 1);

// n points evenly spaced over [lo, hi] (n = 1 gives lo).
std::vector<double> linspace(double lo, double hi, int n);
// Cartesian grid of parameter vectors, first axis varying slowest.
std::vector<Vec> grid_points(const std::vector<std::vector<double>>& axes);

// theta plus seeds read from `states`, each entry disturbed by N(0, sigma^2).
ParameterPoint perturbed_point(const EstimationProblem& problem, const Vec& theta,
                               const Mat& states, double sigma, std::mt19937_64& rng);

bool within_absolute(const Vec& estimate, const Vec& truth, double tol);
bool within_relative(const Vec& estimate, const Vec& truth, double tol);

// Monte Carlo over data realizations. Realization r regenerates the data with
// seed + r and runs every configured method on it.
struct MonteCarloConfig {
  GeneratorSpec data = Linear2ndSpec{};
  int realizations = 20;
  std::uint64_t seed = 1;
  ModelFamily oe_model = Linear2ndOrderOE{};
  ModelFamily arx_model = linear_arx(2, 1);
  bool arx = true;
  bool oe_single = true;
  std::vector<int> ms_lengths{2, 5, 10, 20};
  std::vector<int> msa_horizons{1, 3, 7, 10, 20};
  // Initial theta for the output-error methods: "arx" (the ARX estimate of
  // the same realization), "truth", or "fixed" (fixed_guess).
  std::string initial_guess = "arx";
  Vec fixed_guess;
  SolverOptions solver;
  int jobs = 1;
};

// Method tags: "arx", "oe-ss", "oe-ms-<len>", "msa-<K>". Records are ordered
// by realization, then by method in the order above.
ExperimentResult monte_carlo_study(const MonteCarloConfig& config);

struct MethodSummary {
  std::string method;
  int runs = 0;
  int converged = 0;
  std::vector<Summary> error;           // per theta component, estimate - truth
  std::vector<Summary> absolute_error;  // per component
  Summary evaluations;
};
std::vector<MethodSummary> summarize_methods(const ExperimentResult& result, const Vec& truth);

// Cost over a one- or two-dimensional slice of theta. The remaining
// decision entries (other parameters, seeds) are taken from `base`.
struct GridScan {
  int param0 = 0;
  int param1 = -1;
  std::vector<double> axis0;
  std::vector<double> axis1;  // empty for a 1-D scan
  Mat values;                 // axis0.size() x max(1, axis1.size())
};
GridScan grid_scan(const EstimationProblem& problem, const ParameterPoint& base, int param0,
                   const std::vector<double>& axis0, int param1 = -1,
                   const std::vector<double>& axis1 = {}, int jobs = 1);

// Mean absolute difference between adjacent cells of log(1 + V). Cells that
// did not simulate take the largest finite value of the grid.
double total_variation(const Mat& values);

// Time per cost evaluation and per solver evaluation across settings.
struct TimingRow {
  int setting = 0;
  double seconds_per_cost = 0.0;  // median over batches of evaluate_cost
  int solver_evaluations = 0;     // 0 unless a solve was requested
  double seconds_per_solver_evaluation = 0.0;
  SolverStatus status = SolverStatus::max_iter;
};
struct TimingOptions {
  int repeats = 20;  // evaluations per batch
  int batches = 7;
  bool solve = false;
  SolverOptions solver;
};
std::vector<TimingRow> timing_study(
    const std::function<EstimationProblem(int)>& make_problem, const std::vector<int>& settings,
    const Vec& theta, const TimingOptions& options = {});

// Incremental-K schedule against a single MSA-PEM solve at K = k_max, from
// every guess. Methods "incremental" and "vanilla-<k_max>".
ExperimentResult incremental_study(const EstimationProblem& problem,
                                   const std::vector<Vec>& guesses,
                                   const IncrementalOptions& options, int jobs = 1);

}  // namespace msid
