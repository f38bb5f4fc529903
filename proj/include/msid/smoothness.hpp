#pragma once

#include "msid/objective.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace msid {

// Axis-aligned box [lower, upper].
struct Box {
  Vec lower;
  Vec upper;
  int dim() const { return static_cast<int>(lower.size()); }
};

// All estimators here are sampled lower bounds, not certified constants.

// max over sampled states in `state_box` and windows of `data` of ||A||_2.
double estimate_contraction(const StateSpaceModel& model, const Vec& theta, const Box& state_box,
                            const Dataset& data, int samples, std::uint64_t seed = 1);

// Same for the output map: max ||C||_2.
double estimate_output_lipschitz(const StateSpaceModel& model, const Vec& theta,
                                 const Box& state_box, const Dataset& data, int samples,
                                 std::uint64_t seed = 1);

struct PairSampling {
  int uniform_pairs = 200;
  int local_pairs = 100;  // per separation
  std::vector<double> separations{1e-2, 1e-4, 1e-6};
  // Also take ||grad|| at every sampled point: the supremum of the gradient
  // norm is the Lipschitz constant, and pairs saturate at range/separation.
  bool use_gradient_norms = true;
  std::uint64_t seed = 1;
};

struct LipschitzEstimate {
  double value = 0.0;
  int pairs_used = 0;
  int diverged = 0;  // evaluations that returned non-finite values
};

using ScalarField = std::function<double(const Vec&)>;
using VectorField = std::function<Vec(const Vec&)>;

// Pairs are drawn uniformly in the box and locally around uniform points at
// each separation. Divergent evaluations are skipped and counted.
LipschitzEstimate estimate_lipschitz(const ScalarField& cost, const Box& box,
                                     const PairSampling& sampling,
                                     const VectorField& gradient = {});

// Lipschitz constant of the gradient from gradient differences.
LipschitzEstimate estimate_beta(const VectorField& gradient, const Box& box,
                                const PairSampling& sampling);

// Closed form sqrt(sum_{l=0}^{k} L_h^{2l}).
double s_of_k(int k, double lh);

enum class Regime { exponential, polynomial, bounded };
std::string to_string(Regime regime);

struct RegimeFit {
  Regime regime = Regime::bounded;
  // exponential: d log L / dN; polynomial: d log L / d log N; bounded: 0.
  double rate = 0.0;
  double intercept = 0.0;
  double residual_exponential = 0.0;
  double residual_polynomial = 0.0;
  double residual_constant = 0.0;
};

// Variation below `bounded_ratio` (max/min) is classified as bounded; the
// constant model is nested in the other two and never wins on residual.
RegimeFit regime_fit(const std::vector<double>& lengths, const std::vector<double>& values,
                     double bounded_ratio = 2.0);

struct SmoothnessReport {
  std::vector<int> lengths;
  std::vector<double> lipschitz_estimates;
  std::vector<double> beta_estimates;
  std::vector<int> diverged;
  double contraction_estimate = 0.0;
  RegimeFit lipschitz_fit;
  RegimeFit beta_fit;
  // Exponential rates divided by 2 ln L_h and 3 ln L_h respectively; these
  // are 1 when the growth matches L_h^{2N} and L_h^{3N}.
  std::optional<double> lipschitz_rate_ratio;
  std::optional<double> beta_rate_ratio;
};

// Cost and gradient over the decision vector for a given length N.
struct CostBuilder {
  std::function<ScalarField(int n)> cost;
  std::function<VectorField(int n)> gradient;
};

// Builds cost/gradient callbacks over theta for an estimation problem: the
// remaining decision entries stay at `fixed_decision`'s values.
CostBuilder theta_cost_builder(std::function<EstimationProblem(int n)> make_problem,
                               std::function<Vec(const EstimationProblem&)> fixed_decision);

SmoothnessReport smoothness_report(const CostBuilder& builder, const std::vector<int>& lengths,
                                   const Box& param_box, const PairSampling& sampling,
                                   double contraction = 0.0);

struct IntervalBoundRow {
  int max_len = 0;
  double lipschitz_total = 0.0;         // L^ of V^M
  double lipschitz_max_interval = 0.0;  // max_i L^ of V_i
  bool bound_holds = false;
};

struct IntervalBoundReport {
  std::vector<IntervalBoundRow> rows;
  bool all_hold = false;
};

// For each plan, samples theta pairs with the seeds held at `states`
// (column k = x[k]) and compares L^(V^M) with max_i L^(V_i) on the same
// pairs and points.
IntervalBoundReport interval_bound_check(ModelPtr model, const Dataset& data,
                                         const std::vector<ShootingPlan>& plans,
                                         const Mat& states, const Box& param_box,
                                         const PairSampling& sampling, double tol = 1e-9);

}  // namespace msid
