#pragma once

// Randomized property checks over every built-in model and formulation.

#include "cases.hpp"

#include <algorithm>
#include <sstream>

namespace msid::testing {

struct PropertyStats {
  int cases = 0;
  int failures = 0;
  double worst = 0.0;
  std::string first_failure;

  void record(bool ok, double value, const std::string& label) {
    ++cases;
    worst = std::max(worst, value);
    if (!ok) {
      if (failures == 0) first_failure = label;
      ++failures;
    }
  }
};

inline std::string describe(const ModelCase& c, FormKind f, int point) {
  std::ostringstream s;
  s << c.label << " / " << to_string(f) << " / point " << point;
  return s.str();
}

inline int horizon_for(const ModelCase& c, Rng& rng) {
  return c.chaotic ? rng.integer(5, 10) : rng.integer(10, 30);
}

// Analytic gradient and constraint Jacobian against central differences for
// `points` random points per (model, formulation) pair.
struct DerivativeReport {
  PropertyStats gradient;
  PropertyStats jacobian;
};

inline DerivativeReport check_derivatives(int points, std::uint64_t seed, double tol = 1e-5) {
  DerivativeReport rep;
  Rng rng(seed);
  const FormKind forms[] = {FormKind::single_free, FormKind::single_fixed, FormKind::multiple,
                            FormKind::msa};
  for (const ModelCase& c : model_cases()) {
    const ModelPtr model = lower_to_state_space(c.family);
    for (FormKind f : forms) {
      for (int i = 0; i < points; ++i) {
        const int n = horizon_for(c, rng);
        const EstimationProblem p(model, random_dataset(c, n, rng),
                                  random_formulation(f, n, rng));
        const Vec x = random_decision(c, p, rng);
        const CostEvaluation ev = evaluate_cost(p, x);
        // A one-interval plan has no constraints; redraw so every model with
        // a state gets its full count of Jacobian checks.
        const bool unconstrained =
            f == FormKind::multiple && model->state_dim() > 0 && p.num_constraints() == 0;
        if (ev.diverged || unconstrained) {
          --i;
          continue;
        }
        const Linearization lin = linearize(p, x);
        const double h = c.chaotic ? 1e-7 : 1e-4;
        const Vec fd = fd_gradient([&](const Vec& d) { return evaluate_cost(p, d).value; }, x, h);
        const double ge = max_rel_error(lin.gradient, fd);
        rep.gradient.record(ge <= tol, ge, describe(c, f, i));
        if (p.num_constraints() > 0) {
          const Mat fdj = fd_jacobian([&](const Vec& d) { return evaluate_cost(p, d).constraints; }, x, h);
          const double je = max_rel_error(Mat(lin.jacobian), fdj);
          rep.jacobian.record(je <= tol, je, describe(c, f, i));
        }
      }
    }
  }
  return rep;
}

// Cost of single shooting from x0 against multiple shooting with seeds
// chained from the same rollout.
struct EquivalenceReport {
  PropertyStats cost;         // |V - V^M| / (1 + |V|)
  PropertyStats constraints;  // ||c||_inf
};

inline EquivalenceReport check_equivalence(int cases, std::uint64_t seed, double tol = 1e-12) {
  EquivalenceReport rep;
  Rng rng(seed);
  const std::vector<ModelCase> models = model_cases();
  for (int t = 0; t < cases; ++t) {
    const ModelCase& c = models[t % models.size()];
    const ModelPtr model = lower_to_state_space(c.family);
    const int n = c.chaotic ? rng.integer(5, 20) : rng.integer(10, 60);
    const Dataset data = random_dataset(c, n, rng);
    const Vec theta = c.theta(rng);
    const Vec x0 = c.state(rng);
    const EstimationProblem single(model, data, SingleShooting{true, std::nullopt});
    const Formulation plan = random_formulation(FormKind::multiple, n, rng);
    const EstimationProblem multi(model, data, plan);
    const Mat states = rollout_states(*model, theta, x0, data);
    const double v = evaluate_cost(single, single.pack(ParameterPoint{theta, {x0}})).value;
    const CostEvaluation vm = evaluate_cost(multi, multi.pack(multi.point_from_states(theta, states)));
    std::ostringstream label;
    label << c.label << " case " << t << " (N = " << n << ", M = " << multi.plan()->intervals() << ")";
    const double rel = std::abs(v - vm.value) / (1 + std::abs(v));
    rep.cost.record(rel <= tol, rel, label.str());
    const double cn = vm.constraints.size() ? vm.constraints.lpNorm<Eigen::Infinity>() : 0.0;
    rep.constraints.record(cn <= tol, cn, label.str());
  }
  return rep;
}

}  // namespace msid::testing
