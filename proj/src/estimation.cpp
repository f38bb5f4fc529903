#include "msid/estimation.hpp"

namespace msid {

bool ShootingNlp::evaluate(const Vec& x, double& value, Vec& c) {
  CostEvaluation e = evaluate_cost(*problem_, x);
  value = e.value;
  c = std::move(e.constraints);
  return !e.diverged && c.allFinite();
}

bool ShootingNlp::linearize(const Vec& x, Vec& gradient, SpMat& jacobian) {
  try {
    lin_ = msid::linearize(*problem_, x);
  } catch (const DivergenceError&) {
    return false;
  }
  x_ = x;
  gradient = lin_.gradient;
  jacobian = lin_.jacobian;
  return gradient.allFinite();
}

Vec ShootingNlp::hessian_vec(const Vec& lambda, const Vec& p) {
  return lagrangian_hessian_vec(*problem_, lin_, x_, lambda, p);
}

EstimationResult estimate(const EstimationProblem& problem, const ParameterPoint& initial,
                          const SolverOptions& options) {
  ShootingNlp nlp(problem);
  EstimationResult out;
  out.solver = solve(nlp, problem.pack(initial), options);
  out.point = problem.unpack(out.solver.x);
  return out;
}

EstimationResult estimate(const EstimationProblem& problem, const Vec& theta0,
                          const SolverOptions& options) {
  return estimate(problem, problem.default_point(theta0), options);
}

std::vector<IncrementalStage> incremental_k_schedule(const EstimationProblem& problem,
                                                     const Vec& theta0,
                                                     const IncrementalOptions& options) {
  if (options.k_max < 1) throw std::invalid_argument("incremental schedule: k_max must be >= 1");
  std::vector<IncrementalStage> stages;
  Vec theta = theta0;
  for (int k = 1; k <= options.k_max; ++k) {
    const EstimationProblem stage(problem.model_ptr(), problem.data(), MsaPem{k});
    EstimationResult r = estimate(stage, theta, options.solver);
    const Vec next = r.point.theta;
    const double change = (next - theta).cwiseAbs().maxCoeff();
    stages.push_back({k, std::move(r)});
    theta = next;
    if (k > 1 && change < options.tolerance) break;
  }
  return stages;
}

}  // namespace msid
