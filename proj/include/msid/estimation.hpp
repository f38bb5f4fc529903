#pragma once

#include "msid/objective.hpp"
#include "msid/sqp.hpp"

#include <vector>

namespace msid {

// Exposes an EstimationProblem to the SQP solver. The decision vector uses
// the problem's packed layout (theta, then optimized seeds).
class ShootingNlp : public NlpProblem {
 public:
  explicit ShootingNlp(const EstimationProblem& problem) : problem_(&problem) {}

  int dim() const override { return problem_->decision_dim(); }
  int num_constraints() const override { return problem_->num_constraints(); }
  bool evaluate(const Vec& x, double& value, Vec& c) override;
  bool linearize(const Vec& x, Vec& gradient, SpMat& jacobian) override;
  Vec hessian_vec(const Vec& lambda, const Vec& p) override;

 private:
  const EstimationProblem* problem_;
  Linearization lin_;
  Vec x_;
};

struct EstimationResult {
  ParameterPoint point;
  SolverResult solver;
};

EstimationResult estimate(const EstimationProblem& problem, const ParameterPoint& initial,
                          const SolverOptions& options = {});

// Starts from the data-driven seeds.
EstimationResult estimate(const EstimationProblem& problem, const Vec& theta0,
                          const SolverOptions& options = {});

struct IncrementalOptions {
  int k_max = 30;
  // Stop once ||theta_K - theta_{K-1}||_inf falls below this.
  double tolerance = 1e-6;
  SolverOptions solver;
};

struct IncrementalStage {
  int k = 0;
  EstimationResult result;
};

// MSA-PEM with K = 1, 2, ..., each stage warm-started from the previous one,
// on the model and data of `problem` (its formulation is ignored).
std::vector<IncrementalStage> incremental_k_schedule(const EstimationProblem& problem,
                                                     const Vec& theta0,
                                                     const IncrementalOptions& options = {});

}  // namespace msid
