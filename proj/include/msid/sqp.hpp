#pragma once

#include "msid/types.hpp"

#include <Eigen/SparseCholesky>

#include <functional>
#include <string>

namespace msid {

// min f(x) s.t. c(x) = 0, with m = 0 allowed.
//
// The solver calls evaluate() at every trial point, linearize() at accepted
// points only, and hessian_vec() for products with the Lagrangian Hessian at
// the most recent linearization point.
class NlpProblem {
 public:
  virtual ~NlpProblem() = default;
  virtual int dim() const = 0;
  virtual int num_constraints() const = 0;
  // Returns false when x cannot be evaluated (divergence).
  virtual bool evaluate(const Vec& x, double& value, Vec& c) = 0;
  virtual bool linearize(const Vec& x, Vec& gradient, SpMat& jacobian) = 0;
  virtual Vec hessian_vec(const Vec& lambda, const Vec& p) = 0;
};

// Callback-backed problem for analytic test functions.
class FunctionalNlp : public NlpProblem {
 public:
  std::function<double(const Vec&)> f;
  std::function<Vec(const Vec&)> grad;
  std::function<Vec(const Vec&)> c;      // may be empty when m = 0
  std::function<Mat(const Vec&)> jac;    // m x n
  // Hessian of f + lambda^T c at x, times p.
  std::function<Vec(const Vec& x, const Vec& lambda, const Vec& p)> hess;

  FunctionalNlp(int n, int m) : n_(n), m_(m) {}
  int dim() const override { return n_; }
  int num_constraints() const override { return m_; }
  bool evaluate(const Vec& x, double& value, Vec& cx) override;
  bool linearize(const Vec& x, Vec& gradient, SpMat& jacobian) override;
  Vec hessian_vec(const Vec& lambda, const Vec& p) override;

 private:
  int n_;
  int m_;
  Vec x_;
};

struct IterationRecord {
  int iteration = 0;
  double value = 0.0;
  double constraint_norm = 0.0;
  double radius = 0.0;
  double ratio = 0.0;
  double penalty = 0.0;
  bool accepted = false;
};

struct SolverOptions {
  int max_iter = 1000;
  double kkt_tol = 1e-8;
  double constraint_tol = 1e-8;
  double initial_radius = 1.0;
  double max_radius = 1000.0;
  double min_radius = 1e-14;
  double initial_penalty = 1.0;
  double penalty_margin = 1.0;
  double penalty_factor = 0.3;  // required share of the constraint reduction
  double eta = 0.8;             // vertical step uses radius eta * Delta
  double accept_ratio = 0.1;
  double shrink_ratio = 0.25;
  double expand_ratio = 0.75;
  double shrink_factor = 0.25;
  double expand_factor = 2.0;
  std::function<void(const IterationRecord&)> on_iteration;
};

enum class SolverStatus { converged, max_iter, step_too_small, evaluation_failed };

std::string to_string(SolverStatus status);

struct SolverState {
  Vec x;
  Vec lambda;
  double radius = 1.0;
  double penalty = 1.0;
  int iterations = 0;
  int function_evaluations = 0;
};

struct SolverResult {
  Vec x;
  Vec lambda;
  SolverStatus status = SolverStatus::max_iter;
  double value = 0.0;
  double kkt_residual = 0.0;          // ||grad f + J^T lambda||_inf
  double constraint_violation = 0.0;  // ||c||_inf
  double final_radius = 0.0;
  double final_penalty = 0.0;
  int iterations = 0;
  int function_evaluations = 0;
  double wall_seconds = 0.0;
};

// Least-squares machinery around J: projections onto null(J) and
// minimum-norm solutions of J x = b through a sparse factorization of J J^T.
class ConstraintProjector {
 public:
  explicit ConstraintProjector(const SpMat& jacobian);

  bool full_rank() const { return full_rank_; }
  // (J J^T)^{-1} b with one step of iterative refinement.
  Vec solve_normal(const Vec& b) const;
  // r - J^T (J J^T)^{-1} J r
  Vec project(const Vec& r) const;
  // J^T (J J^T)^{-1} b
  Vec min_norm(const Vec& b) const;

 private:
  SpMat jac_;
  SpMat normal_;
  Eigen::SimplicialLDLT<SpMat> ldlt_;
  bool full_rank_ = true;
};

// argmin_lambda ||grad + J^T lambda||
Vec lagrange_multipliers(const Vec& gradient, const SpMat& jacobian);

struct VerticalStep {
  Vec v;
  Vec r;  // J v + c
  bool truncated = false;  // ||v|| = eta * radius
};

// Dogleg for min ||J v + c|| s.t. ||v|| <= eta * radius.
VerticalStep vertical_step(const SpMat& jacobian, const Vec& c, double radius, double eta);

struct HorizontalStep {
  Vec p;
  bool hit_boundary = false;
  int cg_iterations = 0;
};

using HessianOperator = std::function<Vec(const Vec&)>;

// Projected CG for min g^T p + 0.5 p^T H p s.t. J p + c = r, ||p|| <= radius.
// `observer`, when set, sees the iterate after every CG iteration. CG stops
// once the projected residual drops below `tolerance`; a negative value uses
// the inexact-Newton forcing term min(0.1, sqrt(|g|)) |g|.
HorizontalStep horizontal_step(const Vec& gradient, const HessianOperator& hessian,
                               const SpMat& jacobian, const Vec& c, const Vec& r, double radius,
                               const std::function<void(const Vec&)>& observer = {},
                               double tolerance = -1.0);

struct MeritEvaluation {
  double merit_old = 0.0;
  double merit_new = 0.0;
  double actual = 0.0;
  double predicted = 0.0;
  double ratio = 0.0;
};

// phi = f + mu ||c||_2. A non-positive prediction or non-finite trial gives
// ratio = -inf.
MeritEvaluation merit_and_ratio(double f_old, const Vec& c_old, double f_new, const Vec& c_new,
                                double predicted, double penalty);

// Penalty large enough for pred >= factor * mu * vpred; never lowered.
// q is the quadratic model value g^T p + 0.5 p^T H p and vpred the
// linearized constraint reduction ||c|| - ||c + J p||.
double choose_penalty(double penalty, double lambda_inf, double q, double vpred,
                      const SolverOptions& options);

// Radius update after a trial step; returns whether the step is accepted.
bool update_trust_region(SolverState& state, double ratio, double step_norm, bool hit_boundary,
                         const SolverOptions& options);

SolverResult solve(NlpProblem& problem, const Vec& x0, const SolverOptions& options = {});

}  // namespace msid
