#pragma once

#include "msid/dataset.hpp"
#include "msid/model.hpp"
#include "msid/simulate.hpp"

#include <optional>
#include <variant>
#include <vector>

namespace msid {

// Partition 0 = m_1 < m_2 < ... < m_{M+1} = N of the data into intervals
// (m_i, m_{i+1}].
class ShootingPlan {
 public:
  // ceil(N / max_len) near-equal intervals, remainder spread over the first
  // ones.
  static ShootingPlan uniform(int n, int max_len);
  // Validates: starts at 0, ends at n, strictly increasing.
  static ShootingPlan from_boundaries(std::vector<int> boundaries, int n);

  int intervals() const { return static_cast<int>(boundaries_.size()) - 1; }
  int start(int i) const { return boundaries_[i]; }
  int end(int i) const { return boundaries_[i + 1]; }
  int length(int i) const { return end(i) - start(i); }
  int max_len() const;
  int total() const { return boundaries_.back(); }
  const std::vector<int>& boundaries() const { return boundaries_; }

 private:
  std::vector<int> boundaries_;
};

// Simulate from one seed over the whole dataset. With optimize_x0 the seed is
// a decision variable; otherwise it is fixed_x0 or, when absent, the model's
// data-driven seed, and then the transient samples are left out of the cost.
struct SingleShooting {
  bool optimize_x0 = true;
  std::optional<Vec> fixed_x0;
};

struct MultipleShooting {
  ShootingPlan plan;
};

// K-step-ahead prediction error. Window k restarts from the data-driven seed
// at max(0, k - K); the seeds are not optimized.
struct MsaPem {
  int k = 1;
};

using Formulation = std::variant<SingleShooting, MultipleShooting, MsaPem>;

struct ParameterPoint {
  Vec theta;
  std::vector<Vec> initial_states;
};

class EstimationProblem {
 public:
  EstimationProblem(ModelPtr model, Dataset data, Formulation formulation);

  const StateSpaceModel& model() const { return *model_; }
  const ModelPtr& model_ptr() const { return model_; }
  const Dataset& data() const { return data_; }
  const Formulation& formulation() const { return formulation_; }
  int samples() const { return data_.size(); }
  int theta_dim() const { return model_->param_dim(); }
  int state_dim() const { return model_->state_dim(); }

  // N_theta + (number of optimized seeds) * N_x
  int decision_dim() const;
  int optimized_seeds() const;
  int num_constraints() const;
  // First sample included in the cost (1-based).
  int first_counted_sample() const { return first_counted_; }

  Vec pack(const ParameterPoint& point) const;
  ParameterPoint unpack(const Vec& decision) const;
  // theta plus data-driven seeds at every optimized boundary.
  ParameterPoint default_point(const Vec& theta) const;
  // Seeds for the optimized boundaries taken from a full state trajectory
  // (column k is x[k]), e.g. DatasetMeta::true_states.
  ParameterPoint point_from_states(const Vec& theta, const Mat& states) const;

  // Data-driven seed at boundary m (cached).
  const Vec& data_seed(int m) const { return seeds_[m]; }

  const ShootingPlan* plan() const;
  int msa_horizon() const;

 private:
  ModelPtr model_;
  Dataset data_;
  Formulation formulation_;
  std::vector<Vec> seeds_;
  int first_counted_ = 1;
};

// Cost, constraints and per-interval costs at a trial point. A diverging
// simulation sets value = +inf and `diverged`.
struct CostEvaluation {
  double value = 0.0;
  Vec interval_costs;  // V_i (multiple shooting), single entry otherwise
  Vec constraints;
  bool diverged = false;
};

CostEvaluation evaluate_cost(const EstimationProblem& problem, const Vec& decision);

// First-order information and the Gauss-Newton model at one decision point.
class Linearization {
 public:
  double value = 0.0;
  Vec gradient;
  Vec constraints;
  SpMat jacobian;  // m x n, fixed sparsity pattern

  // Gauss-Newton Hessian of the cost times p: (2/N) sum J^T J p.
  Vec gn_hessian_vec(const Vec& p) const;

  // Multiple shooting: column i is the theta-gradient of V_i. Other
  // formulations: a single column with the theta-part of the gradient.
  Mat interval_theta_gradients() const;

 private:
  friend Linearization linearize(const EstimationProblem&, const Vec&);
  const EstimationProblem* problem_ = nullptr;
  std::vector<SensitivityTrace> traces_;
  Mat dense_gn_;  // MSA-PEM: N_theta x N_theta
};

// Throws DivergenceError when the point does not simulate.
Linearization linearize(const EstimationProblem& problem, const Vec& decision);

// --- Per-formulation operations -------------------------------------------

double cost_single(const EstimationProblem& problem, const Vec& decision);
Vec grad_single(const EstimationProblem& problem, const Vec& decision);
Vec gn_hessian_vec(const EstimationProblem& problem, const Vec& decision, const Vec& p);

struct MultipleCost {
  double total = 0.0;
  Vec per_interval;
};
MultipleCost cost_multiple(const EstimationProblem& problem, const Vec& decision);
Vec grad_multiple(const EstimationProblem& problem, const Vec& decision);

// Block i-1 is x^{i-1}[m_i] - x_0^i, i = 2..M.
Vec constraints(const EstimationProblem& problem, const Vec& decision);
SpMat constraint_jacobian(const EstimationProblem& problem, const Vec& decision);

// GN Hessian of V^M plus a forward-difference estimate of
// d/dt [J(x + t p)^T lambda] for the constraint curvature.
Vec lagrangian_hessian_vec(const EstimationProblem& problem, const Vec& decision,
                           const Vec& lambda, const Vec& p);
Vec lagrangian_hessian_vec(const EstimationProblem& problem, const Linearization& lin,
                           const Vec& decision, const Vec& lambda, const Vec& p);

double cost_msa(const EstimationProblem& problem, const Vec& decision);
Vec grad_msa(const EstimationProblem& problem, const Vec& decision);

}  // namespace msid
