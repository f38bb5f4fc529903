#include "msid/objective.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace msid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct SeedLayout {
  int theta = 0;
  int nx = 0;
  int seeds = 0;
};

}  // namespace

// ---------------------------------------------------------------------------
// ShootingPlan

ShootingPlan ShootingPlan::uniform(int n, int max_len) {
  if (n < 1) throw std::invalid_argument("shooting plan: dataset is empty");
  if (max_len < 1) throw std::invalid_argument("shooting plan: max_len must be >= 1");
  const int count = (n + max_len - 1) / max_len;
  const int base = n / count;
  const int extra = n % count;
  ShootingPlan plan;
  plan.boundaries_.reserve(count + 1);
  plan.boundaries_.push_back(0);
  for (int i = 0; i < count; ++i)
    plan.boundaries_.push_back(plan.boundaries_.back() + base + (i < extra ? 1 : 0));
  return plan;
}

ShootingPlan ShootingPlan::from_boundaries(std::vector<int> boundaries, int n) {
  if (boundaries.size() < 2) throw std::invalid_argument("shooting plan: need >= 2 boundaries");
  if (boundaries.front() != 0) throw std::invalid_argument("shooting plan: must start at 0");
  if (boundaries.back() != n)
    throw std::invalid_argument("shooting plan: must end at N = " + std::to_string(n));
  for (std::size_t i = 1; i < boundaries.size(); ++i)
    if (boundaries[i] <= boundaries[i - 1])
      throw std::invalid_argument("shooting plan: boundaries must be strictly increasing");
  ShootingPlan plan;
  plan.boundaries_ = std::move(boundaries);
  return plan;
}

int ShootingPlan::max_len() const {
  int best = 0;
  for (int i = 0; i < intervals(); ++i) best = std::max(best, length(i));
  return best;
}

// ---------------------------------------------------------------------------
// EstimationProblem

EstimationProblem::EstimationProblem(ModelPtr model, Dataset data, Formulation formulation)
    : model_(std::move(model)), data_(std::move(data)), formulation_(std::move(formulation)) {
  if (!model_) throw std::invalid_argument("estimation problem: null model");
  require_shape(data_.output_channels() == model_->output_dim() || data_.size() == 0,
                "estimation problem: output channels differ from model output dimension");
  const int n = data_.size();
  const int transient = model_->transient_length();
  if (const auto* ss = std::get_if<SingleShooting>(&formulation_)) {
    if (ss->fixed_x0)
      require_shape(ss->fixed_x0->size() == model_->state_dim(),
                    "single shooting: fixed x0 has wrong dimension");
    if (!ss->optimize_x0 && !ss->fixed_x0) first_counted_ = transient + 1;
  } else if (const auto* ms = std::get_if<MultipleShooting>(&formulation_)) {
    if (ms->plan.total() != n)
      throw std::invalid_argument("multiple shooting: plan covers " +
                                  std::to_string(ms->plan.total()) + " samples, data has " +
                                  std::to_string(n));
  } else {
    const auto& msa = std::get<MsaPem>(formulation_);
    if (msa.k < 1) throw std::invalid_argument("msa-pem: K must be >= 1");
    first_counted_ = transient + 1;
  }
  seeds_.reserve(n + 1);
  for (int m = 0; m <= n; ++m) seeds_.push_back(n > 0 ? model_->seed_state(data_, m)
                                                      : Vec::Zero(model_->state_dim()));
}

const ShootingPlan* EstimationProblem::plan() const {
  const auto* ms = std::get_if<MultipleShooting>(&formulation_);
  return ms ? &ms->plan : nullptr;
}

int EstimationProblem::msa_horizon() const {
  const auto* msa = std::get_if<MsaPem>(&formulation_);
  return msa ? msa->k : 0;
}

int EstimationProblem::optimized_seeds() const {
  if (const auto* ss = std::get_if<SingleShooting>(&formulation_)) return ss->optimize_x0 ? 1 : 0;
  if (const auto* ms = std::get_if<MultipleShooting>(&formulation_)) return ms->plan.intervals();
  return 0;
}

int EstimationProblem::decision_dim() const {
  return theta_dim() + optimized_seeds() * state_dim();
}

int EstimationProblem::num_constraints() const {
  const ShootingPlan* p = plan();
  return p ? (p->intervals() - 1) * state_dim() : 0;
}

Vec EstimationProblem::pack(const ParameterPoint& point) const {
  require_shape(point.theta.size() == theta_dim(), "pack: theta has wrong dimension");
  require_shape(static_cast<int>(point.initial_states.size()) == optimized_seeds(),
                "pack: expected " + std::to_string(optimized_seeds()) + " initial states");
  Vec d(decision_dim());
  d.head(theta_dim()) = point.theta;
  const int nx = state_dim();
  for (int i = 0; i < optimized_seeds(); ++i) {
    require_shape(point.initial_states[i].size() == nx, "pack: initial state has wrong dimension");
    d.segment(theta_dim() + i * nx, nx) = point.initial_states[i];
  }
  return d;
}

ParameterPoint EstimationProblem::unpack(const Vec& decision) const {
  require_shape(decision.size() == decision_dim(),
                "decision vector has " + std::to_string(decision.size()) +
                    " entries, expected " + std::to_string(decision_dim()));
  ParameterPoint p;
  p.theta = decision.head(theta_dim());
  const int nx = state_dim();
  for (int i = 0; i < optimized_seeds(); ++i)
    p.initial_states.push_back(decision.segment(theta_dim() + i * nx, nx));
  return p;
}

ParameterPoint EstimationProblem::default_point(const Vec& theta) const {
  ParameterPoint p{theta, {}};
  if (const ShootingPlan* pl = plan()) {
    for (int i = 0; i < pl->intervals(); ++i) p.initial_states.push_back(seeds_[pl->start(i)]);
  } else if (optimized_seeds() == 1) {
    const auto& ss = std::get<SingleShooting>(formulation_);
    p.initial_states.push_back(ss.fixed_x0 ? *ss.fixed_x0 : seeds_[0]);
  }
  return p;
}

ParameterPoint EstimationProblem::point_from_states(const Vec& theta, const Mat& states) const {
  require_shape(states.rows() == state_dim() && states.cols() == samples() + 1,
                "point_from_states: expected N_x x (N+1) states");
  ParameterPoint p{theta, {}};
  if (const ShootingPlan* pl = plan()) {
    for (int i = 0; i < pl->intervals(); ++i) p.initial_states.push_back(states.col(pl->start(i)));
  } else if (optimized_seeds() == 1) {
    p.initial_states.push_back(states.col(0));
  }
  return p;
}

// ---------------------------------------------------------------------------
// Evaluation helpers

namespace {

// First boundary whose data seed uses measured samples only. Data-seeded
// rollouts start there instead of at 0, so padded history never enters.
int measured_seed_start(const EstimationProblem& problem) {
  return std::min(problem.first_counted_sample() - 1, problem.samples());
}

// Start of the single-shooting simulation.
int single_start(const EstimationProblem& problem) {
  const auto& ss = std::get<SingleShooting>(problem.formulation());
  return ss.optimize_x0 || ss.fixed_x0 ? 0 : measured_seed_start(problem);
}

// Seed of the single-shooting simulation.
Vec single_seed(const EstimationProblem& problem, const Vec& decision) {
  const auto& ss = std::get<SingleShooting>(problem.formulation());
  if (ss.optimize_x0) return decision.tail(problem.state_dim());
  if (ss.fixed_x0) return *ss.fixed_x0;
  return problem.data_seed(single_start(problem));
}

double squared_error(const Dataset& data, int k, const Eigen::Ref<const Vec>& yhat) {
  double s = 0.0;
  for (int c = 0; c < yhat.size(); ++c) {
    const double r = data.y(k, c) - yhat(c);
    s += r * r;
  }
  return s;
}

// Reusable state and output buffers for cost-only rollouts, so that the cost
// of a plan does not depend on how many intervals it has.
struct RolloutBuffers {
  RolloutBuffers(int nx, int ny) : x(nx), next(nx), yhat(ny) {}
  Vec x, next, yhat;
};

// Simulates from buf.x over `range` and returns the sum of squared errors of
// samples >= first; the final state is left in buf.x.
double rollout_sse(const EstimationProblem& problem, const Vec& theta, SimRange range, int first,
                   RolloutBuffers& buf) {
  const StateSpaceModel& model = problem.model();
  const Dataset& data = problem.data();
  if (!buf.x.allFinite()) throw DivergenceError(range.start, "non-finite seed state");
  double s = 0.0;
  for (int k = range.start + 1; k <= range.end; ++k) {
    const RegressorWindow z = model.window(data, k);
    model.transition(buf.x, z, theta, buf.next);
    model.output(buf.next, z, theta, buf.yhat);
    if (!buf.next.allFinite() || !buf.yhat.allFinite())
      throw DivergenceError(k, "trajectory diverged at step " + std::to_string(k));
    buf.x.swap(buf.next);
    if (k >= first) s += squared_error(data, k, buf.yhat);
  }
  return s;
}

// K-step-ahead predictions with the seed of window k fixed at k-K, or at the
// first fully measured boundary when k-K lies before it.
// Returns the sum of squared errors; optionally accumulates gradient and GN
// matrix (both unscaled: sum J^T r and sum J^T J).
double msa_pass(const EstimationProblem& problem, const Vec& theta, Vec* grad, Mat* gn) {
  const StateSpaceModel& model = problem.model();
  const Dataset& data = problem.data();
  const int n = problem.samples();
  const int horizon = problem.msa_horizon();
  const int nx = model.state_dim(), ny = model.output_dim(), np = model.param_dim();
  const bool derivs = grad != nullptr;

  Vec x(nx), xn(nx), yhat(ny), r(ny);
  Mat A(nx, nx), B(nx, np), C(ny, nx), F(ny, np), D(nx, np), Dn(nx, np), Jk(ny, np);
  double sse = 0.0;
  for (int k = problem.first_counted_sample(); k <= n; ++k) {
    const int s = std::max(measured_seed_start(problem), k - horizon);
    x = problem.data_seed(s);
    if (derivs) D.setZero();
    for (int i = s + 1; i <= k; ++i) {
      const RegressorWindow z = model.window(data, i);
      if (derivs) {
        model.transition_jacobians(x, z, theta, A, B);
        Dn.noalias() = A * D;
        Dn += B;
        D.swap(Dn);
      }
      model.transition(x, z, theta, xn);
      x.swap(xn);
      if (!x.allFinite()) throw DivergenceError(i, "msa-pem window diverged");
    }
    const RegressorWindow zk = model.window(data, k);
    model.output(x, zk, theta, yhat);
    if (!yhat.allFinite()) throw DivergenceError(k, "msa-pem prediction diverged");
    for (int c = 0; c < ny; ++c) r(c) = yhat(c) - data.y(k, c);
    sse += r.squaredNorm();
    if (derivs) {
      model.output_jacobians(x, zk, theta, C, F);
      Jk.noalias() = C * D;
      Jk += F;
      grad->noalias() += Jk.transpose() * r;
      gn->noalias() += Jk.transpose() * Jk;
    }
  }
  return sse;
}

SpMat jacobian_from_traces(const EstimationProblem& problem,
                           const std::vector<SensitivityTrace>& traces) {
  const ShootingPlan& plan = *problem.plan();
  const int nx = problem.state_dim(), np = problem.theta_dim();
  const int rows = problem.num_constraints();
  SpMat jac(rows, problem.decision_dim());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(rows) * (np + 2 * nx));
  for (int i = 0; i + 1 < plan.intervals(); ++i) {
    const auto D = traces[i].D(plan.end(i));
    for (int r = 0; r < nx; ++r) {
      const int row = i * nx + r;
      for (int c = 0; c < np; ++c) triplets.emplace_back(row, c, D(r, c));
      for (int c = 0; c < nx; ++c) triplets.emplace_back(row, np + i * nx + c, D(r, np + c));
      for (int c = 0; c < nx; ++c)
        triplets.emplace_back(row, np + (i + 1) * nx + c, r == c ? -1.0 : 0.0);
    }
  }
  jac.setFromTriplets(triplets.begin(), triplets.end());
  return jac;
}

std::vector<SensitivityTrace> interval_traces(const EstimationProblem& problem,
                                              const Vec& decision) {
  const ShootingPlan& plan = *problem.plan();
  const int nx = problem.state_dim(), np = problem.theta_dim();
  const Vec theta = decision.head(np);
  std::vector<SensitivityTrace> traces;
  traces.reserve(plan.intervals());
  for (int i = 0; i < plan.intervals(); ++i) {
    const Vec seed = decision.segment(np + i * nx, nx);
    traces.push_back(simulate_with_sensitivities(problem.model(), seed, problem.data(),
                                                 {plan.start(i), plan.end(i)}, theta));
  }
  return traces;
}

}  // namespace

CostEvaluation evaluate_cost(const EstimationProblem& problem, const Vec& decision) {
  require_shape(decision.size() == problem.decision_dim(),
                "decision vector has " + std::to_string(decision.size()) +
                    " entries, expected " + std::to_string(problem.decision_dim()));
  CostEvaluation out;
  out.constraints = Vec::Zero(problem.num_constraints());
  const int n = problem.samples();
  const Vec theta = decision.head(problem.theta_dim());
  try {
    RolloutBuffers buf(problem.state_dim(), problem.model().output_dim());
    if (std::holds_alternative<SingleShooting>(problem.formulation())) {
      buf.x = single_seed(problem, decision);
      require_shape(buf.x.size() == problem.state_dim(), "seed has wrong dimension");
      const double sse =
          rollout_sse(problem, theta, {single_start(problem), n}, problem.first_counted_sample(), buf);
      out.value = n > 0 ? sse / n : 0.0;
      out.interval_costs = Vec::Constant(1, out.value);
    } else if (const ShootingPlan* plan = problem.plan()) {
      const int nx = problem.state_dim(), np = problem.theta_dim();
      out.interval_costs.resize(plan->intervals());
      out.value = 0.0;
      // One pass over the data; the state is reloaded at every boundary.
      const StateSpaceModel& model = problem.model();
      const Dataset& data = problem.data();
      const int intervals = plan->intervals();
      const double* seeds = decision.data() + np;
      auto load = [&](int i) {
        for (int j = 0; j < nx; ++j) buf.x[j] = seeds[i * nx + j];
        if (!buf.x.allFinite()) throw DivergenceError(plan->start(i), "non-finite seed state");
      };
      int i = 0;
      int boundary = intervals > 0 ? plan->end(0) : 0;
      double sse = 0.0;
      if (intervals > 0) load(0);
      for (int k = 1; k <= n; ++k) {
        const RegressorWindow z = model.window(data, k);
        model.transition(buf.x, z, theta, buf.next);
        model.output(buf.next, z, theta, buf.yhat);
        if (!buf.next.allFinite() || !buf.yhat.allFinite())
          throw DivergenceError(k, "trajectory diverged at step " + std::to_string(k));
        buf.x.swap(buf.next);
        sse += squared_error(data, k, buf.yhat);
        if (k == boundary) {
          const int len = plan->length(i);
          const double vi = sse / len;
          out.interval_costs(i) = vi;
          out.value += (static_cast<double>(len) / n) * vi;
          sse = 0.0;
          if (++i < intervals) {
            for (int j = 0; j < nx; ++j)
              out.constraints[(i - 1) * nx + j] = buf.x[j] - seeds[i * nx + j];
            load(i);
            boundary = plan->end(i);
          }
        }
      }
    } else {
      out.value = n > 0 ? msa_pass(problem, theta, nullptr, nullptr) / n : 0.0;
      out.interval_costs = Vec::Constant(1, out.value);
    }
  } catch (const DivergenceError&) {
    out.value = kInf;
    out.diverged = true;
    if (out.interval_costs.size() == 0) out.interval_costs = Vec::Constant(1, kInf);
    out.constraints.setConstant(kInf);
  }
  if (!std::isfinite(out.value)) {
    out.value = kInf;
    out.diverged = true;
  }
  return out;
}

Linearization linearize(const EstimationProblem& problem, const Vec& decision) {
  require_shape(decision.size() == problem.decision_dim(),
                "decision vector has " + std::to_string(decision.size()) +
                    " entries, expected " + std::to_string(problem.decision_dim()));
  Linearization lin;
  lin.problem_ = &problem;
  const Dataset& data = problem.data();
  const int n = problem.samples();
  const int np = problem.theta_dim(), nx = problem.state_dim();
  const double scale = n > 0 ? 1.0 / n : 0.0;
  const Vec theta = decision.head(np);
  lin.gradient = Vec::Zero(problem.decision_dim());
  lin.constraints = Vec::Zero(problem.num_constraints());
  lin.jacobian = SpMat(problem.num_constraints(), problem.decision_dim());

  if (std::holds_alternative<SingleShooting>(problem.formulation())) {
    lin.traces_.push_back(simulate_with_sensitivities(problem.model(),
                                                      single_seed(problem, decision), data,
                                                      {single_start(problem), n}, theta));
    const SensitivityTrace& tr = lin.traces_.front();
    Vec g = Vec::Zero(tr.param_cols());
    double sse = 0.0;
    for (int k = problem.first_counted_sample(); k <= n; ++k) {
      Vec r = tr.prediction(k);
      for (int c = 0; c < r.size(); ++c) r(c) -= data.y(k, c);
      sse += r.squaredNorm();
      g.noalias() += tr.J(k).transpose() * r;
    }
    lin.value = sse * scale;
    lin.gradient = (2.0 * scale) * g.head(problem.decision_dim());
  } else if (const ShootingPlan* plan = problem.plan()) {
    lin.traces_ = interval_traces(problem, decision);
    lin.value = 0.0;
    for (int i = 0; i < plan->intervals(); ++i) {
      const SensitivityTrace& tr = lin.traces_[i];
      Vec g = Vec::Zero(tr.param_cols());
      double sse = 0.0;
      for (int k = plan->start(i) + 1; k <= plan->end(i); ++k) {
        Vec r = tr.prediction(k);
        for (int c = 0; c < r.size(); ++c) r(c) -= data.y(k, c);
        sse += r.squaredNorm();
        g.noalias() += tr.J(k).transpose() * r;
      }
      const int len = plan->length(i);
      lin.value += (static_cast<double>(len) / n) * (sse / len);
      lin.gradient.head(np) += (2.0 * scale) * g.head(np);
      lin.gradient.segment(np + i * nx, nx) += (2.0 * scale) * g.tail(nx);
      if (i + 1 < plan->intervals())
        lin.constraints.segment(i * nx, nx) =
            tr.state(plan->end(i)) - decision.segment(np + (i + 1) * nx, nx);
    }
    if (problem.num_constraints() > 0) lin.jacobian = jacobian_from_traces(problem, lin.traces_);
  } else {
    Vec g = Vec::Zero(np);
    lin.dense_gn_ = Mat::Zero(np, np);
    const double sse = msa_pass(problem, theta, &g, &lin.dense_gn_);
    lin.value = sse * scale;
    lin.gradient = (2.0 * scale) * g;
    lin.dense_gn_ *= 2.0 * scale;
  }
  return lin;
}

Vec Linearization::gn_hessian_vec(const Vec& p) const {
  const EstimationProblem& problem = *problem_;
  require_shape(p.size() == problem.decision_dim(), "gn_hessian_vec: p has wrong dimension");
  const int n = problem.samples();
  const int np = problem.theta_dim(), nx = problem.state_dim();
  const double scale = n > 0 ? 2.0 / n : 0.0;
  Vec out = Vec::Zero(p.size());
  if (std::holds_alternative<MsaPem>(problem.formulation())) return dense_gn_ * p;

  const ShootingPlan* plan = problem.plan();
  for (std::size_t i = 0; i < traces_.size(); ++i) {
    const SensitivityTrace& tr = traces_[i];
    const SimRange range = tr.range();
    Vec pe = Vec::Zero(tr.param_cols());
    pe.head(np) = p.head(np);
    int seed_offset = -1;
    if (plan) {
      seed_offset = np + static_cast<int>(i) * nx;
    } else if (problem.optimized_seeds() == 1) {
      seed_offset = np;
    }
    if (seed_offset >= 0) pe.tail(nx) = p.segment(seed_offset, nx);
    Vec acc = Vec::Zero(tr.param_cols());
    const int first = plan ? range.start + 1 : std::max(range.start + 1, problem.first_counted_sample());
    for (int k = first; k <= range.end; ++k) {
      const auto J = tr.J(k);
      acc.noalias() += J.transpose() * (J * pe);
    }
    out.head(np) += scale * acc.head(np);
    if (seed_offset >= 0) out.segment(seed_offset, nx) += scale * acc.tail(nx);
  }
  return out;
}

Mat Linearization::interval_theta_gradients() const {
  const EstimationProblem& problem = *problem_;
  const int np = problem.theta_dim();
  const ShootingPlan* plan = problem.plan();
  if (!plan) return gradient.head(np);
  const Dataset& data = problem.data();
  Mat out(np, plan->intervals());
  for (int i = 0; i < plan->intervals(); ++i) {
    const SensitivityTrace& tr = traces_[i];
    Vec g = Vec::Zero(np);
    for (int k = plan->start(i) + 1; k <= plan->end(i); ++k) {
      Vec r = tr.prediction(k);
      for (int c = 0; c < r.size(); ++c) r(c) -= data.y(k, c);
      g.noalias() += tr.J(k).leftCols(np).transpose() * r;
    }
    out.col(i) = (2.0 / plan->length(i)) * g;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Per-formulation wrappers

namespace {

void expect(const EstimationProblem& problem, bool ok, const char* op) {
  if (!ok) throw std::invalid_argument(std::string(op) + ": wrong formulation for this operation");
  (void)problem;
}

}  // namespace

double cost_single(const EstimationProblem& problem, const Vec& decision) {
  expect(problem, std::holds_alternative<SingleShooting>(problem.formulation()), "cost_single");
  return evaluate_cost(problem, decision).value;
}

Vec grad_single(const EstimationProblem& problem, const Vec& decision) {
  expect(problem, std::holds_alternative<SingleShooting>(problem.formulation()), "grad_single");
  try {
    return linearize(problem, decision).gradient;
  } catch (const DivergenceError&) {
    return Vec::Zero(problem.decision_dim());
  }
}

Vec gn_hessian_vec(const EstimationProblem& problem, const Vec& decision, const Vec& p) {
  return linearize(problem, decision).gn_hessian_vec(p);
}

MultipleCost cost_multiple(const EstimationProblem& problem, const Vec& decision) {
  expect(problem, problem.plan() != nullptr, "cost_multiple");
  CostEvaluation e = evaluate_cost(problem, decision);
  return {e.value, std::move(e.interval_costs)};
}

Vec grad_multiple(const EstimationProblem& problem, const Vec& decision) {
  expect(problem, problem.plan() != nullptr, "grad_multiple");
  try {
    return linearize(problem, decision).gradient;
  } catch (const DivergenceError&) {
    return Vec::Zero(problem.decision_dim());
  }
}

Vec constraints(const EstimationProblem& problem, const Vec& decision) {
  return evaluate_cost(problem, decision).constraints;
}

SpMat constraint_jacobian(const EstimationProblem& problem, const Vec& decision) {
  require_shape(decision.size() == problem.decision_dim(), "constraint_jacobian: bad decision");
  if (problem.num_constraints() == 0) return SpMat(0, problem.decision_dim());
  return jacobian_from_traces(problem, interval_traces(problem, decision));
}

Vec lagrangian_hessian_vec(const EstimationProblem& problem, const Linearization& lin,
                           const Vec& decision, const Vec& lambda, const Vec& p) {
  Vec hv = lin.gn_hessian_vec(p);
  if (problem.num_constraints() == 0) return hv;
  require_shape(lambda.size() == problem.num_constraints(), "lagrangian_hessian_vec: bad lambda");
  const double pnorm = p.norm();
  if (pnorm == 0.0 || lambda.squaredNorm() == 0.0) return hv;
  const double eps = std::sqrt(std::numeric_limits<double>::epsilon()) *
                     (1.0 + decision.norm()) / pnorm;
  try {
    const SpMat shifted = constraint_jacobian(problem, decision + eps * p);
    hv += (shifted.transpose() * lambda - lin.jacobian.transpose() * lambda) / eps;
  } catch (const DivergenceError&) {
    // Curvature of the constraints unavailable; keep the GN part.
  }
  return hv;
}

Vec lagrangian_hessian_vec(const EstimationProblem& problem, const Vec& decision,
                           const Vec& lambda, const Vec& p) {
  return lagrangian_hessian_vec(problem, linearize(problem, decision), decision, lambda, p);
}

double cost_msa(const EstimationProblem& problem, const Vec& decision) {
  expect(problem, std::holds_alternative<MsaPem>(problem.formulation()), "cost_msa");
  return evaluate_cost(problem, decision).value;
}

Vec grad_msa(const EstimationProblem& problem, const Vec& decision) {
  expect(problem, std::holds_alternative<MsaPem>(problem.formulation()), "grad_msa");
  try {
    return linearize(problem, decision).gradient;
  } catch (const DivergenceError&) {
    return Vec::Zero(problem.decision_dim());
  }
}

}  // namespace msid
