#include "msid/sqp.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace msid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double inf_norm(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Largest tau >= 0 with ||x + tau d|| = radius (assumes ||x|| <= radius).
double to_boundary(const Vec& x, const Vec& d, double radius) {
  const double a = d.squaredNorm();
  if (a == 0.0) return 0.0;
  const double b = 2.0 * x.dot(d);
  const double c = x.squaredNorm() - radius * radius;
  const double disc = std::sqrt(std::max(0.0, b * b - 4.0 * a * c));
  // Stable form of the positive root.
  return b >= 0.0 ? (-2.0 * c) / (b + disc) : (-b + disc) / (2.0 * a);
}

}  // namespace

std::string to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::converged: return "converged";
    case SolverStatus::max_iter: return "max-iter";
    case SolverStatus::step_too_small: return "step-too-small";
    case SolverStatus::evaluation_failed: return "evaluation-failed";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// FunctionalNlp

bool FunctionalNlp::evaluate(const Vec& x, double& value, Vec& cx) {
  value = f(x);
  cx = m_ > 0 ? c(x) : Vec(0);
  return std::isfinite(value) && cx.allFinite();
}

bool FunctionalNlp::linearize(const Vec& x, Vec& gradient, SpMat& jacobian) {
  x_ = x;
  gradient = grad(x);
  jacobian = m_ > 0 ? Mat(jac(x)).sparseView(0.0, 0.0) : SpMat(0, n_);
  return gradient.allFinite();
}

Vec FunctionalNlp::hessian_vec(const Vec& lambda, const Vec& p) { return hess(x_, lambda, p); }

// ---------------------------------------------------------------------------
// ConstraintProjector

ConstraintProjector::ConstraintProjector(const SpMat& jacobian) : jac_(jacobian) {
  if (jac_.rows() == 0) return;
  normal_ = jac_ * SpMat(jac_.transpose());
  ldlt_.compute(normal_);
  double dmax = 0.0, dmin = kInf;
  if (ldlt_.info() == Eigen::Success) {
    const Vec d = ldlt_.vectorD();
    dmax = d.cwiseAbs().maxCoeff();
    dmin = d.minCoeff();
  }
  if (ldlt_.info() != Eigen::Success || !(dmin > 1e-12 * std::max(dmax, 1e-300))) {
    // Rank deficient: regularize so that least-squares quantities stay defined.
    full_rank_ = false;
    double scale = 0.0;
    for (int i = 0; i < normal_.rows(); ++i) scale = std::max(scale, normal_.coeff(i, i));
    SpMat reg(normal_.rows(), normal_.cols());
    reg.setIdentity();
    normal_ += (1e-10 * std::max(scale, 1.0)) * reg;
    ldlt_.compute(normal_);
  }
}

Vec ConstraintProjector::solve_normal(const Vec& b) const {
  Vec y = ldlt_.solve(b);
  y += ldlt_.solve(b - normal_ * y);
  return y;
}

Vec ConstraintProjector::project(const Vec& r) const {
  if (jac_.rows() == 0) return r;
  Vec out = r - jac_.transpose() * solve_normal(jac_ * r);
  // Second pass removes what roundoff left in range(J^T).
  out -= jac_.transpose() * solve_normal(jac_ * out);
  return out;
}

Vec ConstraintProjector::min_norm(const Vec& b) const {
  if (jac_.rows() == 0) return Vec::Zero(jac_.cols());
  return jac_.transpose() * solve_normal(b);
}

Vec lagrange_multipliers(const Vec& gradient, const SpMat& jacobian) {
  require_shape(gradient.size() == jacobian.cols(), "lagrange_multipliers: dimension mismatch");
  if (jacobian.rows() == 0) return Vec(0);
  const ConstraintProjector proj(jacobian);
  return -proj.solve_normal(jacobian * gradient);
}

// ---------------------------------------------------------------------------
// Vertical step

namespace {

// Steihaug CG on J^T J v = -J^T c, used when J J^T is singular.
Vec normal_cg(const SpMat& J, const Vec& c, double radius) {
  const int n = static_cast<int>(J.cols());
  Vec v = Vec::Zero(n);
  Vec res = -(J.transpose() * c);
  Vec d = res;
  double rr = res.squaredNorm();
  const double tol = 1e-12 * std::sqrt(rr);
  for (int it = 0; it < 2 * n && std::sqrt(rr) > tol; ++it) {
    const Vec Jd = J * d;
    const double dHd = Jd.squaredNorm();
    if (dHd <= 0.0) break;
    const double alpha = rr / dHd;
    if ((v + alpha * d).norm() >= radius) return v + to_boundary(v, d, radius) * d;
    v += alpha * d;
    res -= alpha * (J.transpose() * Jd);
    const double rr_next = res.squaredNorm();
    d = res + (rr_next / rr) * d;
    rr = rr_next;
  }
  return v;
}

}  // namespace

VerticalStep vertical_step(const SpMat& jacobian, const Vec& c, double radius, double eta) {
  require_shape(c.size() == jacobian.rows(), "vertical_step: c has wrong dimension");
  if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("vertical_step: eta must be in (0,1)");
  const int n = static_cast<int>(jacobian.cols());
  VerticalStep out{Vec::Zero(n), c};
  if (c.size() == 0 || c.squaredNorm() == 0.0) return out;
  const double limit = eta * radius;

  const ConstraintProjector proj(jacobian);
  if (!proj.full_rank()) {
    out.v = normal_cg(jacobian, c, limit);
    out.truncated = out.v.norm() >= limit * (1.0 - 1e-12);
    out.r = jacobian * out.v + c;
    return out;
  }
  const Vec newton = -proj.min_norm(c);
  if (newton.norm() <= limit) {
    out.v = newton;
  } else {
    out.truncated = true;
    const Vec d = -(jacobian.transpose() * c);
    const double dn = d.norm();
    const Vec Jd = jacobian * d;
    const double curv = Jd.squaredNorm();
    const Vec cauchy = curv > 0.0 ? Vec((d.squaredNorm() / curv) * d) : Vec(limit / dn * d);
    if (cauchy.norm() >= limit) {
      out.v = (limit / dn) * d;
    } else {
      const Vec seg = newton - cauchy;
      out.v = cauchy + to_boundary(cauchy, seg, limit) * seg;
    }
  }
  out.r = jacobian * out.v + c;
  return out;
}

// ---------------------------------------------------------------------------
// Horizontal step

HorizontalStep horizontal_step(const Vec& gradient, const HessianOperator& hessian,
                               const SpMat& jacobian, const Vec& c, const Vec& r, double radius,
                               const std::function<void(const Vec&)>& observer,
                               double tolerance) {
  const int n = static_cast<int>(gradient.size());
  const int m = static_cast<int>(jacobian.rows());
  require_shape(jacobian.cols() == n && c.size() == m && r.size() == m,
                "horizontal_step: dimension mismatch");
  const ConstraintProjector proj(jacobian);
  HorizontalStep out;
  out.p = proj.min_norm(r - c);
  if (out.p.norm() >= radius) {
    out.p *= radius / out.p.norm();
    out.hit_boundary = true;
    return out;
  }
  Vec res = hessian(out.p) + gradient;
  Vec g = proj.project(res);
  Vec d = -g;
  double rg = g.dot(res);
  const double gnorm = std::sqrt(std::max(rg, 0.0));
  const double tol = tolerance >= 0.0 ? std::max(tolerance, 1e-300)
                                      : std::max(std::min(0.1, std::sqrt(gnorm)) * gnorm, 1e-300);
  const int max_iter = tolerance >= 0.0 ? 2 * n : std::max(1, n - m);
  for (int it = 0; it < max_iter && std::sqrt(std::max(rg, 0.0)) > tol; ++it) {
    const Vec Hd = hessian(d);
    const double dHd = d.dot(Hd);
    out.cg_iterations = it + 1;
    if (dHd <= 0.0) {
      out.p += to_boundary(out.p, d, radius) * d;
      out.hit_boundary = true;
      if (observer) observer(out.p);
      break;
    }
    const double alpha = rg / dHd;
    const Vec next = out.p + alpha * d;
    if (next.norm() >= radius) {
      out.p += to_boundary(out.p, d, radius) * d;
      out.hit_boundary = true;
      if (observer) observer(out.p);
      break;
    }
    out.p = next;
    if (observer) observer(out.p);
    res += alpha * Hd;
    g = proj.project(res);
    const double rg_next = g.dot(res);
    d = -g + (rg_next / rg) * d;
    rg = rg_next;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Merit, penalty, radius

MeritEvaluation merit_and_ratio(double f_old, const Vec& c_old, double f_new, const Vec& c_new,
                                double predicted, double penalty) {
  MeritEvaluation e;
  e.merit_old = f_old + penalty * c_old.norm();
  e.merit_new = f_new + penalty * c_new.norm();
  e.actual = e.merit_old - e.merit_new;
  e.predicted = predicted;
  if (!std::isfinite(e.merit_new) || !(predicted > 0.0))
    e.ratio = -kInf;
  else
    e.ratio = e.actual / predicted;
  return e;
}

double choose_penalty(double penalty, double lambda_inf, double q, double vpred,
                      const SolverOptions& options) {
  if (!(vpred > 0.0)) return penalty;
  const double pred = -q + penalty * vpred;
  if (pred >= options.penalty_factor * penalty * vpred) return penalty;
  const double needed = q / ((1.0 - options.penalty_factor) * vpred);
  return std::max({penalty, lambda_inf + options.penalty_margin, needed});
}

bool update_trust_region(SolverState& state, double ratio, double step_norm, bool hit_boundary,
                         const SolverOptions& options) {
  if (ratio < options.shrink_ratio)
    state.radius = options.shrink_factor * step_norm;
  else if (ratio > options.expand_ratio && hit_boundary)
    state.radius = std::min(options.expand_factor * state.radius, options.max_radius);
  return ratio > options.accept_ratio;
}

// ---------------------------------------------------------------------------
// Driver

SolverResult solve(NlpProblem& problem, const Vec& x0, const SolverOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = problem.dim();
  const int m = problem.num_constraints();
  require_shape(x0.size() == n, "solve: x0 has wrong dimension");
  if (m > n) throw std::invalid_argument("solve: more constraints than variables");
  if (!x0.allFinite()) throw std::invalid_argument("solve: x0 is not finite");

  SolverState st;
  st.x = x0;
  st.radius = options.initial_radius;
  st.penalty = options.initial_penalty;
  SolverResult res;

  double f = 0.0;
  Vec c;
  Vec grad;
  SpMat jac;
  auto finish = [&](SolverStatus status) {
    res.x = st.x;
    res.lambda = st.lambda;
    res.status = status;
    res.value = f;
    res.constraint_violation = inf_norm(c);
    res.final_radius = st.radius;
    res.final_penalty = st.penalty;
    res.iterations = st.iterations;
    res.function_evaluations = st.function_evaluations;
    res.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
  };

  ++st.function_evaluations;
  if (!problem.evaluate(st.x, f, c) || !problem.linearize(st.x, grad, jac)) {
    res.kkt_residual = kInf;
    return finish(SolverStatus::evaluation_failed);
  }

  bool fresh = true;
  while (true) {
    if (fresh) {
      st.lambda = lagrange_multipliers(grad, jac);
      const Vec lgrad = m > 0 ? Vec(grad + jac.transpose() * st.lambda) : grad;
      res.kkt_residual = inf_norm(lgrad);
      fresh = false;
      if (res.kkt_residual < options.kkt_tol && inf_norm(c) < options.constraint_tol)
        return finish(SolverStatus::converged);
    }
    if (st.iterations >= options.max_iter) return finish(SolverStatus::max_iter);
    if (st.radius < options.min_radius) return finish(SolverStatus::step_too_small);
    ++st.iterations;

    const HessianOperator hess = [&](const Vec& p) { return problem.hessian_vec(st.lambda, p); };
    const VerticalStep vs = vertical_step(jac, c, st.radius, options.eta);
    const HorizontalStep hs = horizontal_step(grad, hess, jac, c, vs.r, st.radius);
    const Vec& p = hs.p;

    const double q = grad.dot(p) + 0.5 * p.dot(hess(p));
    const double vpred = m > 0 ? c.norm() - (c + jac * p).norm() : 0.0;
    st.penalty = choose_penalty(st.penalty, inf_norm(st.lambda), q, vpred, options);
    const double pred = -q + st.penalty * std::max(vpred, 0.0);

    const Vec trial = st.x + p;
    double f_new = kInf;
    Vec c_new;
    ++st.function_evaluations;
    const bool ok = problem.evaluate(trial, f_new, c_new);
    if (!ok) {
      f_new = kInf;
      c_new = Vec::Constant(m, kInf);
    }
    const MeritEvaluation me = merit_and_ratio(f, c, f_new, c_new, pred, st.penalty);
    const bool accepted = update_trust_region(st, me.ratio, p.norm(),
                                              hs.hit_boundary || vs.truncated, options);

    if (accepted) {
      Vec g_new;
      SpMat j_new;
      if (problem.linearize(trial, g_new, j_new)) {
        st.x = trial;
        f = f_new;
        c = std::move(c_new);
        grad = std::move(g_new);
        jac = std::move(j_new);
        fresh = true;
      } else {
        // Point evaluates but cannot be differentiated: treat as a rejection.
        st.radius = options.shrink_factor * p.norm();
        problem.linearize(st.x, grad, jac);
      }
    }
    if (options.on_iteration) {
      IterationRecord rec;
      rec.iteration = st.iterations;
      rec.value = f;
      rec.constraint_norm = c.norm();
      rec.radius = st.radius;
      rec.ratio = me.ratio;
      rec.penalty = st.penalty;
      rec.accepted = accepted && fresh;
      options.on_iteration(rec);
    }
  }
}

}  // namespace msid
