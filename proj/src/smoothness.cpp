#include "msid/smoothness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>

namespace msid {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Vec uniform_point(const Box& box, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vec x(box.dim());
  for (int i = 0; i < box.dim(); ++i)
    x(i) = box.lower(i) + (box.upper(i) - box.lower(i)) * unit(rng);
  return x;
}

bool inside(const Box& box, const Vec& x) {
  return (x.array() >= box.lower.array()).all() && (x.array() <= box.upper.array()).all();
}

// Partner of `a` at distance `sep` along a random direction, kept in the box
// when possible by flipping the direction, clamped otherwise.
Vec local_partner(const Box& box, const Vec& a, double sep, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec d(a.size());
  for (int i = 0; i < d.size(); ++i) d(i) = normal(rng);
  const double dn = d.norm();
  if (dn == 0.0) d(0) = 1.0;
  else d /= dn;
  Vec b = a + sep * d;
  if (inside(box, b)) return b;
  b = a - sep * d;
  if (inside(box, b)) return b;
  return b.cwiseMax(box.lower).cwiseMin(box.upper);
}

struct Pair {
  Vec a;
  Vec b;
};

std::vector<Pair> sample_pairs(const Box& box, const PairSampling& s) {
  if (box.lower.size() != box.upper.size() || box.dim() == 0)
    throw std::invalid_argument("sampling box: lower/upper must be non-empty and equal length");
  if ((box.upper.array() < box.lower.array()).any())
    throw std::invalid_argument("sampling box: upper < lower");
  std::mt19937_64 rng(s.seed);
  std::vector<Pair> pairs;
  pairs.reserve(s.uniform_pairs + s.local_pairs * s.separations.size());
  for (int i = 0; i < s.uniform_pairs; ++i) {
    Vec a = uniform_point(box, rng);
    Vec b = uniform_point(box, rng);
    pairs.push_back({std::move(a), std::move(b)});
  }
  for (double sep : s.separations) {
    for (int i = 0; i < s.local_pairs; ++i) {
      Vec a = uniform_point(box, rng);
      Vec b = local_partner(box, a, sep, rng);
      pairs.push_back({std::move(a), std::move(b)});
    }
  }
  return pairs;
}

double spectral_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 || m.cols() == 1) return m.norm();
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

template <class JacFn>
double sample_jacobian_norm(const StateSpaceModel& model, const Box& state_box,
                            const Dataset& data, int samples, std::uint64_t seed, JacFn fn) {
  require_shape(state_box.dim() == model.state_dim(), "state box has wrong dimension");
  if (model.state_dim() == 0 || samples <= 0) return 0.0;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(1, std::max(1, data.size()));
  double best = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Vec x = uniform_point(state_box, rng);
    const RegressorWindow z = model.window(data, pick(rng));
    best = std::max(best, fn(x, z));
  }
  return best;
}

}  // namespace

double estimate_contraction(const StateSpaceModel& model, const Vec& theta, const Box& state_box,
                            const Dataset& data, int samples, std::uint64_t seed) {
  Mat A(model.state_dim(), model.state_dim()), B(model.state_dim(), model.param_dim());
  return sample_jacobian_norm(model, state_box, data, samples, seed,
                              [&](const Vec& x, const RegressorWindow& z) {
                                model.transition_jacobians(x, z, theta, A, B);
                                return spectral_norm(A);
                              });
}

double estimate_output_lipschitz(const StateSpaceModel& model, const Vec& theta,
                                 const Box& state_box, const Dataset& data, int samples,
                                 std::uint64_t seed) {
  Mat C(model.output_dim(), model.state_dim()), F(model.output_dim(), model.param_dim());
  return sample_jacobian_norm(model, state_box, data, samples, seed,
                              [&](const Vec& x, const RegressorWindow& z) {
                                model.output_jacobians(x, z, theta, C, F);
                                return spectral_norm(C);
                              });
}

LipschitzEstimate estimate_lipschitz(const ScalarField& cost, const Box& box,
                                     const PairSampling& sampling, const VectorField& gradient) {
  LipschitzEstimate est;
  for (const Pair& p : sample_pairs(box, sampling)) {
    const double va = cost(p.a);
    const double vb = cost(p.b);
    if (!std::isfinite(va) || !std::isfinite(vb)) {
      ++est.diverged;
      continue;
    }
    const double dist = (p.a - p.b).norm();
    if (dist > 0.0) {
      est.value = std::max(est.value, std::abs(va - vb) / dist);
      ++est.pairs_used;
    }
    if (sampling.use_gradient_norms && gradient) {
      const Vec g = gradient(p.a);
      if (g.allFinite()) est.value = std::max(est.value, g.norm());
      else ++est.diverged;
    }
  }
  return est;
}

LipschitzEstimate estimate_beta(const VectorField& gradient, const Box& box,
                                const PairSampling& sampling) {
  LipschitzEstimate est;
  for (const Pair& p : sample_pairs(box, sampling)) {
    const Vec ga = gradient(p.a);
    const Vec gb = gradient(p.b);
    if (!ga.allFinite() || !gb.allFinite()) {
      ++est.diverged;
      continue;
    }
    const double dist = (p.a - p.b).norm();
    if (dist == 0.0) continue;
    est.value = std::max(est.value, (ga - gb).norm() / dist);
    ++est.pairs_used;
  }
  return est;
}

double s_of_k(int k, double lh) {
  if (k < 0) throw std::invalid_argument("s_of_k: k must be >= 0");
  if (lh == 1.0) return std::sqrt(static_cast<double>(k + 1));
  const double l2 = lh * lh;
  return std::sqrt((std::pow(l2, k + 1) - 1.0) / (l2 - 1.0));
}

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::exponential: return "exponential";
    case Regime::polynomial: return "polynomial";
    case Regime::bounded: return "bounded";
  }
  return "unknown";
}

namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    f.residual += r * r;
  }
  return f;
}

}  // namespace

RegimeFit regime_fit(const std::vector<double>& lengths, const std::vector<double>& values,
                     double bounded_ratio) {
  if (lengths.size() != values.size() || lengths.size() < 2)
    throw std::invalid_argument("regime_fit: need >= 2 (length, value) pairs");
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    if (!(lengths[i] > 0.0)) throw std::invalid_argument("regime_fit: lengths must be positive");
    if (i > 0 && lengths[i] <= lengths[i - 1])
      throw std::invalid_argument("regime_fit: lengths must be strictly increasing");
    if (!(values[i] >= 0.0) || !std::isfinite(values[i]))
      throw std::invalid_argument("regime_fit: values must be finite and non-negative");
  }
  std::vector<double> logv, logn;
  for (std::size_t i = 0; i < values.size(); ++i) {
    logv.push_back(std::log(std::max(values[i], std::numeric_limits<double>::min())));
    logn.push_back(std::log(lengths[i]));
  }
  const LineFit ex = fit_line(lengths, logv);
  const LineFit po = fit_line(logn, logv);
  const LineFit co = fit_line(std::vector<double>(lengths.size(), 0.0), logv);

  RegimeFit out;
  out.residual_exponential = ex.residual;
  out.residual_polynomial = po.residual;
  out.residual_constant = co.residual;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*hi < bounded_ratio * *lo) {
    out.regime = Regime::bounded;
    out.intercept = co.intercept;
  } else if (ex.residual <= po.residual) {
    out.regime = Regime::exponential;
    out.rate = ex.slope;
    out.intercept = ex.intercept;
  } else {
    out.regime = Regime::polynomial;
    out.rate = po.slope;
    out.intercept = po.intercept;
  }
  return out;
}

CostBuilder theta_cost_builder(std::function<EstimationProblem(int n)> make_problem,
                               std::function<Vec(const EstimationProblem&)> fixed_decision) {
  struct Bound {
    std::shared_ptr<EstimationProblem> problem;
    Vec decision;
  };
  auto bind = [make_problem, fixed_decision](int n) {
    auto problem = std::make_shared<EstimationProblem>(make_problem(n));
    Vec decision = fixed_decision(*problem);
    require_shape(decision.size() == problem->decision_dim(),
                  "theta_cost_builder: fixed decision has wrong dimension");
    return Bound{std::move(problem), std::move(decision)};
  };
  CostBuilder b;
  b.cost = [bind](int n) -> ScalarField {
    Bound bd = bind(n);
    return [bd](const Vec& theta) {
      Vec d = bd.decision;
      d.head(theta.size()) = theta;
      return evaluate_cost(*bd.problem, d).value;
    };
  };
  b.gradient = [bind](int n) -> VectorField {
    Bound bd = bind(n);
    return [bd](const Vec& theta) -> Vec {
      Vec d = bd.decision;
      d.head(theta.size()) = theta;
      try {
        return linearize(*bd.problem, d).gradient.head(theta.size());
      } catch (const DivergenceError&) {
        return Vec::Constant(theta.size(), kNaN);
      }
    };
  };
  return b;
}

SmoothnessReport smoothness_report(const CostBuilder& builder, const std::vector<int>& lengths,
                                   const Box& param_box, const PairSampling& sampling,
                                   double contraction) {
  SmoothnessReport rep;
  rep.lengths = lengths;
  rep.contraction_estimate = contraction;
  std::vector<double> ns;
  for (int n : lengths) {
    const ScalarField cost = builder.cost(n);
    const VectorField grad = builder.gradient(n);
    const LipschitzEstimate l = estimate_lipschitz(cost, param_box, sampling, grad);
    const LipschitzEstimate b = estimate_beta(grad, param_box, sampling);
    rep.lipschitz_estimates.push_back(l.value);
    rep.beta_estimates.push_back(b.value);
    rep.diverged.push_back(l.diverged + b.diverged);
    ns.push_back(n);
  }
  if (lengths.size() >= 2) {
    rep.lipschitz_fit = regime_fit(ns, rep.lipschitz_estimates);
    rep.beta_fit = regime_fit(ns, rep.beta_estimates);
    if (contraction > 1.0) {
      const double ln = std::log(contraction);
      if (rep.lipschitz_fit.regime == Regime::exponential)
        rep.lipschitz_rate_ratio = rep.lipschitz_fit.rate / (2.0 * ln);
      if (rep.beta_fit.regime == Regime::exponential)
        rep.beta_rate_ratio = rep.beta_fit.rate / (3.0 * ln);
    }
  }
  return rep;
}

IntervalBoundReport interval_bound_check(ModelPtr model, const Dataset& data,
                                         const std::vector<ShootingPlan>& plans,
                                         const Mat& states, const Box& param_box,
                                         const PairSampling& sampling, double tol) {
  IntervalBoundReport rep;
  rep.all_hold = true;
  const std::vector<Pair> pairs = sample_pairs(param_box, sampling);
  for (const ShootingPlan& plan : plans) {
    const EstimationProblem problem(model, data, MultipleShooting{plan});
    const int np = problem.theta_dim();
    const Vec base = problem.pack(problem.point_from_states(Vec::Zero(np), states));
    auto at = [&](const Vec& theta) {
      Vec d = base;
      d.head(np) = theta;
      return d;
    };
    IntervalBoundRow row;
    row.max_len = plan.max_len();
    for (const Pair& p : pairs) {
      const CostEvaluation ea = evaluate_cost(problem, at(p.a));
      const CostEvaluation eb = evaluate_cost(problem, at(p.b));
      if (ea.diverged || eb.diverged) continue;
      const double dist = (p.a - p.b).norm();
      if (dist > 0.0) {
        row.lipschitz_total = std::max(row.lipschitz_total, std::abs(ea.value - eb.value) / dist);
        const double worst = (ea.interval_costs - eb.interval_costs).cwiseAbs().maxCoeff();
        row.lipschitz_max_interval = std::max(row.lipschitz_max_interval, worst / dist);
      }
      if (sampling.use_gradient_norms) {
        const Linearization lin = linearize(problem, at(p.a));
        row.lipschitz_total = std::max(row.lipschitz_total, lin.gradient.head(np).norm());
        row.lipschitz_max_interval =
            std::max(row.lipschitz_max_interval, lin.interval_theta_gradients().colwise().norm().maxCoeff());
      }
    }
    row.bound_holds = row.lipschitz_total <= row.lipschitz_max_interval * (1.0 + tol) + 1e-15;
    rep.all_hold = rep.all_hold && row.bound_holds;
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace msid
