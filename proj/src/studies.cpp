#include "msid/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace msid {

void parallel_for(int count, int jobs, const std::function<void(int)>& task) {
  if (count <= 0) return;
  const int workers = std::min(std::max(jobs, 1), count);
  if (workers == 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        task(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<const RunRecord*> ExperimentResult::with_method(const std::string& method) const {
  std::vector<const RunRecord*> out;
  for (const auto& r : records)
    if (r.method == method) out.push_back(&r);
  return out;
}

RunRecord make_record(int index, std::string method, const Vec& initial_theta,
                      const EstimationResult& result) {
  RunRecord r;
  r.index = index;
  r.method = std::move(method);
  r.initial_theta = initial_theta;
  r.final_theta = result.point.theta;
  r.final_cost = result.solver.value;
  r.status = result.solver.status;
  r.iterations = result.solver.iterations;
  r.function_evaluations = result.solver.function_evaluations;
  r.wall_seconds = result.solver.wall_seconds;
  return r;
}

ExperimentResult multi_start_study(const EstimationProblem& problem,
                                   const std::vector<ParameterPoint>& guesses,
                                   const SolverOptions& options, int jobs) {
  ExperimentResult out;
  out.records.resize(guesses.size());
  parallel_for(static_cast<int>(guesses.size()), jobs, [&](int i) {
    out.records[i] = make_record(i, "multi-start", guesses[i].theta,
                                 estimate(problem, guesses[i], options));
  });
  return out;
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 1) throw std::invalid_argument("linspace: n must be >= 1");
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i)
    out[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  return out;
}

std::vector<Vec> grid_points(const std::vector<std::vector<double>>& axes) {
  std::vector<Vec> out{Vec(0)};
  for (const auto& axis : axes) {
    std::vector<Vec> next;
    next.reserve(out.size() * axis.size());
    for (const Vec& prefix : out) {
      for (double v : axis) {
        Vec p(prefix.size() + 1);
        p.head(prefix.size()) = prefix;
        p(prefix.size()) = v;
        next.push_back(std::move(p));
      }
    }
    out = std::move(next);
  }
  return out;
}

ParameterPoint perturbed_point(const EstimationProblem& problem, const Vec& theta,
                               const Mat& states, double sigma, std::mt19937_64& rng) {
  ParameterPoint p = problem.point_from_states(theta, states);
  std::normal_distribution<double> normal(0.0, sigma);
  for (Vec& x : p.initial_states)
    for (int j = 0; j < x.size(); ++j) x(j) += normal(rng);
  return p;
}

bool within_absolute(const Vec& estimate, const Vec& truth, double tol) {
  return estimate.size() == truth.size() && estimate.allFinite() &&
         ((estimate - truth).cwiseAbs().array() < tol).all();
}

bool within_relative(const Vec& estimate, const Vec& truth, double tol) {
  return estimate.size() == truth.size() && estimate.allFinite() &&
         ((estimate - truth).cwiseAbs().array() < tol * truth.cwiseAbs().array()).all();
}

ExperimentResult monte_carlo_study(const MonteCarloConfig& config) {
  if (config.realizations < 0) throw std::invalid_argument("monte carlo: negative run count");
  const ModelPtr oe = lower_to_state_space(config.oe_model);
  const ModelPtr arx = lower_to_state_space(config.arx_model);
  const Vec truth = generator_theta(config.data);
  if (config.initial_guess != "arx" && config.initial_guess != "truth" &&
      config.initial_guess != "fixed")
    throw std::invalid_argument("monte carlo: unknown initial guess '" + config.initial_guess +
                                "'");
  if (config.initial_guess == "fixed" && config.fixed_guess.size() != oe->param_dim())
    throw std::invalid_argument("monte carlo: fixed guess has the wrong size");

  const int methods = static_cast<int>(config.arx) + static_cast<int>(config.oe_single) +
                      static_cast<int>(config.ms_lengths.size() + config.msa_horizons.size());
  std::vector<std::vector<RunRecord>> per_run(config.realizations);

  parallel_for(config.realizations, config.jobs, [&](int r) {
    const Dataset data = generate(config.data, config.seed + static_cast<std::uint64_t>(r));
    std::vector<RunRecord>& recs = per_run[r];
    recs.reserve(methods);

    const EstimationProblem arx_problem(arx, data, SingleShooting{false, std::nullopt});
    const Vec arx_start = Vec::Zero(arx->param_dim());
    const EstimationResult arx_fit = estimate(arx_problem, arx_start, config.solver);
    if (config.arx) recs.push_back(make_record(r, "arx", arx_start, arx_fit));

    Vec start;
    if (config.initial_guess == "arx") {
      require_shape(arx_fit.point.theta.size() == oe->param_dim(),
                    "monte carlo: ARX and OE parameter vectors differ in size");
      start = arx_fit.point.theta;
    } else if (config.initial_guess == "truth") {
      start = truth;
    } else {
      start = config.fixed_guess;
    }

    auto run = [&](const std::string& tag, Formulation f) {
      const EstimationProblem problem(oe, data, std::move(f));
      recs.push_back(make_record(r, tag, start, estimate(problem, start, config.solver)));
    };
    if (config.oe_single) run("oe-ss", SingleShooting{true, std::nullopt});
    for (int len : config.ms_lengths)
      run("oe-ms-" + std::to_string(len),
          MultipleShooting{ShootingPlan::uniform(data.size(), len)});
    for (int k : config.msa_horizons) run("msa-" + std::to_string(k), MsaPem{k});
  });

  ExperimentResult out;
  out.records.reserve(static_cast<std::size_t>(methods) * config.realizations);
  for (auto& recs : per_run)
    for (auto& rec : recs) out.records.push_back(std::move(rec));
  return out;
}

std::vector<MethodSummary> summarize_methods(const ExperimentResult& result, const Vec& truth) {
  std::vector<std::string> order;
  for (const auto& r : result.records)
    if (std::find(order.begin(), order.end(), r.method) == order.end()) order.push_back(r.method);

  std::vector<MethodSummary> out;
  for (const auto& method : order) {
    MethodSummary s;
    s.method = method;
    const auto recs = result.with_method(method);
    s.runs = static_cast<int>(recs.size());
    std::vector<double> evals;
    for (const auto* r : recs) {
      if (r->status == SolverStatus::converged) ++s.converged;
      evals.push_back(r->function_evaluations);
    }
    for (int j = 0; j < truth.size(); ++j) {
      std::vector<double> err, abs_err;
      for (const auto* r : recs) {
        const double e = r->final_theta(j) - truth(j);
        err.push_back(e);
        abs_err.push_back(std::abs(e));
      }
      s.error.push_back(summarize(err));
      s.absolute_error.push_back(summarize(abs_err));
    }
    s.evaluations = summarize(evals);
    out.push_back(std::move(s));
  }
  return out;
}

GridScan grid_scan(const EstimationProblem& problem, const ParameterPoint& base, int param0,
                   const std::vector<double>& axis0, int param1,
                   const std::vector<double>& axis1, int jobs) {
  const int np = problem.theta_dim();
  require_shape(param0 >= 0 && param0 < np, "grid_scan: first parameter index out of range");
  require_shape(param1 < np && param1 != param0, "grid_scan: bad second parameter index");
  require_shape((param1 < 0) == axis1.empty(), "grid_scan: second axis needs a parameter index");
  GridScan g;
  g.param0 = param0;
  g.param1 = param1;
  g.axis0 = axis0;
  g.axis1 = axis1;
  const int cols = std::max<int>(1, static_cast<int>(axis1.size()));
  g.values.resize(static_cast<int>(axis0.size()), cols);
  const Vec decision = problem.pack(base);
  parallel_for(static_cast<int>(axis0.size()), jobs, [&](int i) {
    Vec x = decision;
    x(param0) = axis0[i];
    for (int j = 0; j < cols; ++j) {
      if (param1 >= 0) x(param1) = axis1[j];
      g.values(i, j) = evaluate_cost(problem, x).value;
    }
  });
  return g;
}

double total_variation(const Mat& values) {
  double cap = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (std::isfinite(values.data()[i])) cap = std::max(cap, values.data()[i]);
  if (!std::isfinite(cap)) return 0.0;
  const Mat logged = values.unaryExpr([cap](double v) {
    return std::log1p(std::isfinite(v) ? std::max(v, 0.0) : cap);
  });
  double sum = 0.0;
  long pairs = 0;
  for (Eigen::Index i = 0; i < logged.rows(); ++i) {
    for (Eigen::Index j = 0; j < logged.cols(); ++j) {
      if (i + 1 < logged.rows()) {
        sum += std::abs(logged(i + 1, j) - logged(i, j));
        ++pairs;
      }
      if (j + 1 < logged.cols()) {
        sum += std::abs(logged(i, j + 1) - logged(i, j));
        ++pairs;
      }
    }
  }
  return pairs > 0 ? sum / static_cast<double>(pairs) : 0.0;
}

std::vector<TimingRow> timing_study(
    const std::function<EstimationProblem(int)>& make_problem, const std::vector<int>& settings,
    const Vec& theta, const TimingOptions& options) {
  using clock = std::chrono::steady_clock;
  if (options.repeats < 1 || options.batches < 1)
    throw std::invalid_argument("timing_study: repeats and batches must be >= 1");
  std::vector<EstimationProblem> problems;
  std::vector<Vec> points;
  for (int setting : settings) {
    problems.push_back(make_problem(setting));
    points.push_back(problems.back().pack(problems.back().default_point(theta)));
  }
  // Batches cycle through the settings so that slow drifts in machine load
  // hit every setting alike.
  const std::size_t count = settings.size();
  std::vector<std::vector<double>> per_eval(count);
  volatile double sink = 0.0;
  for (std::size_t s = 0; s < count; ++s) sink = evaluate_cost(problems[s], points[s]).value;
  for (int b = 0; b < options.batches; ++b) {
    for (std::size_t s = 0; s < count; ++s) {
      const auto t0 = clock::now();
      for (int r = 0; r < options.repeats; ++r) sink = evaluate_cost(problems[s], points[s]).value;
      const std::chrono::duration<double> dt = clock::now() - t0;
      per_eval[s].push_back(dt.count() / options.repeats);
    }
  }
  (void)sink;
  std::vector<TimingRow> rows;
  for (std::size_t s = 0; s < count; ++s) {
    TimingRow row;
    row.setting = settings[s];
    row.seconds_per_cost = median(per_eval[s]);
    if (options.solve) {
      const EstimationResult r = estimate(problems[s], theta, options.solver);
      row.solver_evaluations = r.solver.function_evaluations;
      row.seconds_per_solver_evaluation =
          r.solver.wall_seconds / std::max(1, r.solver.function_evaluations);
      row.status = r.solver.status;
    }
    rows.push_back(row);
  }
  return rows;
}

ExperimentResult incremental_study(const EstimationProblem& problem,
                                   const std::vector<Vec>& guesses,
                                   const IncrementalOptions& options, int jobs) {
  const int n = static_cast<int>(guesses.size());
  const EstimationProblem vanilla(problem.model_ptr(), problem.data(), MsaPem{options.k_max});
  const std::string vanilla_tag = "vanilla-" + std::to_string(options.k_max);
  std::vector<RunRecord> inc(n), van(n);
  parallel_for(n, jobs, [&](int i) {
    const auto stages = incremental_k_schedule(problem, guesses[i], options);
    RunRecord r = make_record(i, "incremental", guesses[i], stages.back().result);
    r.iterations = 0;
    r.function_evaluations = 0;
    r.wall_seconds = 0.0;
    for (const auto& s : stages) {
      r.iterations += s.result.solver.iterations;
      r.function_evaluations += s.result.solver.function_evaluations;
      r.wall_seconds += s.result.solver.wall_seconds;
    }
    inc[i] = std::move(r);
    van[i] = make_record(i, vanilla_tag, guesses[i], estimate(vanilla, guesses[i], options.solver));
  });
  ExperimentResult out;
  for (auto& r : inc) out.records.push_back(std::move(r));
  for (auto& r : van) out.records.push_back(std::move(r));
  return out;
}

}  // namespace msid
