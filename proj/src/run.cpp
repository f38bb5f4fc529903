#include "msid/run.hpp"

#include "msid/config.hpp"
#include "msid/format.hpp"
#include "msid/simulate.hpp"

#include <Eigen/Core>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <thread>

namespace msid {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vec_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
  return a;
}

json summary_json(const Summary& s) {
  return {{"count", s.count}, {"min", num(s.min)},       {"q1", num(s.q1)},
          {"median", num(s.median)}, {"q3", num(s.q3)}, {"max", num(s.max)},
          {"mean", num(s.mean)}};
}

json record_json(const RunRecord& r) {
  return {{"index", r.index},
          {"method", r.method},
          {"initial_theta", vec_json(r.initial_theta)},
          {"final_theta", vec_json(r.final_theta)},
          {"final_cost", num(r.final_cost)},
          {"status", to_string(r.status)},
          {"iterations", r.iterations},
          {"function_evaluations", r.function_evaluations}};
}

json fit_json(const RegimeFit& f) {
  return {{"regime", to_string(f.regime)},
          {"rate", num(f.rate)},
          {"intercept", num(f.intercept)},
          {"residual_exponential", num(f.residual_exponential)},
          {"residual_polynomial", num(f.residual_polynomial)},
          {"residual_constant", num(f.residual_constant)}};
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string cell(double v) { return std::isfinite(v) ? format_double(v) : std::string("nan"); }

// One row per run: method, index, status, counters, cost, initial and final theta.
void write_records_csv(const fs::path& path, const std::vector<RunRecord>& records) {
  std::string text = "method,index,status,iterations,function_evaluations,final_cost";
  const int np = records.empty() ? 0 : static_cast<int>(records.front().final_theta.size());
  for (int i = 0; i < np; ++i) text += ",theta0_" + std::to_string(i + 1);
  for (int i = 0; i < np; ++i) text += ",theta_" + std::to_string(i + 1);
  text += "\n";
  for (const RunRecord& r : records) {
    text += r.method + "," + std::to_string(r.index) + "," + to_string(r.status) + "," +
            std::to_string(r.iterations) + "," + std::to_string(r.function_evaluations) + "," +
            cell(r.final_cost);
    for (int i = 0; i < np; ++i) text += "," + cell(r.initial_theta(i));
    for (int i = 0; i < np; ++i) text += "," + cell(r.final_theta(i));
    text += "\n";
  }
  write_text(path, text);
}

struct Context {
  const RunConfig& config;
  std::uint64_t seed;
  fs::path dir;
  int jobs;
  bool trace;
  std::ostream& out;
  std::ostream& err;
  json result = json::object();
  json timings = json::object();
  std::vector<std::string> outputs;

  void emit(const std::string& name, const json& j) {
    write_json(dir / name, j);
    outputs.push_back(name);
  }
  void emit_text(const std::string& name, const std::string& text) {
    write_text(dir / name, text);
    outputs.push_back(name);
  }
};

std::optional<Vec> true_theta(const RunConfig& c, int np) {
  if (const auto* g = std::get_if<GeneratorSpec>(&c.data)) {
    Vec t = generator_theta(*g);
    if (t.size() == np) return t;
  }
  return std::nullopt;
}

Vec start_theta(const RunConfig& c, int np) {
  if (c.initial.theta) return *c.initial.theta;
  return *true_theta(c, np);
}

ParameterPoint initial_point(const RunConfig& c, const EstimationProblem& p, const Vec& theta,
                             std::mt19937_64& rng) {
  if (c.initial.seeds == "data") return p.default_point(theta);
  const Mat& states = p.data().meta.true_states;
  if (states.size() == 0) throw ConfigError("initial.seeds", "the dataset carries no true states");
  if (c.initial.seeds == "truth") return p.point_from_states(theta, states);
  return perturbed_point(p, theta, states, c.initial.seed_noise, rng);
}

std::mt19937_64 seeded_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  return std::mt19937_64(seq);
}

// Streams solver iterations to trace.jsonl.
class TraceWriter {
 public:
  TraceWriter(Context& ctx, const std::string& name) {
    if (!ctx.trace) return;
    file_.open(ctx.dir / name, std::ios::binary);
    if (!file_) throw std::runtime_error("cannot write " + (ctx.dir / name).string());
    ctx.outputs.push_back(name);
  }
  void attach(SolverOptions& options) {
    if (!file_.is_open()) return;
    options.on_iteration = [this](const IterationRecord& r) {
      const json line = {{"iteration", r.iteration},
                         {"value", num(r.value)},
                         {"constraint_norm", num(r.constraint_norm)},
                         {"radius", num(r.radius)},
                         {"ratio", num(r.ratio)},
                         {"penalty", num(r.penalty)},
                         {"accepted", r.accepted}};
      file_ << line.dump() << '\n';
    };
  }

 private:
  std::ofstream file_;
};

// ---------------------------------------------------------------------------

int cmd_simulate(Context& ctx) {
  const RunConfig& c = ctx.config;
  const Dataset data = load_dataset(c, ctx.seed);
  write_csv(data, ctx.dir / "dataset.csv");
  ctx.outputs.push_back("dataset.csv");

  const ModelPtr model = lower_to_state_space(c.model);
  const int nx = model->state_dim(), ny = model->output_dim(), n = data.size();
  const Vec theta = start_theta(c, model->param_dim());
  Vec x0 = Vec::Zero(nx);
  const Mat& states = data.meta.true_states;
  if (states.rows() == nx && states.cols() == n + 1) {
    x0 = states.col(0);
  } else if (n > 0) {
    x0 = EstimationProblem(model, data, SingleShooting{false, std::nullopt}).data_seed(0);
  }

  std::string text = "k";
  for (int i = 0; i < nx; ++i) text += ",x" + std::to_string(i + 1);
  for (int i = 0; i < ny; ++i) text += ",yhat" + std::to_string(i + 1);
  text += "\n";
  double sse = 0.0;
  if (n > 0) {
    const Trajectory tr = simulate(*model, x0, data, SimRange{0, n}, theta);
    for (int k = 1; k <= n; ++k) {
      text += std::to_string(k);
      for (int i = 0; i < nx; ++i) text += "," + cell(tr.states(i, k));
      for (int i = 0; i < ny; ++i) {
        text += "," + cell(tr.predictions(i, k - 1));
        const double e = data.y(k, i) - tr.predictions(i, k - 1);
        sse += e * e;
      }
      text += "\n";
    }
  }
  ctx.emit_text("trace.csv", text);

  ctx.result["samples"] = n;
  ctx.result["theta"] = vec_json(theta);
  ctx.result["x0"] = vec_json(x0);
  ctx.result["output_rms_error"] = n > 0 ? num(std::sqrt(sse / (n * ny))) : json(nullptr);
  return exit_ok;
}

json estimation_json(const EstimationResult& r, const std::optional<Vec>& truth) {
  json j = {{"theta", vec_json(r.point.theta)},
            {"cost", num(r.solver.value)},
            {"status", to_string(r.solver.status)},
            {"iterations", r.solver.iterations},
            {"function_evaluations", r.solver.function_evaluations},
            {"kkt_residual", num(r.solver.kkt_residual)},
            {"constraint_violation", num(r.solver.constraint_violation)}};
  json seeds = json::array();
  for (const Vec& s : r.point.initial_states) seeds.push_back(vec_json(s));
  j["initial_states"] = seeds;
  if (truth) j["error_inf"] = num((r.point.theta - *truth).lpNorm<Eigen::Infinity>());
  return j;
}

void report_failure(Context& ctx, const SolverResult& s) {
  ctx.err << "solver did not converge: status " << to_string(s.status) << ", iterations "
          << s.iterations << ", kkt residual " << s.kkt_residual << ", constraint violation "
          << s.constraint_violation << ", trust radius " << s.final_radius << "\n";
}

int cmd_estimate(Context& ctx) {
  const RunConfig& c = ctx.config;
  const Dataset data = load_dataset(c, ctx.seed);
  const ModelPtr model = lower_to_state_space(c.model);
  const EstimationProblem problem(model, data, make_formulation(c.formulation, data.size()));
  const std::optional<Vec> truth = true_theta(c, problem.theta_dim());
  const Vec theta0 = start_theta(c, problem.theta_dim());
  TraceWriter trace(ctx, "trace.jsonl");
  SolverOptions solver = c.solver;
  trace.attach(solver);

  const auto t0 = std::chrono::steady_clock::now();
  SolverResult last;
  const auto* msa = std::get_if<MsaSpec>(&c.formulation);
  if (msa && msa->incremental) {
    IncrementalOptions io;
    io.k_max = msa->k_max;
    io.tolerance = msa->tolerance;
    io.solver = solver;
    const auto stages = incremental_k_schedule(problem, theta0, io);
    json arr = json::array();
    for (const IncrementalStage& s : stages) {
      json j = estimation_json(s.result, truth);
      j["k"] = s.k;
      arr.push_back(j);
    }
    ctx.result["stages"] = arr;
    ctx.result["final"] = arr.back();
    last = stages.back().result.solver;
  } else {
    std::mt19937_64 rng = seeded_rng(ctx.seed);
    const ParameterPoint start = initial_point(c, problem, theta0, rng);
    const EstimationResult r = estimate(problem, start, solver);
    ctx.result["initial_theta"] = vec_json(theta0);
    ctx.result["final"] = estimation_json(r, truth);
    last = r.solver;
  }
  ctx.timings["wall_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (truth) ctx.result["true_theta"] = vec_json(*truth);
  if (last.status != SolverStatus::converged) {
    report_failure(ctx, last);
    return exit_not_converged;
  }
  return exit_ok;
}

int cmd_smoothness(Context& ctx) {
  const RunConfig& c = ctx.config;
  const SmoothnessSpec& s = *c.smoothness;
  const Dataset full = load_dataset(c, ctx.seed);
  const ModelPtr model = lower_to_state_space(c.model);
  for (std::size_t i = 0; i < s.lengths.size(); ++i)
    if (s.lengths[i] > full.size())
      throw ConfigError("smoothness.lengths[" + std::to_string(i) + "]",
                        "exceeds the sample count " + std::to_string(full.size()));
  const Vec theta_ref = start_theta(c, model->param_dim());

  auto make_problem = [&](int n) {
    Dataset d(full.inputs().topRows(n), full.outputs().topRows(n));
    if (full.meta.true_states.cols() > n) d.meta.true_states = full.meta.true_states.leftCols(n + 1);
    return EstimationProblem(model, std::move(d), make_formulation(c.formulation, n));
  };
  // Seeds stay at the true trajectory when it is known, else at the data.
  auto fixed = [&](const EstimationProblem& p) {
    const Mat& st = p.data().meta.true_states;
    if (st.rows() == p.state_dim() && st.cols() == p.samples() + 1)
      return p.pack(p.point_from_states(theta_ref, st));
    return p.pack(p.default_point(theta_ref));
  };
  double contraction = 0.0;
  if (s.state_box)
    contraction = estimate_contraction(*model, theta_ref, *s.state_box, full,
                                       s.contraction_samples, s.sampling.seed);
  const SmoothnessReport rep =
      smoothness_report(theta_cost_builder(make_problem, fixed), s.lengths, s.box, s.sampling,
                        contraction);

  json& r = ctx.result;
  r["estimator"] = "sampled lower bound";
  r["lengths"] = rep.lengths;
  json l = json::array(), b = json::array();
  for (double v : rep.lipschitz_estimates) l.push_back(num(v));
  for (double v : rep.beta_estimates) b.push_back(num(v));
  r["lipschitz"] = l;
  r["beta"] = b;
  r["diverged"] = rep.diverged;
  r["lipschitz_fit"] = fit_json(rep.lipschitz_fit);
  r["beta_fit"] = fit_json(rep.beta_fit);
  if (s.state_box) r["contraction"] = num(rep.contraction_estimate);
  if (rep.lipschitz_rate_ratio) r["lipschitz_rate_ratio"] = num(*rep.lipschitz_rate_ratio);
  if (rep.beta_rate_ratio) r["beta_rate_ratio"] = num(*rep.beta_rate_ratio);

  if (!s.interval_max_lens.empty()) {
    const Mat& st = full.meta.true_states;
    if (st.rows() != model->state_dim() || st.cols() != full.size() + 1)
      throw ConfigError("smoothness.interval_max_lens", "needs a dataset with true states");
    std::vector<ShootingPlan> plans;
    for (int m : s.interval_max_lens) plans.push_back(ShootingPlan::uniform(full.size(), m));
    const IntervalBoundReport ib =
        interval_bound_check(model, full, plans, st, s.box, s.sampling);
    json rows = json::array();
    for (const IntervalBoundRow& row : ib.rows)
      rows.push_back({{"max_len", row.max_len},
                      {"lipschitz_total", num(row.lipschitz_total)},
                      {"lipschitz_max_interval", num(row.lipschitz_max_interval)},
                      {"bound_holds", row.bound_holds}});
    r["interval_bound"] = {{"rows", rows}, {"all_hold", ib.all_hold}};
  }

  std::string text = "n,lipschitz,beta,diverged\n";
  for (std::size_t i = 0; i < rep.lengths.size(); ++i)
    text += std::to_string(rep.lengths[i]) + "," + cell(rep.lipschitz_estimates[i]) + "," +
            cell(rep.beta_estimates[i]) + "," + std::to_string(rep.diverged[i]) + "\n";
  ctx.emit_text("smoothness.csv", text);
  return exit_ok;
}

// --- studies ---------------------------------------------------------------

Vec require_truth(const RunConfig& c, int np) {
  const std::optional<Vec> t = true_theta(c, np);
  if (!t) throw ConfigError("data", "this study needs a generator whose parameters match the model");
  return *t;
}

json wall_times(const std::vector<RunRecord>& records) {
  json a = json::array();
  for (const RunRecord& r : records) a.push_back(r.wall_seconds);
  return a;
}

void study_multi_start(Context& ctx, const MultiStartSpec& s) {
  const RunConfig& c = ctx.config;
  const Dataset data = load_dataset(c, ctx.seed);
  const ModelPtr model = lower_to_state_space(c.model);
  const Vec truth = require_truth(c, model->param_dim());
  const std::vector<Vec> thetas = grid_points(s.axes);

  struct Setting {
    std::string label;
    Formulation formulation;
  };
  std::vector<Setting> settings;
  if (s.max_lens.empty()) {
    settings.push_back({"configured", make_formulation(c.formulation, data.size())});
  } else {
    for (int m : s.max_lens)
      settings.push_back({"ms-" + std::to_string(m),
                          MultipleShooting{ShootingPlan::uniform(data.size(), m)}});
  }

  json out = json::array();
  json times = json::object();
  std::vector<RunRecord> all;
  for (const Setting& st : settings) {
    const EstimationProblem problem(model, data, st.formulation);
    std::mt19937_64 rng = seeded_rng(ctx.seed);
    std::vector<ParameterPoint> guesses;
    for (const Vec& t : thetas) guesses.push_back(initial_point(c, problem, t, rng));
    ExperimentResult res = multi_start_study(problem, guesses, c.solver, ctx.jobs);
    int success = 0, capped = 0;
    std::vector<double> evals;
    json recs = json::array();
    for (RunRecord& r : res.records) {
      r.method = st.label;
      const bool ok = s.relative ? within_relative(r.final_theta, truth, s.tolerance)
                                 : within_absolute(r.final_theta, truth, s.tolerance);
      success += ok;
      capped += r.status == SolverStatus::max_iter;
      evals.push_back(r.function_evaluations);
      json j = record_json(r);
      j["recovered"] = ok;
      recs.push_back(j);
    }
    out.push_back({{"setting", st.label},
                   {"runs", res.records.size()},
                   {"recovered", success},
                   {"iteration_cap_hits", capped},
                   {"function_evaluations", summary_json(summarize(evals))},
                   {"records", recs}});
    times[st.label] = wall_times(res.records);
    all.insert(all.end(), res.records.begin(), res.records.end());
  }
  ctx.result["true_theta"] = vec_json(truth);
  ctx.result["tolerance"] = s.tolerance;
  ctx.result["relative"] = s.relative;
  ctx.result["settings"] = out;
  ctx.timings["run_wall_seconds"] = times;
  write_records_csv(ctx.dir / "records.csv", all);
  ctx.outputs.push_back("records.csv");
}

void study_monte_carlo(Context& ctx, const MonteCarloSpec& s) {
  const RunConfig& c = ctx.config;
  MonteCarloConfig mc;
  mc.data = std::get<GeneratorSpec>(c.data);
  mc.realizations = s.realizations;
  mc.seed = ctx.seed;
  mc.oe_model = c.model;
  mc.arx = s.arx;
  mc.oe_single = s.oe_single;
  mc.ms_lengths = s.ms_lengths;
  mc.msa_horizons = s.msa_horizons;
  mc.initial_guess = s.initial_guess;
  if (s.fixed_guess) mc.fixed_guess = *s.fixed_guess;
  mc.solver = c.solver;
  mc.jobs = ctx.jobs;
  const ExperimentResult res = monte_carlo_study(mc);
  const Vec truth = generator_theta(mc.data);

  json methods = json::array();
  for (const MethodSummary& m : summarize_methods(res, truth)) {
    json err = json::array(), abs_err = json::array(), hist = json::array();
    for (const Summary& e : m.error) err.push_back(summary_json(e));
    for (const Summary& e : m.absolute_error) abs_err.push_back(summary_json(e));
    // Histograms of estimate - truth per component, 20 bins over the observed range.
    const auto runs = res.with_method(m.method);
    for (int i = 0; i < truth.size(); ++i) {
      std::vector<double> values;
      for (const RunRecord* r : runs) values.push_back(r->final_theta(i) - truth(i));
      double lo = values.empty() ? 0.0 : values.front(), hi = lo;
      for (double v : values)
        if (std::isfinite(v)) lo = std::min(lo, v), hi = std::max(hi, v);
      if (!(hi > lo)) hi = lo + 1e-12, lo -= 1e-12;
      const Histogram h = histogram(values, 20, lo, hi);
      hist.push_back({{"lower", h.lower}, {"width", h.width}, {"counts", h.counts},
                      {"below", h.below}, {"above", h.above}, {"invalid", h.invalid}});
    }
    methods.push_back({{"method", m.method},
                       {"runs", m.runs},
                       {"converged", m.converged},
                       {"error", err},
                       {"absolute_error", abs_err},
                       {"function_evaluations", summary_json(m.evaluations)},
                       {"error_histograms", hist}});
  }
  json recs = json::array();
  for (const RunRecord& r : res.records) recs.push_back(record_json(r));
  ctx.result["true_theta"] = vec_json(truth);
  ctx.result["realizations"] = s.realizations;
  ctx.result["methods"] = methods;
  ctx.result["records"] = recs;
  ctx.timings["run_wall_seconds"] = wall_times(res.records);
  write_records_csv(ctx.dir / "records.csv", res.records);
  ctx.outputs.push_back("records.csv");
}

void study_grid_scan(Context& ctx, const GridScanSpec& s) {
  const RunConfig& c = ctx.config;
  const Dataset data = load_dataset(c, ctx.seed);
  const ModelPtr model = lower_to_state_space(c.model);
  const EstimationProblem problem(model, data, make_formulation(c.formulation, data.size()));
  std::mt19937_64 rng = seeded_rng(ctx.seed);
  const ParameterPoint base =
      initial_point(c, problem, start_theta(c, problem.theta_dim()), rng);
  const GridAxis& a0 = s.axes[0];
  const std::vector<double> axis0 = linspace(a0.lower, a0.upper, a0.points);
  int p1 = -1;
  std::vector<double> axis1;
  if (s.axes.size() > 1) {
    p1 = s.axes[1].param;
    axis1 = linspace(s.axes[1].lower, s.axes[1].upper, s.axes[1].points);
  }
  const GridScan g = grid_scan(problem, base, a0.param, axis0, p1, axis1, ctx.jobs);

  json rows = json::array();
  std::string text = "theta_" + std::to_string(a0.param + 1);
  if (p1 >= 0) text += ",theta_" + std::to_string(p1 + 1);
  text += ",cost\n";
  for (int i = 0; i < g.values.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < g.values.cols(); ++j) {
      row.push_back(num(g.values(i, j)));
      text += cell(axis0[i]);
      if (p1 >= 0) text += "," + cell(axis1[j]);
      text += "," + cell(g.values(i, j)) + "\n";
    }
    rows.push_back(row);
  }
  ctx.result["param0"] = g.param0;
  ctx.result["param1"] = g.param1;
  ctx.result["axis0"] = g.axis0;
  ctx.result["axis1"] = g.axis1;
  ctx.result["values"] = rows;
  ctx.result["total_variation"] = num(total_variation(g.values));
  ctx.emit_text("grid.csv", text);
}

void study_timing(Context& ctx, const TimingSpec& s) {
  const RunConfig& c = ctx.config;
  const Dataset data = load_dataset(c, ctx.seed);
  const ModelPtr model = lower_to_state_space(c.model);
  const Vec theta = start_theta(c, model->param_dim());
  const bool msa = s.vary == "msa";
  auto make_problem = [&](int setting) {
    if (msa) return EstimationProblem(model, data, MsaPem{setting});
    return EstimationProblem(model, data,
                             MultipleShooting{ShootingPlan::uniform(data.size(), setting)});
  };
  TimingOptions to;
  to.repeats = s.repeats;
  to.batches = s.batches;
  to.solve = s.solve;
  to.solver = c.solver;
  const std::vector<TimingRow> rows = timing_study(make_problem, s.settings, theta, to);

  json det = json::array(), wall = json::array();
  std::vector<double> x, y;
  for (const TimingRow& r : rows) {
    json d = {{"setting", r.setting}};
    if (s.solve) {
      d["solver_evaluations"] = r.solver_evaluations;
      d["status"] = to_string(r.status);
    }
    det.push_back(d);
    wall.push_back({{"setting", r.setting},
                    {"seconds_per_cost", r.seconds_per_cost},
                    {"seconds_per_solver_evaluation", r.seconds_per_solver_evaluation}});
    x.push_back(r.setting);
    y.push_back(r.seconds_per_cost);
  }
  ctx.result["vary"] = s.vary;
  ctx.result["rows"] = det;
  ctx.timings["rows"] = wall;
  if (rows.size() >= 2) {
    double lo = y.front(), hi = y.front();
    for (double v : y) lo = std::min(lo, v), hi = std::max(hi, v);
    ctx.timings["max_over_min"] = hi / lo;
    if (x.front() != x.back() || rows.size() > 2) {
      const LineFit f = fit_line(x, y);
      ctx.timings["line_fit"] = {{"slope", f.slope}, {"intercept", f.intercept},
                                 {"r_squared", f.r_squared}};
    }
  }
  std::string text = "setting,seconds_per_cost,seconds_per_solver_evaluation\n";
  for (const TimingRow& r : rows)
    text += std::to_string(r.setting) + "," + cell(r.seconds_per_cost) + "," +
            cell(r.seconds_per_solver_evaluation) + "\n";
  ctx.emit_text("timing.csv", text);
}

void study_incremental(Context& ctx, const IncrementalSpec& s) {
  const RunConfig& c = ctx.config;
  const Dataset data = load_dataset(c, ctx.seed);
  const ModelPtr model = lower_to_state_space(c.model);
  const EstimationProblem problem(model, data, MsaPem{1});
  const Vec truth = require_truth(c, problem.theta_dim());
  const auto& msa = std::get<MsaSpec>(c.formulation);
  IncrementalOptions io;
  io.k_max = msa.k_max;
  io.tolerance = msa.tolerance;
  io.solver = c.solver;
  const ExperimentResult res = incremental_study(problem, grid_points(s.axes), io, ctx.jobs);

  json methods = json::array();
  for (const std::string& name : {std::string("incremental"), "vanilla-" + std::to_string(io.k_max)}) {
    std::vector<double> dist, evals;
    for (const RunRecord* r : res.with_method(name)) {
      const double d = (r->final_theta - truth).norm();
      dist.push_back(std::isfinite(d) ? d : std::numeric_limits<double>::infinity());
      evals.push_back(r->function_evaluations);
    }
    methods.push_back({{"method", name},
                       {"distance_to_truth", summary_json(summarize(dist))},
                       {"function_evaluations", summary_json(summarize(evals))}});
  }
  json recs = json::array();
  for (const RunRecord& r : res.records) recs.push_back(record_json(r));
  ctx.result["true_theta"] = vec_json(truth);
  ctx.result["k_max"] = io.k_max;
  ctx.result["methods"] = methods;
  ctx.result["records"] = recs;
  ctx.timings["run_wall_seconds"] = wall_times(res.records);
  write_records_csv(ctx.dir / "records.csv", res.records);
  ctx.outputs.push_back("records.csv");
}

int cmd_study(Context& ctx) {
  const StudySpec& s = *ctx.config.study;
  std::visit(
      [&](const auto& spec) {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, MultiStartSpec>) {
          ctx.result["study"] = "multi_start";
          study_multi_start(ctx, spec);
        } else if constexpr (std::is_same_v<T, MonteCarloSpec>) {
          ctx.result["study"] = "monte_carlo";
          study_monte_carlo(ctx, spec);
        } else if constexpr (std::is_same_v<T, GridScanSpec>) {
          ctx.result["study"] = "grid_scan";
          study_grid_scan(ctx, spec);
        } else if constexpr (std::is_same_v<T, TimingSpec>) {
          ctx.result["study"] = "timing";
          study_timing(ctx, spec);
        } else {
          ctx.result["study"] = "incremental";
          study_incremental(ctx, spec);
        }
      },
      s);
  return exit_ok;
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const MissingFileError& e) {
    err << "error: " << e.what() << "\n";
    return exit_missing_file;
  } catch (const ConfigError& e) {
    err << "config error in field '" << e.field() << "': " << e.what() << "\n";
    return exit_schema;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_error;
  }
}

}  // namespace

std::string version() { return "0.1.0"; }

int run(const RunOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    const RunConfig config = load_config(options.config_path, options.profile);
    const std::uint64_t seed = options.seed.value_or(config.seed);
    const fs::path dir = options.out.value_or(fs::path(config.output_dir));
    fs::create_directories(dir);
    int jobs = options.jobs > 0 ? options.jobs
                                : static_cast<int>(std::thread::hardware_concurrency());
    if (jobs < 1) jobs = 1;

    Context ctx{config, seed, dir, jobs, options.trace, out, err, json::object(), json::object(), {}};
    ctx.result["command"] = config.command;
    ctx.result["seed"] = seed;

    const auto t0 = std::chrono::steady_clock::now();
    int code = exit_ok;
    if (config.command == "simulate") code = cmd_simulate(ctx);
    else if (config.command == "estimate") code = cmd_estimate(ctx);
    else if (config.command == "smoothness") code = cmd_smoothness(ctx);
    else code = cmd_study(ctx);

    ctx.timings["total_wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ctx.timings["jobs"] = jobs;
    ctx.emit("result.json", ctx.result);
    ctx.emit("timings.json", ctx.timings);

    json manifest = {{"tool", "msid"},
                     {"version", version()},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                   std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)},
                     {"compiler", __VERSION__},
                     {"config", config.echo},
                     {"config_hash", "fnv1a64:" + hex64(fnv1a(config.echo.dump()))},
                     {"seed", seed},
                     {"profile", options.profile},
                     {"command", config.command},
                     {"exit_code", code}};
    ctx.outputs.push_back("manifest.json");
    manifest["outputs"] = ctx.outputs;
    write_json(dir / "manifest.json", manifest);
    out << config.command << ": wrote " << ctx.outputs.size() << " files to " << dir.string()
        << "\n";
    return code;
  });
}

int validate(const RunOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    const RunConfig config = load_config(options.config_path, options.profile);
    if (const auto* csv = std::get_if<CsvSource>(&config.data))
      if (!fs::exists(csv->path))
        throw MissingFileError("cannot open data file " + csv->path.string());
    out << "valid: " << options.config_path.string() << " (command " << config.command
        << ", profile " << options.profile << ", hash fnv1a64:" << hex64(fnv1a(config.echo.dump()))
        << ")\n";
    return exit_ok;
  });
}

}  // namespace msid
