#include "../common/cases.hpp"

#include <doctest.h>

#include <atomic>
#include <cmath>

using namespace msid;
using namespace msid::testing;

namespace {

Linear2ndSpec quiet_linear2nd(int n = 120) {
  Linear2ndSpec s;
  s.setting = 'a';
  s.n = n;
  s.noise = 0.0;
  return s;
}

}  // namespace

TEST_CASE("parallel_for visits every index once") {
  for (int jobs : {1, 3, 8}) {
    for (int count : {0, 1, 17}) {
      std::vector<std::atomic<int>> hits(count);
      parallel_for(count, jobs, [&](int i) { hits[i]++; });
      for (int i = 0; i < count; ++i) CHECK(hits[i] == 1);
    }
  }
}

TEST_CASE("multi-start study") {
  const Linear2ndSpec spec = quiet_linear2nd();
  const Dataset d = generate(spec, 1);
  const Vec truth = generator_theta(spec);
  const EstimationProblem p(lower_to_state_space(generator_model(spec)), d,
                            MultipleShooting{ShootingPlan::uniform(spec.n, 10)});
  SUBCASE("a start at the truth converges immediately") {
    const ExperimentResult r = multi_start_study(p, {p.point_from_states(truth, d.meta.true_states)}, {});
    REQUIRE(r.records.size() == 1);
    CHECK(r.records[0].status == SolverStatus::converged);
    CHECK(r.records[0].iterations <= 1);
    CHECK(within_absolute(r.records[0].final_theta, truth, 1e-10));
  }
  SUBCASE("record count, order and thread independence") {
    std::vector<ParameterPoint> guesses;
    for (double a : {0.3, 0.4, 0.6, 0.7})
      guesses.push_back(p.point_from_states((Vec(3) << a, -0.1, 1.5).finished(), d.meta.true_states));
    const ExperimentResult one = multi_start_study(p, guesses, {}, 1);
    const ExperimentResult three = multi_start_study(p, guesses, {}, 3);
    REQUIRE(one.records.size() == 4);
    REQUIRE(three.records.size() == 4);
    for (int i = 0; i < 4; ++i) {
      CHECK(one.records[i].index == i);
      CHECK(one.records[i].final_theta == three.records[i].final_theta);
      CHECK(one.records[i].function_evaluations == three.records[i].function_evaluations);
      CHECK(one.records[i].initial_theta == guesses[i].theta);
      CHECK(within_absolute(one.records[i].final_theta, truth, 1e-6));
    }
  }
}

TEST_CASE("Monte Carlo without noise recovers the truth for every method") {
  MonteCarloConfig c;
  c.data = quiet_linear2nd();
  c.realizations = 2;
  c.ms_lengths = {5};
  c.msa_horizons = {3};
  c.initial_guess = "truth";
  // Multiple shooting from a padded first seed can crawl with a small trust
  // region (no second-order correction), so allow more iterations.
  c.solver.max_iter = 5000;
  const ExperimentResult r = monte_carlo_study(c);
  const std::vector<std::string> methods{"arx", "oe-ss", "oe-ms-5", "msa-3"};
  REQUIRE(r.records.size() == 2 * methods.size());
  const Vec truth = generator_theta(c.data);
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    const RunRecord& rec = r.records[i];
    CAPTURE(rec.method);
    CHECK(rec.method == methods[i % methods.size()]);
    CHECK(rec.index == static_cast<int>(i / methods.size()));
    CHECK(within_absolute(rec.final_theta, truth, 1e-6));
  }
  const std::vector<MethodSummary> s = summarize_methods(r, truth);
  REQUIRE(s.size() == methods.size());
  for (const MethodSummary& m : s) {
    CHECK(m.runs == 2);
    REQUIRE(m.absolute_error.size() == 3);
    CHECK(m.absolute_error[0].max < 1e-6);
  }
  CHECK(r.with_method("oe-ss").size() == 2);
}

TEST_CASE("grid scan") {
  const Linear2ndSpec spec = quiet_linear2nd(60);
  const Dataset d = generate(spec, 2);
  const Vec truth = generator_theta(spec);
  const EstimationProblem p(lower_to_state_space(generator_model(spec)), d, SingleShooting{true, std::nullopt});
  const ParameterPoint base = p.point_from_states(truth, d.meta.true_states);
  SUBCASE("minimum at the truth on a grid containing it") {
    const GridScan g = grid_scan(p, base, 0, linspace(0.3, 0.7, 5), 2, linspace(1.5, 2.5, 5));
    REQUIRE(g.values.rows() == 5);
    REQUIRE(g.values.cols() == 5);
    Eigen::Index r = 0, c = 0;
    g.values.minCoeff(&r, &c);
    CHECK(r == 2);
    CHECK(c == 2);
    CHECK(g.values(2, 2) < 1e-28);
  }
  SUBCASE("1 x 1 grid is a scalar") {
    const GridScan g = grid_scan(p, base, 1, {-0.2});
    CHECK(g.values.size() == 1);
    CHECK(g.values(0, 0) == doctest::Approx(evaluate_cost(p, p.pack(base)).value));
  }
  SUBCASE("threads do not change the grid") {
    const GridScan a = grid_scan(p, base, 0, linspace(0.0, 1.0, 7), 1, linspace(-0.5, 0.5, 6), 1);
    const GridScan b = grid_scan(p, base, 0, linspace(0.0, 1.0, 7), 1, linspace(-0.5, 0.5, 6), 4);
    CHECK(a.values == b.values);
  }
}

TEST_CASE("total variation") {
  CHECK(total_variation(Mat::Constant(4, 4, 2.0)) == 0.0);
  Mat one(1, 2);
  one << 0.0, std::exp(1.0) - 1;
  CHECK(total_variation(one) == doctest::Approx(1.0));
  // 2 x 2: horizontal diffs |1-0|, |1-0|; vertical diffs 0, 0 -> mean 0.5
  Mat two(2, 2);
  two << 0.0, std::exp(1.0) - 1, 0.0, std::exp(1.0) - 1;
  CHECK(total_variation(two) == doctest::Approx(0.5));
  // A cell that did not simulate takes the largest finite value.
  Mat inf = two;
  inf(1, 0) = std::numeric_limits<double>::infinity();
  Mat capped = two;
  capped(1, 0) = std::exp(1.0) - 1;
  CHECK(total_variation(inf) == doctest::Approx(total_variation(capped)));
}

TEST_CASE("incremental study records both methods per guess") {
  const Linear2ndSpec spec = quiet_linear2nd(80);
  const Dataset d = generate(spec, 3);
  const EstimationProblem p(lower_to_state_space(generator_model(spec)), d, MsaPem{1});
  IncrementalOptions o;
  o.k_max = 4;
  const std::vector<Vec> guesses{(Vec(3) << 0.3, 0.0, 1.0).finished(), (Vec(3) << 0.6, -0.3, 2.5).finished()};
  const ExperimentResult r = incremental_study(p, guesses, o);
  REQUIRE(r.records.size() == 4);
  CHECK(r.with_method("incremental").size() == 2);
  CHECK(r.with_method("vanilla-4").size() == 2);
}

TEST_CASE("timing study shape") {
  const Linear2ndSpec spec = quiet_linear2nd(100);
  const Dataset d = generate(spec, 4);
  const ModelPtr m = lower_to_state_space(generator_model(spec));
  TimingOptions o;
  o.repeats = 3;
  o.batches = 3;
  const std::vector<TimingRow> rows = timing_study(
      [&](int k) { return EstimationProblem(m, d, MsaPem{k}); }, {1, 5}, generator_theta(spec), o);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].setting == 1);
  CHECK(rows[1].setting == 5);
  for (const TimingRow& r : rows) {
    CHECK(r.seconds_per_cost > 0.0);
    CHECK(r.solver_evaluations == 0);
  }
}
