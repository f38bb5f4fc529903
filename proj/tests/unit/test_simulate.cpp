#include "../common/cases.hpp"

#include <doctest.h>

using namespace msid;
using namespace msid::testing;

namespace {

Dataset zeros(int n) { return Dataset(Mat::Zero(n, 1), Mat::Zero(n, 1)); }

}  // namespace

TEST_CASE("logistic predictions and sensitivities") {
  const ModelPtr m = lower_to_state_space(LogisticMap{});
  const SensitivityTrace tr =
      simulate_with_sensitivities(*m, Vec::Constant(1, 0.5), zeros(5), SimRange{0, 5}, Vec::Constant(1, 3.78));
  CHECK(tr.prediction(1)(0) == doctest::Approx(0.945).epsilon(1e-15));
  CHECK(tr.prediction(2)(0) == doctest::Approx(0.945 * 3.78 * 0.055).epsilon(1e-14));
  CHECK(tr.J(1)(0, 0) == doctest::Approx(0.25).epsilon(1e-15));
  // d x1 / d x0 = theta (1 - 2 x0) = 0
  CHECK(tr.J(1)(0, 1) == 0.0);
  CHECK(tr.D(0)(0, 0) == 0.0);
  CHECK(tr.D(0)(0, 1) == 1.0);
}

TEST_CASE("empty range") {
  const ModelPtr m = lower_to_state_space(Linear2ndOrderOE{});
  const Vec th = (Vec(3) << 0.5, -0.2, 1.0).finished();
  const Trajectory t = simulate(*m, Vec::Ones(2), zeros(4), SimRange{2, 2}, th);
  CHECK(t.predictions.cols() == 0);
  CHECK(t.states.cols() == 1);
  CHECK(t.states.col(0) == Vec::Ones(2));
  const SensitivityTrace s = simulate_with_sensitivities(*m, Vec::Ones(2), zeros(4), SimRange{2, 2}, th);
  CHECK(s.predictions.cols() == 0);
}

TEST_CASE("pendulum origin is a fixed point without input") {
  const ModelPtr m = lower_to_state_space(Pendulum{});
  const Trajectory t = simulate(*m, Vec::Zero(2), zeros(50), SimRange{0, 50}, (Vec(2) << 30, 2).finished());
  CHECK(t.states.norm() == 0.0);
  CHECK(t.predictions.norm() == 0.0);
}

TEST_CASE("one-step output sensitivity is [C B + F | C A]") {
  Rng rng(21);
  for (const ModelCase& c : model_cases()) {
    CAPTURE(c.label);
    const ModelPtr m = lower_to_state_space(c.family);
    const int np = m->param_dim();
    const Dataset d = random_dataset(c, 10, rng);
    const Vec x0 = c.state(rng), th = c.theta(rng);
    const SensitivityTrace tr = simulate_with_sensitivities(*m, x0, d, SimRange{3, 6}, th);
    const RegressorWindow z = m->window(d, 4);
    const Jacobians j0 = jacobians(*m, x0, z, th);
    const Vec x1 = transition(*m, x0, z, th);
    const Jacobians j1 = jacobians(*m, x1, z, th);
    const Mat expect_theta = j1.C * j0.B + j1.F;
    CHECK((tr.J(4).leftCols(np) - expect_theta).norm() <= 1e-14 * (1 + expect_theta.norm()));
    if (m->state_dim() > 0) CHECK((tr.J(4).rightCols(m->state_dim()) - j1.C * j0.A).norm() <= 1e-14);
  }
}

TEST_CASE("static ARX predictor has J = F") {
  Rng rng(4);
  const ModelCase c = model_cases().back();
  REQUIRE(c.label == "arx");
  const ModelPtr m = lower_to_state_space(c.family);
  const Dataset d = random_dataset(c, 15, rng);
  const Vec th = c.theta(rng);
  const SensitivityTrace tr = simulate_with_sensitivities(*m, Vec(), d, SimRange{0, 15}, th);
  REQUIRE(tr.param_cols() == 3);
  for (int k = 1; k <= 15; ++k) {
    const Jacobians j = jacobians(*m, Vec(), m->window(d, k), th);
    CHECK(tr.J(k) == j.F);
    CHECK(tr.prediction(k)(0) == doctest::Approx(th(0) * d.y(k - 1) + th(1) * d.y(k - 2) + th(2) * d.u(k - 1)));
  }
}

TEST_CASE("chained simulation is bitwise identical to one rollout") {
  Rng rng(8);
  for (const ModelCase& c : model_cases()) {
    CAPTURE(c.label);
    const ModelPtr m = lower_to_state_space(c.family);
    const int n = c.chaotic ? 12 : 40;
    const Dataset d = random_dataset(c, n, rng);
    const Vec x0 = c.state(rng), th = c.theta(rng);
    const Trajectory whole = simulate(*m, x0, d, SimRange{0, n}, th);
    const int cut = n / 3;
    const Trajectory a = simulate(*m, x0, d, SimRange{0, cut}, th);
    const Trajectory b = simulate(*m, a.states.col(cut), d, SimRange{cut, n}, th);
    CHECK(whole.predictions.leftCols(cut) == a.predictions);
    CHECK(whole.predictions.rightCols(n - cut) == b.predictions);
    CHECK(whole.states.rightCols(n - cut + 1) == b.states);
    // The sensitivity pass reproduces the plain rollout.
    const SensitivityTrace s = simulate_with_sensitivities(*m, x0, d, SimRange{0, n}, th);
    CHECK(s.predictions == whole.predictions);
  }
}

TEST_CASE("sensitivities match finite differences of the rollout") {
  Rng rng(30);
  for (const ModelCase& c : model_cases()) {
    CAPTURE(c.label);
    const ModelPtr m = lower_to_state_space(c.family);
    const int np = m->param_dim(), nx = m->state_dim();
    for (int t = 0; t < 5; ++t) {
      const int n = c.chaotic ? 8 : 25;
      const Dataset d = random_dataset(c, n, rng);
      const Vec x0 = c.state(rng), th = c.theta(rng);
      const SensitivityTrace tr = simulate_with_sensitivities(*m, x0, d, SimRange{0, n}, th);
      Vec z(np + nx);
      z << th, x0;
      auto flat = [&](const Vec& v) -> Vec {
        const Trajectory r = simulate(*m, v.tail(nx), d, SimRange{0, n}, v.head(np));
        return Eigen::Map<const Vec>(r.predictions.data(), r.predictions.size());
      };
      const Mat fd = fd_jacobian(flat, z, c.chaotic ? 1e-7 : 1e-4);
      Mat an(n, np + nx);
      for (int k = 1; k <= n; ++k) an.row(k - 1) = tr.J(k);
      CHECK(max_rel_error(an, fd) < 1e-6);
    }
  }
}

TEST_CASE("shape errors") {
  const ModelPtr m = lower_to_state_space(Linear2ndOrderOE{});
  const Vec th = (Vec(3) << 0.5, -0.2, 1.0).finished();
  CHECK_THROWS(simulate(*m, Vec::Zero(3), zeros(5), SimRange{0, 5}, th));
  CHECK_THROWS(simulate(*m, Vec::Zero(2), zeros(5), SimRange{0, 5}, Vec::Zero(2)));
  CHECK_THROWS(simulate(*m, Vec::Zero(2), zeros(5), SimRange{0, 6}, th));
}

TEST_CASE("divergence carries the step index") {
  const ModelPtr m = lower_to_state_space(Linear2ndOrderOE{});
  const Dataset d(Mat::Ones(3000, 1), Mat::Zero(3000, 1));
  try {
    simulate(*m, Vec::Ones(2), d, SimRange{0, 3000}, (Vec(3) << 3.0, 0.5, 1.0).finished());
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.step() > 100);
    CHECK(e.step() <= 3000);
  }
}
