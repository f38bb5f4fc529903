#include "../common/cases.hpp"

#include <doctest.h>

#include <cmath>

using namespace msid;
using namespace msid::testing;

namespace {

Dataset ramp_data(int n) {
  Mat u(n, 1), y(n, 1);
  for (int k = 0; k < n; ++k) {
    u(k, 0) = 0.1 * (k + 1);
    y(k, 0) = 1.0 + 0.5 * (k + 1);
  }
  return Dataset(u, y);
}

}  // namespace

TEST_CASE("dimensions of the built-in families") {
  CHECK(lower_to_state_space(LogisticMap{})->param_dim() == 1);
  CHECK(lower_to_state_space(LogisticMap{})->state_dim() == 1);
  CHECK(lower_to_state_space(Pendulum{})->param_dim() == 2);
  CHECK(lower_to_state_space(Pendulum{})->state_dim() == 2);
  CHECK(lower_to_state_space(Linear2ndOrderOE{})->param_dim() == 3);
  CHECK(lower_to_state_space(Linear2ndOrderOE{})->state_dim() == 2);
  CHECK(lower_to_state_space(NeuralNetOE{3, 2, 1})->param_dim() == 3 * 3 + 2 * 3 + 1);
  CHECK(lower_to_state_space(NeuralNetOE{3, 2, 1})->state_dim() == 2);
  CHECK(lower_to_state_space(linear_arx(2, 1))->param_dim() == 3);
  CHECK(lower_to_state_space(linear_arx(2, 1))->state_dim() == 0);
  CHECK(lower_to_state_space(poly(PolynomialModel::Kind::noe))->state_dim() == 2);
  CHECK(lower_to_state_space(poly(PolynomialModel::Kind::narmax))->param_dim() == 5);
  for (const ModelCase& c : model_cases()) CHECK(lower_to_state_space(c.family)->output_dim() == 1);
}

TEST_CASE("hand-computed transitions") {
  const Dataset d = ramp_data(10);
  SUBCASE("logistic") {
    const ModelPtr m = lower_to_state_space(LogisticMap{});
    const Vec x = transition(*m, Vec::Constant(1, 0.25), m->window(d, 3), Vec::Constant(1, 3.78));
    CHECK(x(0) == doctest::Approx(3.78 * 0.25 * 0.75).epsilon(1e-15));
    CHECK(output(*m, x, m->window(d, 3), Vec::Constant(1, 3.78))(0) == x(0));
  }
  SUBCASE("pendulum rests at the origin without input") {
    const ModelPtr m = lower_to_state_space(Pendulum{});
    const Dataset z(Mat::Zero(5, 1), Mat::Zero(5, 1));
    const Vec x = transition(*m, Vec::Zero(2), m->window(z, 2), (Vec(2) << 30, 2).finished());
    CHECK(x.norm() == 0.0);
  }
  SUBCASE("linear2nd") {
    const ModelPtr m = lower_to_state_space(Linear2ndOrderOE{});
    const Vec th = (Vec(3) << 0.5, -0.2, 2.0).finished();
    const Vec x = transition(*m, (Vec(2) << 1.0, 3.0).finished(), m->window(d, 4), th);
    // u[3] = 0.3
    CHECK(x(0) == doctest::Approx(0.5 - 0.6 + 0.6).epsilon(1e-15));
    CHECK(x(1) == 1.0);
  }
  SUBCASE("NARX uses measured outputs") {
    const ModelPtr m = lower_to_state_space(poly(PolynomialModel::Kind::narx));
    const Vec th = (Vec(4) << 1, 2, 3, 4).finished();
    // k = 5: y[4] = 3, y[3] = 2.5, u[4] = 0.4
    const Vec y = output(*m, Vec(), m->window(d, 5), th);
    CHECK(y(0) == doctest::Approx(3 + 2 * 0.4 + 3 * 3 * 0.4 + 4 * 2.5 * 2.5).epsilon(1e-14));
  }
  SUBCASE("NOE uses simulated outputs") {
    const ModelPtr m = lower_to_state_space(poly(PolynomialModel::Kind::noe));
    const Vec th = (Vec(4) << 1, 2, 3, 4).finished();
    const Vec x = transition(*m, (Vec(2) << 0.5, -1.0).finished(), m->window(d, 5), th);
    CHECK(x(0) == doctest::Approx(0.5 + 2 * 0.4 + 3 * 0.5 * 0.4 + 4 * 1.0).epsilon(1e-14));
    CHECK(x(1) == 0.5);
  }
  SUBCASE("neural OE with one hidden unit") {
    const ModelPtr m = lower_to_state_space(NeuralNetOE{1, 1, 1});
    const Vec th = (Vec(5) << 0.7, -0.4, 0.1, 2.0, -0.3).finished();
    const Vec x = transition(*m, Vec::Constant(1, 0.2), m->window(d, 5), th);
    CHECK(x(0) == doctest::Approx(2.0 * std::tanh(0.7 * 0.2 - 0.4 * 0.4 + 0.1) - 0.3).epsilon(1e-14));
  }
}

TEST_CASE("model Jacobians match finite differences") {
  Rng rng(17);
  for (const ModelCase& c : model_cases()) {
    CAPTURE(c.label);
    const ModelPtr m = lower_to_state_space(c.family);
    const int nx = m->state_dim(), np = m->param_dim();
    for (int t = 0; t < 20; ++t) {
      const Dataset d = random_dataset(c, 12, rng);
      const RegressorWindow z = m->window(d, rng.integer(1, 12));
      const Vec x = c.state(rng);
      const Vec th = c.theta(rng);
      const Jacobians j = jacobians(*m, x, z, th);
      REQUIRE(j.A.rows() == nx);
      REQUIRE(j.A.cols() == nx);
      REQUIRE(j.B.cols() == np);
      REQUIRE(j.C.rows() == 1);
      REQUIRE(j.F.cols() == np);
      if (nx > 0) {
        CHECK(max_rel_error(j.A, fd_jacobian([&](const Vec& v) { return transition(*m, v, z, th); }, x)) < 1e-7);
        CHECK(max_rel_error(j.B, fd_jacobian([&](const Vec& v) { return transition(*m, x, z, v); }, th)) < 1e-7);
        CHECK(max_rel_error(j.C, fd_jacobian([&](const Vec& v) { return output(*m, v, z, th); }, x)) < 1e-7);
      }
      CHECK(max_rel_error(j.F, fd_jacobian([&](const Vec& v) { return output(*m, x, z, v); }, th)) < 1e-7);
    }
  }
}

TEST_CASE("invalid structures are rejected") {
  PolynomialModel p;
  SUBCASE("zero power") {
    p.terms = {{Factor{Signal::u, 1, 0}}};
    CHECK_THROWS_AS(lower_to_state_space(p), StructureError);
  }
  SUBCASE("output lag zero") {
    p.terms = {{Factor{Signal::y, 0, 1}}};
    CHECK_THROWS_AS(lower_to_state_space(p), StructureError);
  }
  SUBCASE("negative input lag") {
    p.terms = {{Factor{Signal::u, -1, 1}}};
    CHECK_THROWS_AS(lower_to_state_space(p), StructureError);
  }
  SUBCASE("noise terms need NARMAX") {
    p.kind = PolynomialModel::Kind::noe;
    p.terms = {{Factor{Signal::v, 1, 1}}};
    CHECK_THROWS_AS(lower_to_state_space(p), StructureError);
  }
  SUBCASE("pendulum step") { CHECK_THROWS_AS(lower_to_state_space(Pendulum{3.0, 0.0}), StructureError); }
  SUBCASE("neural OE without output lags") {
    CHECK_THROWS_AS(lower_to_state_space(NeuralNetOE{4, 0, 1}), StructureError);
  }
  SUBCASE("ARX lag orders") { CHECK_THROWS_AS(linear_arx(-1, 1), StructureError); }
}

TEST_CASE("linear ARX structure") {
  const PolynomialModel m = linear_arx(2, 1);
  REQUIRE(m.terms.size() == 3);
  CHECK(m.terms[0][0].signal == Signal::y);
  CHECK(m.terms[1][0].lag == 2);
  CHECK(m.terms[2][0].signal == Signal::u);
}

TEST_CASE("neural weight initialization") {
  const NeuralNetOE net{4, 2, 1};
  const Vec a = init_neural_weights(net, 7);
  CHECK(a == init_neural_weights(net, 7));
  CHECK(a != init_neural_weights(net, 8));
  REQUIRE(a.size() == 4 * 3 + 2 * 4 + 1);
  CHECK(a.segment(12, 4).norm() == 0.0);  // hidden biases
  CHECK(a(a.size() - 1) == 0.0);          // output bias
}

TEST_CASE("data seeds") {
  const Dataset d = ramp_data(10);
  CHECK(lower_to_state_space(LogisticMap{})->seed_state(d, 4)(0) == d.y(4));
  const Vec s = lower_to_state_space(Linear2ndOrderOE{})->seed_state(d, 4);
  CHECK(s(0) == d.y(4));
  CHECK(s(1) == d.y(3));
}
