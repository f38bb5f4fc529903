#include "../common/cases.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

using namespace msid;
using namespace msid::testing;

namespace {

double lag1_autocorrelation(const Mat& u) {
  const Vec x = u.col(0).array() - u.col(0).mean();
  return x.head(x.size() - 1).dot(x.tail(x.size() - 1)) / x.squaredNorm();
}

double sample_std(const Vec& v) {
  const double mean = v.mean();
  return std::sqrt((v.array() - mean).square().sum() / (v.size() - 1));
}

}  // namespace

TEST_CASE("logistic generator") {
  const Dataset d = gen_logistic();
  REQUIRE(d.size() == 200);
  CHECK(d.y(1) == doctest::Approx(0.945).epsilon(1e-15));
  CHECK(d.y(2) == doctest::Approx(0.945 * 3.78 * 0.055).epsilon(1e-14));
  const Dataset zero = gen_logistic(0.0, 0.5, 20);
  CHECK(zero.outputs().norm() == 0.0);
}

TEST_CASE("pendulum scenarios") {
  SUBCASE("(a) stays roughly within a quarter turn") {
    const Dataset d = gen_pendulum('a', 1);
    REQUIRE(d.size() == 1024);
    CHECK(d.outputs().cwiseAbs().maxCoeff() < std::numbers::pi / 2 + 0.3);
  }
  SUBCASE("(b) stays near the upright position") {
    const Dataset d = gen_pendulum('b', 1);
    const Vec y = d.outputs().col(0);
    CHECK((y.array() - std::numbers::pi).abs().maxCoeff() < 1.5);
    CHECK(std::abs(y.mean() - std::numbers::pi) < 0.3);
  }
  SUBCASE("(c) makes full rotations") {
    const Dataset d = gen_pendulum('c', 1);
    CHECK(d.outputs().cwiseAbs().maxCoeff() > 2 * std::numbers::pi);
  }
}

TEST_CASE("linear2nd settings") {
  SUBCASE("true parameters") {
    CHECK(linear2nd_theta('a') == (Vec(3) << 0.5, -0.2, 2.0).finished());
    CHECK(linear2nd_theta('b') == (Vec(3) << 1.5, -0.7, 0.5).finished());
    CHECK(linear2nd_theta('c') == (Vec(3) << 1.8, -0.95, 0.1).finished());
  }
  SUBCASE("setting (c) pole magnitude from the characteristic polynomial") {
    const Vec t = linear2nd_theta('c');
    const std::complex<double> disc = std::sqrt(std::complex<double>(t(0) * t(0) + 4 * t(1)));
    const double pole = std::max(std::abs((t(0) + disc) / 2.0), std::abs((t(0) - disc) / 2.0));
    CHECK(pole == doctest::Approx(std::sqrt(0.95)).epsilon(1e-12));
    // Companion-matrix eigenvalues as a second oracle.
    Mat a(2, 2);
    a << t(0), t(1), 1, 0;
    CHECK(Eigen::EigenSolver<Mat>(a).eigenvalues().cwiseAbs().maxCoeff() == doctest::Approx(pole));
  }
  SUBCASE("zero noise gives the noiseless output") {
    Linear2ndSpec s;
    s.setting = 'b';
    s.noise = 0.0;
    const Dataset d = generate(s, 3);
    REQUIRE(d.meta.true_states.cols() == d.size() + 1);
    CHECK((d.outputs().col(0) - d.meta.true_states.row(0).tail(d.size()).transpose()).norm() == 0.0);
  }
}

TEST_CASE("Farina input and noise") {
  const Dataset d = gen_farina(5);
  REQUIRE(d.size() == 500);
  CHECK(std::abs(lag1_autocorrelation(d.inputs()) - 0.99) <= 0.05);
  REQUIRE(d.meta.noise.size() == 500);
  CHECK(sample_std(d.meta.noise) == doctest::Approx(0.09).epsilon(0.1));
  FarinaSpec quiet;
  quiet.eta_scale = 0.0;
  quiet.noise = 0.0;
  const Dataset z = generate(quiet, 5);
  CHECK(z.outputs().norm() == 0.0);
}

TEST_CASE("regeneration is bit-identical and seeds matter") {
  const GeneratorSpec specs[] = {LogisticSpec{3.78, 0.5, 200, 0.01}, PendulumSpec{'a'}, PendulumSpec{'b'},
                                 Linear2ndSpec{'c'}, FarinaSpec{}};
  for (const GeneratorSpec& s : specs) {
    CAPTURE(generator_id(s));
    const Dataset a = generate(s, 11), b = generate(s, 11), c = generate(s, 12);
    CHECK(a.inputs() == b.inputs());
    CHECK(a.outputs() == b.outputs());
    CHECK(a.outputs() != c.outputs());
    CHECK(a.meta.seed == 11);
    CHECK(a.meta.generator == generator_id(s));
  }
}

TEST_CASE("true states reproduce the noiseless outputs") {
  const GeneratorSpec specs[] = {LogisticSpec{}, PendulumSpec{'a'}, PendulumSpec{'b'}, PendulumSpec{'c'},
                                 Linear2ndSpec{'a'}, Linear2ndSpec{'c'}, FarinaSpec{}};
  for (const GeneratorSpec& s : specs) {
    CAPTURE(generator_id(s));
    const Dataset d = generate(s, 2);
    const ModelPtr m = lower_to_state_space(generator_model(s));
    REQUIRE(d.meta.true_states.cols() == d.size() + 1);
    const Trajectory t = simulate(*m, d.meta.true_states.col(0), d, SimRange{0, d.size()}, generator_theta(s));
    CHECK(t.states == d.meta.true_states);
    Vec noise = d.meta.noise;
    if (noise.size() == 0) noise = Vec::Zero(d.size());
    CHECK((t.predictions.row(0).transpose() + noise - d.outputs().col(0)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("generator ids") {
  CHECK(generator_id(generator_from_id("pendulum-b")) == "pendulum-b");
  CHECK(generator_id(generator_from_id("linear2nd-c")) == "linear2nd-c");
  CHECK(generator_id(generator_from_id("farina")) == "farina");
  CHECK_THROWS_AS(generator_from_id("nope"), std::invalid_argument);
}
