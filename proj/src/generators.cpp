#include "msid/experiments.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace msid {

namespace {

// Independent streams for inputs, references and noise, so that changing one
// noise level leaves the other signals untouched.
enum Stream : std::uint64_t { input_stream = 1, reference_stream = 2, noise_stream = 3 };

std::mt19937_64 engine(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

// Zero-mean Gaussian values, each held for `hold` samples.
Vec held_gaussian(int n, double std_dev, int hold, std::mt19937_64& rng) {
  if (hold < 1) throw std::invalid_argument("generator: hold must be >= 1");
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec out(n);
  double value = 0.0;
  for (int k = 0; k < n; ++k) {
    if (k % hold == 0) value = std_dev * normal(rng);
    out(k) = value;
  }
  return out;
}

void check_length(int n) {
  if (n < 0) throw std::invalid_argument("generator: negative sample count");
}

// Simulates the model on fixed inputs and adds white output noise.
Dataset rollout(const StateSpaceModel& model, const Vec& theta, const Vec& x0, const Vec& u,
                double noise_std, std::uint64_t seed) {
  const int n = static_cast<int>(u.size());
  Dataset data(u, Mat::Zero(n, 1));
  std::mt19937_64 rng = engine(seed, noise_stream);
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat states(model.state_dim(), n + 1);
  states.col(0) = x0;
  Vec noise(n);
  Vec y(1);
  for (int k = 1; k <= n; ++k) {
    const RegressorWindow z = model.window(data, k);
    model.transition(states.col(k - 1), z, theta, states.col(k));
    model.output(states.col(k), z, theta, y);
    noise(k - 1) = noise_std > 0.0 ? noise_std * normal(rng) : 0.0;
    data.mutable_outputs()(k - 1, 0) = y(0) + noise(k - 1);
  }
  data.meta.true_states = std::move(states);
  data.meta.noise = std::move(noise);
  data.meta.true_theta = theta;
  data.meta.seed = seed;
  return data;
}

Dataset make_logistic(const LogisticSpec& s, std::uint64_t seed) {
  check_length(s.n);
  const ModelPtr model = lower_to_state_space(LogisticMap{});
  Dataset d = rollout(*model, Vec::Constant(1, s.theta), Vec::Constant(1, s.x0), Vec::Zero(s.n),
                      s.noise, seed);
  d.meta.noise_levels = {{"output", s.noise}};
  return d;
}

// u[k] = gain d (40 e[k-1] - 78.8 e[k-2] + 38.808 e[k-3]) + 1.02 u[k-1] - 0.02 u[k-2]
// with e = r - y and r = pi + held Gaussian. Before k = 1 the pendulum rests
// upright: y = pi, u = 0.
Dataset closed_loop_pendulum(const PendulumSpec& s, double noise_std, std::uint64_t seed) {
  const int n = s.n;
  const double delta = Pendulum{}.delta;
  const ModelPtr model = lower_to_state_space(Pendulum{});
  const Vec theta = pendulum_theta();
  std::mt19937_64 ref_rng = engine(seed, reference_stream);
  const Vec r = held_gaussian(n, s.reference_std, s.hold, ref_rng).array() + std::numbers::pi;

  Dataset data(Mat::Zero(n, 1), Mat::Zero(n, 1));
  std::mt19937_64 rng = engine(seed, noise_stream);
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat states(2, n + 1);
  states.col(0) << std::numbers::pi, 0.0;
  Vec noise(n);
  Vec y(1);
  const double e0 = n > 0 ? r(0) - std::numbers::pi : 0.0;
  double e1 = e0, e2 = e0, e3 = e0;  // e[k-1], e[k-2], e[k-3]
  double u1 = 0.0, u2 = 0.0;         // u[k-1], u[k-2]
  for (int k = 1; k <= n; ++k) {
    const double u =
        s.controller_gain * delta * (40.0 * e1 - 78.8 * e2 + 38.808 * e3) + 1.02 * u1 - 0.02 * u2;
    data.mutable_inputs()(k - 1, 0) = u;
    const RegressorWindow z = model->window(data, k);
    model->transition(states.col(k - 1), z, theta, states.col(k));
    model->output(states.col(k), z, theta, y);
    noise(k - 1) = noise_std > 0.0 ? noise_std * normal(rng) : 0.0;
    const double measured = y(0) + noise(k - 1);
    data.mutable_outputs()(k - 1, 0) = measured;
    e3 = e2;
    e2 = e1;
    e1 = r(k - 1) - measured;
    u2 = u1;
    u1 = u;
  }
  data.meta.true_states = std::move(states);
  data.meta.noise = std::move(noise);
  data.meta.true_theta = theta;
  data.meta.seed = seed;
  return data;
}

Dataset make_pendulum(const PendulumSpec& s, std::uint64_t seed) {
  check_length(s.n);
  const char sc = s.scenario;
  if (sc != 'a' && sc != 'b' && sc != 'c')
    throw std::invalid_argument("pendulum: scenario must be a, b or c");
  const double noise = s.noise.value_or(sc == 'b' ? 0.0 : 0.03);
  Dataset d;
  if (sc == 'b') {
    d = closed_loop_pendulum(s, noise, seed);
    d.meta.noise_levels = {{"output", noise}, {"reference", s.reference_std}};
  } else {
    const double input_std = s.input_std.value_or(sc == 'a' ? 10.0 : 50.0);
    std::mt19937_64 rng = engine(seed, input_stream);
    const Vec u = held_gaussian(s.n, input_std, s.hold, rng);
    const ModelPtr model = lower_to_state_space(Pendulum{});
    d = rollout(*model, pendulum_theta(), Vec::Zero(2), u, noise, seed);
    d.meta.noise_levels = {{"output", noise}, {"input", input_std}};
  }
  return d;
}

Dataset make_linear2nd(const Linear2ndSpec& s, std::uint64_t seed) {
  check_length(s.n);
  std::mt19937_64 rng = engine(seed, input_stream);
  const Vec u = held_gaussian(s.n, s.input_std, s.hold, rng);
  const ModelPtr model = lower_to_state_space(Linear2ndOrderOE{});
  Dataset d = rollout(*model, linear2nd_theta(s.setting), Vec::Zero(2), u, s.noise, seed);
  d.meta.noise_levels = {{"output", s.noise}, {"input", s.input_std}};
  return d;
}

PolynomialModel farina_structure() {
  PolynomialModel m;
  m.kind = PolynomialModel::Kind::noe;
  m.terms = {{Factor{Signal::u, 1, 1}, Factor{Signal::u, 2, 1}},
             {Factor{Signal::u, 1, 1}, Factor{Signal::y, 1, 1}}};
  return m;
}

// The AR(1) input starts from its stationary distribution.
Dataset make_farina(const FarinaSpec& s, std::uint64_t seed) {
  check_length(s.n);
  if (!(std::abs(s.ar) < 1.0)) throw std::invalid_argument("farina: |ar| must be < 1");
  std::mt19937_64 rng = engine(seed, input_stream);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec u(s.n);
  double prev = s.eta_scale / std::sqrt(1.0 - s.ar * s.ar) * normal(rng);
  for (int k = 0; k < s.n; ++k) {
    prev = s.ar * prev + s.eta_scale * normal(rng);
    u(k) = prev;
  }
  const ModelPtr model = lower_to_state_space(farina_structure());
  Vec theta(2);
  theta << s.theta1, s.theta2;
  Dataset d = rollout(*model, theta, Vec::Zero(1), u, s.noise, seed);
  d.meta.noise_levels = {{"output", s.noise}, {"eta", s.eta_scale}};
  return d;
}

}  // namespace

Vec linear2nd_theta(char setting) {
  Vec t(3);
  switch (setting) {
    case 'a': t << 0.5, -0.2, 2.0; break;
    case 'b': t << 1.5, -0.7, 0.5; break;
    case 'c': t << 1.8, -0.95, 0.1; break;
    default: throw std::invalid_argument("linear2nd: setting must be a, b or c");
  }
  return t;
}

Vec pendulum_theta() {
  Vec t(2);
  t << 9.8 / 0.3, 2.0;
  return t;
}

Dataset generate(const GeneratorSpec& spec, std::uint64_t seed) {
  Dataset d = std::visit(
      [seed](const auto& s) -> Dataset {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, LogisticSpec>) return make_logistic(s, seed);
        else if constexpr (std::is_same_v<T, PendulumSpec>) return make_pendulum(s, seed);
        else if constexpr (std::is_same_v<T, Linear2ndSpec>) return make_linear2nd(s, seed);
        else return make_farina(s, seed);
      },
      spec);
  d.meta.generator = generator_id(spec);
  return d;
}

ModelFamily generator_model(const GeneratorSpec& spec) {
  return std::visit(
      [](const auto& s) -> ModelFamily {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, LogisticSpec>) return LogisticMap{};
        else if constexpr (std::is_same_v<T, PendulumSpec>) return Pendulum{};
        else if constexpr (std::is_same_v<T, Linear2ndSpec>) return Linear2ndOrderOE{};
        else return farina_structure();
      },
      spec);
}

Vec generator_theta(const GeneratorSpec& spec) {
  return std::visit(
      [](const auto& s) -> Vec {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, LogisticSpec>) {
          return Vec::Constant(1, s.theta);
        } else if constexpr (std::is_same_v<T, PendulumSpec>) {
          return pendulum_theta();
        } else if constexpr (std::is_same_v<T, Linear2ndSpec>) {
          return linear2nd_theta(s.setting);
        } else {
          Vec t(2);
          t << s.theta1, s.theta2;
          return t;
        }
      },
      spec);
}

std::string generator_id(const GeneratorSpec& spec) {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, LogisticSpec>) return "logistic";
        else if constexpr (std::is_same_v<T, PendulumSpec>) return std::string("pendulum-") + s.scenario;
        else if constexpr (std::is_same_v<T, Linear2ndSpec>) return std::string("linear2nd-") + s.setting;
        else return "farina";
      },
      spec);
}

GeneratorSpec generator_from_id(const std::string& id) {
  if (id == "logistic") return LogisticSpec{};
  if (id == "farina") return FarinaSpec{};
  auto suffix = [&](const std::string& prefix) -> char {
    if (id.size() == prefix.size() + 1 && id.compare(0, prefix.size(), prefix) == 0) {
      const char c = id.back();
      if (c == 'a' || c == 'b' || c == 'c') return c;
    }
    return 0;
  };
  if (const char c = suffix("pendulum-")) {
    PendulumSpec s;
    s.scenario = c;
    return s;
  }
  if (const char c = suffix("linear2nd-")) {
    Linear2ndSpec s;
    s.setting = c;
    return s;
  }
  throw std::invalid_argument("unknown generator id '" + id + "'");
}

Dataset gen_logistic(double theta, double x0, int n, std::uint64_t seed) {
  return generate(LogisticSpec{theta, x0, n, 0.0}, seed);
}

Dataset gen_pendulum(char scenario, std::uint64_t seed) {
  PendulumSpec s;
  s.scenario = scenario;
  return generate(s, seed);
}

Dataset gen_linear2nd(char setting, std::uint64_t seed) {
  Linear2ndSpec s;
  s.setting = setting;
  return generate(s, seed);
}

Dataset gen_farina(std::uint64_t seed) { return generate(FarinaSpec{}, seed); }

}  // namespace msid
