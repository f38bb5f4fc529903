#include "models_internal.hpp"

#include <cmath>
#include <random>

namespace msid {

namespace detail {

namespace {

// theta = [W1 (hidden x inputs, row-major) | b1 | w2 | b2]
class NeuralOeModel final : public StateSpaceModel {
 public:
  explicit NeuralOeModel(NeuralNetOE spec) : s_(spec), inputs_(spec.n_y + spec.n_u) {}

  std::string name() const override { return "neural-oe"; }
  int state_dim() const override { return s_.n_y; }
  int param_dim() const override { return s_.hidden * inputs_ + 2 * s_.hidden + 1; }
  LagOrders lags() const override { return {s_.n_y, s_.n_u, 0}; }

  void transition(const ConstVecRef& x, const RegressorWindow& z, const ConstVecRef& theta,
                  VecRef x_next) const override {
    double act[kMaxHidden];
    const double value = forward(x, z, theta, act);
    for (int r = s_.n_y - 1; r >= 1; --r) x_next(r) = x(r - 1);
    x_next(0) = value;
  }

  void output(const ConstVecRef& x, const RegressorWindow&, const ConstVecRef&,
              VecRef yhat) const override {
    yhat(0) = x(0);
  }

  void transition_jacobians(const ConstVecRef& x, const RegressorWindow& z,
                            const ConstVecRef& theta, MatRef A, MatRef B) const override {
    double act[kMaxHidden];
    forward(x, z, theta, act);
    A.setZero();
    B.setZero();
    const int h = s_.hidden;
    const int b1 = h * inputs_, w2 = b1 + h, b2 = w2 + h;
    for (int i = 0; i < h; ++i) {
      const double slope = theta(w2 + i) * (1.0 - act[i] * act[i]);
      for (int j = 0; j < s_.n_y; ++j) A(0, j) += slope * theta(i * inputs_ + j);
      for (int j = 0; j < inputs_; ++j) B(0, i * inputs_ + j) = slope * input_value(x, z, j);
      B(0, b1 + i) = slope;
      B(0, w2 + i) = act[i];
    }
    B(0, b2) = 1.0;
    for (int r = 1; r < s_.n_y; ++r) A(r, r - 1) = 1.0;
  }

  void output_jacobians(const ConstVecRef&, const RegressorWindow&, const ConstVecRef&,
                        MatRef C, MatRef F) const override {
    C.setZero();
    C(0, 0) = 1.0;
    F.setZero();
  }

  Vec seed_state(const Dataset& data, int m) const override {
    return output_history_seed(data, m, s_.n_y);
  }

  static constexpr int kMaxHidden = 256;

 private:
  double input_value(const ConstVecRef& x, const RegressorWindow& z, int j) const {
    return j < s_.n_y ? x(j) : z.input(j - s_.n_y + 1);
  }

  double forward(const ConstVecRef& x, const RegressorWindow& z, const ConstVecRef& theta,
                 double* act) const {
    const int h = s_.hidden;
    const int b1 = h * inputs_, w2 = b1 + h, b2 = w2 + h;
    double out = theta(b2);
    for (int i = 0; i < h; ++i) {
      double a = theta(b1 + i);
      for (int j = 0; j < inputs_; ++j) a += theta(i * inputs_ + j) * input_value(x, z, j);
      act[i] = std::tanh(a);
      out += theta(w2 + i) * act[i];
    }
    return out;
  }

  NeuralNetOE s_;
  int inputs_;
};

}  // namespace

ModelPtr make_neural_oe(const NeuralNetOE& spec) {
  if (spec.n_y < 1 || spec.n_u < 0)
    throw StructureError("neural-oe: need n_y >= 1 and n_u >= 0");
  if (spec.hidden < 1 || spec.hidden > NeuralOeModel::kMaxHidden)
    throw StructureError("neural-oe: hidden width out of range");
  return std::make_shared<NeuralOeModel>(spec);
}

}  // namespace detail

Vec init_neural_weights(const NeuralNetOE& net, std::uint64_t seed) {
  const int inputs = net.n_y + net.n_u;
  const int h = net.hidden;
  Vec theta = Vec::Zero(h * inputs + 2 * h + 1);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> first(0.0, 1.0 / std::sqrt(static_cast<double>(inputs)));
  std::normal_distribution<double> second(0.0, 1.0 / std::sqrt(static_cast<double>(h)));
  for (int i = 0; i < h * inputs; ++i) theta(i) = first(rng);
  for (int i = 0; i < h; ++i) theta(h * inputs + h + i) = second(rng);
  return theta;
}

}  // namespace msid
