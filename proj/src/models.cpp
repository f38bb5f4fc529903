#include "msid/model.hpp"

#include "models_internal.hpp"

#include <cmath>

namespace msid {

namespace {

class LogisticModel final : public StateSpaceModel {
 public:
  std::string name() const override { return "logistic"; }
  int state_dim() const override { return 1; }
  int param_dim() const override { return 1; }
  LagOrders lags() const override { return {}; }

  void transition(const ConstVecRef& x, const RegressorWindow&, const ConstVecRef& theta,
                  VecRef x_next) const override {
    x_next(0) = theta(0) * x(0) * (1.0 - x(0));
  }
  void output(const ConstVecRef& x, const RegressorWindow&, const ConstVecRef&,
              VecRef yhat) const override {
    yhat(0) = x(0);
  }
  void transition_jacobians(const ConstVecRef& x, const RegressorWindow&,
                            const ConstVecRef& theta, MatRef A, MatRef B) const override {
    A(0, 0) = theta(0) * (1.0 - 2.0 * x(0));
    B(0, 0) = x(0) * (1.0 - x(0));
  }
  void output_jacobians(const ConstVecRef&, const RegressorWindow&, const ConstVecRef&,
                        MatRef C, MatRef F) const override {
    C(0, 0) = 1.0;
    F(0, 0) = 0.0;
  }
  Vec seed_state(const Dataset& data, int m) const override {
    return detail::output_history_seed(data, m, 1);
  }
};

class PendulumModel final : public StateSpaceModel {
 public:
  explicit PendulumModel(Pendulum p) : p_(p) {}

  std::string name() const override { return "pendulum"; }
  int state_dim() const override { return 2; }
  int param_dim() const override { return 2; }
  LagOrders lags() const override { return {0, 1, 0}; }

  void transition(const ConstVecRef& x, const RegressorWindow& z, const ConstVecRef& theta,
                  VecRef x_next) const override {
    const double d = p_.delta;
    const double u = z.input(1);
    const double angle = x(0) + d * x(1);
    x_next(1) = -d * theta(0) * std::sin(x(0)) + (1.0 - d * theta(1) / p_.mass) * x(1) +
                d * u / p_.mass;
    x_next(0) = angle;
  }
  void output(const ConstVecRef& x, const RegressorWindow&, const ConstVecRef&,
              VecRef yhat) const override {
    yhat(0) = x(0);
  }
  void transition_jacobians(const ConstVecRef& x, const RegressorWindow&,
                            const ConstVecRef& theta, MatRef A, MatRef B) const override {
    const double d = p_.delta;
    A(0, 0) = 1.0;
    A(0, 1) = d;
    A(1, 0) = -d * theta(0) * std::cos(x(0));
    A(1, 1) = 1.0 - d * theta(1) / p_.mass;
    B(0, 0) = 0.0;
    B(0, 1) = 0.0;
    B(1, 0) = -d * std::sin(x(0));
    B(1, 1) = -d * x(1) / p_.mass;
  }
  void output_jacobians(const ConstVecRef&, const RegressorWindow&, const ConstVecRef&,
                        MatRef C, MatRef F) const override {
    C(0, 0) = 1.0;
    C(0, 1) = 0.0;
    F.setZero();
  }
  // Angular velocity from a central difference of the measured angle.
  Vec seed_state(const Dataset& data, int m) const override {
    Vec x(2);
    x(0) = data.y(m);
    x(1) = (data.y(m + 1) - data.y(m - 1)) / (2.0 * p_.delta);
    return x;
  }

 private:
  Pendulum p_;
};

class Linear2ndModel final : public StateSpaceModel {
 public:
  std::string name() const override { return "linear2nd"; }
  int state_dim() const override { return 2; }
  int param_dim() const override { return 3; }
  LagOrders lags() const override { return {2, 1, 0}; }

  void transition(const ConstVecRef& x, const RegressorWindow& z, const ConstVecRef& theta,
                  VecRef x_next) const override {
    const double ybar = theta(0) * x(0) + theta(1) * x(1) + theta(2) * z.input(1);
    x_next(1) = x(0);
    x_next(0) = ybar;
  }
  void output(const ConstVecRef& x, const RegressorWindow&, const ConstVecRef&,
              VecRef yhat) const override {
    yhat(0) = x(0);
  }
  void transition_jacobians(const ConstVecRef& x, const RegressorWindow& z,
                            const ConstVecRef& theta, MatRef A, MatRef B) const override {
    A << theta(0), theta(1), 1.0, 0.0;
    B << x(0), x(1), z.input(1), 0.0, 0.0, 0.0;
  }
  void output_jacobians(const ConstVecRef&, const RegressorWindow&, const ConstVecRef&,
                        MatRef C, MatRef F) const override {
    C << 1.0, 0.0;
    F.setZero();
  }
  Vec seed_state(const Dataset& data, int m) const override {
    return detail::output_history_seed(data, m, 2);
  }
};

void check_call(const StateSpaceModel& model, const Vec& x, const Vec& theta) {
  require_shape(x.size() == model.state_dim(),
                model.name() + ": state has " + std::to_string(x.size()) +
                    " entries, expected " + std::to_string(model.state_dim()));
  require_shape(theta.size() == model.param_dim(),
                model.name() + ": theta has " + std::to_string(theta.size()) +
                    " entries, expected " + std::to_string(model.param_dim()));
}

}  // namespace

Vec transition(const StateSpaceModel& model, const Vec& x, const RegressorWindow& z,
               const Vec& theta) {
  check_call(model, x, theta);
  Vec next(model.state_dim());
  model.transition(x, z, theta, next);
  return next;
}

Vec output(const StateSpaceModel& model, const Vec& x, const RegressorWindow& z,
           const Vec& theta) {
  check_call(model, x, theta);
  Vec y(model.output_dim());
  model.output(x, z, theta, y);
  return y;
}

Jacobians jacobians(const StateSpaceModel& model, const Vec& x, const RegressorWindow& z,
                    const Vec& theta) {
  check_call(model, x, theta);
  const int nx = model.state_dim(), np = model.param_dim(), ny = model.output_dim();
  Jacobians j{Mat::Zero(nx, nx), Mat::Zero(nx, np), Mat::Zero(ny, nx), Mat::Zero(ny, np)};
  model.transition_jacobians(x, z, theta, j.A, j.B);
  model.output_jacobians(x, z, theta, j.C, j.F);
  return j;
}

ModelPtr lower_to_state_space(const ModelFamily& family) {
  struct Lower {
    ModelPtr operator()(const LogisticMap&) const { return std::make_shared<LogisticModel>(); }
    ModelPtr operator()(const Pendulum& p) const {
      if (!(p.delta > 0.0) || !(p.mass > 0.0))
        throw StructureError("pendulum: delta and mass must be positive");
      return std::make_shared<PendulumModel>(p);
    }
    ModelPtr operator()(const Linear2ndOrderOE&) const {
      return std::make_shared<Linear2ndModel>();
    }
    ModelPtr operator()(const PolynomialModel& p) const { return detail::make_polynomial(p); }
    ModelPtr operator()(const NeuralNetOE& n) const { return detail::make_neural_oe(n); }
  };
  return std::visit(Lower{}, family);
}

PolynomialModel linear_arx(int n_y, int n_u) {
  if (n_y < 0 || n_u < 0) throw StructureError("linear_arx: negative lag order");
  PolynomialModel m;
  m.kind = PolynomialModel::Kind::narx;
  for (int j = 1; j <= n_y; ++j) m.terms.push_back({Factor{Signal::y, j, 1}});
  for (int j = 1; j <= n_u; ++j) m.terms.push_back({Factor{Signal::u, j, 1}});
  return m;
}

}  // namespace msid
