#pragma once

#include "msid/dataset.hpp"
#include "msid/types.hpp"

#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace msid {

struct LagOrders {
  int n_y = 0;
  int n_u = 0;
  int n_v = 0;
};

// General prediction model
//   x[k]    = h(x[k-1], z[k]; theta)
//   yhat[k] = g(x[k],   z[k]; theta)
// with analytic Jacobians A = dh/dx, B = dh/dtheta, C = dg/dx, F = dg/dtheta.
//
// Implementations are immutable and all member functions are pure, so a model
// may be shared freely between threads.
class StateSpaceModel {
 public:
  virtual ~StateSpaceModel() = default;

  virtual std::string name() const = 0;
  virtual int state_dim() const = 0;
  virtual int output_dim() const { return 1; }
  virtual int param_dim() const = 0;
  virtual LagOrders lags() const = 0;

  virtual void transition(const ConstVecRef& x, const RegressorWindow& z,
                          const ConstVecRef& theta, VecRef x_next) const = 0;
  virtual void output(const ConstVecRef& x, const RegressorWindow& z,
                      const ConstVecRef& theta, VecRef yhat) const = 0;
  virtual void transition_jacobians(const ConstVecRef& x, const RegressorWindow& z,
                                    const ConstVecRef& theta, MatRef A, MatRef B) const = 0;
  virtual void output_jacobians(const ConstVecRef& x, const RegressorWindow& z,
                                const ConstVecRef& theta, MatRef C, MatRef F) const = 0;

  // Heuristic state at boundary m (state x[m]) built from measured samples.
  virtual Vec seed_state(const Dataset& data, int m) const = 0;

  // Number of leading samples whose regressors need padding.
  int transient_length() const {
    const LagOrders l = lags();
    return std::max(l.n_y, l.n_u);
  }

  RegressorWindow window(const Dataset& data, int k) const {
    const LagOrders l = lags();
    return RegressorWindow(data, k, l.n_y, l.n_u);
  }
};

using ModelPtr = std::shared_ptr<const StateSpaceModel>;

struct Jacobians {
  Mat A, B, C, F;
};

// Shape-checked value-returning wrappers around the virtual interface.
Vec transition(const StateSpaceModel& model, const Vec& x, const RegressorWindow& z,
               const Vec& theta);
Vec output(const StateSpaceModel& model, const Vec& x, const RegressorWindow& z,
           const Vec& theta);
// All four Jacobians evaluated at the same (x, z, theta).
Jacobians jacobians(const StateSpaceModel& model, const Vec& x, const RegressorWindow& z,
                    const Vec& theta);

// ---------------------------------------------------------------------------
// Built-in model families.

// y[k] = theta * y[k-1] * (1 - y[k-1]); state is the current output.
struct LogisticMap {};

// Euler-discretized pendulum, theta = (g/l, k_a), state (angle, angular velocity).
struct Pendulum {
  double mass = 3.0;
  double delta = 0.01;
};

// ybar[k] = theta1 ybar[k-1] + theta2 ybar[k-2] + theta3 u[k-1], yhat = ybar.
struct Linear2ndOrderOE {};

enum class Signal { y, u, v };

struct Factor {
  Signal signal = Signal::u;
  int lag = 1;
  int power = 1;
};

// One monomial; an empty factor list is a constant term.
using Term = std::vector<Factor>;

// yhat[k] = sum_i theta_i * term_i. The kind decides where `y` factors come
// from (measured for NARX/NARMAX, simulated for NOE) and whether `v` factors
// (noise estimates) are allowed.
struct PolynomialModel {
  enum class Kind { narx, noe, narmax };
  Kind kind = Kind::narx;
  std::vector<Term> terms;
};

// One hidden tanh layer, affine output, regressors ybar[k-1..k-n_y] and
// u[k-1..k-n_u].
struct NeuralNetOE {
  int hidden = 10;
  int n_y = 1;
  int n_u = 1;
};

using ModelFamily =
    std::variant<LogisticMap, Pendulum, Linear2ndOrderOE, PolynomialModel, NeuralNetOE>;

ModelPtr lower_to_state_space(const ModelFamily& family);

// Linear ARX with terms y[k-1..k-n_y], u[k-1..k-n_u].
PolynomialModel linear_arx(int n_y, int n_u);

// Weights ~ N(0, fan_in^-1/2) per layer, zero biases.
Vec init_neural_weights(const NeuralNetOE& net, std::uint64_t seed);

}  // namespace msid
