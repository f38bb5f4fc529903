#include "msid/simulate.hpp"

#include <cmath>
#include <string>

namespace msid {

namespace {

void check_inputs(const StateSpaceModel& model, const Vec& x0, const Dataset& data,
                  SimRange range, const Vec& theta) {
  require_shape(x0.size() == model.state_dim(), model.name() + ": seed has wrong dimension");
  require_shape(theta.size() == model.param_dim(), model.name() + ": theta has wrong dimension");
  require_shape(range.start >= 0 && range.end >= range.start && range.end <= data.size(),
                "simulation range [" + std::to_string(range.start) + ", " +
                    std::to_string(range.end) + "] outside dataset of length " +
                    std::to_string(data.size()));
  if (!x0.allFinite()) throw DivergenceError(range.start, "non-finite seed state");
}

[[noreturn]] void diverged(int k) {
  throw DivergenceError(k, "trajectory diverged at step " + std::to_string(k));
}

}  // namespace

Trajectory simulate(const StateSpaceModel& model, const Vec& x0, const Dataset& data,
                    SimRange range, const Vec& theta) {
  check_inputs(model, x0, data, range, theta);
  const int nx = model.state_dim();
  const int len = range.length();
  Trajectory t{range, Mat(nx, len + 1), Mat(model.output_dim(), len)};
  t.states.col(0) = x0;
  for (int j = 0; j < len; ++j) {
    const int k = range.start + 1 + j;
    const RegressorWindow z = model.window(data, k);
    model.transition(t.states.col(j), z, theta, t.states.col(j + 1));
    model.output(t.states.col(j + 1), z, theta, t.predictions.col(j));
    if (!t.states.col(j + 1).allFinite() || !t.predictions.col(j).allFinite()) diverged(k);
  }
  return t;
}

SensitivityTrace::SensitivityTrace(SimRange range, int nx, int ny, int ntheta)
    : states(nx, range.length() + 1),
      predictions(ny, range.length()),
      range_(range),
      ntheta_(ntheta),
      cols_(ntheta + nx),
      state_sens_(nx, (range.length() + 1) * (ntheta + nx)),
      output_sens_(ny, range.length() * (ntheta + nx)) {}

SensitivityTrace simulate_with_sensitivities(const StateSpaceModel& model, const Vec& x0,
                                             const Dataset& data, SimRange range,
                                             const Vec& theta) {
  check_inputs(model, x0, data, range, theta);
  const int nx = model.state_dim(), ny = model.output_dim(), np = model.param_dim();
  SensitivityTrace tr(range, nx, ny, np);
  Mat A(nx, nx), B(nx, np), C(ny, nx), F(ny, np);

  tr.states.col(0) = x0;
  auto d0 = tr.D(range.start);
  d0.leftCols(np).setZero();
  d0.rightCols(nx).setIdentity();

  for (int k = range.start + 1; k <= range.end; ++k) {
    const int j = k - range.start;
    const RegressorWindow z = model.window(data, k);
    // A_k, B_k are taken at the previous state, C_k, F_k at the new one.
    model.transition_jacobians(tr.states.col(j - 1), z, theta, A, B);
    model.transition(tr.states.col(j - 1), z, theta, tr.states.col(j));
    model.output(tr.states.col(j), z, theta, tr.predictions.col(j - 1));
    if (!tr.states.col(j).allFinite() || !tr.predictions.col(j - 1).allFinite()) diverged(k);
    model.output_jacobians(tr.states.col(j), z, theta, C, F);

    auto dk = tr.D(k);
    dk.noalias() = A * tr.D(k - 1);
    dk.leftCols(np) += B;
    auto jk = tr.J(k);
    jk.noalias() = C * dk;
    jk.leftCols(np) += F;
    if (!dk.allFinite()) diverged(k);
  }
  return tr;
}

}  // namespace msid
