#pragma once

#include "msid/dataset.hpp"
#include "msid/model.hpp"

namespace msid {

// Half-open simulation range: x[start] is the seed, predictions cover
// k = start+1 .. end.
struct SimRange {
  int start = 0;
  int end = 0;
  int length() const { return end - start; }
};

struct Trajectory {
  SimRange range;
  Mat states;       // N_x x (len+1), column j is x[start+j]
  Mat predictions;  // N_y x len, column j is yhat[start+1+j]
};

// Forward sensitivities of a trajectory w.r.t. (theta, x0):
//   D[k] = dx[k]/d(theta, x0),  J[k] = dyhat[k]/d(theta, x0).
// D[start] = [0 | I].
class SensitivityTrace {
 public:
  SensitivityTrace(SimRange range, int nx, int ny, int ntheta);

  SimRange range() const { return range_; }
  int param_cols() const { return cols_; }
  int theta_dim() const { return ntheta_; }

  // k in [start, end]
  auto D(int k) { return state_sens_.middleCols((k - range_.start) * cols_, cols_); }
  auto D(int k) const { return state_sens_.middleCols((k - range_.start) * cols_, cols_); }
  // k in [start+1, end]
  auto J(int k) { return output_sens_.middleCols((k - range_.start - 1) * cols_, cols_); }
  auto J(int k) const { return output_sens_.middleCols((k - range_.start - 1) * cols_, cols_); }
  auto state(int k) const { return states.col(k - range_.start); }
  auto prediction(int k) const { return predictions.col(k - range_.start - 1); }

  Mat states;
  Mat predictions;

 private:
  SimRange range_;
  int ntheta_;
  int cols_;
  Mat state_sens_;
  Mat output_sens_;
};

// Throws DivergenceError carrying the step index when a state goes non-finite.
Trajectory simulate(const StateSpaceModel& model, const Vec& x0, const Dataset& data,
                    SimRange range, const Vec& theta);

SensitivityTrace simulate_with_sensitivities(const StateSpaceModel& model, const Vec& x0,
                                             const Dataset& data, SimRange range,
                                             const Vec& theta);

}  // namespace msid
