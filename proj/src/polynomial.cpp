#include "models_internal.hpp"

#include <algorithm>
#include <cmath>

namespace msid::detail {

namespace {

// Base value of one factor plus, when it is read from the state, the state
// index it depends on and d(base)/d(state[index]).
struct FactorValue {
  double base = 0.0;
  int state_index = -1;
  double dbase = 0.0;
};

class PolynomialSsm final : public StateSpaceModel {
 public:
  explicit PolynomialSsm(PolynomialModel spec) : spec_(std::move(spec)) {
    using Kind = PolynomialModel::Kind;
    for (const Term& term : spec_.terms) {
      for (const Factor& f : term) {
        if (f.power < 1) throw StructureError("polynomial: factor power must be >= 1");
        switch (f.signal) {
          case Signal::y:
            if (f.lag < 1) throw StructureError("polynomial: output lag must be >= 1");
            lags_.n_y = std::max(lags_.n_y, f.lag);
            break;
          case Signal::u:
            if (f.lag < 0) throw StructureError("polynomial: input lag must be >= 0");
            lags_.n_u = std::max(lags_.n_u, f.lag);
            break;
          case Signal::v:
            if (spec_.kind != Kind::narmax)
              throw StructureError("polynomial: noise terms (n_v > 0) need the NARMAX kind");
            if (f.lag < 1) throw StructureError("polynomial: noise lag must be >= 1");
            lags_.n_v = std::max(lags_.n_v, f.lag);
            break;
        }
      }
    }
    switch (spec_.kind) {
      case Kind::narx: state_dim_ = 0; break;
      case Kind::noe: state_dim_ = lags_.n_y; break;
      case Kind::narmax: state_dim_ = lags_.n_v; break;
    }
  }

  std::string name() const override {
    switch (spec_.kind) {
      case PolynomialModel::Kind::narx: return "polynomial-narx";
      case PolynomialModel::Kind::noe: return "polynomial-noe";
      case PolynomialModel::Kind::narmax: return "polynomial-narmax";
    }
    return "polynomial";
  }
  int state_dim() const override { return state_dim_; }
  int param_dim() const override { return static_cast<int>(spec_.terms.size()); }
  LagOrders lags() const override { return lags_; }

  void transition(const ConstVecRef& x, const RegressorWindow& z, const ConstVecRef& theta,
                  VecRef x_next) const override {
    if (state_dim_ == 0) return;
    const double value = evaluate(x, z, theta, nullptr, nullptr);
    shift_into(x, z, value, x_next);
  }

  void output(const ConstVecRef& x, const RegressorWindow& z, const ConstVecRef& theta,
              VecRef yhat) const override {
    if (state_dim_ == 0) {
      // Static map of the regressor.
      yhat(0) = evaluate(x, z, theta, nullptr, nullptr);
    } else {
      yhat(0) = x(0);
    }
  }

  void transition_jacobians(const ConstVecRef& x, const RegressorWindow& z,
                            const ConstVecRef& theta, MatRef A, MatRef B) const override {
    if (state_dim_ == 0) return;
    A.setZero();
    B.setZero();
    Vec dstate = Vec::Zero(state_dim_);
    Vec dtheta(param_dim());
    evaluate(x, z, theta, &dstate, &dtheta);
    A.row(0) = dstate.transpose();
    B.row(0) = dtheta.transpose();
    if (spec_.kind == PolynomialModel::Kind::noe) {
      for (int r = 1; r < state_dim_; ++r) A(r, r - 1) = 1.0;
    } else {
      // Row 1 holds vtilde[k-1] = y[k-1] - x(0); deeper rows shift.
      if (state_dim_ > 1) A(1, 0) = -1.0;
      for (int r = 2; r < state_dim_; ++r) A(r, r - 1) = 1.0;
    }
  }

  void output_jacobians(const ConstVecRef& x, const RegressorWindow& z,
                        const ConstVecRef& theta, MatRef C, MatRef F) const override {
    if (state_dim_ == 0) {
      Vec dtheta(param_dim());
      evaluate(x, z, theta, nullptr, &dtheta);
      F.row(0) = dtheta.transpose();
      return;
    }
    C.setZero();
    C(0, 0) = 1.0;
    F.setZero();
  }

  Vec seed_state(const Dataset& data, int m) const override {
    if (spec_.kind == PolynomialModel::Kind::narmax) {
      // yhat[m] = y[m] makes vtilde[m] = 0; older noise estimates start at zero.
      Vec x = Vec::Zero(state_dim_);
      if (state_dim_ > 0) x(0) = data.y(m);
      return x;
    }
    return output_history_seed(data, m, state_dim_);
  }

 private:
  FactorValue factor_value(const Factor& f, const ConstVecRef& x,
                           const RegressorWindow& z) const {
    using Kind = PolynomialModel::Kind;
    switch (f.signal) {
      case Signal::u:
        return {z.input(f.lag), -1, 0.0};
      case Signal::y:
        if (spec_.kind == Kind::noe) return {x(f.lag - 1), f.lag - 1, 1.0};
        return {z.past_output(f.lag), -1, 0.0};
      case Signal::v:
        // vtilde[k-1] = y[k-1] - yhat[k-1]; older ones live in the state.
        if (f.lag == 1) return {z.past_output(1) - x(0), 0, -1.0};
        return {x(f.lag - 1), f.lag - 1, 1.0};
    }
    return {};
  }

  // Sum_i theta_i * term_i; optionally the derivatives w.r.t. the previous
  // state and theta.
  double evaluate(const ConstVecRef& x, const RegressorWindow& z, const ConstVecRef& theta,
                  Vec* dstate, Vec* dtheta) const {
    double total = 0.0;
    FactorValue fv[16];
    for (std::size_t i = 0; i < spec_.terms.size(); ++i) {
      const Term& term = spec_.terms[i];
      if (term.size() > 16) throw StructureError("polynomial: at most 16 factors per term");
      double value = 1.0;
      for (std::size_t f = 0; f < term.size(); ++f) {
        fv[f] = factor_value(term[f], x, z);
        value *= std::pow(fv[f].base, term[f].power);
      }
      total += theta(i) * value;
      if (dtheta) (*dtheta)(i) = value;
      if (dstate) {
        for (std::size_t f = 0; f < term.size(); ++f) {
          if (fv[f].state_index < 0) continue;
          const int p = term[f].power;
          double d = fv[f].dbase * p * std::pow(fv[f].base, p - 1);
          for (std::size_t g = 0; g < term.size(); ++g)
            if (g != f) d *= std::pow(fv[g].base, term[g].power);
          (*dstate)(fv[f].state_index) += theta(i) * d;
        }
      }
    }
    return total;
  }

  void shift_into(const ConstVecRef& x, const RegressorWindow& z, double value,
                  VecRef x_next) const {
    if (spec_.kind == PolynomialModel::Kind::noe) {
      for (int r = state_dim_ - 1; r >= 1; --r) x_next(r) = x(r - 1);
    } else {
      for (int r = state_dim_ - 1; r >= 2; --r) x_next(r) = x(r - 1);
      if (state_dim_ > 1) x_next(1) = z.past_output(1) - x(0);
    }
    x_next(0) = value;
  }

  PolynomialModel spec_;
  LagOrders lags_;
  int state_dim_ = 0;
};

}  // namespace

ModelPtr make_polynomial(const PolynomialModel& spec) {
  return std::make_shared<PolynomialSsm>(spec);
}

}  // namespace msid::detail
