#pragma once

#include "msid/model.hpp"

namespace msid::detail {

ModelPtr make_polynomial(const PolynomialModel& spec);
ModelPtr make_neural_oe(const NeuralNetOE& spec);

// Output-history seed (y[m], y[m-1], ..., y[m-n+1]) with hold-first padding.
inline Vec output_history_seed(const Dataset& data, int m, int n) {
  Vec x(n);
  for (int j = 0; j < n; ++j) x(j) = data.y(m - j);
  return x;
}

}  // namespace msid::detail
