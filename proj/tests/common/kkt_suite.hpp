#pragma once

// Equality-constrained test problems with known solutions, in the form
// min f(x) s.t. c(x) = 0 with exact derivatives.

#include "msid/sqp.hpp"

#include <cmath>
#include <memory>
#include <string>
#include <vector>

namespace msid::testing {

struct KktCase {
  std::string name;
  std::shared_ptr<FunctionalNlp> problem;
  Vec start;
  Vec optimum;
};

inline Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

inline std::vector<KktCase> kkt_suite() {
  std::vector<KktCase> s;
  auto make = [](int n, int m) { return std::make_shared<FunctionalNlp>(n, m); };

  {  // min |x|^2 s.t. x1 + x2 = 1
    auto p = make(2, 1);
    p->f = [](const Vec& x) { return x.squaredNorm(); };
    p->grad = [](const Vec& x) -> Vec { return 2 * x; };
    p->c = [](const Vec& x) { return vec({x(0) + x(1) - 1}); };
    p->jac = [](const Vec&) -> Mat { return Mat::Ones(1, 2); };
    p->hess = [](const Vec&, const Vec&, const Vec& v) -> Vec { return 2 * v; };
    s.push_back({"min-norm on a line", p, vec({3, -1}), vec({0.5, 0.5})});
  }
  {  // unconstrained quadratic 0.5 x'Qx - b'x
    Mat q(4, 4);
    q << 4, 1, 0, 0, 1, 3, 1, 0, 0, 1, 2, 0.5, 0, 0, 0.5, 1;
    const Vec b = vec({1, 2, 3, 4});
    auto p = make(4, 0);
    p->f = [q, b](const Vec& x) { return 0.5 * x.dot(q * x) - b.dot(x); };
    p->grad = [q, b](const Vec& x) -> Vec { return q * x - b; };
    p->hess = [q](const Vec&, const Vec&, const Vec& v) -> Vec { return q * v; };
    s.push_back({"unconstrained quadratic", p, Vec::Zero(4), q.ldlt().solve(b)});
  }
  {  // Rosenbrock
    auto p = make(2, 0);
    p->f = [](const Vec& x) { return 100 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1 - x(0), 2); };
    p->grad = [](const Vec& x) {
      return vec({-400 * x(0) * (x(1) - x(0) * x(0)) - 2 * (1 - x(0)), 200 * (x(1) - x(0) * x(0))});
    };
    p->hess = [](const Vec& x, const Vec&, const Vec& v) -> Vec {
      Mat h(2, 2);
      h << 1200 * x(0) * x(0) - 400 * x(1) + 2, -400 * x(0), -400 * x(0), 200;
      return h * v;
    };
    s.push_back({"rosenbrock", p, vec({-1.2, 1}), vec({1, 1})});
  }
  {  // min x1 + x2 s.t. x1^2 + x2^2 = 2
    auto p = make(2, 1);
    p->f = [](const Vec& x) { return x(0) + x(1); };
    p->grad = [](const Vec&) { return vec({1, 1}); };
    p->c = [](const Vec& x) { return vec({x.squaredNorm() - 2}); };
    p->jac = [](const Vec& x) -> Mat { return 2 * x.transpose(); };
    p->hess = [](const Vec&, const Vec& l, const Vec& v) -> Vec { return 2 * l(0) * v; };
    s.push_back({"linear objective on a circle", p, vec({-0.5, -1.5}), vec({-1, -1})});
  }
  {  // min (x1-1)^2 + (x2-3)^2 s.t. x1 = 2 x2
    auto p = make(2, 1);
    p->f = [](const Vec& x) { return std::pow(x(0) - 1, 2) + std::pow(x(1) - 3, 2); };
    p->grad = [](const Vec& x) { return vec({2 * (x(0) - 1), 2 * (x(1) - 3)}); };
    p->c = [](const Vec& x) { return vec({x(0) - 2 * x(1)}); };
    p->jac = [](const Vec&) -> Mat {
      Mat j(1, 2);
      j << 1, -2;
      return j;
    };
    p->hess = [](const Vec&, const Vec&, const Vec& v) -> Vec { return 2 * v; };
    s.push_back({"projection onto a line", p, vec({0, 0}), vec({2, 1})});
  }
  {  // HS6
    auto p = make(2, 1);
    p->f = [](const Vec& x) { return std::pow(1 - x(0), 2); };
    p->grad = [](const Vec& x) { return vec({-2 * (1 - x(0)), 0}); };
    p->c = [](const Vec& x) { return vec({10 * (x(1) - x(0) * x(0))}); };
    p->jac = [](const Vec& x) -> Mat {
      Mat j(1, 2);
      j << -20 * x(0), 10;
      return j;
    };
    p->hess = [](const Vec&, const Vec& l, const Vec& v) { return vec({(2 - 20 * l(0)) * v(0), 0}); };
    s.push_back({"hs6", p, vec({-1.2, 1}), vec({1, 1})});
  }
  {  // HS7
    auto p = make(2, 1);
    p->f = [](const Vec& x) { return std::log(1 + x(0) * x(0)) - x(1); };
    p->grad = [](const Vec& x) { return vec({2 * x(0) / (1 + x(0) * x(0)), -1}); };
    p->c = [](const Vec& x) {
      return vec({std::pow(1 + x(0) * x(0), 2) + x(1) * x(1) - 4});
    };
    p->jac = [](const Vec& x) -> Mat {
      Mat j(1, 2);
      j << 4 * x(0) * (1 + x(0) * x(0)), 2 * x(1);
      return j;
    };
    p->hess = [](const Vec& x, const Vec& l, const Vec& v) {
      const double a = x(0) * x(0);
      const double fxx = 2 * (1 - a) / ((1 + a) * (1 + a));
      const double cxx = 4 + 12 * a;
      return vec({(fxx + l(0) * cxx) * v(0), 2 * l(0) * v(1)});
    };
    s.push_back({"hs7", p, vec({2, 2}), vec({0, std::sqrt(3.0)})});
  }
  {  // HS28
    auto p = make(3, 1);
    p->f = [](const Vec& x) { return std::pow(x(0) + x(1), 2) + std::pow(x(1) + x(2), 2); };
    p->grad = [](const Vec& x) {
      return vec({2 * (x(0) + x(1)), 2 * (x(0) + x(1)) + 2 * (x(1) + x(2)), 2 * (x(1) + x(2))});
    };
    p->c = [](const Vec& x) { return vec({x(0) + 2 * x(1) + 3 * x(2) - 1}); };
    p->jac = [](const Vec&) -> Mat {
      Mat j(1, 3);
      j << 1, 2, 3;
      return j;
    };
    p->hess = [](const Vec&, const Vec&, const Vec& v) -> Vec {
      Mat h(3, 3);
      h << 2, 2, 0, 2, 4, 2, 0, 2, 2;
      return h * v;
    };
    s.push_back({"hs28", p, vec({-4, 1, 1}), vec({0.5, -0.5, 0.5})});
  }
  {  // HS48
    auto p = make(5, 2);
    p->f = [](const Vec& x) {
      return std::pow(x(0) - 1, 2) + std::pow(x(1) - x(2), 2) + std::pow(x(3) - x(4), 2);
    };
    p->grad = [](const Vec& x) {
      return vec({2 * (x(0) - 1), 2 * (x(1) - x(2)), -2 * (x(1) - x(2)), 2 * (x(3) - x(4)),
                  -2 * (x(3) - x(4))});
    };
    p->c = [](const Vec& x) {
      return vec({x.sum() - 5, x(2) - 2 * (x(3) + x(4)) + 3});
    };
    p->jac = [](const Vec&) -> Mat {
      Mat j(2, 5);
      j << 1, 1, 1, 1, 1, 0, 0, 1, -2, -2;
      return j;
    };
    p->hess = [](const Vec&, const Vec&, const Vec& v) {
      return vec({2 * v(0), 2 * (v(1) - v(2)), -2 * (v(1) - v(2)), 2 * (v(3) - v(4)),
                  -2 * (v(3) - v(4))});
    };
    s.push_back({"hs48", p, vec({3, 5, -3, 2, -2}), Vec::Ones(5)});
  }
  {  // HS40
    auto p = make(4, 3);
    p->f = [](const Vec& x) { return -x(0) * x(1) * x(2) * x(3); };
    p->grad = [](const Vec& x) {
      return vec({-x(1) * x(2) * x(3), -x(0) * x(2) * x(3), -x(0) * x(1) * x(3),
                  -x(0) * x(1) * x(2)});
    };
    p->c = [](const Vec& x) {
      return vec({std::pow(x(0), 3) + x(1) * x(1) - 1, x(0) * x(0) * x(3) - x(2),
                  x(3) * x(3) - x(1)});
    };
    p->jac = [](const Vec& x) -> Mat {
      Mat j(3, 4);
      j << 3 * x(0) * x(0), 2 * x(1), 0, 0,  //
          2 * x(0) * x(3), 0, -1, x(0) * x(0),  //
          0, -1, 0, 2 * x(3);
      return j;
    };
    p->hess = [](const Vec& x, const Vec& l, const Vec& v) -> Vec {
      Mat h(4, 4);
      h << 0, -x(2) * x(3), -x(1) * x(3), -x(1) * x(2),  //
          -x(2) * x(3), 0, -x(0) * x(3), -x(0) * x(2),  //
          -x(1) * x(3), -x(0) * x(3), 0, -x(0) * x(1),  //
          -x(1) * x(2), -x(0) * x(2), -x(0) * x(1), 0;
      h(0, 0) += l(0) * 6 * x(0) + l(1) * 2 * x(3);
      h(1, 1) += l(0) * 2;
      h(0, 3) += l(1) * 2 * x(0);
      h(3, 0) += l(1) * 2 * x(0);
      h(3, 3) += l(2) * 2;
      return h * v;
    };
    s.push_back({"hs40", p, vec({0.8, 0.8, 0.8, 0.8}),
                 vec({std::pow(2.0, -1.0 / 3), std::pow(2.0, -0.5), std::pow(2.0, -11.0 / 12),
                      std::pow(2.0, -0.25)})});
  }
  {  // closest point on the unit sphere to a
    const Vec a = vec({1, 2, 2});
    auto p = make(3, 1);
    p->f = [a](const Vec& x) { return (x - a).squaredNorm(); };
    p->grad = [a](const Vec& x) -> Vec { return 2 * (x - a); };
    p->c = [](const Vec& x) { return vec({x.squaredNorm() - 1}); };
    p->jac = [](const Vec& x) -> Mat { return 2 * x.transpose(); };
    p->hess = [](const Vec&, const Vec& l, const Vec& v) -> Vec { return (2 + 2 * l(0)) * v; };
    s.push_back({"sphere projection", p, vec({1, 0, 0}), a / 3.0});
  }
  {  // equality-constrained least squares, solution from the dense KKT system
    Mat a(6, 5);
    a << 2, 1, 0, 0, 1, 0, 3, 1, 0, 0, 1, 0, 2, 1, 0, 0, 1, 0, 4, 1, 1, 0, 0, 1, 3, 0, 1, 1, 0, 2;
    const Vec b = vec({1, -1, 2, 0, 3, 1});
    Mat e(2, 5);
    e << 1, 1, 1, 1, 1, 1, -1, 0, 2, 0;
    const Vec d = vec({1, 0.5});
    Mat kkt = Mat::Zero(7, 7);
    kkt.topLeftCorner(5, 5) = 2 * a.transpose() * a;
    kkt.topRightCorner(5, 2) = e.transpose();
    kkt.bottomLeftCorner(2, 5) = e;
    Vec rhs(7);
    rhs << 2 * a.transpose() * b, d;
    const Vec sol = kkt.fullPivLu().solve(rhs).head(5);
    auto p = make(5, 2);
    p->f = [a, b](const Vec& x) { return (a * x - b).squaredNorm(); };
    p->grad = [a, b](const Vec& x) -> Vec { return 2 * a.transpose() * (a * x - b); };
    p->c = [e, d](const Vec& x) -> Vec { return e * x - d; };
    p->jac = [e](const Vec&) -> Mat { return e; };
    p->hess = [a](const Vec&, const Vec&, const Vec& v) -> Vec { return 2 * a.transpose() * (a * v); };
    s.push_back({"constrained least squares", p, Vec::Zero(5), sol});
  }
  return s;
}

// ||grad f + J' lambda||_inf with lambda from a dense least-squares solve,
// computed without the solver's own multipliers.
inline double independent_kkt_residual(FunctionalNlp& p, const Vec& x) {
  const Vec g = p.grad(x);
  if (p.num_constraints() == 0) return g.lpNorm<Eigen::Infinity>();
  const Mat j = p.jac(x);
  const Vec lambda = j.transpose().colPivHouseholderQr().solve(-g);
  return (g + j.transpose() * lambda).lpNorm<Eigen::Infinity>();
}

}  // namespace msid::testing
