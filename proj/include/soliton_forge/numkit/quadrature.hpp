#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace soliton_forge::numkit {

/// Gauss–Legendre rule on [a, b]: sum_i weights[i] * f(nodes[i]) ~ int_a^b f.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  int order = 0;
  double a = 0.0;
  double b = 0.0;

  double integrate(const std::function<double(double)>& f) const;
};

/// n-point Gauss–Legendre rule on [a, b]. Nodes come from Newton iteration on P_n.
/// Throws Error(invalid_argument) for non-finite bounds, a >= b or n < 1.
QuadratureRule gauss_legendre(double a, double b, int n);

}  // namespace soliton_forge::numkit
