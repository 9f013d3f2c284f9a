#include "soliton_forge/numkit/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "soliton_forge/error.hpp"

namespace soliton_forge::numkit {

namespace {

// P_n(x) and P_n'(x) by the three-term recurrence.
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0;
  double p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  const double p = n == 0 ? 1.0 : p1;
  const double dp = n * (x * p - p0) / (x * x - 1.0);
  return {p, dp};
}

}  // namespace

double QuadratureRule::integrate(const std::function<double(double)>& f) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
  return sum;
}

QuadratureRule gauss_legendre(double a, double b, int n) {
  if (!std::isfinite(a) || !std::isfinite(b) || !(a < b))
    throw Error(ErrorCode::invalid_argument, "gauss_legendre needs finite a < b");
  if (n < 1) throw Error(ErrorCode::invalid_argument, "gauss_legendre needs n >= 1, got " + std::to_string(n));

  std::vector<double> x(n), w(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi's initial guess, then Newton on P_n.
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      auto [p, d] = legendre(n, z);
      dp = d;
      const double dz = p / d;
      z -= dz;
      if (std::abs(dz) <= 1e-16) break;
    }
    dp = legendre(n, z).second;
    const double weight = 2.0 / ((1.0 - z * z) * dp * dp);
    // z runs from near +1 downwards; fill symmetric pairs in ascending order.
    x[n - 1 - i] = z;
    x[i] = -z;
    w[n - 1 - i] = weight;
    w[i] = weight;
  }
  if (n % 2 == 1) x[n / 2] = 0.0;

  QuadratureRule rule;
  rule.order = n;
  rule.a = a;
  rule.b = b;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double half_len = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = mid + half_len * x[i];
    rule.weights[i] = half_len * w[i];
  }
  return rule;
}

}  // namespace soliton_forge::numkit
