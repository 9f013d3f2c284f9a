#include "soliton_forge/numkit/ode.hpp"

#include <cmath>
#include <string>

#include "soliton_forge/error.hpp"

namespace soliton_forge::numkit {

std::size_t step_count(double s0, double s1, double ds) {
  if (!(ds > 0.0) || !std::isfinite(ds)) throw Error(ErrorCode::invalid_argument, "ODE step must be positive");
  if (!std::isfinite(s0) || !std::isfinite(s1)) throw Error(ErrorCode::invalid_argument, "ODE interval must be finite");
  const double ratio = std::abs(s1 - s0) / ds;
  const double nearest = std::round(ratio);
  const double steps = std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio) ? nearest : std::ceil(ratio);
  return static_cast<std::size_t>(steps);
}

void integrate_rk4(const OdeRhs& f, std::span<const double> y0, double s0, double s1, double ds,
                   const std::function<void(double, std::span<const double>)>& observer) {
  const std::size_t steps = step_count(s0, s1, ds);
  const std::size_t dim = y0.size();
  std::vector<double> y(y0.begin(), y0.end()), k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
  observer(s0, y);
  if (steps == 0) return;
  const double h = (s1 - s0) / static_cast<double>(steps);
  for (std::size_t j = 0; j < steps; ++j) {
    const double s = s0 + static_cast<double>(j) * h;
    f(s, y, k1);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    f(s + 0.5 * h, tmp, k2);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    f(s + 0.5 * h, tmp, k3);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + h * k3[i];
    const double s_next = j + 1 == steps ? s1 : s0 + static_cast<double>(j + 1) * h;
    f(s + h, tmp, k4);
    for (std::size_t i = 0; i < dim; ++i) {
      y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      if (!std::isfinite(y[i]))
        throw Error(ErrorCode::integration_diverged, "non-finite state at s = " + std::to_string(s_next));
    }
    observer(s_next, y);
  }
}

Trajectory integrate_ode(const OdeRhs& f, std::span<const double> y0, double s0, double s1, double ds) {
  Trajectory out;
  out.dim = y0.size();
  const std::size_t steps = step_count(s0, s1, ds);
  out.s.reserve(steps + 1);
  out.states.reserve((steps + 1) * out.dim);
  integrate_rk4(f, y0, s0, s1, ds, [&](double s, std::span<const double> y) {
    out.s.push_back(s);
    out.states.insert(out.states.end(), y.begin(), y.end());
  });
  return out;
}

}  // namespace soliton_forge::numkit
