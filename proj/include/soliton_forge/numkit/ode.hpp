#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace soliton_forge::numkit {

/// Right-hand side dy/ds = f(s, y) written into `dydt`.
using OdeRhs = std::function<void(double s, std::span<const double> y, std::span<double> dydt)>;

/// Uniformly sampled solution: states are stored row-wise, state(j) at s[j].
struct Trajectory {
  std::vector<double> s;
  std::size_t dim = 0;
  std::vector<double> states;

  std::span<const double> state(std::size_t j) const { return {states.data() + j * dim, dim}; }
  std::size_t size() const { return s.size(); }
};

/// Number of fixed steps used to go from s0 to s1 with nominal step ds: the
/// nearest integer when |s1 - s0| / ds is within 1e-9 of one, otherwise the ceiling.
std::size_t step_count(double s0, double s1, double ds);

/// Classical fixed-step RK4 from s0 to s1 (s1 < s0 integrates backward).
/// The actual step is (s1 - s0) / step_count(s0, s1, ds); local error O(step^5).
/// The observer sees every step, including s0. Throws integration_diverged
/// on a non-finite state.
void integrate_rk4(const OdeRhs& f, std::span<const double> y0, double s0, double s1, double ds,
                   const std::function<void(double s, std::span<const double> y)>& observer);

/// Same integration, storing the full trajectory.
Trajectory integrate_ode(const OdeRhs& f, std::span<const double> y0, double s0, double s1, double ds);

}  // namespace soliton_forge::numkit
