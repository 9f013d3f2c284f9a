#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "soliton_forge/field.hpp"
#include "soliton_forge/numkit/precision.hpp"

namespace soliton_forge {

/// q(x, t) in binary128, so that differencing at small steps stays above roundoff.
using WideProducer = std::function<numkit::Quad(numkit::Quad x, numkit::Quad t)>;

struct ResidualNorms {
  double dx = 0.0;
  double dt = 0.0;
  double sup = 0.0;
  double l2 = 0.0;
  std::size_t points = 0;
  /// Points whose stencil touched a singular (NaN) sample.
  std::size_t excluded = 0;
};

struct ResidualReport {
  double x_min = 0.0;
  double x_max = 0.0;
  double t = 0.0;
  ResidualNorms coarse;
  std::optional<ResidualNorms> fine;
  /// coarse.sup / fine.sup and log2 of it.
  std::optional<double> ratio;
  std::optional<double> order;
};

/// u_t - 6 u u_x + u_xxx at x_min + j dx with 4th-order central stencils in x
/// and t, the producer re-evaluated at shifted times. With `refine`, repeats at
/// dx/2, dt/2 and estimates the order.
ResidualReport kdv_residual(const WideProducer& producer, double x_min, double x_max, double t, double dx, double dt,
                            bool refine = true);

struct BoundsReport {
  double h = 0.0;
  double slack = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::vector<std::pair<double, double>> violations;  // (x, q)
  bool pass() const { return violations.empty(); }
};

/// Checks -2h^2 - slack <= q <= slack at every sample (NaN counts as a violation).
/// Requires a field produced from nonnegative data.
BoundsReport bounds_check(const SolutionField& field, double h, double slack = 1e-9);
/// Throws bound_violated naming the first offending sample.
void require_bounds(const BoundsReport& report);

/// Shooting problem -y'' + q y = E y on [a, b], y(a) = 0, y'(a) = 1.
class SturmCounter {
 public:
  SturmCounter(const std::function<double(double)>& q, double a, double b, double ds = 1e-3);

  /// Sign changes of y on (a, b]: Dirichlet eigenvalues below E.
  int count(double energy) const;
  double min_potential() const { return q_min_; }
  /// Renormalizations performed by the last count().
  int last_rescales() const { return rescales_; }

 private:
  double a_;
  double ds_;
  std::size_t steps_;
  std::vector<double> q_half_;  // q at a + m ds / 2
  double q_min_;
  mutable int rescales_ = 0;
};

struct SpectralCount {
  double energy = 0.0;
  int count = 0;
  /// One bracket [lo, hi] per eigenvalue below energy, ascending.
  std::vector<std::pair<double, double>> brackets;
  std::vector<double> eigenvalues;
};

SpectralCount count_bound_states(const std::function<double(double)>& q, double a, double b, double energy,
                                 double ds = 1e-3, double tolerance = 1e-9);

struct ProbeResult {
  double depth = 0.0;
  double position = 0.0;
  double speed = 0.0;
  double earlier_position = 0.0;
};

/// Right-most trough of q(., t) on [a, b] whose walls rise by at least
/// 0.25 h^2 on both sides; speed from the same trough at t - delta.
ProbeResult leading_soliton_probe(const std::function<double(double, double)>& q, double h, double t, double a, double b,
                                  double delta = 0.1, double spacing = 0.05);

/// -slope of a least-squares fit of log|f| against x over samples with x >= x_from
/// and |f| > floor. Returns nullopt with fewer than 3 usable samples.
std::optional<double> fit_decay_rate(const SolutionField& f, double x_from, double floor = 1e-300);

}  // namespace soliton_forge
