#pragma once

#include <string>
#include <vector>

#include "soliton_forge/field.hpp"
#include "soliton_forge/measures.hpp"

namespace soliton_forge {

/// Density 2 (k/h) sqrt(h^2 - k^2) on [0, h]. Throws invalid_argument for h <= 0.
SpectralMeasure condensate_measure(double h);

struct CondensateSpec {
  double h = 1.0;
  int n = 40;
  Grid grid;
  double t = 0.0;
};

/// Nystrom solution of
///   Y(a) + int_0^h 2 (s/h) sqrt(h^2 - s^2) e^{8 s^3 t - 2 s x} / (s + a) Y(s) ds = 1
/// at the quadrature nodes a = s_i.
struct YSolution {
  std::vector<double> nodes;
  /// Quadrature weight times density at each node.
  std::vector<double> weights;
  std::vector<double> values;
  double x = 0.0;
  double t = 0.0;
  /// max_i |residual of the discrete equation|.
  double residual = 0.0;
  double condition = 1.0;
  std::vector<std::string> warnings;
};

YSolution solve_Y(const CondensateSpec& spec, double x);

/// The condensate potential from Y alone (h = 1 only):
///   q = 8 (int s sqrt(1 - s^2) E Y ds)^2 - 8 int s^2 sqrt(1 - s^2) E Y ds,
/// E = e^{8 s^3 t - 2 s x}.
SolutionField q_condensate_via_Y(const CondensateSpec& spec);

struct AsymptoticLevels {
  double left = 0.0;
  double right = 0.0;
  double left_slope = 0.0;
  double right_slope = 0.0;
};

/// Mean of q over the outer 10% of samples on each side. A side whose
/// least-squares slope reaches 1e-3 is not a plateau: inconclusive_asymptotics.
AsymptoticLevels asymptotic_levels(const SolutionField& field, double h);

}  // namespace soliton_forge
