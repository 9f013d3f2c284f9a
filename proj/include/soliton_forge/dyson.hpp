#pragma once

#include <vector>

#include "soliton_forge/field.hpp"
#include "soliton_forge/kernel.hpp"
#include "soliton_forge/measures.hpp"
#include "soliton_forge/numkit/precision.hpp"

namespace soliton_forge {

/// Kernel system in binary64 at position x. Throws exponent_overflow.
KernelSystem<double> build_kernel(const EvolvedWeights& ew, double x);

struct TauValue {
  double log_abs = 0.0;
  int sign = 1;
};

/// log |det(I + K)| and the sign of det(I + K). Throws singular_determinant
/// where tau vanishes to working precision.
TauValue log_tau(const EvolvedWeights& ew, double x);

/// Working precision that keeps about `target_digits` correct digits of the
/// trace formula at (x, t).
numkit::Precision precision_for(const DiscretizedMeasure& d, double x, double t, double target_digits = 13.0);

/// q at a single point by the trace formula, precision chosen automatically.
/// Returns NaN where tau vanishes.
double q_point(const DiscretizedMeasure& d, double x, double t);

/// Same, carried out entirely in binary128 (x and t included), for finite
/// differencing in x and t.
numkit::Quad q_point_quad(const DiscretizedMeasure& d, numkit::Quad x, numkit::Quad t);

/// Dyson's formula on a grid. scheme fd: -2 times the 5-point second
/// difference of log tau with the grid step; scheme trace: rank-one formula.
/// Points where tau vanishes are NaN and listed in meta.singular_x. If the
/// left end of the grid violates the exponent guard the grid is truncated
/// and a warning recorded.
SolutionField q_dyson(const DiscretizedMeasure& d, const Grid& grid, double t, Scheme scheme = Scheme::trace);
SolutionField q_dyson(const SpectralMeasure& m, const Grid& grid, double t, int n, Scheme scheme = Scheme::trace);

/// Pure N-soliton path: the exact N x N matrix of the atoms (duplicates merged).
SolutionField kay_moses(const std::vector<Atom>& atoms, const Grid& grid, double t, Scheme scheme = Scheme::trace);

/// -2 kappa^2 sech^2(kappa (x - 4 kappa^2 t - x0)), x0 = log(c / sqrt(2 kappa)) / kappa.
double soliton_closed_form(double kappa, double weight, double x, double t);

}  // namespace soliton_forge
