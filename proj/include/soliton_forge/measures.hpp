#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "soliton_forge/numkit/quadrature.hpp"

namespace soliton_forge {

/// Dirac mass `weight` at wavenumber `kappa` (weight is c_n^2 for a soliton).
struct Atom {
  double kappa = 0.0;
  double weight = 0.0;
};

/// scale * 2 (k/h) sqrt(h^2 - k^2) on [0, h]: the soliton-condensate density.
struct CondensateDensity {
  double h = 1.0;
  double scale = 1.0;
};

struct UniformDensity {
  double value = 0.0;
};

/// Piecewise-linear density through the samples (k[i], value[i]).
struct TableDensity {
  std::vector<double> k;
  std::vector<double> value;
};

using DensityForm = std::variant<CondensateDensity, UniformDensity, TableDensity>;

struct DensityPiece {
  double a = 0.0;
  double b = 0.0;
  DensityForm form;
  int sign = 1;

  /// Signed density at k; zero outside [a, b].
  double operator()(double k) const;
  const char* form_name() const;
};

/// Signed, compactly supported measure on [0, inf): atoms plus density pieces.
struct SpectralMeasure {
  std::string name;
  std::vector<Atom> atoms;
  std::vector<DensityPiece> densities;

  bool empty() const { return atoms.empty() && densities.empty(); }
  bool atomic() const { return densities.empty(); }
  bool nonnegative() const;
  /// sup and inf of the support (0 for the empty measure).
  double sup_support() const;
  double inf_support() const;
  /// Sum of all density pieces at k (atoms excluded).
  double density_at(double k) const;
};

/// Structural validation: finite data, kappa > 0, supports inside [0, inf) and
/// consistent with their forms. Throws invalid_argument or carleson_violated.
void validate(const SpectralMeasure& m);

/// Numerical value of int |d sigma(k)| / k. Throws carleson_violated for an atom
/// at kappa <= 0 or a density that does not vanish at k = 0.
double carleson_check(const SpectralMeasure& m, int n = 64);

/// Quadrature used for a density piece. The condensate form is integrated in
/// theta with k = h sin(theta), which removes the square-root endpoint.
numkit::QuadratureRule piece_rule(const DensityPiece& piece, int n);

/// Nystrom nodes and signed weights realizing a measure, ascending in k.
struct DiscretizedMeasure {
  std::string name;
  std::vector<double> nodes;
  std::vector<double> weights;
  int n_per_piece = 0;
  std::size_t atom_count = 0;

  std::size_t size() const { return nodes.size(); }
  bool nonnegative() const;
  double total_mass() const;
};

DiscretizedMeasure discretize(const SpectralMeasure& m, int n_per_piece);

/// d sigma_t = exp(8 k^3 t) d sigma, kept as log factors.
struct EvolvedWeights {
  DiscretizedMeasure base;
  double t = 0.0;
  std::vector<double> log_factors;
};

EvolvedWeights evolve(const DiscretizedMeasure& d, double t);

/// Push-forward under k -> c k with an extra factor c. The Dyson solution then
/// obeys q_scaled(x, t) = c^2 q(c x, c^3 t).
SpectralMeasure scale_pushforward(const SpectralMeasure& m, double c);

/// Sum of two measures (atoms and pieces concatenated, duplicates merged later).
SpectralMeasure combine(const SpectralMeasure& a, const SpectralMeasure& b);

SpectralMeasure negate(const SpectralMeasure& m);

}  // namespace soliton_forge
