#pragma once

#include <optional>
#include <string>
#include <vector>

#include "soliton_forge/field.hpp"
#include "soliton_forge/jost.hpp"
#include "soliton_forge/measures.hpp"

namespace soliton_forge {

struct DarbouxOptions {
  /// Nominal Jost step; the actual step divides the grid spacing.
  double ds = 1e-3;
  Scheme scheme = Scheme::trace;
  /// Keep q_sigma at every Jost node so the result can seed another dressing.
  bool tabulate = true;
};

/// q_sigma = q - 2 d^2/dx^2 log det(I + K) with K built from the seed's Jost solutions.
struct DressedSolution {
  SolutionField field;
  /// q_sigma - q, computed directly rather than by subtraction.
  SolutionField increment;
  std::string seed_name;
  SpectralMeasure sigma;
  std::optional<SpectralMeasure> data_before;
  std::optional<SpectralMeasure> data_after;
  double t = 0.0;

  double table_first = 0.0;
  double table_ds = 0.0;
  double table_x_max = 0.0;
  std::vector<double> table_q;

  /// The dressed potential as a tabulated seed (needs options.tabulate).
  SeedPotential as_seed() const;
};

/// Throws data_positivity_violated unless rho + sigma >= 0: merged atoms are
/// compared by weight and densities are sampled. Returns false when rho is
/// unknown and sigma is signed, in which case nothing could be checked.
bool check_data_positivity(const std::optional<SpectralMeasure>& rho, const SpectralMeasure& sigma);

DressedSolution darboux_transform(const SeedPotential& seed, const SpectralMeasure& sigma, const Grid& grid, double t,
                                  int n, const DarbouxOptions& options = {});

/// Dresses the dressed solution by -sigma.
SolutionField darboux_invert(const DressedSolution& dressed, const Grid& grid, int n, const DarbouxOptions& options = {});

struct CompositionReport {
  double discrepancy = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  SolutionField two_step;
  SolutionField one_step;
};

/// Dressing by s1 then s2 against a single dressing by s1 + s2.
CompositionReport composition_check(const SeedPotential& seed, const SpectralMeasure& s1, const SpectralMeasure& s2,
                                    const Grid& grid, double t, int n, double tolerance = 1e-5,
                                    const DarbouxOptions& options = {});

}  // namespace soliton_forge
