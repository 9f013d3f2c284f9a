#pragma once

// Reference formulas kept apart from the library code paths.

#include <cmath>
#include <vector>

#include "soliton_forge/measures.hpp"

namespace oracle {

// N-soliton tau as a sum over subsets S (principal minors of the Cauchy-like matrix):
//   tau = sum_S prod_{i in S} (c_i^2 / 2k_i) e^{2 theta_i} prod_{i<j in S} ((k_i-k_j)/(k_i+k_j))^2,
// theta_i = -k_i x + 4 k_i^3 t. Each term is A_S e^{-2 K_S x}, so derivatives are exact.
inline long double hirota_q(const std::vector<soliton_forge::Atom>& atoms, long double x, long double t) {
  const std::size_t n = atoms.size();
  long double tau = 0, d1 = 0, d2 = 0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    long double logc = 0, rate = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(mask >> i & 1)) continue;
      const long double k = atoms[i].kappa, w = atoms[i].weight;
      logc += std::log(w / (2 * k)) + 8 * k * k * k * t;
      rate += 2 * k;
      for (std::size_t j = 0; j < i; ++j) {
        if (!(mask >> j & 1)) continue;
        const long double kj = atoms[j].kappa;
        logc += 2 * std::log(std::abs((k - kj) / (k + kj)));
      }
    }
    const long double term = std::exp(logc - rate * x);
    tau += term;
    d1 += -rate * term;
    d2 += rate * rate * term;
  }
  return -2 * (d2 * tau - d1 * d1) / (tau * tau);
}

inline double sech2_soliton(double kappa, double weight, double x, double t) {
  const double x0 = std::log(std::sqrt(weight) / std::sqrt(2 * kappa)) / kappa;
  const double c = std::cosh(kappa * (x - 4 * kappa * kappa * t - x0));
  return -2 * kappa * kappa / (c * c);
}

}  // namespace oracle
