#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "soliton_forge/field.hpp"
#include "soliton_forge/measures.hpp"
#include "soliton_forge/numkit/linalg.hpp"

namespace soliton_forge {

inline constexpr double kTailEpsilon = 1e-10;

/// q(s) ~ amplitude * s^-power beyond x_max. Inactive when |q| <= kTailEpsilon
/// there, in which case q is treated as zero past x_max.
struct TailModel {
  bool active = false;
  double amplitude = 0.0;
  double power = 0.0;
  double q_at_x_max = 0.0;
};

/// A potential at one fixed time, decaying at +inf, with the spectral data
/// it was built from when that is known.
class SeedPotential {
 public:
  using Profile = std::function<double(double)>;

  static SeedPotential zero(double x_max = 40.0);
  /// Pure N-soliton from its atoms, evaluated by the Kay-Moses determinant.
  static SeedPotential solitons(const std::vector<Atom>& atoms, double t, double x_max = 40.0);
  /// Dyson field of a nonnegative measure, n nodes per density piece.
  static SeedPotential gas(const SpectralMeasure& m, int n, double t, double x_max = 40.0);
  /// Samples q(s_first + j ds), cubic Lagrange in between. `data` is the
  /// discrete spectral data when known.
  static SeedPotential tabulated(std::string name, double s_first, double ds, std::vector<double> q, double t,
                                 std::optional<SpectralMeasure> data, double x_max);

  double operator()(double x) const;

  const std::string& name() const { return name_; }
  double t() const { return t_; }
  bool time_independent() const { return time_independent_; }
  bool is_zero() const { return zero_; }
  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  const TailModel& tail() const { return tail_; }
  const std::optional<SpectralMeasure>& data() const { return data_; }

 private:
  SeedPotential() = default;
  void fit_tail(double probe_limit);

  std::string name_;
  Profile profile_;
  double t_ = 0.0;
  bool time_independent_ = false;
  bool zero_ = false;
  double x_min_ = -std::numeric_limits<double>::infinity();
  double x_max_ = 40.0;
  TailModel tail_;
  std::optional<SpectralMeasure> data_;
};

/// Right Jost solutions psi(s; i lambda) = phi(s) e^{-lambda s} on the nodes
/// s_j = x_max - j ds, j = 0..J. phi and phi' are stored, phi(x_max) = 1 up to
/// the tail correction. Integration and storage use long double: removing a
/// bound state cancels 1 - w K to many digits on the far left.
class JostTable {
 public:
  using Real = long double;

 public:
  JostTable(const SeedPotential& seed, std::vector<double> lambdas, double x_lo, double x_max, double ds);

  std::size_t size() const { return lambdas_.size(); }
  std::size_t nodes() const { return node_count_; }
  double ds() const { return ds_; }
  double x_max() const { return x_max_; }
  double x_lo() const { return x_max_ - ds_ * static_cast<double>(node_count_ - 1); }
  double s(std::size_t j) const { return x_max_ - ds_ * static_cast<double>(j); }
  std::span<const double> lambdas() const { return lambdas_; }
  const TailModel& tail() const { return tail_; }

  Real phi(std::size_t i, std::size_t j) const { return phi_[i * node_count_ + j]; }
  Real dphi(std::size_t i, std::size_t j) const { return dphi_[i * node_count_ + j]; }
  double psi(std::size_t i, std::size_t j) const;
  double dpsi(std::size_t i, std::size_t j) const;

  /// Cubic Hermite interpolation of phi between nodes; x in [x_lo, x_max].
  Real phi_at(std::size_t i, double x) const;
  /// Index j with s(j) >= x > s(j + 1), or the last node.
  std::size_t bracket(double x) const;
  /// Nearest node when x lies within 1e-9 ds of one.
  std::optional<std::size_t> node_at(double x) const;

 private:
  std::vector<double> lambdas_;
  double x_max_;
  double ds_;
  std::size_t node_count_;
  std::vector<Real> phi_;
  std::vector<Real> dphi_;
  TailModel tail_;
};

/// psi(x; i lambda) at the grid points, integrated from x_max with step ds.
std::vector<double> jost_solve(const SeedPotential& seed, double lambda, const Grid& grid, double ds = 1e-3);

/// K(l_i, l_j; x) = int_x^inf psi_i psi_j ds, returned as exp(o_i + o_j) kappa_ij
/// with o_i = -lambda_i x. Overlaps between nodes use cubic Hermite phi with
/// 4-point Gauss-Legendre per step; beyond x_max the free tail closes it.
numkit::SymmetricMatrix<double> overlap_kernel(const JostTable& table, double x);

/// Walks the table nodes from x_max downward, updating the scaled overlaps
/// kappa_ij(s_j) = int_{s_j}^inf phi_i phi_j e^{-(l_i + l_j)(s - s_j)} ds.
class OverlapSweep {
 public:
  explicit OverlapSweep(const JostTable& table);

  std::size_t node() const { return j_; }
  bool done() const { return j_ + 1 >= table_.nodes(); }
  void advance();
  /// kappa_ij at the current node, packed like SymmetricMatrix (i >= j).
  JostTable::Real kappa(std::size_t i, std::size_t j) const {
    return kappa_[i >= j ? i * (i + 1) / 2 + j : j * (j + 1) / 2 + i];
  }

 private:
  const JostTable& table_;
  std::size_t j_ = 0;
  std::vector<JostTable::Real> kappa_;
  std::vector<JostTable::Real> buf_;
  std::vector<JostTable::Real> shape_;
  std::vector<JostTable::Real> decay_;
};

}  // namespace soliton_forge
