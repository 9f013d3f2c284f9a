#include "soliton_forge/dyson.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "soliton_forge/error.hpp"
#include "soliton_forge/numkit/parallel.hpp"

namespace soliton_forge {

using numkit::Precision;
using numkit::Quad;

namespace {

constexpr double kLog10e = 0.43429448190325176;
const double kTinyLogTau = std::log(1e-10);

struct Sample {
  double log_abs_tau = 0.0;
  int sign = 1;
  double q = 0.0;
  bool singular = false;
  Precision precision = Precision::binary64;
};

Sample evaluate_sample(const DiscretizedMeasure& d, double x, double t, Precision p) {
  return numkit::with_precision(p, [&]<class T>(std::type_identity<T>) {
    const auto ks = assemble_kernel<T>(d.nodes, d.weights, T(x), T(t));
    const auto r = evaluate_kernel(ks);
    Sample s;
    s.precision = p;
    s.singular = r.singular;
    s.sign = r.sign;
    if (!r.singular) {
      s.log_abs_tau = static_cast<double>(r.log_abs_tau);
      s.q = static_cast<double>(r.q);
    }
    return s;
  });
}

double loss_digits(const KernelBounds& b) { return 2 * b.max_offset * kLog10e; }

}  // namespace

KernelSystem<double> build_kernel(const EvolvedWeights& ew, double x) {
  return assemble_kernel<double>(ew.base.nodes, ew.base.weights, x, ew.t);
}

TauValue log_tau(const EvolvedWeights& ew, double x) {
  const auto& d = ew.base;
  const auto p = precision_for(d, x, ew.t);
  const Sample s = evaluate_sample(d, x, ew.t, p);
  if (s.singular || s.log_abs_tau < kTinyLogTau) {
    std::ostringstream os;
    os << "tau vanishes at x = " << x << ", t = " << ew.t;
    throw Error(ErrorCode::singular_determinant, os.str());
  }
  return {s.log_abs_tau, s.sign};
}

Precision precision_for(const DiscretizedMeasure& d, double x, double t, double target_digits) {
  const auto b = kernel_bounds(d.nodes, d.weights, x, t);
  return numkit::precision_for_digits(target_digits + loss_digits(b));
}

double q_point(const DiscretizedMeasure& d, double x, double t) {
  const auto b = kernel_bounds(d.nodes, d.weights, x, t);
  if (b.max_two_g > kExponentGuard)
    throw Error(ErrorCode::exponent_overflow, "exponent guard exceeded at x = " + std::to_string(x));
  const Sample s = evaluate_sample(d, x, t, precision_for(d, x, t));
  return s.singular ? std::numeric_limits<double>::quiet_NaN() : s.q;
}

Quad q_point_quad(const DiscretizedMeasure& d, Quad x, Quad t) {
  const auto r = evaluate_kernel(assemble_kernel<Quad>(d.nodes, d.weights, x, t));
  return r.singular ? std::numeric_limits<Quad>::quiet_NaN() : r.q;
}

SolutionField q_dyson(const DiscretizedMeasure& d, const Grid& grid_in, double t, Scheme scheme) {
  grid_in.check();
  if (!std::isfinite(t)) throw Error(ErrorCode::invalid_argument, "t must be finite");

  Grid grid = grid_in;
  const double dx = grid.dx();
  const std::size_t pad = scheme == Scheme::fd ? 2 : 0;

  SolutionField f;
  f.t = t;
  f.meta.measure_name = d.name;
  f.meta.method = "dyson";
  f.meta.n = d.n_per_piece;
  f.meta.scheme = scheme;
  f.meta.nonnegative = d.nonnegative();

  // The exponents grow toward -inf in x, so guard violations form a prefix.
  std::size_t first = 0;
  while (first < grid.n_x) {
    const double xs = grid.x(first) - static_cast<double>(pad) * dx;
    if (kernel_bounds(d.nodes, d.weights, xs, t).max_two_g <= kExponentGuard) break;
    ++first;
  }
  if (first == grid.n_x) throw Error(ErrorCode::exponent_overflow, "every grid point violates the exponent guard");
  if (first > 0) {
    std::ostringstream os;
    os << "grid truncated to x >= " << grid.x(first) << " by the exponent guard";
    f.meta.warnings.push_back(os.str());
    grid.x_min = grid.x(first);
    grid.n_x -= first;
    if (grid.n_x < 2) throw Error(ErrorCode::exponent_overflow, "fewer than two grid points survive the exponent guard");
  }
  f.grid = grid;

  const std::size_t m = grid.n_x + 2 * pad;
  auto sample_x = [&](std::size_t s) {
    return grid.x_min + (static_cast<double>(s) - static_cast<double>(pad)) * dx;
  };
  std::vector<Sample> samples(m);
  numkit::parallel_for(m, [&](std::size_t s) {
    const double x = s >= pad && s < pad + grid.n_x ? grid.x(s - pad) : sample_x(s);
    const auto b = kernel_bounds(d.nodes, d.weights, x, t);
    double digits = 13.0 + loss_digits(b);
    if (scheme == Scheme::fd) digits = 12.0 + 2 * std::log10(1 / dx) + std::log10(std::max(1.0, 2 * b.sum_offsets)) + loss_digits(b);
    samples[s] = evaluate_sample(d, x, t, numkit::precision_for_digits(digits));
  });

  std::vector<char> bad(m, 0);
  for (std::size_t s = 0; s < m; ++s) {
    if (samples[s].singular || (samples[s].log_abs_tau < kTinyLogTau)) bad[s] = 1;
    if (s + 1 < m && samples[s].sign * samples[s + 1].sign < 0) bad[s] = bad[s + 1] = 1;
  }

  Precision widest = Precision::binary64;
  for (const auto& s : samples) widest = std::max(widest, s.precision);
  f.meta.precision = std::string(numkit::to_string(widest));

  const double nan = std::numeric_limits<double>::quiet_NaN();
  f.q.assign(grid.n_x, nan);
  for (std::size_t j = 0; j < grid.n_x; ++j) {
    const std::size_t c = j + pad;
    if (scheme == Scheme::trace) {
      if (!bad[c]) f.q[j] = samples[c].q;
      continue;
    }
    if (bad[c - 2] || bad[c - 1] || bad[c] || bad[c + 1] || bad[c + 2]) continue;
    const double second = (-samples[c - 2].log_abs_tau + 16 * samples[c - 1].log_abs_tau - 30 * samples[c].log_abs_tau +
                           16 * samples[c + 1].log_abs_tau - samples[c + 2].log_abs_tau) /
                          (12 * dx * dx);
    f.q[j] = -2 * second;
  }
  for (std::size_t j = 0; j < grid.n_x; ++j)
    if (std::isnan(f.q[j])) f.meta.singular_x.push_back(grid.x(j));
  f.meta.singular = !f.meta.singular_x.empty();
  return f;
}

SolutionField q_dyson(const SpectralMeasure& m, const Grid& grid, double t, int n, Scheme scheme) {
  carleson_check(m);
  return q_dyson(discretize(m, n), grid, t, scheme);
}

SolutionField kay_moses(const std::vector<Atom>& atoms, const Grid& grid, double t, Scheme scheme) {
  SpectralMeasure m;
  m.name = "kay-moses";
  m.atoms = atoms;
  carleson_check(m);
  auto f = q_dyson(discretize(m, 1), grid, t, scheme);
  f.meta.method = "kay-moses";
  f.meta.n = static_cast<int>(atoms.size());
  return f;
}

double soliton_closed_form(double kappa, double weight, double x, double t) {
  const double x0 = std::log(std::sqrt(weight) / std::sqrt(2 * kappa)) / kappa;
  const double c = std::cosh(kappa * (x - 4 * kappa * kappa * t - x0));
  return -2 * kappa * kappa / (c * c);
}

}  // namespace soliton_forge
