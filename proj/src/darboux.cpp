#include "soliton_forge/darboux.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "soliton_forge/error.hpp"
#include "soliton_forge/kernel.hpp"
#include "soliton_forge/numkit/linalg.hpp"

namespace soliton_forge {

namespace {

constexpr double kPositivityTol = 1e-12;

using Real = JostTable::Real;

struct NodeEval {
  double log_abs_tau = 0.0;
  int sign = 1;
  double increment = 0.0;
  bool singular = false;
};

// One point of the dressing from the scaled overlaps kappa_ij and phi, phi' at s.
class DressingKernel {
 public:
  DressingKernel(const DiscretizedMeasure& d, double t) : d_(d), n_(d.size()) {
    half_log_w_.resize(n_);
    time_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      half_log_w_[i] = d.weights[i] == 0 ? -std::numeric_limits<double>::infinity() : 0.5 * std::log(std::abs(d.weights[i]));
      const double k = d.nodes[i];
      time_[i] = 4 * k * k * k * t;
      has_negative_ = has_negative_ || d.weights[i] < 0;
    }
  }

  template <class Real, class Kappa, class Phi, class DPhi>
  NodeEval evaluate(double s, const Kappa& kappa, const Phi& phi, const DPhi& dphi) const {
    NodeEval r;
    if (n_ == 0) return r;
    numkit::SymmetricMatrix<Real> a(n_);
    std::vector<Real> scale(n_), v(n_), dv(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      const Real lambda = d_.nodes[i];
      if (d_.weights[i] == 0) {
        scale[i] = 0.0;
        continue;
      }
      const Real g = half_log_w_[i] + time_[i] - lambda * s;
      const Real o = std::max<Real>(0, g + std::log(static_cast<Real>(kappa(i, i))) / 2);
      a.set_log_offset(i, o);
      scale[i] = std::exp(g - o);
      v[i] = scale[i] * static_cast<Real>(phi(i));
      dv[i] = scale[i] * static_cast<Real>(dphi(i) - lambda * phi(i));
    }
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j <= i; ++j) {
        Real e = scale[i] * scale[j] * static_cast<Real>(kappa(i, j));
        if (i == j) e += (d_.weights[i] < 0 ? -1 : 1) * std::exp(-2 * a.log_offset(i));
        a.set(i, j, e);
      }
    std::vector<Real> y;
    if (!has_negative_) {
      try {
        numkit::CholeskyFactor<Real> ch(a);
        if (!ch.singular()) {
          r.log_abs_tau = static_cast<double>(ch.log_det());
          y = ch.solve_scaled(v);
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::not_positive_definite) throw;
      }
    }
    if (y.empty()) {
      numkit::LuFactor<Real> lu(a);
      if (lu.singular()) {
        r.singular = true;
        return r;
      }
      r.log_abs_tau = static_cast<double>(lu.log_abs_det());
      r.sign = lu.sign();
      for (double w : d_.weights)
        if (w < 0) r.sign = -r.sign;
      y = lu.solve_scaled(v);
    }
    Real vp = 0, dvp = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      vp += v[i] * y[i];
      dvp += dv[i] * y[i];
    }
    r.increment = static_cast<double>(4 * dvp + 2 * vp * vp);
    return r;
  }

 private:
  const DiscretizedMeasure& d_;
  std::size_t n_;
  std::vector<double> half_log_w_;
  std::vector<double> time_;
  bool has_negative_ = false;

 public:
  bool has_negative() const { return has_negative_; }
};

void merge_atoms(std::vector<Atom>& atoms) {
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.kappa < b.kappa; });
  std::vector<Atom> out;
  for (const auto& a : atoms) {
    if (!out.empty() && std::abs(out.back().kappa - a.kappa) <= 1e-12 * std::max(1.0, a.kappa))
      out.back().weight += a.weight;
    else
      out.push_back(a);
  }
  atoms = std::move(out);
}

}  // namespace

bool check_data_positivity(const std::optional<SpectralMeasure>& rho, const SpectralMeasure& sigma) {
  if (!rho) return sigma.nonnegative();
  SpectralMeasure total = combine(*rho, sigma);
  double scale = 0.0;
  for (const auto& a : total.atoms) scale = std::max(scale, std::abs(a.weight));
  std::vector<Atom> atoms = total.atoms;
  merge_atoms(atoms);
  for (const auto& a : atoms) {
    if (a.weight < -kPositivityTol * std::max(1.0, scale)) {
      std::ostringstream os;
      os << "combined atom at kappa = " << a.kappa << " has weight " << a.weight;
      throw Error(ErrorCode::data_positivity_violated, os.str());
    }
  }
  for (const auto& p : total.densities) {
    const auto rule = numkit::gauss_legendre(p.a, p.b, 64);
    for (double k : rule.nodes) {
      const double value = total.density_at(k);
      if (value < -kPositivityTol) {
        std::ostringstream os;
        os << "combined density is " << value << " at k = " << k;
        throw Error(ErrorCode::data_positivity_violated, os.str());
      }
    }
  }
  return true;
}

SeedPotential DressedSolution::as_seed() const {
  if (table_q.empty()) throw Error(ErrorCode::invalid_argument, "dressed solution was computed without tabulation");
  return SeedPotential::tabulated(seed_name + "+" + sigma.name, table_first, table_ds, table_q, t, data_after, table_x_max);
}

DressedSolution darboux_transform(const SeedPotential& seed, const SpectralMeasure& sigma, const Grid& grid, double t,
                                  int n, const DarbouxOptions& options) {
  grid.check();
  if (!std::isfinite(t)) throw Error(ErrorCode::invalid_argument, "t must be finite");
  if (!seed.time_independent() && std::abs(seed.t() - t) > 1e-12)
    throw Error(ErrorCode::invalid_argument, "seed profile is at a different time than requested");
  carleson_check(sigma);

  DressedSolution out;
  out.seed_name = seed.name();
  out.sigma = sigma;
  out.t = t;
  out.data_before = seed.data();
  std::vector<std::string> warnings;
  if (!check_data_positivity(seed.data(), sigma))
    warnings.push_back("seed spectral data unknown: positivity of the dressed data was not checked");
  if (seed.data()) out.data_after = combine(*seed.data(), sigma);

  const auto d = discretize(sigma, n);
  const double dx = grid.dx();
  const double m = std::max(1.0, std::round(dx / options.ds));
  const double step = dx / m;
  const auto stride = static_cast<std::size_t>(m);
  const double x_lo = grid.x_min - 2 * dx;
  const double x_top = x_lo + std::ceil((seed.x_max() - x_lo) / step - 1e-9) * step;
  if (grid.x_max > seed.x_max() + 1e-9) throw Error(ErrorCode::invalid_argument, "grid extends beyond the seed's x_max");

  for (std::size_t i = 0; i < d.size(); ++i) {
    const double k = d.nodes[i];
    if (2 * (-k * x_lo + 4 * k * k * k * t) > kExponentGuard)
      throw Error(ErrorCode::exponent_overflow, "dressing kernel exponent exceeds the guard at the left end of the grid");
  }

  std::vector<double> lambdas = d.nodes;
  if (lambdas.empty()) lambdas.push_back(1.0);  // keeps the table well-formed; unused
  const JostTable table(seed, lambdas, x_lo, x_top, step);
  const std::size_t nodes = table.nodes();
  // Grid point g sits at node  last - (2 + g) * stride.
  const std::size_t last = nodes - 1;

  std::vector<NodeEval> evals(nodes);
  std::vector<char> needed(nodes, options.tabulate ? 1 : 0);
  for (std::size_t p = 0; p < grid.n_x + 4; ++p) needed[last - p * stride] = 1;

  const DressingKernel kernel(d, t);
  if (d.size() > 0) {
    OverlapSweep sweep(table);
    for (std::size_t j = 0;; ++j) {
      if (needed[j]) {
        auto kap = [&](std::size_t a, std::size_t b) { return sweep.kappa(a, b); };
        auto phi = [&](std::size_t a) { return table.phi(a, j); };
        auto dphi = [&](std::size_t a) { return table.dphi(a, j); };
        // tau >= 1 for nonnegative sigma; only signed data cancels.
        evals[j] = kernel.has_negative() ? kernel.evaluate<Real>(table.s(j), kap, phi, dphi)
                                         : kernel.evaluate<double>(table.s(j), kap, phi, dphi);
        if (evals[j].singular || evals[j].log_abs_tau < std::log(1e-10)) {
          std::ostringstream os;
          os << "dressing determinant vanishes at x = " << table.s(j);
          throw Error(ErrorCode::singular_determinant, os.str());
        }
      }
      if (sweep.done()) break;
      sweep.advance();
    }
    for (std::size_t j = 0; j + 1 < nodes; ++j)
      if (needed[j] && needed[j + 1] && evals[j].sign * evals[j + 1].sign < 0) {
        std::ostringstream os;
        os << "dressing determinant changes sign near x = " << table.s(j);
        throw Error(ErrorCode::singular_determinant, os.str());
      }
  }

  auto init = [&](SolutionField& f, const char* method) {
    f.grid = grid;
    f.t = t;
    f.meta.measure_name = sigma.name;
    f.meta.method = method;
    f.meta.n = n;
    f.meta.scheme = options.scheme;
    f.meta.nonnegative = sigma.nonnegative();
    f.meta.warnings = warnings;
    f.q.resize(grid.n_x);
  };
  init(out.field, "darboux");
  init(out.increment, "darboux-increment");
  for (std::size_t g = 0; g < grid.n_x; ++g) {
    const std::size_t c = last - (2 + g) * stride;
    double inc = 0.0;
    if (d.size() > 0) {
      if (options.scheme == Scheme::trace) {
        inc = evals[c].increment;
      } else {
        const double second = (-evals[c + 2 * stride].log_abs_tau + 16 * evals[c + stride].log_abs_tau -
                               30 * evals[c].log_abs_tau + 16 * evals[c - stride].log_abs_tau -
                               evals[c - 2 * stride].log_abs_tau) /
                              (12 * dx * dx);
        inc = -2 * second;
      }
    }
    out.increment.q[g] = inc;
    out.field.q[g] = seed(grid.x(g)) + inc;
  }

  if (options.tabulate) {
    out.table_first = table.s(last);
    out.table_ds = step;
    out.table_x_max = table.x_max();
    out.table_q.resize(nodes);
    for (std::size_t j = 0; j < nodes; ++j) out.table_q[last - j] = seed(table.s(j)) + (d.size() > 0 ? evals[j].increment : 0.0);
  }
  return out;
}

SolutionField darboux_invert(const DressedSolution& dressed, const Grid& grid, int n, const DarbouxOptions& options) {
  auto opts = options;
  opts.tabulate = false;
  auto back = darboux_transform(dressed.as_seed(), negate(dressed.sigma), grid, dressed.t, n, opts);
  back.field.meta.method = "darboux-inverse";
  return back.field;
}

CompositionReport composition_check(const SeedPotential& seed, const SpectralMeasure& s1, const SpectralMeasure& s2,
                                    const Grid& grid, double t, int n, double tolerance, const DarbouxOptions& options) {
  auto first_opts = options;
  first_opts.tabulate = true;
  const auto first = darboux_transform(seed, s1, grid, t, n, first_opts);
  auto opts = options;
  opts.tabulate = false;
  CompositionReport r;
  r.two_step = darboux_transform(first.as_seed(), s2, grid, t, n, opts).field;
  r.one_step = darboux_transform(seed, combine(s1, s2), grid, t, n, opts).field;
  r.discrepancy = sup_difference(r.two_step, r.one_step);
  r.tolerance = tolerance;
  r.pass = r.discrepancy <= tolerance;
  return r;
}

}  // namespace soliton_forge
