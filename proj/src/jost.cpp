#include "soliton_forge/jost.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "soliton_forge/dyson.hpp"
#include "soliton_forge/error.hpp"
#include "soliton_forge/numkit/ode.hpp"
#include "soliton_forge/numkit/parallel.hpp"
#include "soliton_forge/numkit/quadrature.hpp"

namespace soliton_forge {

namespace {

using Real = JostTable::Real;

// Nodes of the 4-point Gauss-Legendre rule on [0, 1] and its weights.
struct UnitRule {
  std::vector<Real> u, w;
};

const UnitRule& unit_rule4() {
  static const UnitRule r = [] {
    // Closed form; the double rule would cap the overlaps at binary64 accuracy.
    const Real a = std::sqrt(Real(3) / 7 - Real(2) / 7 * std::sqrt(Real(6) / 5));
    const Real b = std::sqrt(Real(3) / 7 + Real(2) / 7 * std::sqrt(Real(6) / 5));
    const Real wa = (18 + std::sqrt(Real(30))) / 36, wb = (18 - std::sqrt(Real(30))) / 36;
    UnitRule r;
    r.u = {(1 - b) / 2, (1 - a) / 2, (1 + a) / 2, (1 + b) / 2};
    r.w = {wb / 2, wa / 2, wa / 2, wb / 2};
    return r;
  }();
  return r;
}

// Cubic Hermite on [0, h] (u = position / h) from values and slopes at both ends.
Real hermite(Real f0, Real d0, Real f1, Real d1, Real h, Real u) {
  const Real u2 = u * u, u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * f0 + (u3 - 2 * u2 + u) * h * d0 + (-2 * u3 + 3 * u2) * f1 + (u3 - u2) * h * d1;
}

// First-order (Born) values of phi and phi' at x_max for q = A s^-p beyond it:
//   phi(X) = 1 + int_0^inf q(X + v) (1 - e^{-2 l v}) / (2 l) dv,  phi'(X) = -int_0^inf e^{-2 l v} q(X + v) dv.
std::pair<double, double> born_tail(const TailModel& tail, double x_max, double lambda) {
  if (!tail.active) return {1.0, 0.0};
  static const auto rule = numkit::gauss_legendre(0.0, 1.0, 96);
  double phi = 1.0, dphi = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double u = rule.nodes[k];
    const double v = x_max * u / (1 - u);
    const double jac = x_max / ((1 - u) * (1 - u));
    const double q = tail.amplitude * std::pow(x_max + v, -tail.power);
    const double decay = std::exp(-2 * lambda * v);
    phi += rule.weights[k] * jac * q * (-std::expm1(-2 * lambda * v)) / (2 * lambda);
    dphi -= rule.weights[k] * jac * q * decay;
  }
  return {phi, dphi};
}

DiscretizedMeasure atoms_only(const std::vector<Atom>& atoms) {
  SpectralMeasure m;
  m.atoms = atoms;
  return discretize(m, 1);
}

}  // namespace

SeedPotential SeedPotential::zero(double x_max) {
  SeedPotential s;
  s.name_ = "zero";
  s.profile_ = [](double) { return 0.0; };
  s.time_independent_ = true;
  s.zero_ = true;
  s.x_max_ = x_max;
  s.data_ = SpectralMeasure{"zero", {}, {}};
  return s;
}

SeedPotential SeedPotential::solitons(const std::vector<Atom>& atoms, double t, double x_max) {
  SpectralMeasure m;
  m.name = "solitons";
  m.atoms = atoms;
  carleson_check(m);
  if (!m.nonnegative()) throw Error(ErrorCode::invalid_argument, "soliton seed needs positive weights");
  SeedPotential s;
  s.name_ = "solitons";
  const auto d = atoms_only(atoms);
  s.profile_ = [d, t](double x) { return q_point(d, x, t); };
  s.t_ = t;
  s.x_max_ = x_max;
  s.data_ = m;
  s.fit_tail(4 * x_max);
  return s;
}

SeedPotential SeedPotential::gas(const SpectralMeasure& m, int n, double t, double x_max) {
  carleson_check(m);
  if (!m.nonnegative()) throw Error(ErrorCode::invalid_argument, "gas seed needs a nonnegative measure");
  SeedPotential s;
  s.name_ = m.name.empty() ? "gas" : m.name;
  const auto d = discretize(m, n);
  s.profile_ = [d, t](double x) { return q_point(d, x, t); };
  s.t_ = t;
  s.x_max_ = x_max;
  s.data_ = m;
  s.fit_tail(4 * x_max);
  return s;
}

SeedPotential SeedPotential::tabulated(std::string name, double s_first, double ds, std::vector<double> q, double t,
                                       std::optional<SpectralMeasure> data, double x_max) {
  if (q.size() < 4 || !(ds > 0)) throw Error(ErrorCode::invalid_argument, "tabulated seed needs >= 4 samples and ds > 0");
  for (double v : q)
    if (!std::isfinite(v)) throw Error(ErrorCode::invalid_argument, "tabulated seed has non-finite samples");
  const double s_last = s_first + ds * static_cast<double>(q.size() - 1);
  if (x_max > s_last + 1e-9 * ds || x_max <= s_first)
    throw Error(ErrorCode::invalid_argument, "tabulated seed must cover x_max");
  SeedPotential s;
  s.name_ = std::move(name);
  s.t_ = t;
  s.x_min_ = s_first;
  s.x_max_ = x_max;
  s.data_ = std::move(data);
  auto samples = std::make_shared<const std::vector<double>>(std::move(q));
  s.profile_ = [samples, s_first, ds, s_last](double x) {
    const auto& v = *samples;
    const double r = (x - s_first) / ds;
    const double nearest = std::round(r);
    if (std::abs(r - nearest) < 1e-9 && nearest >= 0 && nearest < static_cast<double>(v.size()))
      return v[static_cast<std::size_t>(nearest)];
    if (x < s_first || x > s_last) return std::numeric_limits<double>::quiet_NaN();
    const auto last = static_cast<std::ptrdiff_t>(v.size()) - 1;
    auto k = static_cast<std::ptrdiff_t>(std::floor(r));
    k = std::clamp<std::ptrdiff_t>(k - 1, 0, last - 3);
    double acc = 0.0;
    for (std::ptrdiff_t a = 0; a < 4; ++a) {
      double l = 1.0;
      for (std::ptrdiff_t b = 0; b < 4; ++b)
        if (b != a) l *= (r - static_cast<double>(k + b)) / static_cast<double>(a - b);
      acc += l * v[static_cast<std::size_t>(k + a)];
    }
    return acc;
  };
  s.fit_tail(x_max);
  return s;
}

double SeedPotential::operator()(double x) const {
  if (x < x_min_ - 1e-12) {
    std::ostringstream os;
    os << "seed '" << name_ << "' is not defined below x = " << x_min_ << " (asked for " << x << ")";
    throw Error(ErrorCode::invalid_argument, os.str());
  }
  if (x > x_max_ && std::isfinite(x_min_)) {
    if (!tail_.active) return 0.0;
    return tail_.amplitude * std::pow(x, -tail_.power);
  }
  return profile_(x);
}

void SeedPotential::fit_tail(double probe_limit) {
  tail_ = {};
  double worst = 0.0;
  for (double x = x_max_; x <= probe_limit + 1e-12; x += std::max(1.0, 0.25 * x_max_)) {
    worst = std::max(worst, std::abs(profile_(x)));
    if (probe_limit <= x_max_) break;
  }
  tail_.q_at_x_max = profile_(x_max_);
  if (worst <= kTailEpsilon) return;
  const double inner = profile_(0.8 * x_max_);
  const double outer = tail_.q_at_x_max;
  if (!(x_max_ > 0) || inner == 0.0 || outer == 0.0 || (inner > 0) != (outer > 0)) {
    std::ostringstream os;
    os << "seed '" << name_ << "': |q| = " << worst << " beyond x_max = " << x_max_ << " with no power-law tail";
    throw Error(ErrorCode::seed_decay_insufficient, os.str());
  }
  tail_.power = std::log(inner / outer) / std::log(1 / 0.8);
  if (!(tail_.power > 2.0)) {
    std::ostringstream os;
    os << "seed '" << name_ << "': tail decays like s^-" << tail_.power << ", need a power above 2";
    throw Error(ErrorCode::seed_decay_insufficient, os.str());
  }
  tail_.active = true;
  tail_.amplitude = outer * std::pow(x_max_, tail_.power);
}

JostTable::JostTable(const SeedPotential& seed, std::vector<double> lambdas, double x_lo, double x_max, double ds)
    : lambdas_(std::move(lambdas)), x_max_(x_max), ds_(ds) {
  if (!(ds > 0) || !std::isfinite(ds)) throw Error(ErrorCode::invalid_argument, "Jost step must be positive");
  if (!(x_lo < x_max)) throw Error(ErrorCode::invalid_argument, "Jost window needs x_lo < x_max");
  for (double l : lambdas_)
    if (!(l > 0) || !std::isfinite(l)) throw Error(ErrorCode::invalid_argument, "Jost solutions need lambda > 0");
  if (x_lo < seed.x_min() - 1e-12) throw Error(ErrorCode::invalid_argument, "Jost window extends below the seed's domain");
  if (x_max < seed.x_max() - 1e-9) throw Error(ErrorCode::invalid_argument, "Jost table must start at or beyond the seed's x_max");
  tail_ = seed.tail();

  const std::size_t steps = numkit::step_count(x_max, x_lo, ds);
  ds_ = (x_max - x_lo) / static_cast<double>(steps);
  node_count_ = steps + 1;

  // q at every node and half node, shared by all lambdas.
  const std::size_t half_count = 2 * steps + 1;
  std::vector<double> qh(half_count);
  numkit::parallel_for(half_count, [&](std::size_t m) {
    const double s = m == 0 ? x_max : x_max - 0.5 * ds_ * static_cast<double>(m);
    qh[m] = seed(s);
  });
  for (std::size_t m = 0; m < half_count; ++m)
    if (!std::isfinite(qh[m])) {
      std::ostringstream os;
      os << "seed is not finite at s = " << x_max - 0.5 * ds_ * static_cast<double>(m);
      throw Error(ErrorCode::integration_diverged, os.str());
    }

  const std::size_t n = lambdas_.size();
  phi_.assign(n * node_count_, 0.0L);
  dphi_.assign(n * node_count_, 0.0L);
  // Classical RK4 on phi'' = 2 lambda phi' + q phi, stepping toward -inf.
  numkit::parallel_for(n, [&](std::size_t i) {
    const Real lambda = lambdas_[i];
    const auto [phi0, dphi0] = born_tail(tail_, x_max, lambdas_[i]);
    const Real h = -static_cast<Real>(ds_);
    Real y0 = phi0, y1 = dphi0;
    Real* phi = phi_.data() + i * node_count_;
    Real* dphi = dphi_.data() + i * node_count_;
    phi[0] = y0;
    dphi[0] = y1;
    for (std::size_t j = 0; j < steps; ++j) {
      const Real qa = qh[2 * j], qm = qh[2 * j + 1], qb = qh[2 * j + 2];
      const Real k1a = y1, k1b = 2 * lambda * y1 + qa * y0;
      const Real k2a = y1 + h / 2 * k1b, k2b = 2 * lambda * k2a + qm * (y0 + h / 2 * k1a);
      const Real k3a = y1 + h / 2 * k2b, k3b = 2 * lambda * k3a + qm * (y0 + h / 2 * k2a);
      const Real k4a = y1 + h * k3b, k4b = 2 * lambda * k4a + qb * (y0 + h * k3a);
      y0 += h / 6 * (k1a + 2 * k2a + 2 * k3a + k4a);
      y1 += h / 6 * (k1b + 2 * k2b + 2 * k3b + k4b);
      if (!std::isfinite(static_cast<double>(y0)) || !std::isfinite(static_cast<double>(y1))) {
        std::ostringstream os;
        os << "Jost integration diverged at s = " << s(j + 1) << " for lambda = " << lambdas_[i];
        throw Error(ErrorCode::integration_diverged, os.str());
      }
      phi[j + 1] = y0;
      dphi[j + 1] = y1;
    }
  });
}

double JostTable::psi(std::size_t i, std::size_t j) const {
  return static_cast<double>(phi(i, j)) * std::exp(-lambdas_[i] * s(j));
}

double JostTable::dpsi(std::size_t i, std::size_t j) const {
  return static_cast<double>(dphi(i, j) - lambdas_[i] * phi(i, j)) * std::exp(-lambdas_[i] * s(j));
}

std::size_t JostTable::bracket(double x) const {
  const double r = (x_max_ - x) / ds_;
  if (r <= 0) return 0;
  const auto j = static_cast<std::size_t>(std::floor(r));
  return std::min(j, node_count_ - 1);
}

std::optional<std::size_t> JostTable::node_at(double x) const {
  const double r = (x_max_ - x) / ds_;
  const double nearest = std::round(r);
  if (std::abs(r - nearest) > 1e-9 || nearest < 0 || nearest > static_cast<double>(node_count_ - 1)) return std::nullopt;
  return static_cast<std::size_t>(nearest);
}

JostTable::Real JostTable::phi_at(std::size_t i, double x) const {
  if (auto j = node_at(x)) return phi(i, *j);
  if (x > x_max_ || x < x_lo()) throw Error(ErrorCode::invalid_argument, "x outside the Jost table");
  const std::size_t j = bracket(x);
  // Interval [s(j + 1), s(j)], parameter u from the left end.
  const Real u = (static_cast<Real>(x) - s(j + 1)) / ds_;
  return hermite(phi(i, j + 1), dphi(i, j + 1), phi(i, j), dphi(i, j), ds_, u);
}

std::vector<double> jost_solve(const SeedPotential& seed, double lambda, const Grid& grid, double ds) {
  grid.check();
  if (!(lambda > 0)) throw Error(ErrorCode::invalid_argument, "jost_solve needs lambda > 0");
  if (grid.x_max > seed.x_max() + 1e-12) throw Error(ErrorCode::invalid_argument, "grid extends beyond the seed's x_max");
  // Align the table so every grid point is a node.
  const double dx = grid.dx();
  const double m = std::max(1.0, std::round(dx / ds));
  const double step = dx / m;
  const double span = std::ceil((seed.x_max() - grid.x_min) / step - 1e-9);
  const double top = grid.x_min + span * step;
  JostTable table(seed, {lambda}, grid.x_min, top, step);
  std::vector<double> out(grid.n_x);
  for (std::size_t j = 0; j < grid.n_x; ++j) {
    const double x = grid.x(j);
    out[j] = static_cast<double>(table.phi_at(0, x)) * std::exp(-lambda * x);
  }
  return out;
}

numkit::SymmetricMatrix<double> overlap_kernel(const JostTable& table, double x) {
  if (x > table.x_max() + 1e-12 || x < table.x_lo() - 1e-9 * table.ds())
    throw Error(ErrorCode::invalid_argument, "overlap_kernel: x outside the Jost table");
  OverlapSweep sweep(table);
  const std::size_t j = table.node_at(x).value_or(table.bracket(x));
  while (sweep.node() < j) sweep.advance();

  const std::size_t n = table.size();
  const auto lam = table.lambdas();
  numkit::SymmetricMatrix<double> k(n);
  for (std::size_t i = 0; i < n; ++i) k.set_log_offset(i, -lam[i] * x);

  const double gap = table.s(j) - x;  // partial interval [x, s(j)]
  std::vector<Real> partial(n * (n + 1) / 2, 0.0L);
  if (gap > 1e-12 * table.ds()) {
    const auto& r = unit_rule4();
    std::vector<Real> vals(n * r.u.size());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t g = 0; g < r.u.size(); ++g) vals[i * r.u.size() + g] = table.phi_at(i, x + gap * r.u[g]);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t l = 0; l <= i; ++l) {
        const Real lsum = static_cast<Real>(lam[i]) + lam[l];
        Real acc = 0.0L;
        for (std::size_t g = 0; g < r.u.size(); ++g)
          acc += r.w[g] * vals[i * r.u.size() + g] * vals[l * r.u.size() + g] * std::exp(-lsum * gap * r.u[g]);
        partial[i * (i + 1) / 2 + l] = gap * acc;
      }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l <= i; ++l) {
      const Real lsum = static_cast<Real>(lam[i]) + lam[l];
      k.set(i, l, static_cast<double>(partial[i * (i + 1) / 2 + l] + std::exp(-lsum * gap) * sweep.kappa(i, l)));
    }
  return k;
}

OverlapSweep::OverlapSweep(const JostTable& table) : table_(table) {
  const std::size_t n = table.size();
  const auto lam = table.lambdas();
  kappa_.resize(n * (n + 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l <= i; ++l)
      kappa_[i * (i + 1) / 2 + l] = table.phi(i, 0) * table.phi(l, 0) / (static_cast<Real>(lam[i]) + lam[l]);
  const auto& r = unit_rule4();
  buf_.resize(n * r.u.size());
  shape_.resize(n * r.u.size());
  decay_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Real rate = static_cast<Real>(lam[i]) * table.ds();
    decay_[i] = std::exp(-rate);
    for (std::size_t g = 0; g < r.u.size(); ++g) shape_[i * r.u.size() + g] = std::exp(-rate * r.u[g]);
  }
}

void OverlapSweep::advance() {
  if (done()) throw Error(ErrorCode::invalid_argument, "overlap sweep is past the last node");
  const std::size_t n = table_.size();
  const auto lam = table_.lambdas();
  const Real h = table_.ds();
  const auto& r = unit_rule4();
  const std::size_t g_count = r.u.size();
  // New node j + 1 is the left end of [s(j + 1), s(j)].
  const std::size_t right = j_, left = j_ + 1;
  // buf_ holds phi e^{-lambda (s - s_left)} at the rule points; decay_[i] = e^{-lambda_i h}.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t g = 0; g < g_count; ++g)
      buf_[i * g_count + g] = hermite(table_.phi(i, left), table_.dphi(i, left), table_.phi(i, right),
                                      table_.dphi(i, right), h, r.u[g]) *
                              shape_[i * g_count + g];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l <= i; ++l) {
      Real acc = 0.0L;
      for (std::size_t g = 0; g < g_count; ++g) acc += r.w[g] * buf_[i * g_count + g] * buf_[l * g_count + g];
      Real& kap = kappa_[i * (i + 1) / 2 + l];
      kap = h * acc + decay_[i] * decay_[l] * kap;
    }
  j_ = left;
}

}  // namespace soliton_forge
