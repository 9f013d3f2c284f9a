#include "soliton_forge/measures.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "soliton_forge/error.hpp"

namespace soliton_forge {

namespace {

constexpr double kCollisionTol = 1e-12;

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

double table_value(const TableDensity& t, double k) {
  if (k < t.k.front() || k > t.k.back()) return 0.0;
  auto it = std::upper_bound(t.k.begin(), t.k.end(), k);
  if (it == t.k.end()) return t.value.back();
  const std::size_t j = static_cast<std::size_t>(it - t.k.begin());
  const double k0 = t.k[j - 1], k1 = t.k[j];
  const double f = (k - k0) / (k1 - k0);
  return t.value[j - 1] + f * (t.value[j] - t.value[j - 1]);
}

bool close(double a, double b) { return std::abs(a - b) <= kCollisionTol * std::max(1.0, std::abs(a)); }

std::string describe(const DensityPiece& p) {
  std::ostringstream os;
  os << p.form_name() << " piece on [" << p.a << ", " << p.b << "]";
  return os.str();
}

}  // namespace

double DensityPiece::operator()(double k) const {
  if (k < a || k > b) return 0.0;
  const double v = std::visit(
      overloaded{
          [&](const CondensateDensity& c) {
            const double r = std::max(0.0, c.h * c.h - k * k);
            return c.scale * 2.0 * (k / c.h) * std::sqrt(r);
          },
          [](const UniformDensity& u) { return u.value; },
          [&](const TableDensity& t) { return table_value(t, k); },
      },
      form);
  return sign * v;
}

const char* DensityPiece::form_name() const {
  return std::visit(overloaded{[](const CondensateDensity&) { return "condensate"; },
                               [](const UniformDensity&) { return "uniform"; },
                               [](const TableDensity&) { return "table"; }},
                    form);
}

bool SpectralMeasure::nonnegative() const {
  for (const auto& a : atoms)
    if (a.weight < 0) return false;
  for (const auto& p : densities) {
    if (p.sign < 0) return false;
    if (const auto* u = std::get_if<UniformDensity>(&p.form); u && u->value < 0) return false;
    if (const auto* c = std::get_if<CondensateDensity>(&p.form); c && c->scale < 0) return false;
    if (const auto* t = std::get_if<TableDensity>(&p.form))
      for (double v : t->value)
        if (v < 0) return false;
  }
  return true;
}

double SpectralMeasure::sup_support() const {
  double s = 0.0;
  for (const auto& a : atoms)
    if (a.weight != 0) s = std::max(s, a.kappa);
  for (const auto& p : densities) s = std::max(s, p.b);
  return s;
}

double SpectralMeasure::inf_support() const {
  if (empty()) return 0.0;
  double s = std::numeric_limits<double>::infinity();
  for (const auto& a : atoms)
    if (a.weight != 0) s = std::min(s, a.kappa);
  for (const auto& p : densities) s = std::min(s, p.a);
  return std::isfinite(s) ? s : 0.0;
}

double SpectralMeasure::density_at(double k) const {
  double s = 0.0;
  for (const auto& p : densities) s += p(k);
  return s;
}

void validate(const SpectralMeasure& m) {
  for (const auto& a : m.atoms) {
    if (!std::isfinite(a.kappa) || !std::isfinite(a.weight))
      throw Error(ErrorCode::invalid_argument, "atom with non-finite kappa or weight");
    if (a.kappa <= 0)
      throw Error(ErrorCode::carleson_violated, "atom at kappa = " + std::to_string(a.kappa) + " (must be > 0)");
  }
  for (const auto& p : m.densities) {
    if (!std::isfinite(p.a) || !std::isfinite(p.b) || p.a < 0 || !(p.a < p.b))
      throw Error(ErrorCode::invalid_argument, describe(p) + ": support must satisfy 0 <= a < b");
    if (p.sign != 1 && p.sign != -1) throw Error(ErrorCode::invalid_argument, describe(p) + ": sign must be +1 or -1");
    std::visit(overloaded{
                   [&](const CondensateDensity& c) {
                     if (!(c.h > 0) || !std::isfinite(c.h) || !std::isfinite(c.scale))
                       throw Error(ErrorCode::invalid_argument, describe(p) + ": condensate needs finite h > 0");
                     if (p.b > c.h * (1 + 1e-14))
                       throw Error(ErrorCode::invalid_argument, describe(p) + ": support exceeds [0, h]");
                   },
                   [&](const UniformDensity& u) {
                     if (!std::isfinite(u.value))
                       throw Error(ErrorCode::invalid_argument, describe(p) + ": non-finite value");
                   },
                   [&](const TableDensity& t) {
                     if (t.k.size() < 2 || t.k.size() != t.value.size())
                       throw Error(ErrorCode::invalid_argument, describe(p) + ": table needs >= 2 (k, value) samples");
                     for (std::size_t i = 1; i < t.k.size(); ++i)
                       if (!(t.k[i] > t.k[i - 1]))
                         throw Error(ErrorCode::invalid_argument, describe(p) + ": table k must increase strictly");
                     for (double v : t.value)
                       if (!std::isfinite(v)) throw Error(ErrorCode::invalid_argument, describe(p) + ": non-finite value");
                     if (p.a < t.k.front() - kCollisionTol || p.b > t.k.back() + kCollisionTol)
                       throw Error(ErrorCode::invalid_argument, describe(p) + ": support outside the table range");
                   },
               },
               p.form);
  }
}

numkit::QuadratureRule piece_rule(const DensityPiece& piece, int n) {
  if (const auto* c = std::get_if<CondensateDensity>(&piece.form)) {
    const double lo = std::asin(std::clamp(piece.a / c->h, 0.0, 1.0));
    const double hi = std::asin(std::clamp(piece.b / c->h, 0.0, 1.0));
    auto theta = numkit::gauss_legendre(lo, hi, n);
    numkit::QuadratureRule rule = theta;
    rule.a = piece.a;
    rule.b = piece.b;
    for (std::size_t i = 0; i < theta.nodes.size(); ++i) {
      rule.nodes[i] = c->h * std::sin(theta.nodes[i]);
      rule.weights[i] = theta.weights[i] * c->h * std::cos(theta.nodes[i]);
    }
    return rule;
  }
  return numkit::gauss_legendre(piece.a, piece.b, n);
}

double carleson_check(const SpectralMeasure& m, int n) {
  validate(m);
  double total = 0.0;
  for (const auto& a : m.atoms) total += std::abs(a.weight) / a.kappa;
  for (const auto& p : m.densities) {
    if (p.a == 0.0) {
      const bool vanishes = std::visit(overloaded{[](const CondensateDensity&) { return true; },
                                                  [](const UniformDensity& u) { return u.value == 0.0; },
                                                  [](const TableDensity& t) { return t.value.front() == 0.0 || t.k.front() > 0.0; }},
                                       p.form);
      if (!vanishes) throw Error(ErrorCode::carleson_violated, describe(p) + ": density/k is not integrable at k = 0");
    }
    const auto rule = piece_rule(p, n);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) total += rule.weights[i] * std::abs(p(rule.nodes[i])) / rule.nodes[i];
  }
  return total;
}

bool DiscretizedMeasure::nonnegative() const {
  return std::all_of(weights.begin(), weights.end(), [](double w) { return w >= 0; });
}

double DiscretizedMeasure::total_mass() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

DiscretizedMeasure discretize(const SpectralMeasure& m, int n_per_piece) {
  if (n_per_piece < 1) throw Error(ErrorCode::invalid_argument, "discretize needs n_per_piece >= 1");
  validate(m);

  std::vector<Atom> atoms = m.atoms;
  std::stable_sort(atoms.begin(), atoms.end(), [](const Atom& x, const Atom& y) { return x.kappa < y.kappa; });
  std::vector<Atom> merged;
  for (const auto& a : atoms) {
    if (!merged.empty() && close(merged.back().kappa, a.kappa))
      merged.back().weight += a.weight;
    else
      merged.push_back(a);
  }

  struct Node {
    double k;
    double w;
    bool atom;
  };
  std::vector<Node> all;
  for (const auto& a : merged) all.push_back({a.kappa, a.weight, true});
  for (const auto& p : m.densities) {
    const auto rule = piece_rule(p, n_per_piece);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) all.push_back({rule.nodes[i], p(rule.nodes[i]) * rule.weights[i], false});
  }
  std::stable_sort(all.begin(), all.end(), [](const Node& x, const Node& y) { return x.k < y.k; });
  for (std::size_t i = 1; i < all.size(); ++i) {
    if (close(all[i - 1].k, all[i].k) && !(all[i - 1].atom && all[i].atom)) {
      std::ostringstream os;
      os << "nodes collide at k = " << all[i].k;
      throw Error(ErrorCode::degenerate_discretization, os.str());
    }
  }

  DiscretizedMeasure d;
  d.name = m.name;
  d.n_per_piece = n_per_piece;
  d.atom_count = merged.size();
  for (const auto& node : all) {
    d.nodes.push_back(node.k);
    d.weights.push_back(node.w);
  }
  return d;
}

EvolvedWeights evolve(const DiscretizedMeasure& d, double t) {
  if (!std::isfinite(t)) throw Error(ErrorCode::invalid_argument, "evolve needs finite t");
  EvolvedWeights ew{d, t, {}};
  ew.log_factors.reserve(d.size());
  for (double k : d.nodes) ew.log_factors.push_back(8.0 * k * k * k * t);
  return ew;
}

SpectralMeasure scale_pushforward(const SpectralMeasure& m, double c) {
  if (!(c > 0) || !std::isfinite(c)) throw Error(ErrorCode::invalid_argument, "scale_pushforward needs c > 0");
  SpectralMeasure out;
  out.name = m.name;
  for (const auto& a : m.atoms) out.atoms.push_back({c * a.kappa, c * a.weight});
  for (const auto& p : m.densities) {
    DensityPiece q = p;
    q.a = c * p.a;
    q.b = c * p.b;
    // Density value at k becomes f(k / c): the Jacobian 1/c cancels the factor c.
    std::visit(overloaded{[&](CondensateDensity& cd) {
                            cd.h *= c;
                            cd.scale /= c;
                          },
                          [](UniformDensity&) {},
                          [&](TableDensity& t) {
                            for (double& k : t.k) k *= c;
                          }},
               q.form);
    out.densities.push_back(std::move(q));
  }
  return out;
}

SpectralMeasure combine(const SpectralMeasure& a, const SpectralMeasure& b) {
  SpectralMeasure out = a;
  out.name = a.name + "+" + b.name;
  out.atoms.insert(out.atoms.end(), b.atoms.begin(), b.atoms.end());
  out.densities.insert(out.densities.end(), b.densities.begin(), b.densities.end());
  return out;
}

SpectralMeasure negate(const SpectralMeasure& m) {
  SpectralMeasure out = m;
  out.name = "-" + m.name;
  for (auto& a : out.atoms) a.weight = -a.weight;
  for (auto& p : out.densities) p.sign = -p.sign;
  return out;
}

}  // namespace soliton_forge
