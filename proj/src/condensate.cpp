#include "soliton_forge/condensate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "soliton_forge/error.hpp"
#include "soliton_forge/kernel.hpp"
#include "soliton_forge/numkit/linalg.hpp"
#include "soliton_forge/numkit/parallel.hpp"
#include "soliton_forge/numkit/precision.hpp"

namespace soliton_forge {

namespace {

constexpr double kLog10e = 0.43429448190325176;
constexpr double kPlateauSlope = 1e-3;

struct YWork {
  std::vector<double> values;
  double residual = 0.0;
  double condition = 1.0;
  // Integrals of w E Y and s w E Y over the nodes.
  double m0 = 0.0;
  double m1 = 0.0;
  bool singular = false;
  numkit::Precision precision = numkit::Precision::binary64;
};

// Column-balanced system: Y_j = e^{-2 o_j} Z_j, A_ij = delta_ij e^{-2 o_j} + w_j e^{2 g_j - 2 o_j} / (s_j + a_i).
template <class T>
YWork solve_y_system(const DiscretizedMeasure& d, double x, double t) {
  using std::abs;
  using std::exp;
  using std::log;
  const std::size_t n = d.size();
  std::vector<T> s(n), e(n), o(n);
  for (std::size_t j = 0; j < n; ++j) {
    s[j] = T(d.nodes[j]);
    const T two_g = -2 * s[j] * T(x) + 8 * s[j] * s[j] * s[j] * T(t);
    const T log_b = log(T(std::abs(d.weights[j]))) + two_g - log(2 * s[j]);
    o[j] = log_b > 0 ? T(log_b / 2) : T(0);
    e[j] = T(d.weights[j]) * exp(two_g - 2 * o[j]);
  }
  std::vector<T> a(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i * n + j] = e[j] / (s[j] + s[i]) + (i == j ? T(exp(-2 * o[j])) : T(0));
  numkit::LuFactor<T> lu(n, a);
  YWork r;
  if (lu.singular()) {
    r.singular = true;
    return r;
  }
  const std::vector<T> ones(n, T(1));
  const auto z = lu.solve_scaled(ones);
  r.condition = static_cast<double>(lu.condition_estimate());

  std::vector<T> y(n);
  for (std::size_t j = 0; j < n; ++j) y[j] = z[j] * exp(-2 * o[j]);
  T res(0);
  for (std::size_t i = 0; i < n; ++i) {
    T acc = y[i] - 1;
    for (std::size_t j = 0; j < n; ++j) acc += e[j] * z[j] / (s[j] + s[i]);
    res = std::max<T>(res, abs(acc));
  }
  T m0(0), m1(0);
  for (std::size_t j = 0; j < n; ++j) {
    m0 += e[j] * z[j];
    m1 += s[j] * e[j] * z[j];
  }
  r.residual = static_cast<double>(res);
  r.m0 = static_cast<double>(m0);
  r.m1 = static_cast<double>(m1);
  r.values.resize(n);
  for (std::size_t j = 0; j < n; ++j) r.values[j] = static_cast<double>(y[j]);
  return r;
}

YWork solve_y_auto(const DiscretizedMeasure& d, double x, double t) {
  const auto b = kernel_bounds(d.nodes, d.weights, x, t);
  if (b.max_two_g > kExponentGuard) {
    std::ostringstream os;
    os << "exponent 8h^3 t - 2h x = " << b.max_two_g << " exceeds " << kExponentGuard;
    throw Error(ErrorCode::exponent_overflow, os.str());
  }
  const auto p = numkit::precision_for_digits(13.0 + 2 * b.max_offset * kLog10e);
  auto r = numkit::with_precision(p, [&]<class T>(std::type_identity<T>) { return solve_y_system<T>(d, x, t); });
  r.precision = p;
  return r;
}

void check_spec(const CondensateSpec& spec) {
  if (!(spec.h > 0) || !std::isfinite(spec.h)) throw Error(ErrorCode::invalid_argument, "condensate needs h > 0");
  if (spec.n < 1) throw Error(ErrorCode::invalid_argument, "condensate needs n >= 1");
  if (!std::isfinite(spec.t)) throw Error(ErrorCode::invalid_argument, "t must be finite");
}

double lsq_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0 ? sxy / sxx : 0.0;
}

}  // namespace

SpectralMeasure condensate_measure(double h) {
  if (!(h > 0) || !std::isfinite(h)) throw Error(ErrorCode::invalid_argument, "condensate needs h > 0");
  SpectralMeasure m;
  std::ostringstream name;
  name << "condensate(h=" << h << ")";
  m.name = name.str();
  m.densities.push_back({0.0, h, CondensateDensity{h, 1.0}, 1});
  return m;
}

YSolution solve_Y(const CondensateSpec& spec, double x) {
  check_spec(spec);
  if (!std::isfinite(x)) throw Error(ErrorCode::invalid_argument, "x must be finite");
  const auto d = discretize(condensate_measure(spec.h), spec.n);
  const auto w = solve_y_auto(d, x, spec.t);
  if (w.singular) throw Error(ErrorCode::singular_determinant, "Y system is singular");
  YSolution y;
  y.nodes = d.nodes;
  y.weights = d.weights;
  y.values = w.values;
  y.x = x;
  y.t = spec.t;
  y.residual = w.residual;
  y.condition = w.condition;
  // Threshold scaled to the digits actually carried.
  const double limit = 1e12 * std::pow(10.0, numkit::decimal_digits(w.precision) - 15);
  if (w.condition > limit) {
    std::ostringstream os;
    os << "accuracy-degraded: condition estimate " << w.condition << " at x = " << x;
    y.warnings.push_back(os.str());
  }
  return y;
}

SolutionField q_condensate_via_Y(const CondensateSpec& spec) {
  check_spec(spec);
  if (spec.h != 1.0) throw Error(ErrorCode::invalid_argument, "the Y representation of q is implemented for h = 1 only");
  spec.grid.check();
  const auto d = discretize(condensate_measure(1.0), spec.n);

  SolutionField f;
  f.grid = spec.grid;
  f.t = spec.t;
  f.meta.measure_name = d.name;
  f.meta.method = "fredholm-y";
  f.meta.n = spec.n;
  f.meta.scheme = Scheme::trace;
  f.q.assign(spec.grid.n_x, std::numeric_limits<double>::quiet_NaN());

  std::vector<YWork> work(spec.grid.n_x);
  numkit::parallel_for(spec.grid.n_x, [&](std::size_t j) { work[j] = solve_y_auto(d, spec.grid.x(j), spec.t); });

  auto widest = numkit::Precision::binary64;
  for (std::size_t j = 0; j < work.size(); ++j) {
    const auto& w = work[j];
    widest = std::max(widest, w.precision);
    if (w.singular) {
      f.meta.singular_x.push_back(spec.grid.x(j));
      continue;
    }
    // m0 = int 2 s sqrt(1 - s^2) E Y, m1 = int 2 s^2 sqrt(1 - s^2) E Y.
    f.q[j] = 8 * (w.m0 / 2) * (w.m0 / 2) - 8 * (w.m1 / 2);
  }
  f.meta.singular = !f.meta.singular_x.empty();
  f.meta.precision = std::string(numkit::to_string(widest));
  return f;
}

AsymptoticLevels asymptotic_levels(const SolutionField& field, double h) {
  if (!(h > 0)) throw Error(ErrorCode::invalid_argument, "asymptotic_levels needs h > 0");
  const std::size_t n = field.size();
  const std::size_t w = std::max<std::size_t>(2, n / 10);
  if (n < 2 * w) throw Error(ErrorCode::inconclusive_asymptotics, "field too short for plateau detection");

  auto side = [&](std::size_t begin, const char* name, double& level, double& slope) {
    std::vector<double> xs, qs;
    for (std::size_t j = begin; j < begin + w; ++j) {
      if (!std::isfinite(field.q[j])) continue;
      xs.push_back(field.x(j));
      qs.push_back(field.q[j]);
    }
    if (xs.size() < 2) throw Error(ErrorCode::inconclusive_asymptotics, std::string(name) + " window has no finite samples");
    slope = lsq_slope(xs, qs);
    double sum = 0;
    for (double q : qs) sum += q;
    level = sum / static_cast<double>(qs.size());
    if (std::abs(slope) >= kPlateauSlope) {
      std::ostringstream os;
      os << "no " << name << " plateau: slope " << slope << " over x in [" << xs.front() << ", " << xs.back() << "]";
      throw Error(ErrorCode::inconclusive_asymptotics, os.str());
    }
  };
  AsymptoticLevels r;
  side(0, "left", r.left, r.left_slope);
  side(n - w, "right", r.right, r.right_slope);
  return r;
}

}  // namespace soliton_forge
