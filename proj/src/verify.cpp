#include "soliton_forge/verify.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <sstream>

#include "soliton_forge/error.hpp"
#include "soliton_forge/numkit/ode.hpp"
#include "soliton_forge/numkit/parallel.hpp"

namespace soliton_forge {

using numkit::Quad;

namespace {

ResidualNorms residual_at(const WideProducer& producer, double x_min, double x_max, double t, double dx, double dt) {
  if (!(dx > 0) || !(dt > 0)) throw Error(ErrorCode::invalid_argument, "residual steps must be positive");
  if (!(x_min < x_max)) throw Error(ErrorCode::invalid_argument, "residual window needs x_min < x_max");
  const auto n = static_cast<std::size_t>(std::llround((x_max - x_min) / dx)) + 1;
  const Quad qdx = dx, qdt = dt, qx0 = x_min, qt = t;
  auto xq = [&](std::ptrdiff_t j) { return qx0 + Quad(static_cast<double>(j)) * qdx; };

  // Row at t with three extra points per side, plus four time rows.
  const std::size_t wide = n + 6;
  std::vector<Quad> now(wide), tm2(n), tm1(n), tp1(n), tp2(n);
  numkit::parallel_for(wide + 4 * n, [&](std::size_t k) {
    if (k < wide) {
      now[k] = producer(xq(static_cast<std::ptrdiff_t>(k) - 3), qt);
      return;
    }
    const std::size_t r = (k - wide) / n, j = (k - wide) % n;
    const auto x = xq(static_cast<std::ptrdiff_t>(j));
    switch (r) {
      case 0: tm2[j] = producer(x, qt - 2 * qdt); break;
      case 1: tm1[j] = producer(x, qt - qdt); break;
      case 2: tp1[j] = producer(x, qt + qdt); break;
      default: tp2[j] = producer(x, qt + 2 * qdt); break;
    }
  });

  ResidualNorms r;
  r.dx = dx;
  r.dt = dt;
  Quad sum_sq = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const Quad* f = &now[j + 3];  // f[-3..3]
    bool finite = isfinite(tm2[j]) && isfinite(tm1[j]) && isfinite(tp1[j]) && isfinite(tp2[j]);
    for (int o = -3; o <= 3; ++o) finite = finite && isfinite(f[o]);
    if (!finite) {
      ++r.excluded;
      continue;
    }
    const Quad ut = (tm2[j] - 8 * tm1[j] + 8 * tp1[j] - tp2[j]) / (12 * qdt);
    const Quad ux = (f[-2] - 8 * f[-1] + 8 * f[1] - f[2]) / (12 * qdx);
    const Quad uxxx = (-f[3] + 8 * f[2] - 13 * f[1] + 13 * f[-1] - 8 * f[-2] + f[-3]) / (8 * qdx * qdx * qdx);
    const Quad res = ut - 6 * f[0] * ux + uxxx;
    const double v = std::abs(static_cast<double>(res));
    r.sup = std::max(r.sup, v);
    sum_sq += res * res;
    ++r.points;
  }
  r.l2 = std::sqrt(static_cast<double>(sum_sq) * dx);
  return r;
}

std::vector<double> sample(const std::function<double(double)>& f, double a, double step, std::size_t count) {
  std::vector<double> out(count);
  numkit::parallel_for(count, [&](std::size_t m) { out[m] = f(a + step * static_cast<double>(m)); });
  return out;
}

}  // namespace

ResidualReport kdv_residual(const WideProducer& producer, double x_min, double x_max, double t, double dx, double dt,
                            bool refine) {
  ResidualReport rep;
  rep.x_min = x_min;
  rep.x_max = x_max;
  rep.t = t;
  rep.coarse = residual_at(producer, x_min, x_max, t, dx, dt);
  if (refine) {
    rep.fine = residual_at(producer, x_min, x_max, t, dx / 2, dt / 2);
    if (rep.fine->sup > 0) {
      rep.ratio = rep.coarse.sup / rep.fine->sup;
      rep.order = std::log2(*rep.ratio);
    }
  }
  return rep;
}

BoundsReport bounds_check(const SolutionField& field, double h, double slack) {
  if (!(h > 0)) throw Error(ErrorCode::invalid_argument, "bounds_check needs h > 0");
  if (!field.meta.nonnegative)
    throw Error(ErrorCode::invalid_argument, "bounds hold only for fields built from nonnegative data");
  BoundsReport r;
  r.h = h;
  r.slack = slack;
  r.min = std::numeric_limits<double>::infinity();
  r.max = -std::numeric_limits<double>::infinity();
  const double lower = -2 * h * h - slack;
  for (std::size_t j = 0; j < field.size(); ++j) {
    const double q = field.q[j];
    if (std::isfinite(q)) {
      r.min = std::min(r.min, q);
      r.max = std::max(r.max, q);
    }
    if (!(q >= lower && q <= slack)) r.violations.emplace_back(field.x(j), q);
  }
  if (field.size() == 0) r.min = r.max = 0.0;
  return r;
}

void require_bounds(const BoundsReport& report) {
  if (report.pass()) return;
  const auto [x, q] = report.violations.front();
  std::ostringstream os;
  os << report.violations.size() << " samples outside [" << -2 * report.h * report.h << ", 0]; first at x = " << x
     << ", q = " << q;
  throw Error(ErrorCode::bound_violated, os.str());
}

SturmCounter::SturmCounter(const std::function<double(double)>& q, double a, double b, double ds) : a_(a) {
  if (!(a < b)) throw Error(ErrorCode::invalid_argument, "Sturm interval needs a < b");
  steps_ = numkit::step_count(a, b, ds);
  ds_ = (b - a) / static_cast<double>(steps_);
  q_half_ = sample(q, a, ds_ / 2, 2 * steps_ + 1);
  q_min_ = std::numeric_limits<double>::infinity();
  for (double v : q_half_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::invalid_argument, "potential is not finite on the Sturm interval");
    q_min_ = std::min(q_min_, v);
  }
}

int SturmCounter::count(double energy) const {
  // y'' = (q - E) y, classical RK4.
  double y = 0.0, dy = 1.0;
  const double h = ds_;
  int changes = 0;
  rescales_ = 0;
  int last_sign = 0;
  for (std::size_t j = 0; j < steps_; ++j) {
    const double qa = q_half_[2 * j] - energy, qm = q_half_[2 * j + 1] - energy, qb = q_half_[2 * j + 2] - energy;
    const double k1a = dy, k1b = qa * y;
    const double k2a = dy + h / 2 * k1b, k2b = qm * (y + h / 2 * k1a);
    const double k3a = dy + h / 2 * k2b, k3b = qm * (y + h / 2 * k2a);
    const double k4a = dy + h * k3b, k4b = qb * (y + h * k3a);
    y += h / 6 * (k1a + 2 * k2a + 2 * k3a + k4a);
    dy += h / 6 * (k1b + 2 * k2b + 2 * k3b + k4b);
    const int s = y > 0 ? 1 : (y < 0 ? -1 : 0);
    if (s != 0) {
      if (last_sign == 0 && j > 0 && s != 1) ++changes;  // y starts upward from zero
      if (last_sign != 0 && s != last_sign) ++changes;
      last_sign = s;
    }
    const double mag = std::max(std::abs(y), std::abs(dy));
    if (mag > 1e100) {
      y /= mag;
      dy /= mag;
      ++rescales_;
    }
    if (!std::isfinite(y) || !std::isfinite(dy)) throw Error(ErrorCode::integration_diverged, "Sturm shooting diverged");
  }
  return changes;
}

SpectralCount count_bound_states(const std::function<double(double)>& q, double a, double b, double energy, double ds,
                                 double tolerance) {
  if (!(energy < 0)) throw Error(ErrorCode::invalid_argument, "count_bound_states needs E < 0");
  const SturmCounter counter(q, a, b, ds);
  SpectralCount r;
  r.energy = energy;
  r.count = counter.count(energy);
  const double floor = counter.min_potential() - 1.0;
  for (int k = 0; k < r.count; ++k) {
    double lo = floor, hi = energy;
    while (hi - lo > tolerance) {
      const double mid = 0.5 * (lo + hi);
      if (counter.count(mid) >= k + 1)
        hi = mid;
      else
        lo = mid;
    }
    r.brackets.emplace_back(lo, hi);
    r.eigenvalues.push_back(0.5 * (lo + hi));
  }
  return r;
}

namespace {

std::optional<std::size_t> rightmost_trough(const std::vector<double>& q, double prominence) {
  const std::size_t n = q.size();
  for (std::size_t j = n - 1; j-- > 1;) {
    if (!(q[j] <= q[j - 1] && q[j] <= q[j + 1] && (q[j] < q[j - 1] || q[j] < q[j + 1]))) continue;
    double right = q[j];
    for (std::size_t k = j + 1; k < n && q[k] >= q[j]; ++k) right = std::max(right, q[k]);
    double left = q[j];
    for (std::size_t k = j; k-- > 0 && q[k] >= q[j];) left = std::max(left, q[k]);
    if (right - q[j] >= prominence && left - q[j] >= prominence) return j;
  }
  return std::nullopt;
}

// Position of the trough near x0 by a root of the centered derivative.
double refine_minimum(const std::function<double(double)>& f, double lo, double hi) {
  const double e = 1e-4;
  auto slope = [&](double x) { return (f(x + e) - f(x - e)) / (2 * e); };
  const double sl = slope(lo), sh = slope(hi);
  if (sl < 0 && sh > 0) {
    std::uintmax_t iters = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(slope, lo, hi, sl, sh,
                                                          boost::math::tools::eps_tolerance<double>(50), iters);
    return 0.5 * (a + b);
  }
  std::uintmax_t iters = 200;
  return boost::math::tools::brent_find_minima(f, lo, hi, 40, iters).first;
}

}  // namespace

ProbeResult leading_soliton_probe(const std::function<double(double, double)>& q, double h, double t, double a, double b,
                                  double delta, double spacing) {
  if (!(h > 0) || !(a < b) || !(spacing > 0) || !(delta > 0))
    throw Error(ErrorCode::invalid_argument, "leading_soliton_probe: bad arguments");
  const auto count = static_cast<std::size_t>(std::floor((b - a) / spacing)) + 1;
  auto locate = [&](double time) -> std::pair<double, double> {
    const auto profile = [&](double x) { return q(x, time); };
    const auto samples = sample(profile, a, spacing, count);
    const auto j = rightmost_trough(samples, 0.25 * h * h);
    if (!j) {
      std::ostringstream os;
      os << "no separated trough on [" << a << ", " << b << "] at t = " << time;
      throw Error(ErrorCode::inconclusive_probe, os.str());
    }
    const double x0 = a + spacing * static_cast<double>(*j);
    const double x = refine_minimum(profile, x0 - spacing, x0 + spacing);
    return {x, profile(x)};
  };
  ProbeResult r;
  const auto [x_now, depth] = locate(t);
  const auto [x_before, unused] = locate(t - delta);
  (void)unused;
  r.position = x_now;
  r.depth = depth;
  r.earlier_position = x_before;
  r.speed = (x_now - x_before) / delta;
  return r;
}

std::optional<double> fit_decay_rate(const SolutionField& f, double x_from, double floor) {
  std::vector<double> xs, ys;
  for (std::size_t j = 0; j < f.size(); ++j) {
    const double v = std::abs(f.q[j]);
    if (f.x(j) >= x_from && std::isfinite(v) && v > floor) {
      xs.push_back(f.x(j));
      ys.push_back(std::log(v));
    }
  }
  if (xs.size() < 3) return std::nullopt;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(xs.size());
  my /= static_cast<double>(xs.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return -sxy / sxx;
}

}  // namespace soliton_forge
