// Acceptance run: one PASS/FAIL line per criterion. Criterion 12 is soft and
// only warns. Exit status is nonzero when a hard criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "oracles.hpp"
#include "soliton_forge/condensate.hpp"
#include "soliton_forge/darboux.hpp"
#include "soliton_forge/dyson.hpp"
#include "soliton_forge/error.hpp"
#include "soliton_forge/verify.hpp"

using namespace soliton_forge;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int hard_failures = 0;

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void criterion(int id, const char* title, bool soft, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  std::printf("%s [%2d] %s%s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, title, soft ? " (soft)" : "",
              o.detail.c_str(), secs);
  if (!o.pass && soft) std::printf("       warning: soft criterion %d missed; measured values above are logged, CI not failed\n", id);
  if (!o.pass && !soft) ++hard_failures;
  std::fflush(stdout);
}

double sup_against(const SolutionField& f, const std::function<double(double)>& exact) {
  double worst = 0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    const double e = std::abs(f.q[j] - exact(f.x(j)));
    worst = std::isnan(e) ? INFINITY : std::max(worst, e);
  }
  return worst;
}

SpectralMeasure atom(double k, double w) { return SpectralMeasure{"atom", {{k, w}}, {}}; }

SpectralMeasure random_positive_measure(std::mt19937& rng, double h) {
  std::uniform_real_distribution<double> u(0, 1);
  SpectralMeasure m;
  m.name = "random";
  const int atoms = static_cast<int>(u(rng) * 3);
  for (int i = 0; i < atoms; ++i) m.atoms.push_back({0.2 + (h - 0.2) * u(rng), 0.1 + 2.9 * u(rng)});
  if (u(rng) < 0.7) {
    const double a = 0.1 + 0.5 * (h - 0.1) * u(rng);
    const double b = a + (h - a) * (0.2 + 0.8 * u(rng));
    m.densities.push_back(DensityPiece{a, b, UniformDensity{0.1 + 1.9 * u(rng)}, 1});
  }
  if (m.empty() || u(rng) < 0.5) {
    const double hc = (0.3 + 0.7 * u(rng)) * h;
    m.densities.push_back(DensityPiece{0.0, hc, CondensateDensity{hc, 0.2 + 0.8 * u(rng)}, 1});
  }
  return m;
}

}  // namespace

int main() {
  std::printf("acceptance suite: 13 criteria\n");

  criterion(1, "closed-form soliton", false, [] {
    const auto t0 = Clock::now();
    double worst = 0;
    for (double t : {0.0, 0.5}) {
      const auto f = q_dyson(atom(1, 2), Grid{-8, 8, 321}, t, 1);
      worst = std::max(worst, sup_against(f, [t](double x) { return oracle::sech2_soliton(1, 2, x, t); }));
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    return Outcome{worst <= 1e-10 && secs < 1.0, fmt("sup error %.2e (tol 1e-10), runtime %.3f s (limit 1 s)", worst, secs)};
  });

  criterion(2, "atomic equivalence", false, [] {
    std::mt19937 rng(7321);
    std::uniform_real_distribution<double> kd(0.3, 1.8), wd(0.1, 4.0);
    double worst = 0;
    for (int n = 1; n <= 3; ++n)
      for (int trial = 0; trial < 3; ++trial) {
        std::vector<Atom> atoms;
        for (int i = 0; i < n; ++i) atoms.push_back({kd(rng), wd(rng)});
        for (double t : {0.0, 0.3}) {
          const Grid g{-8, 8, 161};
          worst = std::max(worst, sup_difference(q_dyson(SpectralMeasure{"r", atoms, {}}, g, t, 1), kay_moses(atoms, g, t)));
        }
      }
    return Outcome{worst <= 1e-12, fmt("max |q_dyson - kay_moses| = %.2e (tol 1e-12) over N = 1, 2, 3", worst)};
  });

  criterion(3, "KdV residual of the condensate", false, [] {
    const auto t0 = Clock::now();
    const auto d = discretize(condensate_measure(1.0), 40);
    const auto r = kdv_residual([&](numkit::Quad x, numkit::Quad t) { return q_point_quad(d, x, t); }, -5, 5, 0.0, 1e-2, 1e-2);
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    const double ratio = r.ratio.value_or(NAN);
    const bool ok = r.coarse.sup <= 1e-3 && ratio >= 8 && ratio <= 32 && secs < 60 && r.coarse.excluded == 0;
    return Outcome{ok, fmt("sup %.2e at 1e-2 (tol 1e-3), %.2e at 5e-3, ratio %.2f (band [8, 32]), runtime %.1f s (limit 60 s)",
                           r.coarse.sup, r.fine->sup, ratio, secs)};
  });

  criterion(4, "universal bounds", false, [] {
    std::size_t violations = 0, samples = 0;
    std::string worst;
    auto check = [&](const SpectralMeasure& m, double h) {
      for (double t : {0.0, 0.5}) {
        const auto f = q_dyson(m, Grid{-15, 15, 601}, t, 40);
        const auto b = bounds_check(f, h, 1e-9);
        violations += b.violations.size();
        samples += f.size();
        worst += fmt(" [h=%.3f t=%.1f min %.4f max %.2e]", h, t, b.min, b.max);
      }
    };
    check(condensate_measure(1.0), 1.0);
    std::mt19937 rng(9001);
    std::uniform_real_distribution<double> hd(0.5, 1.5);
    for (int i = 0; i < 5; ++i) {
      const auto m = random_positive_measure(rng, hd(rng));
      check(m, m.sup_support());
    }
    return Outcome{violations == 0, fmt("%zu violations in %zu samples;", violations, samples) + worst};
  });

  criterion(5, "condensate asymptotic levels", false, [] {
    const auto f = q_dyson(condensate_measure(1.0), Grid{-40, 40, 801}, 0.0, 40);
    const auto lv = asymptotic_levels(f, 1.0);
    const bool left = std::abs(lv.left + 1.0) <= 5e-2, right = std::abs(lv.right) <= 1e-6;
    return Outcome{left && right, fmt("left %.6f (-1 +- 5e-2: %s), right %.3e (0 +- 1e-6: %s); q(40) = %.3e vs -2/40^3 = %.3e",
                                      lv.left, left ? "ok" : "miss", lv.right, right ? "ok" : "miss", f.q.back(),
                                      -2.0 / (40.0 * 40.0 * 40.0))};
  });

  criterion(6, "route equivalence", false, [] {
    double worst = 0;
    const Grid g{-5, 5, 201};
    for (double t : {0.0, 0.2})
      worst = std::max(worst, sup_difference(q_condensate_via_Y(CondensateSpec{1.0, 40, g, t}),
                                             q_dyson(condensate_measure(1.0), g, t, 40)));
    return Outcome{worst <= 1e-6, fmt("sup |q_Y - q_dyson| = %.2e (tol 1e-6)", worst)};
  });

  criterion(7, "bound states by Sturm counting", false, [] {
    const auto d = discretize(SpectralMeasure{"three", {{0.5, 1.0}, {1.0, 1.0}, {1.5, 1.0}}, {}}, 1);
    const auto sc = count_bound_states([&](double x) { return q_point(d, x, 0.0); }, -30, 30, -0.05);
    double worst = sc.count == 3 ? 0.0 : INFINITY;
    const double expected[] = {-2.25, -1.0, -0.25};
    for (int i = 0; i < 3 && sc.count == 3; ++i) worst = std::max(worst, std::abs(sc.eigenvalues[i] - expected[i]));
    return Outcome{sc.count == 3 && worst <= 1e-3, fmt("count %d (expect 3), max eigenvalue error %.2e (tol 1e-3)", sc.count, worst)};
  });

  criterion(8, "Darboux reduction to the determinant", false, [] {
    const Grid g{-5, 5, 201};
    const double ea = sup_difference(darboux_transform(SeedPotential::zero(), atom(1, 2), g, 0.0, 40).field,
                                     q_dyson(atom(1, 2), g, 0.0, 40));
    const double ec = sup_difference(darboux_transform(SeedPotential::zero(), condensate_measure(1.0), g, 0.0, 40).field,
                                     q_dyson(condensate_measure(1.0), g, 0.0, 40));
    return Outcome{ea <= 1e-6 && ec <= 1e-6, fmt("atom %.2e, condensate %.2e (tol 1e-6)", ea, ec)};
  });

  criterion(9, "Darboux composition and inversion", false, [] {
    const Grid g{-5, 5, 201};
    const auto comp = composition_check(SeedPotential::zero(), atom(1, 2), atom(2, 1), g, 0.0, 40);
    const auto dressed = darboux_transform(SeedPotential::zero(), atom(1, 2), g, 0.0, 40);
    const auto back = darboux_invert(dressed, g, 40);
    double round = 0;
    for (double v : back.q) round = std::isnan(v) ? INFINITY : std::max(round, std::abs(v));
    return Outcome{comp.discrepancy <= 1e-5 && round <= 1e-5,
                   fmt("composition %.2e (tol 1e-5), round trip %.2e (tol 1e-5)", comp.discrepancy, round)};
  });

  criterion(10, "exponential localization of the dressing", false, [] {
    const double t = 0.5;
    const auto seed = SeedPotential::solitons({{1.0, 2.0}}, t);
    // the added kappa = 2 soliton sits near x = 7.7 at t = 0.5; fit the tail beyond it
    const auto d = darboux_transform(seed, atom(2, 1), Grid{0, 24, 481}, t, 40);
    const auto rate = fit_decay_rate(d.increment, 12.0);
    const double r = rate.value_or(NAN);
    return Outcome{r >= 2 * 2 * 0.9, fmt("fitted decay rate of q_sigma - q %.4f on [12, 24] (need >= 3.6)", r)};
  });

  criterion(11, "scaling covariance", false, [] {
    const double t = 0.1, c = 2.0;
    const Grid g{-5, 5, 101}, g2{-10, 10, 101};
    const SpectralMeasure atoms{"atoms", {{0.6, 1.0}, {1.1, 0.5}}, {}};
    const SpectralMeasure uniform{"uniform", {}, {DensityPiece{0.4, 0.9, UniformDensity{1.0}, 1}}};
    double worst = 0;
    for (const auto& m : {atoms, uniform}) {
      const auto scaled = q_dyson(scale_pushforward(m, c), g, t, 24);
      const auto base = q_dyson(m, g2, c * c * c * t, 24);
      for (std::size_t j = 0; j < g.n_x; ++j) worst = std::max(worst, std::abs(scaled.q[j] - c * c * base.q[j]));
    }
    return Outcome{worst <= 1e-10, fmt("max |q_c(x,t) - 4 q(2x, 8t)| = %.2e (tol 1e-10)", worst)};
  });

  criterion(12, "leading soliton of the condensate", true, [] {
    const auto d = discretize(condensate_measure(1.0), 40);
    const auto p = leading_soliton_probe([&](double x, double t) { return q_point(d, x, t); }, 1.0, 5.0, -20, 40);
    const bool depth = std::abs(p.depth + 2) <= 0.2, speed = std::abs(p.speed - 2) <= 0.3;
    return Outcome{depth && speed, fmt("trough at x = %.4f, depth %.4f (-2 +- 10%%: %s), speed %.4f (2 +- 15%%: %s)",
                                       p.position, p.depth, depth ? "ok" : "miss", p.speed, speed ? "ok" : "miss")};
  });

  criterion(13, "pole handling", false, [] {
    const auto f = q_dyson(atom(0.5, -1), Grid{-5, 5, 201}, 1.0, 1);
    bool listed = true, local = !f.meta.singular_x.empty();
    for (double x : f.meta.singular_x) local = local && std::abs(x - 1.0) <= 0.1;
    std::size_t nan_count = 0;
    for (std::size_t j = 0; j < f.size(); ++j) {
      if (!std::isnan(f.q[j])) continue;
      ++nan_count;
      bool found = false;
      for (double x : f.meta.singular_x) found = found || x == f.x(j);
      listed = listed && found;
    }
    const bool ok = f.meta.singular && local && listed && nan_count == f.meta.singular_x.size();
    return Outcome{ok, fmt("singular flag %s, %zu flagged samples all within 0.1 of x = 1: %s, NaN only at flagged samples: %s",
                           f.meta.singular ? "set" : "unset", f.meta.singular_x.size(), local ? "yes" : "no",
                           listed && nan_count == f.meta.singular_x.size() ? "yes" : "no")};
  });

  std::printf("hard failures: %d\n", hard_failures);
  return hard_failures == 0 ? 0 : 1;
}
