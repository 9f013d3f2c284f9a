#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "soliton_forge/condensate.hpp"
#include "soliton_forge/dyson.hpp"
#include "soliton_forge/error.hpp"

using namespace soliton_forge;

namespace {

ErrorCode code_of(const auto& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::invalid_argument;
}

const SpectralMeasure kAtom{"atom", {{1.0, 2.0}}, {}};

double sup_vs(const SolutionField& f, const auto& exact) {
  double worst = 0;
  for (std::size_t j = 0; j < f.size(); ++j) worst = std::max(worst, std::abs(f.q[j] - exact(f.x(j))));
  return worst;
}

}  // namespace

TEST_CASE("kernel for the empty measure and a single atom") {
  const auto empty = evolve(discretize(SpectralMeasure{}, 4), 0.0);
  CHECK(build_kernel(empty, 0.0).k.size() == 0);
  CHECK(log_tau(empty, 0.0).log_abs == 0.0);

  const auto one = evolve(discretize(kAtom, 1), 0.0);
  CHECK(std::abs(build_kernel(one, 0.0).entry(0, 0) - 1.0) < 1e-15);
  CHECK(std::abs(log_tau(one, 0.0).log_abs - std::log(2.0)) < 1e-15);
  CHECK(build_kernel(one, 200.0).entry(0, 0) < 1e-170);
  CHECK(std::abs(log_tau(one, 200.0).log_abs) < 1e-170);
}

TEST_CASE("signed atom: tau vanishes at x = t") {
  const auto d = discretize(SpectralMeasure{"pole", {{0.5, -1.0}}, {}}, 1);
  for (double t : {0.0, 1.0, 2.5}) {
    CHECK(code_of([&] { log_tau(evolve(d, t), t); }) == ErrorCode::singular_determinant);
    // away from the pole tau = 1 - e^{t - x} is nonzero with the expected sign
    CHECK(log_tau(evolve(d, t), t + 1).sign == 1);
    CHECK(log_tau(evolve(d, t), t - 1).sign == -1);
  }
}

TEST_CASE("empty measure gives the zero field") {
  const auto f = q_dyson(SpectralMeasure{}, Grid{-5, 5, 11}, 0.3, 8);
  for (double q : f.q) CHECK(q == 0.0);
}

TEST_CASE("single atom against the sech^2 closed form") {
  const Grid g{-8, 8, 321};
  for (double t : {0.0, 0.5}) {
    const auto exact = [t](double x) { return oracle::sech2_soliton(1.0, 2.0, x, t); };
    CHECK(sup_vs(q_dyson(kAtom, g, t, 1), exact) < 1e-10);
    CHECK(sup_vs(q_dyson(kAtom, g, t, 1, Scheme::fd), exact) < 1e-3);
  }
  CHECK(std::abs(q_point(discretize(kAtom, 1), 0.0, 0.0) + 2.0) < 1e-10);
  const double far = q_point(discretize(kAtom, 1), 10.0, 0.0);
  CHECK(std::abs(far - oracle::sech2_soliton(1.0, 2.0, 10.0, 0.0)) < 1e-12);
  CHECK(far == doctest::Approx(-8 * std::exp(-20.0)).epsilon(1e-6));
  CHECK(std::abs(soliton_closed_form(1.0, 2.0, 0.3, 0.2) - oracle::sech2_soliton(1.0, 2.0, 0.3, 0.2)) < 1e-15);
}

TEST_CASE("fd scheme converges to the trace scheme at fourth order") {
  const auto d = discretize(SpectralMeasure{"two", {{0.7, 1.0}, {1.2, 0.5}}, {}}, 1);
  const auto trace = q_dyson(d, Grid{-4, 4, 81}, 0.1);
  const auto fd1 = q_dyson(d, Grid{-4, 4, 81}, 0.1, Scheme::fd);
  const auto fd2 = q_dyson(d, Grid{-4, 4, 161}, 0.1, Scheme::fd);
  const double e1 = sup_difference(trace, fd1);
  double e2 = 0;
  for (std::size_t j = 0; j < trace.size(); ++j) e2 = std::max(e2, std::abs(trace.q[j] - fd2.q[2 * j]));
  CHECK(e1 / e2 > 8);
  CHECK(e1 / e2 < 32);
}

TEST_CASE("N-soliton fields against the subset-sum tau") {
  std::mt19937 rng(20240611);
  std::uniform_real_distribution<double> kd(0.3, 1.6), wd(0.2, 3.0);
  const Grid g{-6, 6, 121};
  for (int n = 1; n <= 4; ++n) {
    std::vector<Atom> atoms;
    for (int i = 0; i < n; ++i) atoms.push_back({kd(rng), wd(rng)});
    for (double t : {-0.2, 0.0, 0.3}) {
      const auto km = kay_moses(atoms, g, t);
      const auto exact = [&](double x) { return static_cast<double>(oracle::hirota_q(atoms, x, t)); };
      CHECK(sup_vs(km, exact) < 1e-9);
      const auto qd = q_dyson(SpectralMeasure{"r", atoms, {}}, g, t, 4);
      CHECK(sup_difference(qd, km) < 1e-12);
    }
  }
}

TEST_CASE("two separated solitons have depths -2 and -8") {
  const std::vector<Atom> atoms{{1.0, 2.0}, {2.0, 1.0}};
  for (double t : {-5.0, 5.0}) {
    const auto f = kay_moses(atoms, Grid{-200, 200, 40001}, t);
    std::vector<double> minima;
    for (std::size_t j = 1; j + 1 < f.size(); ++j)
      if (f.q[j] < f.q[j - 1] && f.q[j] <= f.q[j + 1] && f.q[j] < -0.5) minima.push_back(f.q[j]);
    REQUIRE(minima.size() == 2);
    std::sort(minima.begin(), minima.end());
    CHECK(minima[0] == doctest::Approx(-8.0).epsilon(0.01));
    CHECK(minima[1] == doctest::Approx(-2.0).epsilon(0.01));
  }
}

TEST_CASE("condensate on the far left needs more than binary64") {
  const auto d = discretize(condensate_measure(1.0), 40);
  CHECK(precision_for(d, 0.0, 0.0) == numkit::Precision::binary64);
  CHECK(precision_for(d, -30.0, 0.0) != numkit::Precision::binary64);
  CHECK(q_point(d, -30.0, 0.0) == doctest::Approx(-1.0).epsilon(0.02));
  CHECK(static_cast<double>(q_point_quad(d, numkit::Quad(0.5), numkit::Quad(0.1))) ==
        doctest::Approx(q_point(d, 0.5, 0.1)).epsilon(1e-12));
}

TEST_CASE("grid left end beyond the exponent guard is truncated with a warning") {
  const auto f = q_dyson(kAtom, Grid{-400, 0, 401}, 0.0, 1);
  CHECK_FALSE(f.meta.warnings.empty());
  CHECK(f.grid.x_min > -400);
  CHECK(f.q.back() == doctest::Approx(-2.0));
}

TEST_CASE("pole flags only its neighbourhood") {
  const auto f = q_dyson(SpectralMeasure{"pole", {{0.5, -1.0}}, {}}, Grid{0, 2, 201}, 1.0, 1);
  CHECK(f.meta.singular);
  CHECK_FALSE(f.meta.nonnegative);
  REQUIRE_FALSE(f.meta.singular_x.empty());
  for (double x : f.meta.singular_x) CHECK(std::abs(x - 1.0) < 0.05);
  for (std::size_t j = 0; j < f.size(); ++j)
    if (std::abs(f.x(j) - 1.0) > 0.05) CHECK(std::isfinite(f.q[j]));
}

TEST_CASE("CSV layout") {
  const auto f = q_dyson(SpectralMeasure{}, Grid{0, 1, 3}, 0.0, 1);
  CHECK(to_csv(f) == "x,q\n0,0\n0.5,0\n1,0\n");
  CHECK(format_number(-1.9801325816948796) == "-1.9801325816948796");
  CHECK(format_number(NAN) == "nan");
}

TEST_CASE("grid validation") {
  CHECK(code_of([] { Grid{1, 0, 10}.check(); }) == ErrorCode::invalid_argument);
  CHECK(code_of([] { Grid{0, 1, 1}.check(); }) == ErrorCode::invalid_argument);
  CHECK(Grid{-1, 1, 3}.x(2) == 1.0);
}
