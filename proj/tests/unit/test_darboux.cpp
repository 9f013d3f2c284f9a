#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "soliton_forge/condensate.hpp"
#include "soliton_forge/darboux.hpp"
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

SpectralMeasure atom(double k, double w) { return SpectralMeasure{"atom", {{k, w}}, {}}; }

const Grid kGrid{-5, 5, 101};

double sup_abs(const SolutionField& f) {
  double m = 0;
  for (double v : f.q) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

TEST_CASE("zero seed dressed by an atom is the 1-soliton") {
  for (double t : {0.0, 0.3}) {
    const auto d = darboux_transform(SeedPotential::zero(), atom(1, 2), kGrid, t, 40);
    for (std::size_t j = 0; j < kGrid.n_x; ++j)
      CHECK(std::abs(d.field.q[j] - oracle::sech2_soliton(1, 2, kGrid.x(j), t)) < 1e-8);
    CHECK(d.field.meta.method == "darboux");
  }
}

TEST_CASE("trace and fd increments agree") {
  DarbouxOptions fd;
  fd.scheme = Scheme::fd;
  const auto seed = SeedPotential::solitons({{1.0, 2.0}}, 0.0);
  const Grid g{-5, 5, 401};
  const auto a = darboux_transform(seed, atom(1.5, 1), g, 0.0, 40);
  const auto b = darboux_transform(seed, atom(1.5, 1), g, 0.0, 40, fd);
  CHECK(sup_difference(a.field, b.field) < 1e-5);
}

TEST_CASE("zero seed dressed by the condensate matches the determinant") {
  const auto d = darboux_transform(SeedPotential::zero(), condensate_measure(1.0), kGrid, 0.0, 40);
  const auto ref = q_dyson(condensate_measure(1.0), kGrid, 0.0, 40);
  CHECK(sup_difference(d.field, ref) < 1e-6);
}

TEST_CASE("empty dressing leaves the seed unchanged") {
  const auto seed = SeedPotential::solitons({{1.0, 2.0}}, 0.0);
  const auto d = darboux_transform(seed, SpectralMeasure{"none", {}, {}}, kGrid, 0.0, 40);
  for (std::size_t j = 0; j < kGrid.n_x; ++j) {
    CHECK(d.field.q[j] == seed(kGrid.x(j)));
    CHECK(d.increment.q[j] == 0.0);
  }
  // the re-tabulated seed is sampled at Jost nodes that match the grid up to rounding
  const auto back = darboux_invert(d, kGrid, 40);
  for (std::size_t j = 0; j < kGrid.n_x; ++j) CHECK(std::abs(back.q[j] - seed(kGrid.x(j))) < 1e-14);
}

TEST_CASE("dressing then undressing an atom returns the zero field") {
  const auto d = darboux_transform(SeedPotential::zero(), atom(1, 2), kGrid, 0.0, 40);
  const auto back = darboux_invert(d, kGrid, 40);
  CHECK(sup_abs(back) < 1e-5);
  CHECK(back.meta.method == "darboux-inverse");
}

TEST_CASE("removing one atom of a two-soliton leaves the other") {
  // tau of the residual problem is tiny on the far left, so this needs a fine Jost step
  DarbouxOptions fine;
  fine.ds = 2.5e-4;
  const auto two = darboux_transform(SeedPotential::zero(), combine(atom(1, 2), atom(2, 1)), kGrid, 0.0, 40, fine);
  CHECK(sup_difference(two.field, kay_moses({{1, 2}, {2, 1}}, kGrid, 0.0)) < 1e-8);
  const auto one = darboux_transform(two.as_seed(), atom(2, -1), kGrid, 0.0, 40, fine);
  CHECK(sup_difference(one.field, kay_moses({{1, 2}}, kGrid, 0.0)) < 1e-5);
}

TEST_CASE("composition of two atoms") {
  const auto r = composition_check(SeedPotential::zero(), atom(1, 2), atom(2, 1), kGrid, 0.0, 40);
  CHECK(r.discrepancy <= 1e-5);
  CHECK(r.pass);
  const auto km = kay_moses({{1, 2}, {2, 1}}, kGrid, 0.0);
  CHECK(sup_difference(r.one_step, km) < 1e-5);
  CHECK(sup_difference(r.two_step, km) < 1e-5);

  const auto none = composition_check(SeedPotential::zero(), atom(1, 2), SpectralMeasure{"none", {}, {}}, kGrid, 0.0, 40);
  CHECK(none.discrepancy == 0.0);
}

TEST_CASE("soliton injected into the condensate") {
  const auto r = composition_check(SeedPotential::zero(), condensate_measure(1.0), atom(1.5, 1), kGrid, 0.0, 40, 1e-4);
  CHECK(r.discrepancy <= 1e-4);
  const auto ref = q_dyson(combine(condensate_measure(1.0), atom(1.5, 1)), kGrid, 0.0, 40);
  CHECK(sup_difference(r.one_step, ref) < 1e-6);
}

TEST_CASE("data positivity") {
  // removing more than the seed holds
  const auto seed = SeedPotential::solitons({{1.0, 2.0}}, 0.0);
  CHECK(code_of([&] { darboux_transform(seed, atom(1, -3), kGrid, 0.0, 40); }) ==
        ErrorCode::data_positivity_violated);
  CHECK(code_of([&] { darboux_transform(SeedPotential::zero(), atom(0.5, -1), kGrid, 1.0, 40); }) ==
        ErrorCode::data_positivity_violated);
  CHECK(check_data_positivity(SpectralMeasure{"rho", {{1.0, 2.0}}, {}}, atom(1, -2)));
  CHECK_FALSE(check_data_positivity(std::nullopt, atom(1, -2)));
  CHECK(check_data_positivity(std::nullopt, atom(1, 2)));
}

TEST_CASE("seed time must match") {
  const auto seed = SeedPotential::solitons({{1.0, 2.0}}, 0.5);
  CHECK(code_of([&] { darboux_transform(seed, atom(1.5, 1), kGrid, 0.0, 40); }) == ErrorCode::invalid_argument);
}
