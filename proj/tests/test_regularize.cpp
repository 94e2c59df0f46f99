#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "intflux/error.hpp"
#include "intflux/quadrature.hpp"
#include "intflux/regularize.hpp"

using namespace intflux;

namespace {

const QuadratureSpec kQuad{8};

// L2 norm of a field over the union of lattice cubes by a tensor Gauss rule
double region_l2(const VectorField& f, const CubeLattice& lat) {
  const auto& g = gauss_legendre(4);
  double s = 0.0;
  for (std::size_t c = 0; c < lat.size(); ++c) {
    const Vec3 lo = lat.cube(c).lo();
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int e = 0; e < 4; ++e) {
          const Vec3 x = lo + 0.5 * lat.eps * Vec3{1 + g.nodes[a], 1 + g.nodes[b], 1 + g.nodes[e]};
          const Vec3 v = f.eval(x);
          s += g.weights[a] * g.weights[b] * g.weights[e] * 0.125 * std::pow(lat.eps, 3) * dot(v, v);
        }
  }
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("staggered field fluxes are exact") {
  StaggeredField F({-0.5, -0.4, -0.3}, 0.1, {6, 5, 4});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int a = 0; a < 3; ++a)
    for (double& v : F.flux_array(a)) v = u(rng);
  // a grid face
  AxisRect r{1, -0.4 + 2 * 0.1, -0.3 + 0.1, -0.3 + 0.2, -0.5 + 0.3, -0.5 + 0.4};
  CHECK(*F.exact_rect_flux(r) == doctest::Approx(F.flux(1, 3, 2, 1)));
  // box of whole cells: outward flux equals the summed divergence
  const Cube box{{-0.5 + 0.3, -0.4 + 0.3, -0.3 + 0.2}, 0.2};
  double div = 0.0;
  for (int k = 1; k < 3; ++k)
    for (int j = 2; j < 4; ++j)
      for (int i = 2; i < 4; ++i) div += F.divergence(i, j, k);
  CHECK(cube_flux(F, box) == doctest::Approx(div).epsilon(1e-12));
  // and Gauss quadrature of the pointwise values agrees (the field is affine per cell)
  const PointwiseView pw(F);
  CHECK(cube_flux(pw, box, {4}) == doctest::Approx(div).epsilon(1e-10));
  CHECK_THROWS_AS(F.eval({0.2, 0, 0}), OutOfRange);

  StaggeredField U({0, 0, 0}, 0.5, {2, 2, 2});
  for (double& v : U.flux_array(2)) v = 0.25 * 3.0;
  const auto S = U.to_sampled();
  for (const auto& v : S.samples()) CHECK(norm(v - Vec3{0, 0, 3}) < 1e-14);
}

TEST_CASE("point charge rectangle flux") {
  const Singularity q{{0.05, -0.02, 0.01}, 1};
  const Cube c{{0, 0, 0}, 0.3};
  double total = 0.0;
  for (int f = 0; f < 6; ++f) total += face_sign(f) * point_charge_rect_flux(q, c.face(f));
  CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
  const auto X = coulomb_superposition({q});
  const AxisRect r{2, 0.2, -0.1, 0.3, 0.0, 0.15};
  CHECK(point_charge_rect_flux({q.position, -2}, r, 3.0) ==
        doctest::Approx(-6.0 * rect_flux(X, r, {16}, {})).epsilon(1e-12));
}

TEST_CASE("zero field assembles to zero") {
  const AnalyticField zero({});
  const auto lat = build_lattice(0.25, {0.01, 0.02, -0.03});
  const auto reg = assemble(zero, classify(zero, lat, kQuad));
  CHECK(reg.singularities.empty());
  for (int a = 0; a < 3; ++a)
    for (double v : reg.field->flux_array(a)) CHECK(v == 0.0);
  CHECK(approximation_error(zero, reg, 1.0) == 0.0);

  const AnalyticField cst({}, ConstantBackground{{0.3, -0.4, 0.0}});
  const double vol = lat.size() * std::pow(0.25, 3);
  CHECK(approximation_error(cst, reg, 1.0) == doctest::Approx(0.5 * vol).epsilon(1e-12));
  CHECK(approximation_error(cst, reg, 2.0) == doctest::Approx(0.5 * std::sqrt(vol)).epsilon(1e-12));
  CHECK_THROWS_AS(approximation_error(cst, reg, 0.5), InvalidInput);
  const AnalyticField other_unit({}, NoBackground{}, {2.0});
  CHECK_THROWS_AS(approximation_error(other_unit, reg, 1.0), InvalidInput);
}

TEST_CASE("divergence-free field") {
  // gradient of a harmonic quadratic plus a constant
  const LinearField harm({{{1.0, 0.5, 0.0}, {0.5, 1.0, 0.0}, {0.0, 0.0, -2.0}}}, {0.3, 0.2, -0.1});
  const auto lat = build_lattice(0.25, {0.02, -0.01, 0.015});
  const auto dec = classify(harm, lat, kQuad);
  const auto reg = assemble(harm, dec);
  CHECK(reg.singularities.empty());
  for (const auto& c : reg.cubes) {
    CHECK_FALSE(c.bad);
    CHECK(c.d_residual < 1e-8);
    CHECK(c.codiff_residual < 1e-8);
    CHECK(c.laplace_residual < 1e-8);
    CHECK(c.max_cell_divergence < 1e-10);
  }
  CHECK(reg.exterior_residual < 1e-8);
  const double rel = approximation_error(harm, reg, 2.0) / region_l2(harm, lat);
  MESSAGE("relative L2 distance " << rel);
  CHECK(rel < 0.15);
  const auto scan = divfree_flux_criterion(*reg.field, 30, 5, 1e-8, 4, kQuad);
  CHECK(scan.divergence_free);
}

TEST_CASE("single Coulomb charge") {
  const auto q = coulomb_superposition({{{0, 0, 0}, 1}});
  const auto choice = select_translation(q, 0.25, 1, kQuad, {4});
  const auto reg = assemble(q, choice.decomposition);
  REQUIRE(reg.singularities.size() == 1);
  CHECK(reg.singularities[0].degree == 1);
  const int bad = choice.decomposition.bad_cubes().front();
  CHECK(norm(reg.singularities[0].position - choice.decomposition.lattice.sites[bad]) == 0.0);
  CHECK(sup_norm(reg.singularities[0].position) < 0.125);
  for (const auto& c : reg.cubes) CHECK(c.max_cell_divergence < 1e-8);
  // concentric cubes at least one output cell wide hold the whole charge
  const Vec3 c = reg.singularities[0].position;
  for (double frac : {0.25, 0.5, 0.75, 1.0})
    CHECK(cube_flux(*reg.field, {c, frac * 0.25}, kQuad) == doctest::Approx(1.0).epsilon(1e-6));
  const auto scan = integer_flux_scan(*reg.field, 100, 10, 1e-3, 1, kQuad);
  CHECK(scan.violations == 0);
  CHECK(scan.skipped < scan.entries.size());
}

TEST_CASE("patching across shared faces") {
  // both neighbours of an interior face see the same stored data: the flux
  // through the face sampled from the assembled grid equals the smoothed total
  const auto f = coulomb_superposition({{{0.07, -0.03, 0.02}, 1}}, CurlBackground{{0.2, 0.1, -0.3}, 0.4});
  const auto lat = build_lattice(0.25, {0.04, 0.03, -0.02});
  const auto dec = classify(f, lat, kQuad);
  RegularizeOptions opt;
  const auto reg = assemble(f, dec, opt);
  const auto raw = restrict_to_skeleton(f, dec, opt.n_f, opt.cell_quad);
  const auto sm = smooth_skeleton(raw, reg.delta);
  for (std::size_t i = 0; i < dec.skeleton.faces.size(); ++i) {
    const auto& face = dec.skeleton.faces[i];
    if (face.lower < 0 || face.upper < 0) continue;
    const double got = *reg.field->exact_rect_flux(face.rect);
    CHECK(got == doctest::Approx(sm.totals[i]).scale(1.0).epsilon(1e-12));
  }
}

TEST_CASE("mollification keeps the charge") {
  const auto q = coulomb_superposition({{{0.01, 0.02, -0.015}, -1}}, ConstantBackground{{0.1, 0.0, 0.2}});
  const auto lat = build_lattice(0.25, {0.0, 0.0, 0.0});
  RegularizeOptions opt;
  opt.grid_per_cube = 16;
  opt.delta = 0.24 * 0.25;
  const auto reg = assemble(q, classify(q, lat, kQuad), opt);
  CHECK(reg.mollified);
  REQUIRE(reg.singularities.size() == 1);
  CHECK(reg.singularities[0].degree == -1);
  // the charge sits near the shared corner, so all eight cubes are bad; the
  // seven of zero total are extended harmonically
  int degenerate = 0;
  for (const auto& cd : reg.cubes) {
    degenerate += cd.degenerate;
    CHECK(cd.max_cell_divergence < 1e-8);
  }
  CHECK(degenerate == 7);
  const Vec3 c = reg.singularities[0].position;
  CHECK(cube_flux(*reg.field, {c, 0.6 * 0.25}, kQuad) == doctest::Approx(-1.0).epsilon(1e-6));
  const auto scan = integer_flux_scan(*reg.field, 40, 5, 1e-3, 2, kQuad);
  CHECK(scan.violations == 0);
}

TEST_CASE("option checks") {
  const AnalyticField zero({});
  const auto dec = classify(zero, build_lattice(0.25, {}), kQuad);
  RegularizeOptions bad;
  bad.grid_per_cube = 5;
  CHECK_THROWS_AS(assemble(zero, dec, bad), InvalidInput);
  RegularizeOptions bad_m;
  bad_m.m = 30;
  CHECK_THROWS_AS(assemble(zero, dec, bad_m), InvalidInput);
}
