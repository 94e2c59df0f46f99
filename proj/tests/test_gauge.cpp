#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "intflux/error.hpp"
#include "intflux/faceform.hpp"
#include "intflux/gauge.hpp"

using namespace intflux;

namespace {

CubeBoundaryData random_exact_data(int n, unsigned seed) {
  auto d = CubeBoundaryData::zero({{0.1, -0.2, 0.05}, 0.1}, n);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double s = 0.0;
  for (auto& face : d.density)
    for (double& v : face) s += (v = u(rng));
  const double mean = s / (6.0 * n * n);
  for (auto& face : d.density)
    for (double& v : face) v -= mean;
  return d;
}

}  // namespace

TEST_CASE("surface mesh is a closed quad surface") {
  for (int n : {1, 2, 5}) {
    const auto& m = surface_mesh(n);
    CHECK(m.n_cells() == 6 * n * n);
    CHECK(m.edges().size() == static_cast<std::size_t>(12 * n * n));
    // Euler characteristic of the sphere
    CHECK(static_cast<long>(m.vertices().size()) - static_cast<long>(m.edges().size()) + m.n_cells() == 2);
    for (const auto& e : m.edges()) CHECK(e.left != e.right);
    for (const auto& ve : m.vertex_edges()) CHECK((ve.size() == 3 || ve.size() == 4));
  }
}

TEST_CASE("edge orientation agrees with the outward normal") {
  // Stokes on each cell: circulation of A = (0, x, 0) equals the flux of curl A = e_z
  const Cube cube{{0.2, 0.1, -0.3}, 0.2};
  const int n = 4;
  const auto a = boundary_form_from_ambient([](const Vec3& p) { return Vec3{0.0, p.x, 0.0}; }, cube, n);
  const auto dal = surface_d(a);
  const double h2 = std::pow(cube.side / n, 2);
  for (int f = 0; f < 6; ++f)
    for (int k = 0; k < n * n; ++k) {
      const double expect = face_axis(f) == 2 ? face_sign(f) * h2 : 0.0;
      CHECK(dal[f * n * n + k] == doctest::Approx(expect).scale(h2).epsilon(1e-12));
    }

  const auto b = boundary_form_from_ambient(
      [](const Vec3& p) { return Vec3{p.y * p.z, -p.x * p.x, std::sin(p.y)}; }, cube, 3);
  double tot = 0.0;
  for (double v : surface_d(b)) tot += v;
  CHECK(std::abs(tot) < 1e-15);
}

TEST_CASE("gauge fixing reproduces the cell fluxes") {
  for (int n : {4, 16}) {
    const auto data = random_exact_data(n, 17u + n);
    const auto g = gauge_fix(data);
    CHECK(g.d_residual < 1e-8);
    CHECK(g.codiff_residual < 1e-8);
    const auto phi = cell_fluxes(data);
    const auto dal = surface_d(g.form);
    for (std::size_t c = 0; c < phi.size(); ++c) CHECK(dal[c] == doctest::Approx(phi[c]).scale(1e-3));
  }
}

TEST_CASE("zero data gives the zero form") {
  const auto g = gauge_fix(CubeBoundaryData::zero({{0, 0, 0}, 0.1}, 6));
  for (double v : g.form.alpha) CHECK(v == 0.0);
  CHECK(g.d_residual == 0.0);
}

TEST_CASE("non-exact data is rejected") {
  auto d = CubeBoundaryData::zero({{0, 0, 0}, 0.1}, 4);
  d.density[1][5] = 1.0 / std::pow(d.cell_size(), 2);
  CHECK_THROWS_AS(gauge_fix(d), NotExact);
  CHECK_NOTHROW(gauge_fix(d, 2.0));
}

TEST_CASE("skeleton restriction and smoothing keep face totals") {
  const auto f = coulomb_superposition({{{0.013, 0.021, -0.017}, 1}}, CurlBackground{{0.3, -0.1, 0.2}, 0.5});
  const auto lat = build_lattice(0.2, {0.05, 0.05, 0.05});
  const auto dec = classify(f, lat, {8});
  const auto ff = restrict_to_skeleton(f, dec, 8);
  REQUIRE(ff.totals.size() == dec.skeleton.faces.size());
  for (std::size_t i = 0; i < ff.totals.size(); ++i)
    CHECK(ff.totals[i] == doctest::Approx(dec.face_flux[i]).scale(1.0).epsilon(1e-6));
  for (std::size_t s = 0; s < lat.size(); ++s) {
    CHECK(ff.cube_total(s) == doctest::Approx(dec.fluxes[s]).scale(1.0).epsilon(1e-6));
    CHECK(ff.cube_data(s).total() == doctest::Approx(ff.cube_total(s)).scale(1.0).epsilon(1e-12));
  }

  SmoothingReport rep;
  const auto sm = smooth_skeleton(ff, 0.2 / 8, &rep);
  CHECK(rep.multiplicative + rep.additive == static_cast<int>(ff.totals.size()));
  for (std::size_t i = 0; i < ff.totals.size(); ++i) {
    double s = 0.0;
    for (double v : sm.face(i)) s += v * sm.cell_area();
    CHECK(std::abs(s - ff.totals[i]) <= 1e-15 * (1.0 + std::abs(ff.totals[i])));
  }
  CHECK_THROWS_AS(smooth_skeleton(ff, 0.06), InvalidInput);
  CHECK_THROWS_AS(smooth_skeleton(ff, 0.0), InvalidInput);
}

TEST_CASE("smoothing leaves constant faces alone") {
  const AnalyticField cst({}, ConstantBackground{{0.2, -1.0, 0.5}});
  const auto lat = build_lattice(0.2, {0.01, 0.02, 0.03});
  const auto ff = restrict_to_skeleton(cst, classify(cst, lat, {8}), 8);
  const auto sm = smooth_skeleton(ff, 0.04);
  for (std::size_t i = 0; i < ff.density.size(); ++i) CHECK(sm.density[i] == doctest::Approx(ff.density[i]));
}

TEST_CASE("restriction refuses a charge on the skeleton") {
  const auto lat = build_lattice(0.2, {});
  const auto f = coulomb_superposition({{{0.0, 0.1, 0.1}, 1}});
  const auto dec = classify(f, lat, {8});
  CHECK_THROWS_AS(restrict_to_skeleton(f, dec, 8), IllConditionedQuadrature);
}
