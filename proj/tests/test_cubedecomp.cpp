#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "intflux/cubedecomp.hpp"
#include "intflux/error.hpp"

using namespace intflux;

namespace {

const QuadratureSpec kQuad{8};

TranslationOptions few(int n = 4) {
  TranslationOptions o;
  o.n_samples = n;
  return o;
}

}  // namespace

TEST_CASE("lattice enumeration") {
  const auto lat = build_lattice(0.25, {});
  REQUIRE(lat.size() == 8);
  for (const auto& s : lat.sites) {
    CHECK(std::abs(std::abs(s.x) - 0.125) < 1e-15);
    CHECK(std::abs(std::abs(s.y) - 0.125) < 1e-15);
    CHECK(std::abs(std::abs(s.z) - 0.125) < 1e-15);
  }
  CHECK_THROWS_AS(build_lattice(0.4, {}), InvalidInput);
  CHECK_THROWS_AS(build_lattice(0.1, {0.2, 0, 0}), InvalidInput);

  const auto base = build_lattice(0.1, {});
  const auto shifted = build_lattice(0.1, {0.05, 0, 0});
  REQUIRE(base.size() == shifted.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    CHECK(shifted.sites[i].x == doctest::Approx(base.sites[i].x + 0.05));
    CHECK(shifted.sites[i].y == base.sites[i].y);
  }
  for (std::size_t i = 0; i < shifted.size(); ++i) CHECK(shifted.cube(i).inside_unit_ball());
  for (std::size_t i = 1; i < base.size(); ++i) CHECK(base.index[i - 1] < base.index[i]);
}

TEST_CASE("skeleton stores every face once") {
  const auto lat = build_lattice(0.15, {0.01, -0.02, 0.03});
  const auto sk = build_skeleton(lat);
  // oracle: a face is named by its axis and the lattice index of the cell above it
  std::set<std::array<int, 4>> expect;
  for (const auto& idx : lat.index)
    for (int d = 0; d < 3; ++d) {
      expect.insert({d, idx[0], idx[1], idx[2]});
      expect.insert({d, idx[0] + (d == 0), idx[1] + (d == 1), idx[2] + (d == 2)});
    }
  std::set<std::array<int, 4>> got;
  for (const auto& f : sk.faces) {
    const int s = f.upper >= 0 ? f.upper : f.lower;
    auto idx = lat.index[s];
    if (f.upper < 0) ++idx[f.axis];
    got.insert({f.axis, idx[0], idx[1], idx[2]});
  }
  CHECK(got.size() == sk.faces.size());
  CHECK(got == expect);
  for (std::size_t s = 0; s < lat.size(); ++s)
    for (int f = 0; f < 6; ++f) {
      const auto& face = sk.faces[sk.faces_of[s][f]];
      CHECK(face.axis == face_axis(f));
      CHECK((face_sign(f) > 0 ? face.lower : face.upper) == static_cast<int>(s));
    }
}

TEST_CASE("classification of simple fields") {
  const auto lat = build_lattice(0.1, {0.013, 0.021, -0.017});
  const auto one = coulomb_superposition({{{0, 0, 0}, 1}});
  const auto dec = classify(one, lat, kQuad);
  REQUIRE(dec.n_bad() == 1);
  const int b = dec.bad_cubes().front();
  CHECK(sup_norm(lat.sites[b]) < 0.05 + 0.03);
  CHECK(dec.fluxes[b] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(dec.degrees[b] == 1);

  const AnalyticField curl({}, CurlBackground{{1, 2, 3}, 1.5});
  CHECK(classify(curl, lat, kQuad).n_bad() == 0);

  // +1 and -1 inside the same cube
  const Vec3 c = lat.sites[lat.size() / 2];
  const auto pair = coulomb_superposition({{c + Vec3{0.01, 0.0, 0.01}, 1}, {c - Vec3{0.01, 0.02, 0.0}, -1}});
  const auto pd = classify(pair, lat, kQuad);
  CHECK(pd.n_bad() == 0);
}

TEST_CASE("partition and sum rule") {
  const auto f = coulomb_superposition({{{0.11, 0.02, -0.03}, 2}, {{-0.2, 0.13, 0.1}, -1}},
                                       ConstantBackground{{0.3, 0, -0.2}});
  const auto lat = build_lattice(0.1, {0.045, 0.045, 0.045});
  const auto dec = classify(f, lat, kQuad);
  std::size_t good = 0, bad = 0;
  for (auto l : dec.labels) (l == CubeLabel::good ? good : bad)++;
  CHECK(good + bad == lat.size());
  CHECK(bad == 2);
  double total = 0.0;
  for (double v : dec.fluxes) total += v;
  double boundary = 0.0;
  for (std::size_t i = 0; i < dec.skeleton.faces.size(); ++i) {
    const auto& face = dec.skeleton.faces[i];
    if (face.lower >= 0 && face.upper >= 0) continue;
    boundary += (face.lower >= 0 ? 1.0 : -1.0) * dec.face_flux[i];
  }
  CHECK(total == doctest::Approx(boundary).epsilon(1e-10).scale(1.0));
  CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("ill-conditioned cubes are marked bad") {
  const auto lat = build_lattice(0.2, {});
  // charge on the shared face x = 0 of two cubes
  const auto f = coulomb_superposition({{{0.0, 0.1, 0.1}, 1}});
  const auto dec = classify(f, lat, kQuad);
  int flagged = 0;
  for (std::size_t i = 0; i < lat.size(); ++i)
    if (dec.ill_conditioned[i]) {
      ++flagged;
      CHECK(dec.labels[i] == CubeLabel::bad);
    }
  CHECK(flagged == 2);
}

TEST_CASE("translation selection") {
  const AnalyticField curl({}, CurlBackground{{0.5, -0.2, 0.1}, 1.0});
  const auto c1 = select_translation(curl, 0.2, 7, kQuad, few());
  for (const auto& cand : c1.candidates) CHECK(cand.survived);
  CHECK(c1.score.score >= 0.0);
  CHECK(norm(c1.a) <= 0.2);

  const auto one = coulomb_superposition({{{0, 0, 0}, 1}});
  const auto c2 = select_translation(one, 0.2, 3, kQuad, few());
  const auto& dec = c2.decomposition;
  const int site = dec.lattice.find(dec.lattice.cell_of({0, 0, 0}));
  REQUIRE(site >= 0);
  CHECK(dec.fluxes[site] == doctest::Approx(1.0).epsilon(1e-6));

  const AnalyticField cst({}, ConstantBackground{{0.2, -1.0, 0.5}});
  const auto c3 = select_translation(cst, 0.15, 5, kQuad, few(2));
  CHECK(c3.score.score < 1e-12);

  CHECK_THROWS_AS(select_translation(one, 0.5, 1, kQuad, few(1)), InvalidInput);
}

TEST_CASE("no integral translation for a source field") {
  const LinearField lin(identity3());
  try {
    select_translation(lin, 0.2, 1, kQuad, few(3));
    FAIL("expected an exception");
  } catch (const NoValidTranslation& e) {
    CHECK(e.best_deficit() == doctest::Approx(3 * 0.2 * 0.2 * 0.2).epsilon(1e-9));
  }
}

TEST_CASE("translations too close to a charge are discarded") {
  // with n_q = 2 the guard is half a cube side, which every off-centre point violates
  const auto one = coulomb_superposition({{{0.0123, 0.0, 0.0}, 1}});
  try {
    select_translation(one, 0.2, 1, {2}, few(3));
    FAIL("expected an exception");
  } catch (const NoValidTranslation& e) {
    CHECK(std::isinf(e.best_deficit()));
  }
}

TEST_CASE("bad volume sweep") {
  const std::vector<double> eps{0.2, 0.1, 0.05};
  const auto one = coulomb_superposition({{{0.01, -0.02, 0.015}, 1}});
  const auto t1 = bad_volume_sweep(one, eps, 11, kQuad, few(2));
  REQUIRE(t1.slope.has_value());
  CHECK(*t1.slope == doctest::Approx(3.0).epsilon(1e-12));
  for (const auto& r : t1.rows) CHECK(r.n_bad == 1);

  const AnalyticField curl({}, CurlBackground{{0.5, -0.2, 0.1}, 1.0});
  const auto t2 = bad_volume_sweep(curl, eps, 11, kQuad, few(1));
  CHECK_FALSE(t2.slope.has_value());

  CHECK_THROWS_AS(bad_volume_sweep(one, {0.1, 0.2, 0.05}, 1, kQuad, few(1)), InvalidInput);
  CHECK_THROWS_AS(bad_volume_sweep(one, {0.1, 0.05}, 1, kQuad, few(1)), InvalidInput);
}
