#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "intflux/error.hpp"
#include "intflux/field.hpp"
#include "intflux/flux.hpp"

using namespace intflux;

namespace {
constexpr double kPi = std::numbers::pi;

Vec3 coulomb_oracle(const Vec3& x, const Vec3& c) {
  const Vec3 d = x - c;
  const double r = norm(d);
  return d / (4 * kPi * r * r * r);
}
}  // namespace

TEST_CASE("coulomb field closed form") {
  const auto f = coulomb_superposition({{{0, 0, 0}, 1}});
  const Vec3 v = f.eval({0.5, 0, 0});
  CHECK(v.x == doctest::Approx(1.0 / kPi).epsilon(1e-14));
  CHECK(v.y == 0.0);
  CHECK(v.z == 0.0);
  CHECK_THROWS_AS(f.eval({0, 0, 0}), DomainError);
}

TEST_CASE("constant background and empty charge list") {
  const AnalyticField f({}, ConstantBackground{{0, 0, 1}});
  CHECK(f.eval({0.3, -0.2, 0.1}) == Vec3{0, 0, 1});
  const auto z = coulomb_superposition({});
  CHECK(z.eval({0.1, 0.2, 0.3}) == Vec3{});
  CHECK(z.known_singularities().empty());
}

TEST_CASE("charge validation") {
  CHECK_THROWS_AS(coulomb_superposition({{{0.1, 0, 0}, 1}, {{0.1, 0, 0}, -1}}), InvalidInput);
  CHECK_THROWS_AS(coulomb_superposition({{{0.1, 0, 0}, 0}}), InvalidInput);
  CHECK_THROWS_AS(coulomb_superposition({{{1.0, 0, 0}, 1}}), InvalidInput);
  CHECK_THROWS_AS(AnalyticField({}, NoBackground{}, FieldConvention{0.0}), InvalidInput);
}

TEST_CASE("flux unit scales the field") {
  const auto f = coulomb_superposition({{{0, 0, 0}, 2}}, NoBackground{}, {2 * kPi});
  const Vec3 v = f.eval({0, 0.5, 0});
  CHECK(v.y == doctest::Approx(2 * 2 * kPi / (4 * kPi * 0.25)));
}

TEST_CASE("smoothed core is linear inside and Coulomb outside") {
  const AnalyticField f({{{0, 0, 0}, 1}}, NoBackground{}, {}, 0.05);
  CHECK(f.known_singularities().empty());
  CHECK(norm(f.eval({0, 0, 0})) == 0.0);
  const Vec3 in = f.eval({0.025, 0, 0});
  CHECK(in.x == doctest::Approx(0.025 / (4 * kPi * 0.05 * 0.05 * 0.05)));
  const Vec3 out = f.eval({0.2, 0, 0});
  CHECK(out.x == doctest::Approx(coulomb_oracle({0.2, 0, 0}, {}).x));
}

TEST_CASE("sampled Coulomb on a 65^3 grid") {
  const auto f = coulomb_superposition({{{0, 0, 0}, 1}});
  const auto s = sample_field(f, {-1, -1, -1}, 2.0 / 64, {65, 65, 65});
  const Vec3 v = s.eval({0.5, 0, 0});
  CHECK(std::abs(v.x - 1.0 / kPi) < 1e-3);
  CHECK(std::abs(v.y) < 1e-3);
  CHECK(std::abs(v.z) < 1e-3);
  CHECK_THROWS_AS(s.eval({1.2, 0, 0}), OutOfRange);
}

TEST_CASE("sampled field validation") {
  CHECK_THROWS_AS(SampledField({}, 0.1, {1, 2, 2}, std::vector<Vec3>(4)), InvalidInput);
  CHECK_THROWS_AS(SampledField({}, 0.1, {2, 2, 2}, std::vector<Vec3>(7)), InvalidInput);
  CHECK_THROWS_AS(SampledField({}, -0.1, {2, 2, 2}, std::vector<Vec3>(8)), InvalidInput);
}

TEST_CASE("trilinear interpolation converges at second order") {
  const auto f = coulomb_superposition({{{0, 0, 0}, 1}, {{-0.3, 0.2, 0.1}, -2}});
  const Vec3 p{0.55, 0.31, -0.27};
  const Vec3 exact = f.eval(p);
  std::vector<double> errs;
  for (double h : {0.04, 0.02, 0.01}) {
    const Vec3 origin = p - h * Vec3{4.37, 4.61, 4.23};
    const auto s = sample_field(f, origin, h, {10, 10, 10});
    errs.push_back(norm(s.eval(p) - exact));
  }
  for (int i = 0; i + 1 < 3; ++i) CHECK(std::log2(errs[i] / errs[i + 1]) >= 1.8);
}

TEST_CASE("sampled rectangle flux is exact for linear data") {
  // trilinear interpolation reproduces affine fields, whose flux is area times the centre value
  const Mat3 m{{{0.3, -1.2, 0.5}, {0.7, 0.1, -0.4}, {2.0, 0.25, -0.6}}};
  const LinearField lin(m, {0.1, -0.2, 0.3});
  const auto s = sample_field(lin, {-0.5, -0.5, -0.5}, 0.1, {11, 11, 11});
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int t = 0; t < 20; ++t) {
    AxisRect r;
    r.axis = t % 3;
    r.plane = u(rng);
    double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
    r.u0 = std::min(a, b);
    r.u1 = std::max(a, b);
    r.v0 = std::min(c, d);
    r.v1 = std::max(c, d);
    const Vec3 mid = r.point(0.5 * (r.u0 + r.u1), 0.5 * (r.v0 + r.v1));
    const double expect = r.area() * lin.eval(mid)[r.axis];
    CHECK(*s.exact_rect_flux(r) == doctest::Approx(expect).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("sampled rectangle flux matches a fine midpoint sum on random data") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::vector<Vec3> data(5 * 6 * 7);
  for (auto& v : data) v = {g(rng), g(rng), g(rng)};
  const SampledField s({0.1, -0.2, 0.0}, 0.1, {5, 6, 7}, data);
  AxisRect r;
  r.axis = 1;
  r.plane = 0.137;
  r.u0 = 0.113;  // z range
  r.u1 = 0.52;
  r.v0 = 0.17;  // x range
  r.v1 = 0.43;
  const int n = 1200;
  double sum = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double uu = r.u0 + (i + 0.5) * (r.u1 - r.u0) / n;
      const double vv = r.v0 + (j + 0.5) * (r.v1 - r.v0) / n;
      sum += s.eval(r.point(uu, vv)).y;
    }
  sum *= r.area() / (double(n) * n);
  CHECK(*s.exact_rect_flux(r) == doctest::Approx(sum).epsilon(1e-5));
}

TEST_CASE("hedgehog D-field agrees with the point charge") {
  const auto d = d_field(HedgehogMap{{0.1, -0.2, 0.05}}, true);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Vec3 x{u(rng), u(rng), u(rng)};
    const Vec3 ref = coulomb_oracle(x, {0.1, -0.2, 0.05});
    worst = std::max(worst, norm(d.eval(x) - ref) / norm(ref));
  }
  CHECK(worst < 1e-6);
  CHECK(d.known_singularities() == std::vector<Singularity>{{{0.1, -0.2, 0.05}, 1}});
}

TEST_CASE("D-field fluxes") {
  const QuadratureSpec q{32};
  const auto hog = d_field(HedgehogMap{}, true);
  CHECK(cube_flux(hog, {{0, 0, 0}, 1.0}, q) == doctest::Approx(1.0).epsilon(1e-8));

  const Mat3 refl{{{-1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  const auto flipped = d_field(HedgehogMap{{}, refl}, true);
  CHECK(cube_flux(flipped, {{0, 0, 0}, 1.0}, q) == doctest::Approx(-1.0).epsilon(1e-8));
  CHECK(flipped.known_singularities().front().degree == -1);

  const auto raw = d_field(HedgehogMap{}, false);
  CHECK(raw.convention().flux_unit == doctest::Approx(4 * kPi));
  CHECK(cube_flux(raw, {{0, 0, 0}, 1.0}, q) == doctest::Approx(4 * kPi).epsilon(1e-8));

  const auto fd = d_field(HedgehogMap{}, true, Partials::finite_difference);
  CHECK(cube_flux(fd, {{0, 0, 0}, 1.0}, q) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("constant map gives the zero field and bad descriptors are refused") {
  const auto c = d_field(ConstantMap{{0, 1, 0}}, true);
  CHECK(c.eval({0.2, 0.3, -0.1}) == Vec3{});
  const Mat3 shear{{{1, 0.5, 0}, {0, 1, 0}, {0, 0, 1}}};
  CHECK_THROWS_AS(d_field(HedgehogMap{{}, shear}, true), InvalidInput);
  CHECK_THROWS_AS(d_field(ConstantMap{{0, 2, 0}}, true), InvalidInput);
}
