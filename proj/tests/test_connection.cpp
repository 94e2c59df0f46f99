#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "intflux/connection.hpp"
#include "intflux/error.hpp"

using namespace intflux;

namespace {

std::vector<Singularity> random_instance(std::mt19937_64& rng, int points, int max_units) {
  std::uniform_real_distribution<double> u(-1, 1);
  std::uniform_int_distribution<int> deg(-2, 2);
  for (;;) {
    std::vector<Singularity> out;
    int units = 0;
    for (int i = 0; i < points; ++i) {
      Vec3 x;
      do x = Vec3{u(rng), u(rng), u(rng)};
      while (norm(x) >= 0.95);
      int d = 0;
      while (d == 0) d = deg(rng);
      units += std::abs(d);
      out.push_back({x, d});
    }
    if (units <= max_units) return out;
  }
}

// exhaustive minimum over unit matchings: every positive unit either pairs
// with a remaining negative unit or leaves through the sphere
double brute_force_mass(const std::vector<Singularity>& s) {
  std::vector<Vec3> pos, neg;
  for (const auto& q : s)
    for (int k = 0; k < std::abs(q.degree); ++k) (q.degree > 0 ? pos : neg).push_back(q.position);
  std::vector<bool> used(neg.size(), false);
  std::function<double(std::size_t)> go = [&](std::size_t i) -> double {
    if (i == pos.size()) {
      double rest = 0.0;
      for (std::size_t j = 0; j < neg.size(); ++j)
        if (!used[j]) rest += 1 - norm(neg[j]);
      return rest;
    }
    double best = 1 - norm(pos[i]) + go(i + 1);
    for (std::size_t j = 0; j < neg.size(); ++j) {
      if (used[j]) continue;
      used[j] = true;
      best = std::min(best, norm(pos[i] - neg[j]) + go(i + 1));
      used[j] = false;
    }
    return best;
  };
  return go(0);
}

bool same_signature(const Current1& L, const std::vector<Singularity>& s) {
  const auto a = boundary_signature(L);
  const auto b = normalized_signature(s);
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].degree != b[i].degree || norm(a[i].position - b[i].position) > 1e-12) return false;
  return true;
}

Vec3 rotate(const Vec3& x, double a, double b) {
  const Vec3 y{std::cos(a) * x.x - std::sin(a) * x.y, std::sin(a) * x.x + std::cos(a) * x.y, x.z};
  return {y.x, std::cos(b) * y.y - std::sin(b) * y.z, std::sin(b) * y.y + std::cos(b) * y.z};
}

}  // namespace

TEST_CASE("greedy construction") {
  const Vec3 a{0.1, 0.2, 0.0}, b{-0.3, 0.0, 0.1}, c{0.0, -0.4, 0.2};
  const auto L = greedy_connection({{a, 1}, {b, -1}});
  REQUIRE(L.segments.size() == 1);
  CHECK(L.segments[0].start == b);
  CHECK(L.segments[0].end == a);
  CHECK(L.segments[0].multiplicity == 1);
  CHECK(L.mass() == doctest::Approx(norm(a - b)).epsilon(1e-15));

  const auto one = greedy_connection({{{0, 0, 0}, 1}});
  REQUIRE(one.segments.size() == 1);
  CHECK(one.mass() == 1.0);
  CHECK(boundary_signature(one).size() == 1);

  const auto three = greedy_connection({{a, 2}, {b, -1}, {c, -1}});
  REQUIRE(three.segments.size() == 2);
  CHECK(three.segments[0].start == b);
  CHECK(three.segments[1].start == c);
  for (const auto& s : three.segments) {
    CHECK(s.end == a);
    CHECK(s.multiplicity == 1);
  }
  CHECK(greedy_connection({}).segments.empty());

  // a deficit carries to the next positive node
  const auto carry = greedy_connection({{a, 3}, {b, -2}, {c, -2}, {{0.5, 0, 0}, 1}});
  CHECK(same_signature(carry, {{a, 3}, {b, -2}, {c, -2}, {{0.5, 0, 0}, 1}}));
  REQUIRE(carry.segments.size() == 3);
  CHECK(carry.segments[1].multiplicity == 1);
  CHECK(carry.segments[2].start == c);
  CHECK(carry.segments[2].end == Vec3{0.5, 0, 0});

  CHECK_THROWS_AS(greedy_connection({{a, 0}}), InvalidInput);
  CHECK_THROWS_AS(optimal_connection({{{1.0, 0, 0}, 1}}), InvalidInput);
}

TEST_CASE("optimal connection") {
  const auto dip = optimal_connection({{{0.25, 0, 0}, 1}, {{-0.25, 0, 0}, -1}});
  CHECK(dip.mass() == 0.5);
  const auto near = optimal_connection({{{0.9, 0, 0}, 1}});
  CHECK(near.mass() == doctest::Approx(0.1).epsilon(1e-15));

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = random_instance(rng, 6, 8);
    const auto L = optimal_connection(s);
    CHECK(same_signature(L, s));
    CHECK(L.mass() == doctest::Approx(brute_force_mass(s)).epsilon(1e-12));
  }
}

TEST_CASE("dual value") {
  const auto d = dual_value({{{0.25, 0, 0}, 1}, {{-0.25, 0, 0}, -1}});
  CHECK(d.value == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(d.potential[0] - d.potential[1] == doctest::Approx(0.5).epsilon(1e-12));
  const auto o = dual_value({{{0, 0, 0}, 1}});
  CHECK(o.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(o.potential[0] == doctest::Approx(1.0).epsilon(1e-12));
  // far apart: the two boundary routes win over the direct segment
  const auto far = dual_value({{{0.8, 0, 0}, 1}, {{-0.8, 0, 0}, -1}});
  CHECK(far.value == doctest::Approx(std::min(1.6, 0.4)).epsilon(1e-12));
  const auto mid = dual_value({{{0, 0.3, 0}, 1}, {{0, -0.3, 0}, -1}});
  CHECK(mid.value == doctest::Approx(std::min(0.6, 1.4)).epsilon(1e-12));
}

TEST_CASE("certification") {
  const std::vector<Singularity> dip{{{0.25, 0, 0}, 1}, {{-0.25, 0, 0}, -1}};
  const auto c = certify(optimal_connection(dip), dual_value(dip), 1e-9);
  CHECK(c.certified);
  CHECK(std::abs(c.gap) <= 1e-9);

  // greedy sends the first positive node across to the negative one
  const std::vector<Singularity> three{{{-0.5, 0, 0}, 1}, {{0.5, 0, 0}, 1}, {{0.45, 0, 0}, -1}};
  const auto g = certify(greedy_connection(three), dual_value(three), 1e-9);
  CHECK_FALSE(g.certified);
  CHECK(g.gap == doctest::Approx(1.45 - 0.55).epsilon(1e-12));
  CHECK(optimal_connection(three).mass() == doctest::Approx(brute_force_mass(three)).epsilon(1e-14));

  const auto e = certify({}, dual_value({}), 1e-9);
  CHECK(e.certified);
  CHECK(e.primal_mass == 0.0);
  CHECK(e.dual_value == 0.0);

  auto bad = dual_value(dip);
  bad.potential[0] = 0.9;
  bad.value = bad.potential[0] - bad.potential[1];
  CHECK_THROWS_AS(certify(optimal_connection(dip), bad, 1e-9), CertificateInvalid);
  auto lie = dual_value(dip);
  lie.value += 0.1;
  CHECK_THROWS_AS(certify(optimal_connection(dip), lie, 1e-9), CertificateInvalid);
  CHECK_THROWS_AS(certify(optimal_connection(dip), dual_value(three), 1e-9), InvalidInput);
}

TEST_CASE("duality and invariance on random instances") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> npts(1, 8);
  std::uniform_real_distribution<double> ang(0, 6.283185307179586);
  for (int trial = 0; trial < 40; ++trial) {
    const auto s = random_instance(rng, npts(rng), 12);
    const auto opt = optimal_connection(s);
    const auto greedy = greedy_connection(s);
    const auto dual = dual_value(s);
    CHECK(same_signature(opt, s));
    CHECK(same_signature(greedy, s));
    CHECK(opt.mass() - dual.value <= 1e-9);
    CHECK(dual.value - opt.mass() <= 1e-9);
    CHECK(greedy.mass() >= dual.value - 1e-12);
    CHECK(greedy.mass() >= opt.mass() - 1e-12);
    for (const auto& seg : opt.segments) CHECK(seg.multiplicity >= 1);
    std::vector<Singularity> r = s;
    const double a = ang(rng), b = ang(rng);
    for (auto& q : r) q.position = rotate(q.position, a, b);
    CHECK(optimal_connection(r).mass() == doctest::Approx(opt.mass()).epsilon(1e-12));
  }
}

TEST_CASE("boundary residual") {
  const auto X = coulomb_superposition({{{0, 0, 0}, 1}});
  const auto L = optimal_connection(X.known_singularities());
  CHECK(boundary_residual(X, L, 20, 5) < 1e-3);

  const AnalyticField zero({});
  CHECK(boundary_residual(zero, {}, 10, 5) < 1e-9);

  Current1 wrong = L;
  wrong.segments[0].multiplicity = 2;
  // the mismatch is phi(0), which is large for bumps centred near the origin
  CHECK(boundary_residual(X, wrong, 20, 5) > 0.05);

  // two charges inside one bump use the partition of unity
  const auto two = coulomb_superposition({{{0.1, 0, 0}, 1}, {{-0.1, 0.05, 0}, -2}}, ConstantBackground{{0.2, 0.1, 0}});
  CHECK(boundary_residual(two, optimal_connection(two.known_singularities()), 10, 9) < 1e-3);
  const AnalyticField twice(two.known_singularities(), NoBackground{}, {2.0});
  CHECK(boundary_residual(twice, optimal_connection(two.known_singularities()), 5, 9) < 1e-3);
}
