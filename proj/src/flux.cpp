#include "intflux/flux.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "intflux/error.hpp"
#include "intflux/surface_quadrature.hpp"

namespace intflux {

namespace {

void check_quad(const QuadratureSpec& quad) {
  if (quad.n_q < 2) throw InvalidInput("quadrature needs n_q >= 2");
}

double faces_sum(const VectorField& field, const Cube& cube, const QuadratureSpec& quad,
                 const std::vector<Singularity>& sings) {
  double total = 0.0;
  for (int f = 0; f < 6; ++f) total += face_sign(f) * rect_flux(field, cube.face(f), quad, sings);
  return total;
}

// Flux that tolerates singularities arbitrarily close to the surface; only a
// singular point lying on it is refused.
std::optional<double> flux_if_defined(const VectorField& field, const Cube& cube, const QuadratureSpec& quad) {
  const auto sings = field.known_singularities();
  for (const auto& s : sings)
    if (surface_distance(cube, s.position).distance <= 1e-12 * cube.side) return std::nullopt;
  return faces_sum(field, cube, quad, sings);
}

Vec3 random_center(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  while (true) {
    const Vec3 c{u(rng), u(rng), u(rng)};
    if (norm(c) < 1.0) return c;
  }
}

}  // namespace

AxisRect Cube::face(int f) const {
  const int a = face_axis(f);
  const double h = 0.5 * side;
  AxisRect r;
  r.axis = a;
  r.plane = center[a] + face_sign(f) * h;
  r.u0 = center[tangent_u(a)] - h;
  r.u1 = center[tangent_u(a)] + h;
  r.v0 = center[tangent_v(a)] - h;
  r.v1 = center[tangent_v(a)] + h;
  return r;
}

SurfaceDistance surface_distance(const Cube& cube, const Vec3& p) {
  const Vec3 lo = cube.lo(), hi = cube.hi();
  bool inside = true;
  for (int a = 0; a < 3; ++a)
    if (p[a] < lo[a] || p[a] > hi[a]) inside = false;
  if (inside) {
    SurfaceDistance best{std::numeric_limits<double>::infinity(), 0};
    for (int a = 0; a < 3; ++a) {
      if (p[a] - lo[a] < best.distance) best = {p[a] - lo[a], 2 * a};
      if (hi[a] - p[a] < best.distance) best = {hi[a] - p[a], 2 * a + 1};
    }
    return best;
  }
  SurfaceDistance best{std::numeric_limits<double>::infinity(), 0};
  for (int f = 0; f < 6; ++f) {
    const double d = cube.face(f).distance(p);
    if (d < best.distance) best = {d, f};
  }
  return best;
}

double admissible_side(const Vec3& x0) {
  const double d = 1.0 - norm(x0);
  return d > 0.0 ? 2.0 / std::sqrt(3.0) * d : 0.0;
}

double rect_flux(const VectorField& field, const AxisRect& r, const QuadratureSpec& quad,
                 const std::vector<Singularity>& singular_points) {
  check_quad(quad);
  if (auto exact = field.exact_rect_flux(r)) return *exact;
  double sum = 0.0;
  for_each_rect_point(r, quad, singular_points,
                      [&](const Vec3& x, double w) { sum += w * field.eval(x)[r.axis]; });
  return sum;
}

double cube_flux(const VectorField& field, const Cube& cube, const QuadratureSpec& quad) {
  check_quad(quad);
  if (!(cube.side > 0.0)) throw InvalidInput("cube side must be positive");
  const auto sings = field.known_singularities();
  const double cell = cube.side / quad.n_q;
  for (const auto& s : sings) {
    const auto sd = surface_distance(cube, s.position);
    if (sd.distance < cell)
      throw IllConditionedQuadrature("singularity within one quadrature cell of face " + std::to_string(sd.face),
                                     sd.face);
  }
  return faces_sum(field, cube, quad, sings);
}

double skip_distance(const VectorField& field, const Cube& cube, const QuadratureSpec& quad) {
  return std::max(cube.side / quad.n_q, field.singular_guard());
}

bool near_singularity(const VectorField& field, const Cube& cube, const QuadratureSpec& quad) {
  const double guard = skip_distance(field, cube, quad);
  for (const auto& s : field.known_singularities())
    if (surface_distance(cube, s.position).distance < guard) return true;
  return false;
}

FluxProfile flux_profile(const VectorField& field, const Vec3& x0, double r_min, double r_max, int n,
                         const QuadratureSpec& quad) {
  check_quad(quad);
  const double adm = admissible_side(x0);
  if (!(r_min > 0.0) || !(r_min < r_max) || !(r_max < adm) || n < 1)
    throw InvalidInput("empty admissible radius range");
  FluxProfile prof;
  prof.center = x0;
  for (int i = 0; i < n; ++i) {
    const double r = n == 1 ? r_min : r_min + (r_max - r_min) * i / (n - 1);
    const Cube c{x0, r};
    if (near_singularity(field, c, quad)) {
      prof.skipped.push_back(r);
      continue;
    }
    prof.radii.push_back(r);
    prof.values.push_back(cube_flux(field, c, quad));
  }
  return prof;
}

double nearest_multiple_distance(double flux, double unit) {
  return std::abs(flux - unit * std::round(flux / unit));
}

namespace {

template <class Measure>
ScanReport sample_cubes(const VectorField& field, int n_centers, int radii_per_center, double tol,
                        std::uint64_t seed, const QuadratureSpec& quad, Measure measure) {
  check_quad(quad);
  if (!(tol > 0.0)) throw InvalidInput("tolerance must be positive");
  if (n_centers < 0 || radii_per_center < 0) throw InvalidInput("sample counts must be non-negative");
  ScanReport rep;
  rep.tol = tol;
  rep.seed = seed;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < n_centers; ++i) {
    const Vec3 c = random_center(rng);
    const double adm = admissible_side(c);
    for (int j = 0; j < radii_per_center; ++j) {
      ScanEntry e;
      e.center = c;
      e.radius = adm * unit(rng);
      const Cube cube{c, e.radius};
      if (!(e.radius > 0.0) || near_singularity(field, cube, quad) || !field.contains_box(cube.lo(), cube.hi())) {
        e.skipped = true;
        e.flux = std::numeric_limits<double>::quiet_NaN();
        e.nearest_int_dist = std::numeric_limits<double>::quiet_NaN();
        ++rep.skipped;
      } else {
        e.flux = cube_flux(field, cube, quad);
        e.nearest_int_dist = nearest_multiple_distance(e.flux, field.convention().flux_unit);
        const double dev = measure(e);
        rep.max_deviation = std::max(rep.max_deviation, dev);
        if (dev > tol) ++rep.violations;
      }
      rep.entries.push_back(e);
    }
  }
  return rep;
}

}  // namespace

ScanReport integer_flux_scan(const VectorField& field, int n_centers, int radii_per_center, double tol,
                             std::uint64_t seed, const QuadratureSpec& quad) {
  return sample_cubes(field, n_centers, radii_per_center, tol, seed, quad,
                      [](const ScanEntry& e) { return e.nearest_int_dist; });
}

DivFreeReport divfree_flux_criterion(const VectorField& field, int n_centers, int radii_per_center,
                                     double tol, std::uint64_t seed, const QuadratureSpec& quad) {
  DivFreeReport out;
  out.scan = sample_cubes(field, n_centers, radii_per_center, tol, seed, quad,
                          [](const ScanEntry& e) { return std::abs(e.flux); });
  out.max_violation = out.scan.max_deviation;
  out.divergence_free = out.scan.violations == 0;
  return out;
}

double mollified_divergence(const VectorField& field, const Vec3& x0, double r, double eps,
                            const QuadratureSpec& quad, int n_shell) {
  check_quad(quad);
  if (!(eps > 0.0) || !(eps < r)) throw InvalidInput("shell needs 0 < eps < r");
  if (!(r + eps < admissible_side(x0))) throw InvalidInput("shell reaches outside the admissible range");
  if (n_shell < 8) throw InvalidInput("shell average needs at least 8 radii");
  double sum = 0.0;
  int used = 0;
  for (int i = 0; i < n_shell; ++i) {
    const double s = r - eps + (i + 0.5) * (2.0 * eps / n_shell);
    if (auto f = flux_if_defined(field, Cube{x0, s}, quad)) {
      sum += *f;
      ++used;
    }
  }
  if (used == 0) throw InvalidInput("every shell radius passes through a singularity");
  return sum / used;
}

}  // namespace intflux
