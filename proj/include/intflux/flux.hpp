#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "intflux/field.hpp"

namespace intflux {

/// Axis-aligned cube {x : sup_norm(x - center) < side/2}.
struct Cube {
  Vec3 center;
  double side = 1.0;

  Vec3 lo() const { return center - Vec3{1, 1, 1} * (0.5 * side); }
  Vec3 hi() const { return center + Vec3{1, 1, 1} * (0.5 * side); }
  /// Face f in 0..5 ordered (-x, +x, -y, +y, -z, +z).
  AxisRect face(int f) const;
  /// Closure inside the open unit ball.
  bool inside_unit_ball() const { return norm(center) + 0.5 * std::sqrt(3.0) * side < 1.0; }
};

inline int face_axis(int f) { return f / 2; }
inline double face_sign(int f) { return (f % 2) ? 1.0 : -1.0; }

/// Euclidean distance from p to the surface of the cube, and the nearest face.
struct SurfaceDistance {
  double distance;
  int face;
};
SurfaceDistance surface_distance(const Cube& cube, const Vec3& p);

enum class QuadRule { gauss_legendre, midpoint };

struct QuadratureSpec {
  int n_q = 32;
  QuadRule rule = QuadRule::gauss_legendre;
};

/// Largest admissible side for cubes centred at x0: (2/sqrt 3) * dist(x0, dB).
double admissible_side(const Vec3& x0);

/// Flux through r along +e_axis. Panels are refined adaptively around the
/// given singular points; exact_rect_flux is used when the field offers it.
double rect_flux(const VectorField& field, const AxisRect& r, const QuadratureSpec& quad,
                 const std::vector<Singularity>& singular_points);

/// Outward flux through the six faces. Throws IllConditionedQuadrature when a
/// known singularity is within one quadrature cell (side / n_q) of the surface.
double cube_flux(const VectorField& field, const Cube& cube, const QuadratureSpec& quad = {});

/// Distance below which sampled checks treat a cube as straddling a singularity:
/// max(side / n_q, field.singular_guard()). Panels are refined around
/// singular points, so one quadrature cell is enough to keep 1e-8 accuracy.
double skip_distance(const VectorField& field, const Cube& cube, const QuadratureSpec& quad);
bool near_singularity(const VectorField& field, const Cube& cube, const QuadratureSpec& quad);

/// Hides exact_rect_flux so fluxes go through surface quadrature.
class PointwiseView final : public VectorField {
 public:
  explicit PointwiseView(const VectorField& inner) : inner_(inner) {}
  Vec3 eval(const Vec3& x) const override { return inner_.eval(x); }
  FieldConvention convention() const override { return inner_.convention(); }
  std::vector<Singularity> known_singularities() const override { return inner_.known_singularities(); }
  bool contains_box(const Vec3& lo, const Vec3& hi) const override { return inner_.contains_box(lo, hi); }
  double singular_guard() const override { return inner_.singular_guard(); }

 private:
  const VectorField& inner_;
};

struct FluxProfile {
  Vec3 center;
  std::vector<double> radii;
  std::vector<double> values;
  std::vector<double> skipped;  ///< radii dropped because a singularity sat near the surface
};

/// Fluxes at n equally spaced sides in [r_min, r_max].
FluxProfile flux_profile(const VectorField& field, const Vec3& x0, double r_min, double r_max,
                         int n, const QuadratureSpec& quad = {});

/// Distance from flux to the nearest multiple of unit.
double nearest_multiple_distance(double flux, double unit);

struct ScanEntry {
  Vec3 center;
  double radius = 0.0;
  double flux = 0.0;  ///< NaN when skipped
  double nearest_int_dist = 0.0;
  bool skipped = false;
};

struct ScanReport {
  std::vector<ScanEntry> entries;
  int violations = 0;
  int skipped = 0;
  double max_deviation = 0.0;  ///< largest nearest_int_dist (or |flux| for the divergence-free test)
  double tol = 0.0;
  std::uint64_t seed = 0;
};

/// Cubes with centers uniform in B and sides uniform in (0, admissible_side).
ScanReport integer_flux_scan(const VectorField& field, int n_centers, int radii_per_center, double tol,
                             std::uint64_t seed, const QuadratureSpec& quad = {});

/// Mean flux over sides in [r - eps, r + eps] by the midpoint rule on n_shell radii.
double mollified_divergence(const VectorField& field, const Vec3& x0, double r, double eps,
                            const QuadratureSpec& quad = {}, int n_shell = 16);

struct DivFreeReport {
  bool divergence_free = false;
  double max_violation = 0.0;
  ScanReport scan;
};

/// True iff every sampled cube has |flux| <= tol.
DivFreeReport divfree_flux_criterion(const VectorField& field, int n_centers, int radii_per_center,
                                     double tol, std::uint64_t seed, const QuadratureSpec& quad = {});

}  // namespace intflux
