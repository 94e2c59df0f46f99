#pragma once

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "intflux/vec3.hpp"

namespace intflux {

/// A point singularity: flux through small enclosing cubes equals degree * flux_unit.
struct Singularity {
  Vec3 position;
  int degree = 0;

  friend bool operator==(const Singularity&, const Singularity&) = default;
};

/// Flux value that corresponds to degree one. The 2-form picture carries a factor
/// 2*pi here; vector fields built by this library default to 1.
struct FieldConvention {
  double flux_unit = 1.0;
};

/// Axis-aligned rectangle {x_axis = plane, u in [u0,u1], v in [v0,v1]} where
/// (u, v) are the axes (axis+1)%3 and (axis+2)%3, so e_u x e_v = e_axis.
struct AxisRect {
  int axis = 0;
  double plane = 0.0;
  double u0 = 0.0, u1 = 0.0, v0 = 0.0, v1 = 0.0;

  double area() const { return (u1 - u0) * (v1 - v0); }
  Vec3 point(double u, double v) const;
  /// Euclidean distance from p to the closed rectangle.
  double distance(const Vec3& p) const;
};

inline int tangent_u(int axis) { return (axis + 1) % 3; }
inline int tangent_v(int axis) { return (axis + 2) % 3; }

/// Vector field on (a subset of) the unit ball. Implementations are immutable.
class VectorField {
 public:
  virtual ~VectorField() = default;

  virtual Vec3 eval(const Vec3& x) const = 0;

  virtual FieldConvention convention() const { return {}; }

  /// Singularities known in closed form. Sampled fields carry none.
  virtual std::vector<Singularity> known_singularities() const { return {}; }

  /// Flux through r along +e_axis when the field is piecewise polynomial on a
  /// known grid and can integrate itself exactly; nullopt otherwise.
  virtual std::optional<double> exact_rect_flux(const AxisRect& r) const {
    (void)r;
    return std::nullopt;
  }

  /// Whether the closed box [lo, hi] lies where the field is defined.
  virtual bool contains_box(const Vec3& lo, const Vec3& hi) const {
    (void)lo;
    (void)hi;
    return true;
  }

  /// Radius around listed singularities inside which grid fields smear the core.
  virtual double singular_guard() const { return 0.0; }
};

struct NoBackground {};
struct ConstantBackground {
  Vec3 value;
};
/// omega x x + shear * (yz, zx, xy); divergence vanishes identically.
struct CurlBackground {
  Vec3 omega;
  double shear = 0.0;
};
using Background = std::variant<NoBackground, ConstantBackground, CurlBackground>;

/// Superposition of point charges (optionally smoothed on a uniform ball of
/// radius core_radius) plus a divergence-free background.
class AnalyticField final : public VectorField {
 public:
  AnalyticField(std::vector<Singularity> charges, Background background = NoBackground{},
                FieldConvention convention = {}, double core_radius = 0.0);

  Vec3 eval(const Vec3& x) const override;
  FieldConvention convention() const override { return convention_; }
  /// Point charges; empty when the charges are smoothed (core_radius > 0).
  std::vector<Singularity> known_singularities() const override;

  const std::vector<Singularity>& charges() const { return charges_; }
  const Background& background() const { return background_; }
  double core_radius() const { return core_radius_; }

 private:
  std::vector<Singularity> charges_;
  Background background_;
  FieldConvention convention_;
  double core_radius_;
};

/// X(x) = sum_j d_j (x - x_j) / (4 pi |x - x_j|^3) * flux_unit.
AnalyticField coulomb_superposition(std::vector<Singularity> charges,
                                    Background background = NoBackground{},
                                    FieldConvention convention = {});

/// Affine field M x + b. Divergence trace(M): a deliberate non-member of the
/// integer-flux class, used to exercise violation paths.
class LinearField final : public VectorField {
 public:
  LinearField(const Mat3& m, const Vec3& b = {}) : m_(m), b_(b) {}
  Vec3 eval(const Vec3& x) const override { return mul(m_, x) + b_; }
  const Mat3& matrix() const { return m_; }
  const Vec3& offset() const { return b_; }

 private:
  Mat3 m_;
  Vec3 b_;
};

/// S^2-valued maps with a closed-form Jacobian.
struct HedgehogMap {
  Vec3 center;
  Mat3 orientation = identity3();  ///< orthogonal; det = -1 gives reflections
};
struct ConstantMap {
  Vec3 value{0, 0, 1};
};
using MapDescriptor = std::variant<HedgehogMap, ConstantMap>;

enum class Partials { exact, finite_difference };

/// D(u) = (u . d2u x d3u, u . d3u x d1u, u . d1u x d2u) for a built-in map u.
/// The hedgehog has flux 4 pi; with normalize the field is divided by 4 pi so
/// its singularity has unit flux, otherwise flux_unit is set to 4 pi.
class DField final : public VectorField {
 public:
  DField(MapDescriptor map, bool normalize, Partials partials = Partials::exact,
         double fd_step = 1e-5);

  Vec3 eval(const Vec3& x) const override;
  FieldConvention convention() const override;
  std::vector<Singularity> known_singularities() const override;

  const MapDescriptor& map() const { return map_; }
  bool normalized() const { return normalize_; }
  Partials partials() const { return partials_; }

  Vec3 map_value(const Vec3& x) const;
  /// Columns are d_1 u, d_2 u, d_3 u.
  std::array<Vec3, 3> map_jacobian(const Vec3& x) const;

 private:
  MapDescriptor map_;
  bool normalize_;
  Partials partials_;
  double fd_step_;
};

DField d_field(MapDescriptor map, bool normalize, Partials partials = Partials::exact);

/// Node samples on a regular grid, evaluated by trilinear interpolation.
/// Node (i, j, k) sits at origin + h * (i, j, k); storage is x-fastest.
class SampledField final : public VectorField {
 public:
  SampledField(Vec3 origin, double spacing, std::array<int, 3> dims, std::vector<Vec3> samples,
               FieldConvention convention = {});

  Vec3 eval(const Vec3& x) const override;
  FieldConvention convention() const override { return convention_; }
  std::optional<double> exact_rect_flux(const AxisRect& r) const override;
  bool contains_box(const Vec3& lo, const Vec3& hi) const override;

  const Vec3& origin() const { return origin_; }
  double spacing() const { return h_; }
  const std::array<int, 3>& dims() const { return dims_; }
  std::span<const Vec3> samples() const { return samples_; }
  const Vec3& node(int i, int j, int k) const {
    return samples_[(static_cast<std::size_t>(k) * dims_[1] + j) * dims_[0] + i];
  }
  Vec3 upper() const;

 private:
  Vec3 origin_;
  double h_;
  std::array<int, 3> dims_;
  std::vector<Vec3> samples_;
  FieldConvention convention_;
};

/// Flux along +e_axis of a point charge through a rectangle, in closed form
/// (signed solid angle / 4 pi, times degree and flux_unit). Zero when the
/// charge lies in the rectangle's plane.
double point_charge_rect_flux(const Singularity& q, const AxisRect& r, double flux_unit = 1.0);

/// Samples any field on the nodes of a grid.
SampledField sample_field(const VectorField& field, Vec3 origin, double spacing,
                          std::array<int, 3> dims);

}  // namespace intflux
