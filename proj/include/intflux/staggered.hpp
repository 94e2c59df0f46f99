#pragma once

#include <array>
#include <vector>

#include "intflux/field.hpp"

namespace intflux {

/// Lowest-order face element field on a uniform grid of cubic cells: each
/// cell face stores the flux through it, and inside a cell the normal
/// component varies linearly between opposite faces. Fluxes through axis
/// rectangles are therefore exact, and the flux out of any box equals the
/// sum of the enclosed cell divergences weighted by overlap volume.
class StaggeredField final : public VectorField {
 public:
  StaggeredField(Vec3 origin, double spacing, std::array<int, 3> cells, FieldConvention convention = {});

  Vec3 eval(const Vec3& x) const override;
  FieldConvention convention() const override { return convention_; }
  std::vector<Singularity> known_singularities() const override { return singularities_; }
  std::optional<double> exact_rect_flux(const AxisRect& r) const override;
  bool contains_box(const Vec3& lo, const Vec3& hi) const override;
  double singular_guard() const override { return guard_; }

  void set_singularities(std::vector<Singularity> s, double guard) {
    singularities_ = std::move(s);
    guard_ = guard;
  }

  const Vec3& origin() const { return origin_; }
  double spacing() const { return h_; }
  const std::array<int, 3>& cells() const { return cells_; }
  Vec3 upper() const;

  /// Face with normal `axis` at grid index (i, j, k): the plane is
  /// origin[axis] + idx[axis] * h, the cell behind it has index idx.
  std::size_t face_index(int axis, int i, int j, int k) const;
  double& flux(int axis, int i, int j, int k) { return flux_[axis][face_index(axis, i, j, k)]; }
  double flux(int axis, int i, int j, int k) const { return flux_[axis][face_index(axis, i, j, k)]; }
  std::vector<double>& flux_array(int axis) { return flux_[axis]; }
  const std::vector<double>& flux_array(int axis) const { return flux_[axis]; }
  std::array<int, 3> face_dims(int axis) const;

  /// Net outward flux of a cell.
  double divergence(int i, int j, int k) const;
  Vec3 cell_center(int i, int j, int k) const;

  /// Nodal samples: each component is the mean of the adjacent face densities.
  SampledField to_sampled() const;

 private:
  Vec3 origin_;
  double h_;
  std::array<int, 3> cells_;
  FieldConvention convention_;
  std::array<std::vector<double>, 3> flux_;
  std::vector<Singularity> singularities_;
  double guard_ = 0.0;
};

}  // namespace intflux
