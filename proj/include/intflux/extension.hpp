#pragma once

#include <vector>

#include "intflux/gauge.hpp"

namespace intflux {

enum class ExtensionType { harmonic, radial };

/// A vector quantity on an m^3 node grid spanning a closed cube, x fastest.
/// For harmonic extensions the nodes hold the components of the 1-form A;
/// for radial ones they hold the extended field (the centre node is 0).
struct CubeExtension {
  int cube_id = -1;
  Cube cube;
  int m = 0;
  ExtensionType type = ExtensionType::harmonic;
  std::vector<Vec3> nodes;
  double residual = 0.0;    ///< relative discrete Laplace residual (harmonic)
  bool degenerate = false;  ///< radial extension of zero-total data

  double spacing() const { return cube.side / (m - 1); }
  std::size_t index(int i, int j, int k) const { return (static_cast<std::size_t>(k) * m + j) * m + i; }
  const Vec3& node(int i, int j, int k) const { return nodes[index(i, j, k)]; }
  Vec3 node_position(int i, int j, int k) const;
  /// Trilinear interpolation of the nodes; x must lie in the closed cube.
  Vec3 eval(const Vec3& x) const;
};

/// Dirichlet values of component k on the n_f + 1 boundary grid, read off the
/// edge circulations. Entries on faces normal to k are left at 0.
std::vector<double> tangential_trace(const Boundary1Form& alpha, int k);

/// Componentwise discrete harmonic extension. The tangential components are
/// Dirichlet data taken from alpha; the normal one satisfies a homogeneous
/// Neumann condition. Throws SolverError when the residual exceeds solver_tol.
CubeExtension harmonic_extend(const Boundary1Form& alpha, int m = 33, int cube_id = -1, double solver_tol = 1e-8);

/// L2 norm of curl A over the cube for the trilinear interpolant of the nodes.
double curl_l2(const CubeExtension& ext);
/// L2 norm of the normal density over the cube surface.
double boundary_l2(const CubeBoundaryData& data);

/// Pullback of piecewise constant boundary densities under the sup-norm
/// radial projection onto the cube surface:
///   X(x) = f(pi(x)) * s^2 * y / t^3,  y = x - c, t = |y|_inf, s = side / 2.
/// Divergence free away from c, so every concentric sub-cube carries the
/// boundary total.
class RadialField final : public VectorField {
 public:
  explicit RadialField(CubeBoundaryData data, FieldConvention convention = {});

  Vec3 eval(const Vec3& x) const override;
  FieldConvention convention() const override { return convention_; }
  std::vector<Singularity> known_singularities() const override;
  std::optional<double> exact_rect_flux(const AxisRect& r) const override;

  const CubeBoundaryData& data() const { return data_; }
  double total() const { return total_; }
  /// Nearest integer to total / flux_unit.
  int degree() const;

 private:
  CubeBoundaryData data_;
  FieldConvention convention_;
  double total_;
};

/// Node samples of the radial pullback. Throws InvalidInput when the total is
/// not within int_tol of an integer multiple of flux_unit; a zero total is
/// accepted and flagged as degenerate.
CubeExtension radial_extend(const CubeBoundaryData& data, int m = 33, int cube_id = -1, double int_tol = 1e-6,
                            double flux_unit = 1.0);

}  // namespace intflux
