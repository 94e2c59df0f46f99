#pragma once

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "intflux/faceform.hpp"

namespace intflux {

/// Integer coordinates in half-cells: a point of the cube [0, n]^3 (in units of
/// the surface cell size) is stored as twice its coordinates.
using HalfIndex = std::array<int, 3>;

/// Quad mesh of the surface of a cube with n x n cells per face. Cells follow
/// CubeBoundaryData order (face, j, i). Each edge is oriented along +e_axis;
/// `left` is the cell on the left when walking the edge with the outward
/// normal pointing up.
class CubeSurfaceMesh {
 public:
  struct Edge {
    int axis;
    HalfIndex mid;
    int left;
    int right;
  };

  explicit CubeSurfaceMesh(int n);

  int n() const { return n_; }
  int n_cells() const { return 6 * n_ * n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  /// Edge with the given doubled midpoint, or -1.
  int edge_at(const HalfIndex& mid) const;
  /// The four edges of a cell with +1 when the cell is on the edge's left.
  const std::array<std::pair<int, int>, 4>& cell_edges(int cell) const { return cell_edges_[cell]; }
  const std::vector<HalfIndex>& vertices() const { return vertices_; }
  /// Edges touching each vertex, +1 when the edge starts there.
  const std::vector<std::vector<std::pair<int, int>>>& vertex_edges() const { return vertex_edges_; }

  /// Solves sum over neighbours (psi_c - psi_n) = rhs_c with psi_0 = 0; rhs must sum to zero.
  std::vector<double> solve_laplacian(const std::vector<double>& rhs) const;

 private:
  int n_;
  std::vector<Edge> edges_;
  std::vector<int> edge_lookup_;  ///< dense over the doubled grid (2n+1)^3
  std::size_t slot(const HalfIndex& p) const {
    const std::size_t w = 2 * n_ + 1;
    return (static_cast<std::size_t>(p[2]) * w + p[1]) * w + p[0];
  }
  std::vector<std::array<std::pair<int, int>, 4>> cell_edges_;
  std::vector<HalfIndex> vertices_;
  std::vector<std::vector<std::pair<int, int>>> vertex_edges_;
  struct Factor;
  std::shared_ptr<const Factor> factor_;
};

/// Shared mesh for a resolution; built once per n.
const CubeSurfaceMesh& surface_mesh(int n);

/// Discrete 1-form on a cube surface: circulation along each mesh edge.
struct Boundary1Form {
  Cube cube;
  int n_f = 0;
  std::vector<double> alpha;
};

/// Cell circulations (d alpha), in CubeBoundaryData cell order.
std::vector<double> surface_d(const Boundary1Form& a);
/// Vertex divergence of alpha (outgoing minus incoming).
std::vector<double> surface_codiff(const Boundary1Form& a);

/// Cell fluxes density * h^2 in mesh order.
std::vector<double> cell_fluxes(const CubeBoundaryData& data);

struct GaugeResult {
  Boundary1Form form;
  double d_residual = 0.0;      ///< |d alpha - phi| / |phi| (l2; absolute when phi = 0)
  double codiff_residual = 0.0;  ///< |d* alpha| / |alpha|
};

/// alpha with d alpha = phi and d* alpha = 0 through one surface Poisson solve.
/// Throws NotExact when |total| > int_tol * flux_unit.
GaugeResult gauge_fix(const CubeBoundaryData& data, double int_tol = 1e-6, double flux_unit = 1.0);

/// Edge integrals of an ambient 1-form A (4-point Gauss per edge).
Boundary1Form boundary_form_from_ambient(const std::function<Vec3(const Vec3&)>& A, const Cube& cube, int n_f);

}  // namespace intflux
