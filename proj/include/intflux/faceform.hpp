#pragma once

#include <array>
#include <span>
#include <vector>

#include "intflux/cubedecomp.hpp"

namespace intflux {

/// Outward normal flux densities on the six faces of one cube. Face f follows
/// the (-x, +x, -y, +y, -z, +z) order; cell (i, j) of a face with axis d covers
/// [i h, (i+1) h] along tangent_u(d) and [j h, (j+1) h] along tangent_v(d),
/// measured from the cube's lower corner, with h = side / n_f.
struct CubeBoundaryData {
  Cube cube;
  int n_f = 0;
  std::array<std::vector<double>, 6> density;

  double cell_size() const { return cube.side / n_f; }
  double at(int f, int i, int j) const { return density[f][static_cast<std::size_t>(j) * n_f + i]; }
  double face_total(int f) const;
  double total() const;
  static CubeBoundaryData zero(const Cube& cube, int n_f);
};

/// Normal flux data on the skeleton of a decomposition: one n_f x n_f grid of
/// cell-average densities of X.e_axis per unique face, plus the stored face
/// integral. Orientation is +e_axis, outward from the lexicographically smaller cube.
struct FaceForm {
  CubeLattice lattice;
  Skeleton skeleton;
  int n_f = 0;
  double flux_unit = 1.0;
  std::vector<double> density;  ///< faces * n_f * n_f, cell (i, j) at j * n_f + i
  std::vector<double> totals;   ///< per face

  double cell_size() const { return lattice.eps / n_f; }
  double cell_area() const { return cell_size() * cell_size(); }
  std::span<double> face(std::size_t f) {
    return {density.data() + f * n_f * n_f, static_cast<std::size_t>(n_f * n_f)};
  }
  std::span<const double> face(std::size_t f) const {
    return {density.data() + f * n_f * n_f, static_cast<std::size_t>(n_f * n_f)};
  }
  /// Outward total over the boundary of a site, from the stored face totals.
  double cube_total(std::size_t site) const;
  CubeBoundaryData cube_data(std::size_t site) const;
};

/// Cell averages of X.e_axis on every skeleton face. Throws
/// IllConditionedQuadrature naming the face when a known singularity lies
/// within eps / quad.n_q of it.
FaceForm restrict_to_skeleton(const VectorField& field, const CubeDecomposition& dec, int n_f,
                              const QuadratureSpec& cell_quad = {4});

struct SmoothingReport {
  int multiplicative = 0;
  int additive = 0;  ///< faces whose mollified integral vanished
  std::vector<int> additive_faces;
};

/// Per-face mollification with a compact kernel of width delta, truncated at
/// the face edges, then rescaled so each face integrates to its stored total.
FaceForm smooth_skeleton(const FaceForm& form, double delta, SmoothingReport* report = nullptr);

}  // namespace intflux
