#pragma once

#include <memory>
#include <vector>

#include "intflux/extension.hpp"
#include "intflux/faceform.hpp"
#include "intflux/staggered.hpp"

namespace intflux {

struct RegularizeOptions {
  int n_f = 32;            ///< boundary cells per cube face
  int m = 33;              ///< extension nodes per cube axis; (m - 1) % grid_per_cube == 0
  int grid_per_cube = 8;   ///< output cells per cube side; divides n_f, even
  double delta = 0.0;      ///< smoothing width; 0 picks eps / 8
  double int_tol = 1e-6;
  double solver_tol = 1e-8;
  double exterior_tol = 1e-12;  ///< relative CG residual outside the cubes
  QuadratureSpec cell_quad{4};
};

struct CubeDiagnostics {
  int site = -1;
  bool bad = false;
  int degree = 0;
  double total = 0.0;            ///< outward boundary flux after smoothing
  double d_residual = 0.0;       ///< gauge fixing, good cubes
  double codiff_residual = 0.0;
  double laplace_residual = 0.0;
  double max_cell_divergence = 0.0;  ///< over output cells inside the cube, away from the centre
  bool degenerate = false;
};

/// Output of the pipeline: a face-flux grid covering the unit ball plus the
/// bad-cube singularities and per-cube diagnostics.
struct RegularizedField {
  std::shared_ptr<const StaggeredField> field;
  std::vector<Singularity> singularities;
  CubeLattice lattice;
  double delta = 0.0;
  std::vector<CubeDiagnostics> cubes;
  SmoothingReport smoothing;
  double exterior_residual = 0.0;
  int exterior_iterations = 0;
  bool mollified = false;
};

/// Good cubes, and bad cubes of zero total (flagged degenerate): gauge_fix
/// then harmonic_extend, with face fluxes taken as
/// circulations of the extension. Bad cubes: exact fluxes of the radial
/// pullback. Outside the cubes: a potential flow matching the outer skeleton
/// fluxes and vanishing outside the ball. Skeleton faces carry the smoothed
/// boundary data directly. Errors from a cube are rethrown with its site number.
RegularizedField assemble(const VectorField& field, const CubeDecomposition& dec, const RegularizeOptions& opt = {});

/// L^p distance between field and reg over the union of decomposition cubes,
/// by Gauss points in each output cell; points within two output cells of a
/// singularity of either field are left out. Throws InvalidInput when the
/// fields do not share a flux unit or field is not defined on the region.
double approximation_error(const VectorField& field, const RegularizedField& reg, double p,
                           const QuadratureSpec& quad = {3});

}  // namespace intflux
