#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "intflux/field.hpp"
#include "intflux/flux.hpp"

namespace intflux {

using LatticeIndex = std::array<int, 3>;

/// Cubes of side eps centred at eps*(i + 1/2, j + 1/2, k + 1/2) + a, keeping the
/// centres with |eps*(idx + 1/2)| < 1 - 3 eps (the filter is applied before the
/// shift, so the site count does not depend on a).
struct CubeLattice {
  double eps = 0.0;
  Vec3 a;
  std::vector<LatticeIndex> index;  ///< lexicographic order
  std::vector<Vec3> sites;

  std::size_t size() const { return sites.size(); }
  Cube cube(std::size_t i) const { return {sites[i], eps}; }
  /// Site number of a lattice index, or -1.
  int find(const LatticeIndex& idx) const;
  /// Lattice index of the cell containing x (whether or not it is a site).
  LatticeIndex cell_of(const Vec3& x) const;

  std::map<LatticeIndex, int> lookup;
};

CubeLattice build_lattice(double eps, const Vec3& a);

/// A face of the skeleton, stored once. Its orientation is +e_axis, which points
/// out of `lower` (the lexicographically smaller cube) and into `upper`.
struct LatticeFace {
  int axis = 0;
  int lower = -1;  ///< site below along axis, -1 on the region boundary
  int upper = -1;
  AxisRect rect;
};

/// Unique faces; for each site, faces_of[site][f] is the face index for local face f
/// in the (-x, +x, -y, +y, -z, +z) order. Outward sign of local face f is face_sign(f).
struct Skeleton {
  std::vector<LatticeFace> faces;
  std::vector<std::array<int, 6>> faces_of;
};

Skeleton build_skeleton(const CubeLattice& lattice);

enum class CubeLabel { good, bad };

struct CubeDecomposition {
  CubeLattice lattice;
  Skeleton skeleton;
  double flux_unit = 1.0;
  double label_tol = 1e-6;
  std::vector<double> face_flux;  ///< along +e_axis, one per skeleton face
  std::vector<double> fluxes;     ///< outward, one per site
  std::vector<CubeLabel> labels;
  std::vector<int> degrees;             ///< nearest integer of flux / flux_unit (0 for good cubes)
  std::vector<bool> ill_conditioned;    ///< a singularity sat within one quadrature cell
  std::vector<Vec3> cell_means;

  std::vector<int> bad_cubes() const;
  std::size_t n_bad() const { return bad_cubes().size(); }
};

/// Volume average of the field over a cube by a tensor Gauss rule.
Vec3 cell_mean(const VectorField& field, const Cube& cube, int n = 6);

CubeDecomposition classify(const VectorField& field, const CubeLattice& lattice,
                           const QuadratureSpec& quad = {}, double label_tol = 1e-6);

struct DeviationScore {
  Vec3 a;
  double score = 0.0;
};

/// eps * sum over faces and adjacent cubes of the integral of |X.nu - mean.nu|^p.
DeviationScore deviation_score(const VectorField& field, const CubeDecomposition& dec,
                               const QuadratureSpec& quad = {}, double p = 1.0);

struct CandidateReport {
  Vec3 a;
  bool guard_ok = true;
  double deficit = 0.0;  ///< largest distance of a cube flux to a flux_unit multiple
  bool survived = false;
  double score = 0.0;  ///< NaN for discarded candidates
};

struct TranslationChoice {
  Vec3 a;
  DeviationScore score;
  std::vector<CandidateReport> candidates;
  CubeDecomposition decomposition;  ///< classification at the chosen translation
};

struct TranslationOptions {
  int n_samples = 64;
  double int_tol = 1e-6;
  double label_tol = 1e-6;
  double p = 1.0;
};

/// Samples translations uniformly in the closed eps-ball and keeps the
/// integral candidate with the smallest deviation score.
TranslationChoice select_translation(const VectorField& field, double eps, std::uint64_t seed,
                                     const QuadratureSpec& quad = {}, const TranslationOptions& opt = {});

struct SweepRow {
  double eps = 0.0;
  Vec3 a;
  std::size_t n_bad = 0;
  double volume = 0.0;
};

struct SweepTable {
  std::vector<SweepRow> rows;
  std::optional<double> slope;  ///< least-squares slope of log volume vs log eps; empty when undefined
};

SweepTable bad_volume_sweep(const VectorField& field, const std::vector<double>& eps_list,
                            std::uint64_t seed, const QuadratureSpec& quad = {},
                            const TranslationOptions& opt = {});

}  // namespace intflux
