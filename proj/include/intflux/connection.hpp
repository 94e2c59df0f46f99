#pragma once

#include <cstdint>
#include <vector>

#include "intflux/field.hpp"

namespace intflux {

/// Oriented segment start -> end; its boundary is +m at end, -m at start.
struct Segment {
  Vec3 start;
  Vec3 end;
  int multiplicity = 1;
};

/// Integer 1-current made of finitely many segments.
struct Current1 {
  std::vector<Segment> segments;

  double mass() const;
};

/// Net degree at every segment endpoint strictly inside the ball (points
/// closer than 1e-12 to the unit sphere count as boundary). Coincident
/// endpoints are merged; points of zero net degree are dropped. Sorted by
/// position (x, then y, then z).
std::vector<Singularity> boundary_signature(const Current1& L);

/// Input list merged the same way, for comparison with boundary_signature.
std::vector<Singularity> normalized_signature(const std::vector<Singularity>& sings);

/// Point of the unit sphere closest to x; (1, 0, 0) for the origin.
Vec3 nearest_boundary_point(const Vec3& x);

/// Feasible current by the running-balance construction: positive nodes in
/// input order each absorb negative nodes in input order until their balance
/// drops to zero or below, a deficit carrying to the next positive node. What
/// is left over goes to the nearest boundary point of its node. Multiplicities
/// are the amounts actually transported, which equal min(|d_j|, d_i) whenever
/// nothing is carried. The result depends on the input order.
Current1 greedy_connection(const std::vector<Singularity>& sings);

/// Mass minimizer with the sphere as a free reservoir: successive shortest
/// paths on the transportation network negatives -> positives, where any unit
/// may instead leave or enter through the sphere at cost 1 - |x|.
Current1 optimal_connection(const std::vector<Singularity>& sings);

struct DualCertificate {
  std::vector<Singularity> singularities;
  std::vector<double> potential;  ///< one value per singularity
  double value = 0.0;             ///< sum of degree * potential
};

/// Optimal potentials of the finite Lipschitz program
///   max sum d_j phi_j,  |phi_i - phi_j| <= |x_i - x_j|,  |phi_j| <= 1 - |x_j|
/// by a dense primal simplex with Bland's rule.
DualCertificate dual_value(const std::vector<Singularity>& sings);

struct Certification {
  bool certified = false;
  double gap = 0.0;  ///< primal mass minus dual value
  double primal_mass = 0.0;
  double dual_value = 0.0;
};

/// Checks every constraint of the certificate to within 1e-9 (throws
/// CertificateInvalid naming the first violation), then compares values.
/// Throws InvalidInput when the current's boundary does not match the
/// certificate's singularities.
Certification certify(const Current1& primal, const DualCertificate& dual, double tol = 1e-9);

/// Largest discrepancy, over n_test random bumps phi supported in the ball,
/// between <Div X, phi> = -int X . grad(phi) (by quadrature in spherical
/// coordinates about the singularities, split by a partition of unity) and
/// <boundary L, phi> = sum m (phi(end) - phi(start)). Pairings are in flux
/// units, so both sides are divided by the field's flux_unit.
double boundary_residual(const VectorField& field, const Current1& L, int n_test, std::uint64_t seed);

}  // namespace intflux
