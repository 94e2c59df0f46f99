#pragma once

#include <optional>
#include <vector>

#include "intflux/field.hpp"
#include "intflux/flux.hpp"

namespace intflux {

/// phi_k = k on |x| < e^-k / 2, -ln(2|x|) up to |x| = 1/2, 0 beyond; in R^n.
struct LogTestFunction {
  int k = 1;
  int n = 3;

  double value(double r) const;
  /// |grad phi_k| at radius r (1/r on the annulus, 0 elsewhere).
  double grad_norm(double r) const;
  double inner_radius() const;
};

/// Surface area of the unit sphere in R^n, n omega_n.
double sphere_area(int n);

/// (n omega_n)^(1/n) k^(1/n).
double grad_norm_ln_closed_form(int k, int n);

/// L^n norm of grad phi_k over the unit ball of R^n by tensor quadrature in
/// polar (n = 2) or spherical (n = 3) coordinates, geometric radial panels
/// with quad.n_q Gauss points each. k >= 1, n in {2, 3}.
double grad_norm_ln(int k, int n, const QuadratureSpec& quad = {16});

/// Same with exponent q > 1 in place of n.
double grad_norm_lq(int k, int n, double q, const QuadratureSpec& quad = {16});

struct AsymptoticRow {
  int k = 0;
  double pairing = 0.0;             ///< <Div X, phi_k> = -int X . grad phi_k
  std::optional<double> bound;      ///< Hoelder bound, when computed
  double ratio = 0.0;               ///< pairing / k
};

/// Pairings of X with phi_k over the annulus. The field may have at most
/// one known singularity, at the origin (InvalidInput otherwise).
std::vector<AsymptoticRow> pairing_growth(const VectorField& field, const std::vector<int>& k_list,
                                          const QuadratureSpec& quad = {16});

struct LpEstimate {
  double norm = 0.0;                 ///< extrapolated ||X||_{L^p(B)}
  std::vector<double> truncated;     ///< int_{B \ B_rho} |X|^p for rho = 0.1, 0.05, 0.025
  double order = 0.0;                ///< observed convergence order in rho
};

/// ||X||_{L^p} on the unit ball, computed on B minus B_rho about the origin
/// and extrapolated over rho by Aitken's delta-squared. Throws
/// LpEstimateDivergence when the truncated integrals do not settle.
LpEstimate lp_norm_estimate(const VectorField& field, double p, const QuadratureSpec& quad = {16});

/// |pairing| against ||X||_{L^p} ||grad phi_k||_{L^p'} with p' = p / (p - 1).
/// At p = 3/2 the bound is (4 pi)^(1/3) ||X||_{L^{3/2}} k^(1/3).
std::vector<AsymptoticRow> hoelder_bound_check(const VectorField& field, double p, const std::vector<int>& k_list,
                                               const QuadratureSpec& quad = {16});

}  // namespace intflux
