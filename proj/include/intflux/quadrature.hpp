#pragma once

#include <span>
#include <vector>

namespace intflux {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached n-point Gauss-Legendre rule (Newton iteration on P_n).
const GaussRule& gauss_legendre(int n);

/// Maps a reference rule onto [a, b]; returns (points, weights).
void map_rule(const GaussRule& rule, double a, double b, std::vector<double>& pts,
              std::vector<double>& wts);

}  // namespace intflux
