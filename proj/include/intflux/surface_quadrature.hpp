#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "intflux/error.hpp"
#include "intflux/field.hpp"
#include "intflux/flux.hpp"
#include "intflux/quadrature.hpp"

namespace intflux {

namespace detail {

inline constexpr int kMaxPanelDepth = 40;

template <class Visit>
void visit_panel(const AxisRect& p, const QuadratureSpec& quad, const std::vector<Singularity>& sings,
                 int depth, Visit& visit) {
  const double size = std::max(p.u1 - p.u0, p.v1 - p.v0);
  double dmin = std::numeric_limits<double>::infinity();
  for (const auto& s : sings) dmin = std::min(dmin, p.distance(s.position));
  if (dmin < size && depth < kMaxPanelDepth) {
    const double um = 0.5 * (p.u0 + p.u1), vm = 0.5 * (p.v0 + p.v1);
    const double us[3] = {p.u0, um, p.u1};
    const double vs[3] = {p.v0, vm, p.v1};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        AxisRect q = p;
        q.u0 = us[i];
        q.u1 = us[i + 1];
        q.v0 = vs[j];
        q.v1 = vs[j + 1];
        visit_panel(q, quad, sings, depth + 1, visit);
      }
    return;
  }
  const int n = quad.n_q;
  std::vector<double> uq, uw, vq, vw;
  if (quad.rule == QuadRule::gauss_legendre) {
    const auto& g = gauss_legendre(n);
    map_rule(g, p.u0, p.u1, uq, uw);
    map_rule(g, p.v0, p.v1, vq, vw);
  } else {
    uq.resize(n);
    vq.resize(n);
    const double du = (p.u1 - p.u0) / n, dv = (p.v1 - p.v0) / n;
    for (int i = 0; i < n; ++i) {
      uq[i] = p.u0 + (i + 0.5) * du;
      vq[i] = p.v0 + (i + 0.5) * dv;
    }
    uw.assign(n, du);
    vw.assign(n, dv);
  }
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) visit(p.point(uq[i], vq[j]), uw[i] * vw[j]);
}

}  // namespace detail

/// Calls visit(x, w) for the nodes of a tensor rule on r, with panels split
/// into quadrants while a listed singular point is closer than the panel size.
template <class Visit>
void for_each_rect_point(const AxisRect& r, const QuadratureSpec& quad, const std::vector<Singularity>& sings,
                         Visit&& visit) {
  if (quad.n_q < 2) throw InvalidInput("quadrature needs n_q >= 2");
  detail::visit_panel(r, quad, sings, 0, visit);
}

}  // namespace intflux
