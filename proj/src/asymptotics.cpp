#include "intflux/asymptotics.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "intflux/error.hpp"
#include "intflux/quadrature.hpp"

namespace intflux {

namespace {

constexpr double kPi = std::numbers::pi;

void check_dimension(int n) {
  if (n != 2 && n != 3) throw InvalidInput("only n = 2 and n = 3 are supported");
}

// radial breakpoints from lo to hi, each panel at most a factor 2 wide
std::vector<double> geometric_breaks(double lo, double hi) {
  std::vector<double> b{lo};
  while (b.back() * 2 < hi) b.push_back(b.back() * 2);
  b.push_back(hi);
  return b;
}

// int over lo < |x| < hi of f(x) in R^n; f receives the point (z = 0 for n = 2)
template <class F>
double shell_integral(int n, double lo, double hi, const QuadratureSpec& quad, F&& f) {
  const int nq = std::max(quad.n_q, 2);
  const auto& g = gauss_legendre(nq);
  const int n_az = 2 * nq;
  std::vector<Vec3> dirs;
  std::vector<double> dw;
  if (n == 2) {
    for (int a = 0; a < n_az; ++a) {
      const double t = 2 * kPi * (a + 0.5) / n_az;
      dirs.push_back({std::cos(t), std::sin(t), 0.0});
      dw.push_back(2 * kPi / n_az);
    }
  } else {
    for (int c = 0; c < nq; ++c) {
      const double ct = g.nodes[c], st = std::sqrt(1 - ct * ct);
      for (int a = 0; a < n_az; ++a) {
        const double t = 2 * kPi * (a + 0.5) / n_az;
        dirs.push_back({st * std::cos(t), st * std::sin(t), ct});
        dw.push_back(g.weights[c] * 2 * kPi / n_az);
      }
    }
  }
  const auto breaks = geometric_breaks(lo, hi);
  std::vector<double> rp, rw;
  double total = 0.0;
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    map_rule(g, breaks[p], breaks[p + 1], rp, rw);
    for (std::size_t i = 0; i < rp.size(); ++i) {
      const double r = rp[i];
      const double jac = n == 2 ? r : r * r;
      double ang = 0.0;
      for (std::size_t d = 0; d < dirs.size(); ++d) ang += dw[d] * f(r * dirs[d]);
      total += rw[i] * jac * ang;
    }
  }
  return total;
}

Vec3 grad_phi(const LogTestFunction& phi, const Vec3& x) {
  const double r = norm(x);
  if (r <= phi.inner_radius() || r >= 0.5) return {};
  return (-1.0 / (r * r)) * x;
}

void check_origin_only(const VectorField& field) {
  const auto s = field.known_singularities();
  if (s.size() > 1) throw InvalidInput("field has more than one singularity");
  if (s.size() == 1 && norm(s[0].position) > 1e-12)
    throw InvalidInput("singularity is not at the origin; shift the field first");
}

}  // namespace

double LogTestFunction::inner_radius() const { return 0.5 * std::exp(-static_cast<double>(k)); }

double LogTestFunction::value(double r) const {
  if (r <= inner_radius()) return k;
  if (r >= 0.5) return 0.0;
  return -std::log(2 * r);
}

double LogTestFunction::grad_norm(double r) const {
  if (r <= inner_radius() || r >= 0.5) return 0.0;
  return 1.0 / r;
}

double sphere_area(int n) {
  check_dimension(n);
  return n == 2 ? 2 * kPi : 4 * kPi;
}

double grad_norm_ln_closed_form(int k, int n) {
  return std::pow(sphere_area(n), 1.0 / n) * std::pow(static_cast<double>(k), 1.0 / n);
}

double grad_norm_lq(int k, int n, double q, const QuadratureSpec& quad) {
  check_dimension(n);
  if (k < 1) throw InvalidInput("k must be at least 1");
  if (!(q > 1)) throw InvalidInput("exponent must exceed 1");
  const LogTestFunction phi{k, n};
  const double s = shell_integral(n, phi.inner_radius(), 0.5, quad,
                                  [&](const Vec3& x) { return std::pow(norm(grad_phi(phi, x)), q); });
  return std::pow(s, 1.0 / q);
}

double grad_norm_ln(int k, int n, const QuadratureSpec& quad) { return grad_norm_lq(k, n, n, quad); }

std::vector<AsymptoticRow> pairing_growth(const VectorField& field, const std::vector<int>& k_list,
                                          const QuadratureSpec& quad) {
  check_origin_only(field);
  std::vector<AsymptoticRow> rows;
  for (int k : k_list) {
    if (k < 1) throw InvalidInput("k must be at least 1");
    const LogTestFunction phi{k, 3};
    const double s = shell_integral(3, phi.inner_radius(), 0.5, quad,
                                    [&](const Vec3& x) { return dot(field.eval(x), grad_phi(phi, x)); });
    AsymptoticRow row;
    row.k = k;
    row.pairing = -s;
    row.ratio = row.pairing / k;
    rows.push_back(row);
  }
  return rows;
}

LpEstimate lp_norm_estimate(const VectorField& field, double p, const QuadratureSpec& quad) {
  if (!(p >= 1)) throw InvalidInput("L^p estimate needs p >= 1");
  check_origin_only(field);
  LpEstimate out;
  for (double rho : {0.1, 0.05, 0.025})
    out.truncated.push_back(shell_integral(3, rho, 1.0, quad, [&](const Vec3& x) { return std::pow(norm(field.eval(x)), p); }));
  const double d1 = out.truncated[1] - out.truncated[0];
  const double d2 = out.truncated[2] - out.truncated[1];
  const double N3 = out.truncated[2];
  if (std::abs(d2) <= 1e-13 * std::max(1.0, N3)) {
    out.order = std::numeric_limits<double>::infinity();
    out.norm = std::pow(N3, 1.0 / p);
    return out;
  }
  out.order = d1 > 0 && d2 > 0 ? std::log2(d1 / d2) : 0.0;
  if (!(out.order > 0.1))
    throw LpEstimateDivergence("truncated L^" + std::to_string(p) + " integrals grow without settling (observed order " +
                               std::to_string(out.order) + "); the field is not in L^p near the origin");
  out.norm = std::pow(N3 + d2 * d2 / (d1 - d2), 1.0 / p);
  return out;
}

std::vector<AsymptoticRow> hoelder_bound_check(const VectorField& field, double p, const std::vector<int>& k_list,
                                               const QuadratureSpec& quad) {
  const double xn = lp_norm_estimate(field, p, quad).norm;
  auto rows = pairing_growth(field, k_list, quad);
  for (auto& row : rows) {
    double gn;
    if (p == 1.0) {
      gn = 1.0 / LogTestFunction{row.k, 3}.inner_radius();
    } else {
      gn = grad_norm_lq(row.k, 3, p / (p - 1), quad);
    }
    row.bound = xn * gn;
  }
  return rows;
}

}  // namespace intflux
