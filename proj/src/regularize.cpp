#include "intflux/regularize.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <string>

#include "intflux/error.hpp"
#include "intflux/quadrature.hpp"

namespace intflux {

namespace {

struct Grid {
  Vec3 origin;
  double h;
  std::array<int, 3> cells;

  int plane_index(int axis, double x) const { return static_cast<int>(std::lround((x - origin[axis]) / h)); }
  std::size_t cell_index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * cells[1] + j) * cells[0] + i;
  }
};

// Covers the ball plus the exterior band of width (2 + 2 pad) h.
Grid make_grid(const CubeLattice& lat, int g, int pad) {
  Grid grid;
  grid.h = lat.eps / g;
  const double reach = 1.0 + (3.0 + 2 * pad) * grid.h;
  for (int a = 0; a < 3; ++a) {
    grid.origin[a] = lat.a[a] + grid.h * std::floor((-reach - lat.a[a]) / grid.h);
    grid.cells[a] = static_cast<int>(std::ceil((reach - grid.origin[a]) / grid.h));
  }
  return grid;
}

template <class F>
auto tagged(std::size_t site, F&& body) {
  const std::string tag = "cube " + std::to_string(site) + ": ";
  try {
    return body();
  } catch (const NotExact& e) {
    throw NotExact(tag + e.what());
  } catch (const SolverError& e) {
    throw SolverError(tag + e.what(), e.residual());
  } catch (const IllConditionedQuadrature& e) {
    throw IllConditionedQuadrature(tag + e.what(), e.face());
  } catch (const InvalidInput& e) {
    throw InvalidInput(tag + e.what());
  }
}

// Circulations of one good cube on the output grid: surface edges from the
// gauge-fixed boundary form, interior ones from the extension nodes.
class CubeCirculation {
 public:
  CubeCirculation(const Boundary1Form& alpha, const CubeExtension& ext, int g)
      : alpha_(alpha), ext_(ext), g_(g), r_(alpha.n_f / g), q_((ext.m - 1) / g), mesh_(surface_mesh(alpha.n_f)) {}

  /// Along +e_k from coarse node P (coordinates in [0, g]).
  double edge(int k, const std::array<int, 3>& P) const {
    const int u = tangent_u(k), v = tangent_v(k);
    double s = 0.0;
    if (P[u] == 0 || P[u] == g_ || P[v] == 0 || P[v] == g_) {
      HalfIndex mid{2 * P[0] * r_, 2 * P[1] * r_, 2 * P[2] * r_};
      for (int t = 0; t < r_; ++t) {
        mid[k] = 2 * (P[k] * r_ + t) + 1;
        s += alpha_.alpha[mesh_.edge_at(mid)];
      }
      return s;
    }
    std::array<int, 3> N{P[0] * q_, P[1] * q_, P[2] * q_};
    double prev = ext_.node(N[0], N[1], N[2])[k];
    for (int t = 0; t < q_; ++t) {
      ++N[k];
      const double next = ext_.node(N[0], N[1], N[2])[k];
      s += 0.5 * (prev + next);
      prev = next;
    }
    return s * ext_.spacing();
  }

  /// Flux along +e_d through the coarse square with lower corner P.
  double face(int d, std::array<int, 3> P) const {
    const int u = tangent_u(d), v = tangent_v(d);
    auto Pu = P, Pv = P;
    ++Pu[u];
    ++Pv[v];
    return edge(u, P) + edge(v, Pu) - edge(u, Pv) - edge(v, P);
  }

 private:
  const Boundary1Form& alpha_;
  const CubeExtension& ext_;
  int g_, r_, q_;
  const CubeSurfaceMesh& mesh_;
};

void convolve(std::vector<double>& data, const std::array<int, 3>& dims, const std::vector<double>& w1, int R) {
  // full 3D stencil of a radial kernel, zero outside the grid
  std::vector<double> out(data.size(), 0.0);
  const int K = 2 * R + 1;
  for (int k = 0; k < dims[2]; ++k)
    for (int j = 0; j < dims[1]; ++j)
      for (int i = 0; i < dims[0]; ++i) {
        double s = 0.0;
        for (int dk = -R; dk <= R; ++dk) {
          const int kk = k + dk;
          if (kk < 0 || kk >= dims[2]) continue;
          for (int dj = -R; dj <= R; ++dj) {
            const int jj = j + dj;
            if (jj < 0 || jj >= dims[1]) continue;
            for (int di = -R; di <= R; ++di) {
              const int ii = i + di;
              if (ii < 0 || ii >= dims[0]) continue;
              s += w1[((dk + R) * K + dj + R) * K + di + R] *
                   data[(static_cast<std::size_t>(kk) * dims[1] + jj) * dims[0] + ii];
            }
          }
        }
        out[(static_cast<std::size_t>(k) * dims[1] + j) * dims[0] + i] = s;
      }
  data.swap(out);
}

}  // namespace

RegularizedField assemble(const VectorField& field, const CubeDecomposition& dec, const RegularizeOptions& opt) {
  const CubeLattice& lat = dec.lattice;
  const int g = opt.grid_per_cube;
  if (g < 2 || g % 2 != 0) throw InvalidInput("grid_per_cube must be even and at least 2");
  if (opt.n_f % g != 0) throw InvalidInput("n_f must be a multiple of grid_per_cube");
  if (opt.m < 5 || (opt.m - 1) % g != 0) throw InvalidInput("m - 1 must be a multiple of grid_per_cube");
  const double unit = dec.flux_unit;
  const double delta = opt.delta > 0 ? opt.delta : lat.eps / 8;

  RegularizedField out;
  out.lattice = lat;
  out.delta = delta;
  const FaceForm raw = restrict_to_skeleton(field, dec, opt.n_f, opt.cell_quad);
  const FaceForm sm = smooth_skeleton(raw, delta, &out.smoothing);

  // final mollification width in cells; the exterior band is widened by it so
  // the sinks outside the ball stay outside after smoothing
  const double w = 0.5 * delta;
  const int R = static_cast<int>(std::floor(w / (lat.eps / g)));
  const Grid grid = make_grid(lat, g, R);
  const double h = grid.h;
  auto F = std::make_shared<StaggeredField>(grid.origin, h, grid.cells, FieldConvention{unit});

  // skeleton faces: sums of smoothed boundary cells
  const int r = opt.n_f / g;
  for (std::size_t fi = 0; fi < sm.skeleton.faces.size(); ++fi) {
    const auto& face = sm.skeleton.faces[fi];
    const int d = face.axis, u = tangent_u(d), v = tangent_v(d);
    std::array<int, 3> idx{};
    idx[d] = grid.plane_index(d, face.rect.plane);
    const int U0 = grid.plane_index(u, face.rect.u0), V0 = grid.plane_index(v, face.rect.v0);
    const auto dens = sm.face(fi);
    for (int cj = 0; cj < g; ++cj)
      for (int ci = 0; ci < g; ++ci) {
        double s = 0.0;
        for (int j = cj * r; j < (cj + 1) * r; ++j)
          for (int i = ci * r; i < (ci + 1) * r; ++i) s += dens[j * opt.n_f + i];
        idx[u] = U0 + ci;
        idx[v] = V0 + cj;
        F->flux(d, idx[0], idx[1], idx[2]) = s * sm.cell_area();
      }
  }

  // cube interiors
  out.cubes.resize(lat.size());
  for (std::size_t s = 0; s < lat.size(); ++s) {
    const Cube cube = lat.cube(s);
    const Vec3 lo = cube.lo();
    const std::array<int, 3> base{grid.plane_index(0, lo.x), grid.plane_index(1, lo.y), grid.plane_index(2, lo.z)};
    CubeDiagnostics& diag = out.cubes[s];
    diag.site = static_cast<int>(s);
    diag.bad = dec.labels[s] == CubeLabel::bad;
    const CubeBoundaryData data = sm.cube_data(s);
    diag.total = data.total();

    auto for_interior_faces = [&](auto&& flux_of) {
      for (int d = 0; d < 3; ++d)
        for (int pd = 1; pd < g; ++pd)
          for (int pv = 0; pv < g; ++pv)
            for (int pu = 0; pu < g; ++pu) {
              std::array<int, 3> P{};
              P[d] = pd;
              P[tangent_u(d)] = pu;
              P[tangent_v(d)] = pv;
              F->flux(d, base[0] + P[0], base[1] + P[1], base[2] + P[2]) = flux_of(d, P);
            }
    };

    // a bad cube with zero total carries no singularity; it gets the harmonic
    // extension, since the radial one would leave a dipole at its centre
    bool harmonic = !diag.bad;
    if (diag.bad) {
      tagged(s, [&] {
        const double q = data.total() / unit;
        if (std::abs(q - std::round(q)) > opt.int_tol)
          throw InvalidInput("bad cube total " + std::to_string(q) + " is not integral");
        diag.degree = static_cast<int>(std::lround(q));
        diag.degenerate = diag.degree == 0;
        harmonic = diag.degenerate;
        return 0;
      });
    }
    if (harmonic) {
      tagged(s, [&] {
        const GaugeResult gauge = gauge_fix(data, opt.int_tol, unit);
        const CubeExtension ext = harmonic_extend(gauge.form, opt.m, static_cast<int>(s), opt.solver_tol);
        diag.d_residual = gauge.d_residual;
        diag.codiff_residual = gauge.codiff_residual;
        diag.laplace_residual = ext.residual;
        const CubeCirculation circ(gauge.form, ext, g);
        for_interior_faces([&](int d, const std::array<int, 3>& P) { return circ.face(d, P); });
        return 0;
      });
    } else {
      tagged(s, [&] {
        const RadialField X(data, {unit});
        for_interior_faces([&](int d, const std::array<int, 3>& P) {
          AxisRect rect;
          rect.axis = d;
          const int u = tangent_u(d), v = tangent_v(d);
          rect.plane = grid.origin[d] + (base[d] + P[d]) * h;
          rect.u0 = grid.origin[u] + (base[u] + P[u]) * h;
          rect.u1 = rect.u0 + h;
          rect.v0 = grid.origin[v] + (base[v] + P[v]) * h;
          rect.v1 = rect.v0 + h;
          return *X.exact_rect_flux(rect);
        });
        return 0;
      });
      out.singularities.push_back({cube.center, diag.degree});
    }
  }

  // exterior: potential flow in the cells between the cubes and the sphere
  const auto& nc = grid.cells;
  const std::size_t n_cells = static_cast<std::size_t>(nc[0]) * nc[1] * nc[2];
  std::vector<int> site_of(n_cells, -1);
  std::vector<int> active(n_cells, -1);
  std::vector<std::array<int, 3>> active_cells;
  for (int k = 0; k < nc[2]; ++k)
    for (int j = 0; j < nc[1]; ++j)
      for (int i = 0; i < nc[0]; ++i) {
        const Vec3 c = F->cell_center(i, j, k);
        const std::size_t ci = grid.cell_index(i, j, k);
        site_of[ci] = lat.find(lat.cell_of(c));
        if (site_of[ci] < 0 && norm(c) < 1.0 + (2.0 + 2 * R) * h) {
          active[ci] = static_cast<int>(active_cells.size());
          active_cells.push_back({i, j, k});
        }
      }
  auto in_grid = [&](const std::array<int, 3>& c) {
    return c[0] >= 0 && c[1] >= 0 && c[2] >= 0 && c[0] < nc[0] && c[1] < nc[1] && c[2] < nc[2];
  };
  if (!active_cells.empty()) {
    const int na = static_cast<int>(active_cells.size());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(7 * static_cast<std::size_t>(na));
    Eigen::VectorXd b = Eigen::VectorXd::Zero(na);
    for (int ia = 0; ia < na; ++ia) {
      const auto c = active_cells[ia];
      double diagonal = 0.0;
      for (int a = 0; a < 3; ++a)
        for (int sg : {-1, 1}) {
          auto nb = c;
          nb[a] += sg;
          const bool inside = in_grid(nb);
          const std::size_t ni = inside ? grid.cell_index(nb[0], nb[1], nb[2]) : 0;
          if (inside && site_of[ni] >= 0) {
            auto f = c;
            if (sg > 0) ++f[a];
            b[ia] -= sg * F->flux(a, f[0], f[1], f[2]) / h;
            continue;
          }
          diagonal += 1.0;
          if (inside && active[ni] >= 0) trip.emplace_back(ia, active[ni], -1.0);
        }
      trip.emplace_back(ia, ia, diagonal > 0 ? diagonal : 1.0);
    }
    Eigen::SparseMatrix<double> A(na, na);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::IncompleteCholesky<double, Eigen::Lower, Eigen::NaturalOrdering<int>>>
        cg;
    cg.setTolerance(opt.exterior_tol);
    cg.setMaxIterations(20 * na);
    cg.compute(A);
    const Eigen::VectorXd sol = b.norm() > 0 ? Eigen::VectorXd(cg.solve(b)) : Eigen::VectorXd::Zero(na);
    out.exterior_iterations = static_cast<int>(cg.iterations());
    out.exterior_residual = b.norm() > 0 ? (A * sol - b).norm() / b.norm() : 0.0;
    if (!(out.exterior_residual <= std::max(opt.solver_tol, 10 * opt.exterior_tol)))
      throw SolverError("exterior potential flow did not converge", out.exterior_residual);
    auto u_at = [&](const std::array<int, 3>& c) -> double {
      if (!in_grid(c)) return 0.0;
      const int ia = active[grid.cell_index(c[0], c[1], c[2])];
      return ia >= 0 ? sol[ia] : 0.0;
    };
    for (int ia = 0; ia < na; ++ia) {
      const auto c = active_cells[ia];
      for (int a = 0; a < 3; ++a)
        for (int sg : {-1, 1}) {
          auto nb = c;
          nb[a] += sg;
          if (in_grid(nb) && site_of[grid.cell_index(nb[0], nb[1], nb[2])] >= 0) continue;
          auto f = c;
          if (sg > 0) ++f[a];
          // flux along +e_a is -(u_upper - u_lower) h
          const double flux = sg > 0 ? (sol[ia] - u_at(nb)) * h : (u_at(nb) - sol[ia]) * h;
          F->flux(a, f[0], f[1], f[2]) = flux;
        }
    }
  }

  // final mollification of the part without the point charges
  if (R >= 1) {
    out.mollified = true;
    const int K = 2 * R + 1;
    std::vector<double> kernel(static_cast<std::size_t>(K) * K * K);
    double ksum = 0.0;
    for (int dk = -R; dk <= R; ++dk)
      for (int dj = -R; dj <= R; ++dj)
        for (int di = -R; di <= R; ++di) {
          const double rho2 = h * h * (di * di + dj * dj + dk * dk) / (w * w);
          const double val = rho2 < 1.0 ? (1 - rho2) * (1 - rho2) : 0.0;
          kernel[((dk + R) * K + dj + R) * K + di + R] = val;
          ksum += val;
        }
    for (double& v : kernel) v /= ksum;
    for (int a = 0; a < 3; ++a) {
      const auto dims = F->face_dims(a);
      const int u = tangent_u(a), v = tangent_v(a);
      std::vector<double> coulomb(F->flux_array(a).size(), 0.0);
      if (!out.singularities.empty())
        for (int k = 0; k < dims[2]; ++k)
          for (int j = 0; j < dims[1]; ++j)
            for (int i = 0; i < dims[0]; ++i) {
              const std::array<int, 3> idx{i, j, k};
              AxisRect rect{a, grid.origin[a] + idx[a] * h, grid.origin[u] + idx[u] * h, 0, grid.origin[v] + idx[v] * h, 0};
              rect.u1 = rect.u0 + h;
              rect.v1 = rect.v0 + h;
              double s = 0.0;
              for (const auto& q : out.singularities) s += point_charge_rect_flux(q, rect, unit);
              coulomb[F->face_index(a, i, j, k)] = s;
            }
      auto& arr = F->flux_array(a);
      for (std::size_t t = 0; t < arr.size(); ++t) arr[t] -= coulomb[t];
      convolve(arr, dims, kernel, R);
      for (std::size_t t = 0; t < arr.size(); ++t) arr[t] += coulomb[t];
    }
  }

  // divergence of output cells inside each cube, away from its centre
  for (std::size_t s = 0; s < lat.size(); ++s) {
    const Cube cube = lat.cube(s);
    const Vec3 lo = cube.lo();
    const std::array<int, 3> base{grid.plane_index(0, lo.x), grid.plane_index(1, lo.y), grid.plane_index(2, lo.z)};
    double worst = 0.0;
    for (int k = 0; k < g; ++k)
      for (int j = 0; j < g; ++j)
        for (int i = 0; i < g; ++i) {
          const Vec3 c = F->cell_center(base[0] + i, base[1] + j, base[2] + k);
          if (out.cubes[s].bad && !out.cubes[s].degenerate && sup_norm(c - cube.center) < h * (1 + R)) continue;
          worst = std::max(worst, std::abs(F->divergence(base[0] + i, base[1] + j, base[2] + k)));
        }
    out.cubes[s].max_cell_divergence = worst;
  }

  F->set_singularities(out.singularities, (std::sqrt(3.0) + 1.0 + R) * h);
  out.field = F;
  return out;
}

double approximation_error(const VectorField& field, const RegularizedField& reg, double p,
                           const QuadratureSpec& quad) {
  if (!(p >= 1.0)) throw InvalidInput("approximation error needs p >= 1");
  if (!reg.field) throw InvalidInput("regularized field is empty");
  const StaggeredField& Y = *reg.field;
  if (field.convention().flux_unit != Y.convention().flux_unit)
    throw InvalidInput("fields use different flux units");
  const CubeLattice& lat = reg.lattice;
  const double h = Y.spacing();
  const int g = static_cast<int>(std::lround(lat.eps / h));
  std::vector<Vec3> excluded;
  for (const auto& s : field.known_singularities()) excluded.push_back(s.position);
  for (const auto& s : reg.singularities) excluded.push_back(s.position);
  const double ball = 2.0 * h;
  const auto& rule = gauss_legendre(std::max(1, quad.n_q));
  const int n = static_cast<int>(rule.nodes.size());
  double sum = 0.0;
  for (std::size_t s = 0; s < lat.size(); ++s) {
    const Cube cube = lat.cube(s);
    if (!field.contains_box(cube.lo(), cube.hi()) || !Y.contains_box(cube.lo(), cube.hi()))
      throw InvalidInput("field is not defined on decomposition cube " + std::to_string(s));
    const Vec3 lo = cube.lo();
    for (int k = 0; k < g; ++k)
      for (int j = 0; j < g; ++j)
        for (int i = 0; i < g; ++i) {
          const Vec3 c0 = lo + Vec3{i * h, j * h, k * h};
          for (int qz = 0; qz < n; ++qz)
            for (int qy = 0; qy < n; ++qy)
              for (int qx = 0; qx < n; ++qx) {
                const Vec3 x = c0 + 0.5 * h * Vec3{1 + rule.nodes[qx], 1 + rule.nodes[qy], 1 + rule.nodes[qz]};
                bool skip = false;
                for (const auto& e : excluded)
                  if (norm(x - e) < ball) skip = true;
                if (skip) continue;
                const double wgt = rule.weights[qx] * rule.weights[qy] * rule.weights[qz] * 0.125 * h * h * h;
                sum += wgt * std::pow(norm(field.eval(x) - Y.eval(x)), p);
              }
        }
  }
  return std::pow(sum, 1.0 / p);
}

}  // namespace intflux
