#include "intflux/gauge.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <memory>
#include <mutex>

#include "intflux/error.hpp"
#include "intflux/quadrature.hpp"

namespace intflux {

struct CubeSurfaceMesh::Factor {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
};

namespace {

HalfIndex shifted(HalfIndex p, int axis, int by) {
  p[axis] += by;
  return p;
}

}  // namespace

CubeSurfaceMesh::CubeSurfaceMesh(int n) : n_(n) {
  if (n < 1) throw InvalidInput("surface mesh needs n >= 1");
  const int nc = n_cells();
  cell_edges_.resize(nc);
  edge_lookup_.assign(static_cast<std::size_t>(2 * n + 1) * (2 * n + 1) * (2 * n + 1), -1);
  std::map<HalfIndex, int> vertex_lookup;
  for (int f = 0; f < 6; ++f) {
    const int d = face_axis(f), tu = tangent_u(d), tv = tangent_v(d);
    const Vec3 normal = face_sign(f) * unit_axis(d);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const int cell = (f * n + j) * n + i;
        HalfIndex c{};
        c[d] = face_sign(f) > 0 ? 2 * n : 0;
        c[tu] = 2 * i + 1;
        c[tv] = 2 * j + 1;
        const std::array<std::pair<HalfIndex, int>, 4> sides{
            std::pair{shifted(c, tv, -1), tu}, std::pair{shifted(c, tv, +1), tu},
            std::pair{shifted(c, tu, -1), tv}, std::pair{shifted(c, tu, +1), tv}};
        for (int k = 0; k < 4; ++k) {
          const auto& [mid, axis] = sides[k];
          int& id = edge_lookup_[slot(mid)];
          if (id < 0) {
            id = static_cast<int>(edges_.size());
            edges_.push_back({axis, mid, -1, -1});
          }
          Edge& e = edges_[id];
          const Vec3 to_cell{double(c[0] - mid[0]), double(c[1] - mid[1]), double(c[2] - mid[2])};
          const bool left = dot(cross(normal, unit_axis(axis)), to_cell) > 0;
          (left ? e.left : e.right) = cell;
          cell_edges_[cell][k] = {id, left ? 1 : -1};
        }
      }
  }
  vertex_edges_.clear();
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    for (int s : {-1, 1}) {
      const HalfIndex v = shifted(edges_[e].mid, edges_[e].axis, s);
      auto [it, inserted] = vertex_lookup.try_emplace(v, static_cast<int>(vertices_.size()));
      if (inserted) {
        vertices_.push_back(v);
        vertex_edges_.emplace_back();
      }
      vertex_edges_[it->second].push_back({static_cast<int>(e), s < 0 ? 1 : -1});
    }
  }
  for (const auto& e : edges_)
    if (e.left < 0 || e.right < 0) throw SolverError("surface mesh has an unmatched edge", 0.0);

  // graph Laplacian of the cell adjacency with cell 0 pinned
  std::vector<Eigen::Triplet<double>> trip;
  for (int c = 1; c < nc; ++c) {
    for (const auto& [e, s] : cell_edges_[c]) {
      const int nb = s > 0 ? edges_[e].right : edges_[e].left;
      trip.emplace_back(c - 1, c - 1, 1.0);
      if (nb != 0) trip.emplace_back(c - 1, nb - 1, -1.0);
    }
  }
  Eigen::SparseMatrix<double> lap(nc - 1, nc - 1);
  lap.setFromTriplets(trip.begin(), trip.end());
  auto fac = std::make_shared<Factor>();
  fac->ldlt.compute(lap);
  if (fac->ldlt.info() != Eigen::Success) throw SolverError("surface Laplacian factorization failed", 0.0);
  factor_ = fac;
}

int CubeSurfaceMesh::edge_at(const HalfIndex& mid) const {
  const int w = 2 * n_;
  for (int a = 0; a < 3; ++a)
    if (mid[a] < 0 || mid[a] > w) return -1;
  return edge_lookup_[slot(mid)];
}

std::vector<double> CubeSurfaceMesh::solve_laplacian(const std::vector<double>& rhs) const {
  const int nc = n_cells();
  Eigen::VectorXd b(nc - 1);
  for (int c = 1; c < nc; ++c) b[c - 1] = rhs[c];
  const Eigen::VectorXd x = factor_->ldlt.solve(b);
  std::vector<double> psi(nc, 0.0);
  for (int c = 1; c < nc; ++c) psi[c] = x[c - 1];
  return psi;
}

const CubeSurfaceMesh& surface_mesh(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<CubeSurfaceMesh>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<CubeSurfaceMesh>(n);
  return *slot;
}

std::vector<double> surface_d(const Boundary1Form& a) {
  const auto& mesh = surface_mesh(a.n_f);
  std::vector<double> out(mesh.n_cells(), 0.0);
  for (int c = 0; c < mesh.n_cells(); ++c)
    for (const auto& [e, s] : mesh.cell_edges(c)) out[c] += s * a.alpha[e];
  return out;
}

std::vector<double> surface_codiff(const Boundary1Form& a) {
  const auto& mesh = surface_mesh(a.n_f);
  std::vector<double> out(mesh.vertices().size(), 0.0);
  for (std::size_t v = 0; v < out.size(); ++v)
    for (const auto& [e, s] : mesh.vertex_edges()[v]) out[v] += s * a.alpha[e];
  return out;
}

std::vector<double> cell_fluxes(const CubeBoundaryData& data) {
  const double area = data.cell_size() * data.cell_size();
  std::vector<double> phi;
  phi.reserve(6 * data.n_f * data.n_f);
  for (int f = 0; f < 6; ++f)
    for (double v : data.density[f]) phi.push_back(v * area);
  return phi;
}

namespace {

double l2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

GaugeResult gauge_fix(const CubeBoundaryData& data, double int_tol, double flux_unit) {
  const auto& mesh = surface_mesh(data.n_f);
  const auto phi = cell_fluxes(data);
  double total = 0.0;
  for (double v : phi) total += v;
  if (std::abs(total) > int_tol * flux_unit)
    throw NotExact("boundary data has total flux " + std::to_string(total) + "; gauge fixing needs zero");
  std::vector<double> rhs(phi);
  const double mean = total / static_cast<double>(phi.size());
  for (double& v : rhs) v -= mean;
  const auto psi = mesh.solve_laplacian(rhs);

  GaugeResult out;
  out.form.cube = data.cube;
  out.form.n_f = data.n_f;
  out.form.alpha.resize(mesh.edges().size());
  for (std::size_t e = 0; e < mesh.edges().size(); ++e)
    out.form.alpha[e] = psi[mesh.edges()[e].left] - psi[mesh.edges()[e].right];

  auto dal = surface_d(out.form);
  for (std::size_t c = 0; c < dal.size(); ++c) dal[c] -= phi[c];
  const double phin = l2(phi);
  out.d_residual = phin > 0 ? l2(dal) / phin : l2(dal);
  const double an = l2(out.form.alpha);
  const double cd = l2(surface_codiff(out.form));
  out.codiff_residual = an > 0 ? cd / an : cd;
  return out;
}

Boundary1Form boundary_form_from_ambient(const std::function<Vec3(const Vec3&)>& A, const Cube& cube, int n_f) {
  const auto& mesh = surface_mesh(n_f);
  const double h = cube.side / n_f;
  const Vec3 lo = cube.lo();
  const auto& g = gauss_legendre(4);
  Boundary1Form out;
  out.cube = cube;
  out.n_f = n_f;
  out.alpha.resize(mesh.edges().size());
  for (std::size_t e = 0; e < mesh.edges().size(); ++e) {
    const auto& ed = mesh.edges()[e];
    const Vec3 mid = lo + 0.5 * h * Vec3{double(ed.mid[0]), double(ed.mid[1]), double(ed.mid[2])};
    double s = 0.0;
    for (int q = 0; q < 4; ++q) s += g.weights[q] * A(mid + (0.5 * h * g.nodes[q]) * unit_axis(ed.axis))[ed.axis];
    out.alpha[e] = 0.5 * h * s;
  }
  return out;
}

}  // namespace intflux
