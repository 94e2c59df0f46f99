#include "intflux/extension.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>
#include <numbers>
#include <string>

#include "intflux/error.hpp"
#include "intflux/polygon.hpp"
#include "intflux/quadrature.hpp"

namespace intflux {

Vec3 CubeExtension::node_position(int i, int j, int k) const {
  const double h = spacing();
  return cube.lo() + Vec3{i * h, j * h, k * h};
}

Vec3 CubeExtension::eval(const Vec3& x) const {
  const double h = spacing();
  const Vec3 rel = (x - cube.lo()) * (1.0 / h);
  std::array<int, 3> c{};
  std::array<double, 3> t{};
  for (int a = 0; a < 3; ++a) {
    if (!(rel[a] >= -1e-9 && rel[a] <= m - 1 + 1e-9)) throw OutOfRange("point outside the extension cube");
    c[a] = std::clamp(static_cast<int>(std::floor(rel[a])), 0, m - 2);
    t[a] = std::clamp(rel[a] - c[a], 0.0, 1.0);
  }
  Vec3 out{};
  for (int dz = 0; dz < 2; ++dz)
    for (int dy = 0; dy < 2; ++dy)
      for (int dx = 0; dx < 2; ++dx) {
        const double w = (dx ? t[0] : 1 - t[0]) * (dy ? t[1] : 1 - t[1]) * (dz ? t[2] : 1 - t[2]);
        out += w * node(c[0] + dx, c[1] + dy, c[2] + dz);
      }
  return out;
}

std::vector<double> tangential_trace(const Boundary1Form& alpha, int k) {
  const int n = alpha.n_f;
  const int np = n + 1;
  const auto& mesh = surface_mesh(n);
  const double h = alpha.cube.side / n;
  const int u = tangent_u(k), v = tangent_v(k);
  std::vector<double> out(static_cast<std::size_t>(np) * np * np, 0.0);
  std::vector<double> line(n);
  for (int pu = 0; pu <= n; ++pu)
    for (int pv = 0; pv <= n; ++pv) {
      if (pu != 0 && pu != n && pv != 0 && pv != n) continue;
      HalfIndex mid{};
      mid[u] = 2 * pu;
      mid[v] = 2 * pv;
      for (int e = 0; e < n; ++e) {
        mid[k] = 2 * e + 1;
        const int id = mesh.edge_at(mid);
        if (id < 0) throw SolverError("boundary edge missing from the surface mesh", 0.0);
        line[e] = alpha.alpha[id] / h;
      }
      for (int p = 0; p <= n; ++p) {
        double val;
        if (n == 1) val = line[0];
        else if (p == 0) val = 1.5 * line[0] - 0.5 * line[1];
        else if (p == n) val = 1.5 * line[n - 1] - 0.5 * line[n - 2];
        else val = 0.5 * (line[p - 1] + line[p]);
        std::array<int, 3> P{};
        P[k] = p;
        P[u] = pu;
        P[v] = pv;
        out[(static_cast<std::size_t>(P[2]) * np + P[1]) * np + P[0]] = val;
      }
    }
  return out;
}

namespace {

// Plans are cached per shape, in estimate mode so results do not depend on
// timing. Execution goes through the cached aligned buffer, so calls are serialized.
class R2RCache {
 public:
  static R2RCache& instance() {
    static R2RCache c;
    return c;
  }

  void run(std::vector<double>& a, int n0, int n1, int n2, fftw_r2r_kind k0, fftw_r2r_kind k12) {
    std::lock_guard lock(mu_);
    const auto key = std::make_tuple(n0, n1, n2, int(k0), int(k12));
    auto it = plans_.find(key);
    if (it == plans_.end()) {
      Entry e;
      e.size = a.size();
      e.buf = fftw_alloc_real(e.size);
      e.plan = fftw_plan_r2r_3d(n0, n1, n2, e.buf, e.buf, k0, k12, k12, FFTW_ESTIMATE);
      if (!e.plan) throw SolverError("FFTW planning failed", 0.0);
      it = plans_.emplace(key, e).first;
    }
    std::copy(a.begin(), a.end(), it->second.buf);
    fftw_execute(it->second.plan);
    std::copy(it->second.buf, it->second.buf + it->second.size, a.begin());
  }

 private:
  struct Entry {
    fftw_plan plan = nullptr;
    double* buf = nullptr;
    std::size_t size = 0;
  };
  std::mutex mu_;
  std::map<std::tuple<int, int, int, int, int>, Entry> plans_;
};

// In-place 3D real-to-real transform on a row-major n0 x n1 x n2 array.
void r2r_3d(std::vector<double>& a, int n0, int n1, int n2, fftw_r2r_kind k0, fftw_r2r_kind k12) {
  R2RCache::instance().run(a, n0, n1, n2, k0, k12);
}

// Boundary grid values of one component, resampled onto the m-node grid.
class Trace {
 public:
  Trace(std::vector<double> g, int n, int k) : g_(std::move(g)), n_(n), k_(k) {}

  double at(const std::array<int, 3>& idx, int m) const {
    if (m == n_ + 1) return raw(idx);
    const int u = tangent_u(k_), v = tangent_v(k_);
    const int w = (idx[u] == 0 || idx[u] == m - 1) ? u : v;
    const int other = w == u ? v : u;
    const double scale = static_cast<double>(n_) / (m - 1);
    std::array<int, 3> base{};
    base[w] = idx[w] == 0 ? 0 : n_;
    double ta[2];
    int ia[2];
    const int axes[2] = {k_, other};
    for (int s = 0; s < 2; ++s) {
      const double t = idx[axes[s]] * scale;
      ia[s] = std::clamp(static_cast<int>(std::floor(t)), 0, n_ - 1);
      ta[s] = t - ia[s];
    }
    double val = 0.0;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        auto p = base;
        p[axes[0]] = ia[0] + a;
        p[axes[1]] = ia[1] + b;
        val += (a ? ta[0] : 1 - ta[0]) * (b ? ta[1] : 1 - ta[1]) * raw(p);
      }
    return val;
  }

 private:
  double raw(const std::array<int, 3>& p) const {
    const int np = n_ + 1;
    return g_[(static_cast<std::size_t>(p[2]) * np + p[1]) * np + p[0]];
  }
  std::vector<double> g_;
  int n_;
  int k_;
};

}  // namespace

CubeExtension harmonic_extend(const Boundary1Form& alpha, int m, int cube_id, double solver_tol) {
  if (m < 5) throw InvalidInput("harmonic extension needs m >= 5");
  if (alpha.n_f < 1) throw InvalidInput("boundary form has no cells");
  CubeExtension ext;
  ext.cube_id = cube_id;
  ext.cube = alpha.cube;
  ext.m = m;
  ext.type = ExtensionType::harmonic;
  ext.nodes.assign(static_cast<std::size_t>(m) * m * m, Vec3{});

  const int M = m, N = m - 2;
  const double pi = std::numbers::pi;
  double worst = 0.0;
  for (int k = 0; k < 3; ++k) {
    const int u = tangent_u(k), v = tangent_v(k);
    const Trace trace(tangential_trace(alpha, k), alpha.n_f, k);
    auto node_of = [&](int ik, int iu, int iv) {
      std::array<int, 3> p{};
      p[k] = ik;
      p[u] = iu;
      p[v] = iv;
      return p;
    };
    auto at = [&](int ik, int p, int q) -> std::size_t { return (static_cast<std::size_t>(ik) * N + p) * N + q; };

    // right-hand side: minus the known Dirichlet neighbours
    std::vector<double> b(static_cast<std::size_t>(M) * N * N, 0.0);
    for (int ik = 0; ik < M; ++ik)
      for (int p = 0; p < N; ++p)
        for (int q = 0; q < N; ++q) {
          double s = 0.0;
          if (p == 0) s += trace.at(node_of(ik, 0, q + 1), m);
          if (p == N - 1) s += trace.at(node_of(ik, m - 1, q + 1), m);
          if (q == 0) s += trace.at(node_of(ik, p + 1, 0), m);
          if (q == N - 1) s += trace.at(node_of(ik, p + 1, m - 1), m);
          b[at(ik, p, q)] = -s;
        }

    std::vector<double> x = b;
    r2r_3d(x, M, N, N, FFTW_REDFT00, FFTW_RODFT00);
    const double norm_factor = 2.0 * (M - 1) * 2.0 * (N + 1) * 2.0 * (N + 1);
    for (int ik = 0; ik < M; ++ik) {
      const double lk = 2.0 * std::cos(pi * ik / (M - 1)) - 2.0;
      for (int p = 0; p < N; ++p) {
        const double lu = 2.0 * std::cos(pi * (p + 1) / (N + 1)) - 2.0;
        for (int q = 0; q < N; ++q) {
          const double lv = 2.0 * std::cos(pi * (q + 1) / (N + 1)) - 2.0;
          x[at(ik, p, q)] /= (lk + lu + lv) * norm_factor;
        }
      }
    }
    r2r_3d(x, M, N, N, FFTW_REDFT00, FFTW_RODFT00);

    // residual with the mirror ghost along k
    double rn = 0.0, bn = 0.0;
    for (int ik = 0; ik < M; ++ik)
      for (int p = 0; p < N; ++p)
        for (int q = 0; q < N; ++q) {
          const int km = ik == 0 ? 1 : ik - 1;
          const int kp = ik == M - 1 ? M - 2 : ik + 1;
          double s = x[at(km, p, q)] + x[at(kp, p, q)] - 6.0 * x[at(ik, p, q)];
          if (p > 0) s += x[at(ik, p - 1, q)];
          if (p < N - 1) s += x[at(ik, p + 1, q)];
          if (q > 0) s += x[at(ik, p, q - 1)];
          if (q < N - 1) s += x[at(ik, p, q + 1)];
          const double r = s - b[at(ik, p, q)];
          rn += r * r;
          bn += b[at(ik, p, q)] * b[at(ik, p, q)];
        }
    const double rel = bn > 0 ? std::sqrt(rn / bn) : std::sqrt(rn);
    worst = std::max(worst, rel);
    if (!(rel <= solver_tol))
      throw SolverError("harmonic extension residual " + std::to_string(rel) + " above tolerance", rel);

    for (int ik = 0; ik < M; ++ik)
      for (int iu = 0; iu < m; ++iu)
        for (int iv = 0; iv < m; ++iv) {
          const auto P = node_of(ik, iu, iv);
          const bool dirichlet = iu == 0 || iu == m - 1 || iv == 0 || iv == m - 1;
          ext.nodes[ext.index(P[0], P[1], P[2])][k] = dirichlet ? trace.at(P, m) : x[at(ik, iu - 1, iv - 1)];
        }
  }
  ext.residual = worst;
  return ext;
}

double curl_l2(const CubeExtension& ext) {
  const int m = ext.m;
  const double h = ext.spacing();
  const auto& g = gauss_legendre(2);
  double s = 0.0;
  for (int k = 0; k + 1 < m; ++k)
    for (int j = 0; j + 1 < m; ++j)
      for (int i = 0; i + 1 < m; ++i)
        for (int qz = 0; qz < 2; ++qz)
          for (int qy = 0; qy < 2; ++qy)
            for (int qx = 0; qx < 2; ++qx) {
              const double t[3] = {0.5 * (1 + g.nodes[qx]), 0.5 * (1 + g.nodes[qy]), 0.5 * (1 + g.nodes[qz])};
              // jac[c][a] = d A_c / d x_a
              double jac[3][3] = {};
              for (int dz = 0; dz < 2; ++dz)
                for (int dy = 0; dy < 2; ++dy)
                  for (int dx = 0; dx < 2; ++dx) {
                    const int d[3] = {dx, dy, dz};
                    const Vec3& val = ext.node(i + dx, j + dy, k + dz);
                    for (int a = 0; a < 3; ++a) {
                      double w = (d[a] ? 1.0 : -1.0) / h;
                      for (int b = 0; b < 3; ++b)
                        if (b != a) w *= d[b] ? t[b] : 1 - t[b];
                      for (int c = 0; c < 3; ++c) jac[c][a] += w * val[c];
                    }
                  }
              const Vec3 curl{jac[2][1] - jac[1][2], jac[0][2] - jac[2][0], jac[1][0] - jac[0][1]};
              s += 0.125 * g.weights[qx] * g.weights[qy] * g.weights[qz] * dot(curl, curl) * h * h * h;
            }
  return std::sqrt(s);
}

double boundary_l2(const CubeBoundaryData& data) {
  const double a = data.cell_size() * data.cell_size();
  double s = 0.0;
  for (const auto& face : data.density)
    for (double v : face) s += v * v * a;
  return std::sqrt(s);
}

RadialField::RadialField(CubeBoundaryData data, FieldConvention convention)
    : data_(std::move(data)), convention_(convention) {
  if (data_.n_f < 1 || !(data_.cube.side > 0)) throw InvalidInput("radial field needs a cube and boundary cells");
  for (const auto& face : data_.density)
    if (face.size() != static_cast<std::size_t>(data_.n_f) * data_.n_f)
      throw InvalidInput("boundary data has the wrong number of cells");
  total_ = data_.total();
}

int RadialField::degree() const { return static_cast<int>(std::lround(total_ / convention_.flux_unit)); }

std::vector<Singularity> RadialField::known_singularities() const {
  if (degree() == 0) return {};
  return {{data_.cube.center, degree()}};
}

Vec3 RadialField::eval(const Vec3& x) const {
  const Vec3 y = x - data_.cube.center;
  const double t = sup_norm(y);
  if (t == 0.0) throw DomainError("radial field evaluated at its centre");
  int d = 0;
  for (int a = 1; a < 3; ++a)
    if (std::abs(y[a]) > std::abs(y[d])) d = a;
  const double s = 0.5 * data_.cube.side;
  const int f = 2 * d + (y[d] > 0 ? 1 : 0);
  const int n = data_.n_f;
  const double h = data_.cell_size();
  const int i = std::clamp(static_cast<int>(std::floor((s * y[tangent_u(d)] / t + s) / h)), 0, n - 1);
  const int j = std::clamp(static_cast<int>(std::floor((s * y[tangent_v(d)] / t + s) / h)), 0, n - 1);
  return (data_.at(f, i, j) * s * s / (t * t * t)) * y;
}

std::optional<double> RadialField::exact_rect_flux(const AxisRect& r) const {
  const Vec3& c = data_.cube.center;
  const int a = r.axis, ua = tangent_u(a), va = tangent_v(a);
  const double ya = r.plane - c[a];
  if (ya == 0.0) return 0.0;
  const double s = 0.5 * data_.cube.side;
  const int n = data_.n_f;
  const double h = data_.cell_size();
  // rectangle in coordinates (y_ua, y_va) relative to the centre
  const Polygon2 rect{{r.u0 - c[ua], r.v0 - c[va]},
                      {r.u1 - c[ua], r.v0 - c[va]},
                      {r.u1 - c[ua], r.v1 - c[va]},
                      {r.u0 - c[ua], r.v1 - c[va]}};
  // y_axis as an affine function alpha*Y0 + beta*Y1 + gamma of the rect coordinates
  auto coord = [&](int axis) -> std::array<double, 3> {
    if (axis == a) return {0.0, 0.0, ya};
    if (axis == ua) return {1.0, 0.0, 0.0};
    return {0.0, 1.0, 0.0};
  };
  double sum = 0.0;
  for (int d = 0; d < 3; ++d)
    for (int sg : {-1, 1}) {
      if (d == a && sg * ya <= 0) continue;
      Polygon2 poly = rect;
      const auto cd = coord(d);
      for (int e = 0; e < 3 && !poly.empty(); ++e) {
        if (e == d) continue;
        const auto ce = coord(e);
        for (int pm : {-1, 1}) {
          poly = clip_halfplane(poly, sg * cd[0] + pm * ce[0], sg * cd[1] + pm * ce[1], sg * cd[2] + pm * ce[2]);
          if (poly.empty()) break;
        }
      }
      if (poly.size() < 3) continue;
      // central projection onto the face, in its (u, v) coordinates shifted to [0, 2s]
      const int fu = tangent_u(d), fv = tangent_v(d);
      const auto cu = coord(fu), cv = coord(fv);
      Polygon2 proj;
      double umin = 1e300, umax = -1e300, vmin = 1e300, vmax = -1e300;
      for (const auto& p : poly) {
        const double yd = cd[0] * p[0] + cd[1] * p[1] + cd[2];
        const double scale = s / (sg * yd);
        const double pu = scale * (cu[0] * p[0] + cu[1] * p[1] + cu[2]) + s;
        const double pv = scale * (cv[0] * p[0] + cv[1] * p[1] + cv[2]) + s;
        proj.push_back({pu, pv});
        umin = std::min(umin, pu);
        umax = std::max(umax, pu);
        vmin = std::min(vmin, pv);
        vmax = std::max(vmax, pv);
      }
      const int f = 2 * d + (sg > 0 ? 1 : 0);
      const int i0 = std::clamp(static_cast<int>(std::floor(umin / h)), 0, n - 1);
      const int i1 = std::clamp(static_cast<int>(std::floor(umax / h)), 0, n - 1);
      const int j0 = std::clamp(static_cast<int>(std::floor(vmin / h)), 0, n - 1);
      const int j1 = std::clamp(static_cast<int>(std::floor(vmax / h)), 0, n - 1);
      for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) {
          const double dens = data_.at(f, i, j);
          if (dens == 0.0) continue;
          const auto piece = clip_box(proj, i * h, (i + 1) * h, j * h, (j + 1) * h);
          if (piece.size() < 3) continue;
          sum += dens * std::abs(polygon_area(piece));
        }
    }
  return ya > 0 ? sum : -sum;
}

CubeExtension radial_extend(const CubeBoundaryData& data, int m, int cube_id, double int_tol, double flux_unit) {
  if (m < 5) throw InvalidInput("radial extension needs m >= 5");
  const RadialField X(data, {flux_unit});
  const double q = X.total() / flux_unit;
  if (std::abs(q - std::round(q)) > int_tol)
    throw InvalidInput("radial extension needs an integral total, got " + std::to_string(q) + " flux units");
  CubeExtension ext;
  ext.cube_id = cube_id;
  ext.cube = data.cube;
  ext.m = m;
  ext.type = ExtensionType::radial;
  ext.degenerate = std::round(q) == 0.0;
  ext.nodes.assign(static_cast<std::size_t>(m) * m * m, Vec3{});
  for (int k = 0; k < m; ++k)
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i) {
        const Vec3 p = ext.node_position(i, j, k);
        if (sup_norm(p - data.cube.center) < 1e-12 * data.cube.side) continue;
        ext.nodes[ext.index(i, j, k)] = X.eval(p);
      }
  return ext;
}

}  // namespace intflux
