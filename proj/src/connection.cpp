#include "intflux/connection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "intflux/error.hpp"
#include "intflux/quadrature.hpp"

namespace intflux {

namespace {

constexpr double kMergeTol = 1e-12;
constexpr double kCertTol = 1e-9;

void validate(const std::vector<Singularity>& sings) {
  for (const auto& s : sings) {
    if (s.degree == 0) throw InvalidInput("singularity with zero degree");
    if (!std::isfinite(s.position.x) || !std::isfinite(s.position.y) || !std::isfinite(s.position.z))
      throw InvalidInput("singularity position is not finite");
    if (!(norm(s.position) < 1.0)) throw InvalidInput("singularity outside the open unit ball");
  }
}

double boundary_distance(const Vec3& x) { return 1.0 - norm(x); }

double norm2(const Vec3& a) { return dot(a, a); }

void accumulate(std::vector<Singularity>& acc, const Vec3& p, int d) {
  for (auto& s : acc)
    if (norm(s.position - p) <= kMergeTol) {
      s.degree += d;
      return;
    }
  acc.push_back({p, d});
}

std::vector<Singularity> finish(std::vector<Singularity> acc) {
  std::erase_if(acc, [](const Singularity& s) { return s.degree == 0; });
  std::sort(acc.begin(), acc.end(), [](const Singularity& a, const Singularity& b) {
    if (a.position.x != b.position.x) return a.position.x < b.position.x;
    if (a.position.y != b.position.y) return a.position.y < b.position.y;
    return a.position.z < b.position.z;
  });
  return acc;
}

void push_segment(Current1& L, const Vec3& a, const Vec3& b, int m) {
  if (m <= 0 || norm(b - a) == 0.0) return;
  L.segments.push_back({a, b, m});
}

}  // namespace

double Current1::mass() const {
  double m = 0.0;
  for (const auto& s : segments) m += s.multiplicity * norm(s.end - s.start);
  return m;
}

std::vector<Singularity> boundary_signature(const Current1& L) {
  std::vector<Singularity> acc;
  for (const auto& s : L.segments) {
    if (s.multiplicity < 1) throw InvalidInput("segment multiplicity must be positive");
    if (boundary_distance(s.end) > kMergeTol) accumulate(acc, s.end, s.multiplicity);
    if (boundary_distance(s.start) > kMergeTol) accumulate(acc, s.start, -s.multiplicity);
  }
  return finish(std::move(acc));
}

std::vector<Singularity> normalized_signature(const std::vector<Singularity>& sings) {
  std::vector<Singularity> acc;
  for (const auto& s : sings) accumulate(acc, s.position, s.degree);
  return finish(std::move(acc));
}

Vec3 nearest_boundary_point(const Vec3& x) {
  const double r = norm(x);
  if (r == 0.0) return {1.0, 0.0, 0.0};
  return x / r;
}

Current1 greedy_connection(const std::vector<Singularity>& sings) {
  validate(sings);
  std::vector<int> pos, neg;
  for (std::size_t i = 0; i < sings.size(); ++i) (sings[i].degree > 0 ? pos : neg).push_back(static_cast<int>(i));
  std::vector<int> left(sings.size());
  for (std::size_t i = 0; i < sings.size(); ++i) left[i] = std::abs(sings[i].degree);

  Current1 L;
  std::size_t s = 0, t = 0;
  while (s < pos.size() && t < neg.size()) {
    const int i = pos[s], j = neg[t];
    const int amount = std::min(left[i], left[j]);
    push_segment(L, sings[j].position, sings[i].position, amount);
    left[i] -= amount;
    left[j] -= amount;
    if (left[j] == 0) ++t;
    if (left[i] == 0) ++s;
  }
  // leftovers of one sign only; route each to the sphere
  for (; s < pos.size(); ++s) {
    const Vec3& x = sings[pos[s]].position;
    push_segment(L, nearest_boundary_point(x), x, left[pos[s]]);
  }
  for (; t < neg.size(); ++t) {
    const Vec3& x = sings[neg[t]].position;
    push_segment(L, x, nearest_boundary_point(x), left[neg[t]]);
  }
  return L;
}

namespace {

struct FlowEdge {
  int to;
  int cap;
  double cost;
  int flow = 0;
};

class MinCostFlow {
 public:
  explicit MinCostFlow(int n) : adj_(n) {}

  int add(int from, int to, int cap, double cost) {
    adj_[from].push_back(static_cast<int>(edges_.size()));
    edges_.push_back({to, cap, cost});
    adj_[to].push_back(static_cast<int>(edges_.size()));
    edges_.push_back({from, 0, -cost});
    return static_cast<int>(edges_.size()) - 2;
  }

  /// Successive shortest paths with Bellman-Ford; returns the flow pushed.
  int run(int s, int t, int want) {
    const int n = static_cast<int>(adj_.size());
    int pushed = 0;
    while (pushed < want) {
      std::vector<double> dist(n, std::numeric_limits<double>::infinity());
      std::vector<int> via(n, -1);
      dist[s] = 0.0;
      for (int round = 0; round < n; ++round) {
        bool changed = false;
        for (int u = 0; u < n; ++u) {
          if (!std::isfinite(dist[u])) continue;
          for (int e : adj_[u]) {
            const FlowEdge& ed = edges_[e];
            if (ed.cap - ed.flow <= 0) continue;
            const double nd = dist[u] + ed.cost;
            if (nd < dist[ed.to] - 1e-15) {
              dist[ed.to] = nd;
              via[ed.to] = e;
              changed = true;
            }
          }
        }
        if (!changed) break;
      }
      if (via[t] < 0) break;
      int bottleneck = want - pushed;
      for (int v = t; v != s; v = edges_[via[v] ^ 1].to)
        bottleneck = std::min(bottleneck, edges_[via[v]].cap - edges_[via[v]].flow);
      for (int v = t; v != s; v = edges_[via[v] ^ 1].to) {
        edges_[via[v]].flow += bottleneck;
        edges_[via[v] ^ 1].flow -= bottleneck;
      }
      pushed += bottleneck;
    }
    return pushed;
  }

  int flow(int e) const { return edges_[e].flow; }

 private:
  std::vector<std::vector<int>> adj_;
  std::vector<FlowEdge> edges_;
};

}  // namespace

Current1 optimal_connection(const std::vector<Singularity>& sings) {
  validate(sings);
  const int n = static_cast<int>(sings.size());
  int P = 0, N = 0;
  for (const auto& s : sings) (s.degree > 0 ? P : N) += std::abs(s.degree);
  // nodes: source, sink, sphere as sink of negatives, sphere as source of positives, singularities
  const int S = 0, T = 1, Rin = 2, Rout = 3, base = 4;
  MinCostFlow mcf(base + n);
  const int big = P + N;
  mcf.add(S, Rout, P, 0.0);
  mcf.add(Rin, T, N, 0.0);
  mcf.add(Rout, Rin, big, 0.0);
  struct Arc {
    int edge, from, to;  // from/to: singularity index or -1 for the sphere
  };
  std::vector<Arc> arcs;
  for (int j = 0; j < n; ++j) {
    const double b = boundary_distance(sings[j].position);
    if (sings[j].degree < 0) {
      mcf.add(S, base + j, -sings[j].degree, 0.0);
      for (int i = 0; i < n; ++i)
        if (sings[i].degree > 0)
          arcs.push_back({mcf.add(base + j, base + i, big, norm(sings[i].position - sings[j].position)), j, i});
      arcs.push_back({mcf.add(base + j, Rin, big, b), j, -1});
    } else {
      mcf.add(base + j, T, sings[j].degree, 0.0);
      arcs.push_back({mcf.add(Rout, base + j, big, b), -1, j});
    }
  }
  if (mcf.run(S, T, P + N) != P + N) throw SolverError("transportation network is infeasible", 0.0);

  Current1 L;
  for (const auto& a : arcs) {
    const int f = mcf.flow(a.edge);
    if (f <= 0) continue;
    if (a.from >= 0 && a.to >= 0) {
      push_segment(L, sings[a.from].position, sings[a.to].position, f);
    } else if (a.to < 0) {
      const Vec3& x = sings[a.from].position;
      push_segment(L, x, nearest_boundary_point(x), f);
    } else {
      const Vec3& x = sings[a.to].position;
      push_segment(L, nearest_boundary_point(x), x, f);
    }
  }
  return L;
}

namespace {

// max c.x subject to A x <= b, x >= 0, with b >= 0. Dense tableau, Bland's rule.
std::vector<double> simplex_max(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                                const std::vector<double>& c) {
  const int m = static_cast<int>(A.size());
  const int n = static_cast<int>(c.size());
  const int cols = n + m + 1;
  std::vector<std::vector<double>> tab(m + 1, std::vector<double>(cols, 0.0));
  std::vector<int> basis(m);
  for (int r = 0; r < m; ++r) {
    if (b[r] < 0) throw InvalidInput("simplex needs a feasible origin");
    for (int j = 0; j < n; ++j) tab[r][j] = A[r][j];
    tab[r][n + r] = 1.0;
    tab[r][cols - 1] = b[r];
    basis[r] = n + r;
  }
  // objective row holds the negated reduced costs
  for (int j = 0; j < n; ++j) tab[m][j] = -c[j];
  constexpr double eps = 1e-12;
  for (int iter = 0; iter < 100000; ++iter) {
    int enter = -1;
    for (int j = 0; j < n + m; ++j)
      if (tab[m][j] < -eps) {
        enter = j;
        break;
      }
    if (enter < 0) break;
    int leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < m; ++r) {
      if (tab[r][enter] <= eps) continue;
      const double ratio = tab[r][cols - 1] / tab[r][enter];
      if (leave < 0 || ratio < best - eps || (ratio <= best + eps && basis[r] < basis[leave])) {
        best = leave < 0 ? ratio : std::min(best, ratio);
        leave = r;
      }
    }
    if (leave < 0) throw SolverError("dual program is unbounded", 0.0);
    const double piv = tab[leave][enter];
    for (double& v : tab[leave]) v /= piv;
    for (int r = 0; r <= m; ++r) {
      if (r == leave || tab[r][enter] == 0.0) continue;
      const double f = tab[r][enter];
      for (int j = 0; j < cols; ++j) tab[r][j] -= f * tab[leave][j];
    }
    basis[leave] = enter;
  }
  std::vector<double> x(n, 0.0);
  for (int r = 0; r < m; ++r)
    if (basis[r] < n) x[basis[r]] = tab[r][cols - 1];
  return x;
}

}  // namespace

DualCertificate dual_value(const std::vector<Singularity>& sings) {
  validate(sings);
  const int n = static_cast<int>(sings.size());
  DualCertificate cert;
  cert.singularities = sings;
  cert.potential.assign(n, 0.0);
  if (n == 0) return cert;
  // shift psi = phi + b >= 0 so that the origin is feasible
  std::vector<double> bd(n);
  for (int j = 0; j < n; ++j) bd[j] = boundary_distance(sings[j].position);
  std::vector<std::vector<double>> A;
  std::vector<double> rhs;
  for (int j = 0; j < n; ++j) {
    std::vector<double> row(n, 0.0);
    row[j] = 1.0;
    A.push_back(row);
    rhs.push_back(2.0 * bd[j]);
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      std::vector<double> row(n, 0.0);
      row[i] = 1.0;
      row[j] = -1.0;
      A.push_back(row);
      // nonnegative since 1 - |x| is 1-Lipschitz; clamp rounding
      rhs.push_back(std::max(0.0, norm(sings[i].position - sings[j].position) + bd[i] - bd[j]));
    }
  std::vector<double> c(n);
  for (int j = 0; j < n; ++j) c[j] = sings[j].degree;
  const auto psi = simplex_max(A, rhs, c);
  for (int j = 0; j < n; ++j) {
    cert.potential[j] = psi[j] - bd[j];
    cert.value += sings[j].degree * cert.potential[j];
  }
  return cert;
}

Certification certify(const Current1& primal, const DualCertificate& dual, double tol) {
  const auto& s = dual.singularities;
  validate(s);
  if (dual.potential.size() != s.size()) throw CertificateInvalid("certificate has " + std::to_string(dual.potential.size()) + " potentials for " + std::to_string(s.size()) + " singularities");
  for (std::size_t j = 0; j < s.size(); ++j) {
    const double bd = boundary_distance(s[j].position);
    if (std::abs(dual.potential[j]) > bd + kCertTol)
      throw CertificateInvalid("support constraint |phi_" + std::to_string(j) + "| <= 1 - |x_" + std::to_string(j) + "| violated");
    for (std::size_t i = 0; i < j; ++i)
      if (std::abs(dual.potential[i] - dual.potential[j]) > norm(s[i].position - s[j].position) + kCertTol)
        throw CertificateInvalid("Lipschitz constraint between " + std::to_string(i) + " and " + std::to_string(j) + " violated");
  }
  double value = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) value += s[j].degree * dual.potential[j];
  if (std::abs(value - dual.value) > kCertTol) throw CertificateInvalid("stated dual value does not match the potentials");

  const auto got = boundary_signature(primal);
  const auto want = normalized_signature(s);
  bool same = got.size() == want.size();
  for (std::size_t i = 0; same && i < got.size(); ++i)
    same = got[i].degree == want[i].degree && norm(got[i].position - want[i].position) <= kMergeTol;
  if (!same) throw InvalidInput("current boundary does not match the certificate's singularities");

  Certification out;
  out.primal_mass = primal.mass();
  out.dual_value = value;
  out.gap = out.primal_mass - value;
  out.certified = out.gap <= tol;
  return out;
}

namespace {

struct Bump {
  Vec3 c;
  double rho;

  double value(const Vec3& x) const {
    const double s = 1.0 - norm2(x - c) / (rho * rho);
    return s > 0 ? s * s * s * s : 0.0;
  }
  Vec3 grad(const Vec3& x) const {
    const double s = 1.0 - norm2(x - c) / (rho * rho);
    if (s <= 0) return {};
    return (-8.0 * s * s * s / (rho * rho)) * (x - c);
  }
};

// int over the bump support of w_k X . grad(phi), in spherical coordinates
// about centres[k]; w_k is the partition of unity |x - s_k|^-4 / sum_l |x - s_l|^-4
double pairing_integral(const VectorField& X, const Bump& phi, const std::vector<Vec3>& centres) {
  const auto& gr = gauss_legendre(24);
  const auto& gt = gauss_legendre(32);
  const int n_az = 64;
  const int n_panels = 3;
  double total = 0.0;
  for (std::size_t k = 0; k < centres.size(); ++k) {
    const Vec3 s = centres[k];
    const Vec3 sc = s - phi.c;
    double sum = 0.0;
    for (int a = 0; a < static_cast<int>(gt.nodes.size()); ++a) {
      const double ct = gt.nodes[a], st = std::sqrt(std::max(0.0, 1 - ct * ct));
      for (int q = 0; q < n_az; ++q) {
        const double az = 2 * std::numbers::pi * (q + 0.5) / n_az;
        const Vec3 w{st * std::cos(az), st * std::sin(az), ct};
        // |sc + t w|^2 = rho^2
        const double bq = dot(w, sc), cq = norm2(sc) - phi.rho * phi.rho;
        const double disc = bq * bq - cq;
        if (disc <= 0) continue;
        const double sq = std::sqrt(disc);
        const double t0 = std::max(0.0, -bq - sq), t1 = -bq + sq;
        if (t1 <= t0) continue;
        double line = 0.0;
        for (int p = 0; p < n_panels; ++p) {
          const double lo = t0 + (t1 - t0) * p / n_panels, hi = t0 + (t1 - t0) * (p + 1) / n_panels;
          for (std::size_t r = 0; r < gr.nodes.size(); ++r) {
            const double t = 0.5 * (lo + hi) + 0.5 * (hi - lo) * gr.nodes[r];
            const Vec3 x = s + t * w;
            double wk = 1.0;
            if (centres.size() > 1) {
              double den = 0.0;
              for (const auto& o : centres) {
                const double d2 = norm2(x - o);
                den += 1.0 / (d2 * d2);
              }
              const double d2 = t * t;
              wk = 1.0 / (d2 * d2 * den);
            }
            line += 0.5 * (hi - lo) * gr.weights[r] * wk * dot(X.eval(x), phi.grad(x)) * t * t;
          }
        }
        sum += gt.weights[a] * (2 * std::numbers::pi / n_az) * line;
      }
    }
    total += sum;
  }
  return total;
}

}  // namespace

double boundary_residual(const VectorField& field, const Current1& L, int n_test, std::uint64_t seed) {
  if (n_test < 1) throw InvalidInput("boundary residual needs at least one test function");
  const double unit = field.convention().flux_unit;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0), u01(0.0, 1.0);
  const auto sings = field.known_singularities();
  double worst = 0.0;
  for (int it = 0; it < n_test; ++it) {
    Vec3 c;
    do c = Vec3{u(rng), u(rng), u(rng)};
    while (norm2(c) > 1.0);
    c = 0.5 * c;
    const double rho = 0.3 + (1.0 - norm(c) - 0.3) * u01(rng);
    const Bump phi{c, rho};
    std::vector<Vec3> centres;
    for (const auto& sg : sings)
      if (norm(sg.position - c) < rho) centres.push_back(sg.position);
    if (centres.empty()) centres.push_back(c);
    const double lhs = -pairing_integral(field, phi, centres) / unit;
    double rhs = 0.0;
    for (const auto& sgm : L.segments) rhs += sgm.multiplicity * (phi.value(sgm.end) - phi.value(sgm.start));
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

}  // namespace intflux
