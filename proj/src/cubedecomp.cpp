#include "intflux/cubedecomp.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "intflux/error.hpp"
#include "intflux/quadrature.hpp"
#include "intflux/surface_quadrature.hpp"

namespace intflux {

int CubeLattice::find(const LatticeIndex& idx) const {
  auto it = lookup.find(idx);
  return it == lookup.end() ? -1 : it->second;
}

LatticeIndex CubeLattice::cell_of(const Vec3& x) const {
  LatticeIndex idx{};
  for (int d = 0; d < 3; ++d) idx[d] = static_cast<int>(std::floor((x[d] - a[d]) / eps));
  return idx;
}

CubeLattice build_lattice(double eps, const Vec3& a) {
  if (!(eps > 0.0) || !(eps < 1.0 / 3.0)) throw InvalidInput("eps must lie in (0, 1/3)");
  if (!is_finite(a) || norm(a) > eps * (1.0 + 1e-12)) throw InvalidInput("translation must satisfy |a| <= eps");
  CubeLattice lat;
  lat.eps = eps;
  lat.a = a;
  const double rad = 1.0 - 3.0 * eps;
  const int n = static_cast<int>(std::ceil(rad / eps)) + 1;
  for (int i = -n; i <= n; ++i)
    for (int j = -n; j <= n; ++j)
      for (int k = -n; k <= n; ++k) {
        const Vec3 s = eps * Vec3{i + 0.5, j + 0.5, k + 0.5};
        if (norm(s) < rad) {
          lat.lookup[{i, j, k}] = static_cast<int>(lat.sites.size());
          lat.index.push_back({i, j, k});
          lat.sites.push_back(s + a);
        }
      }
  if (lat.sites.empty()) throw InvalidInput("lattice has no sites for this eps");
  return lat;
}

Skeleton build_skeleton(const CubeLattice& lat) {
  Skeleton sk;
  sk.faces_of.assign(lat.size(), {-1, -1, -1, -1, -1, -1});
  for (std::size_t s = 0; s < lat.size(); ++s) {
    const Cube c = lat.cube(s);
    for (int d = 0; d < 3; ++d) {
      LatticeIndex lo = lat.index[s], hi = lat.index[s];
      --lo[d];
      ++hi[d];
      if (lat.find(lo) < 0) {
        LatticeFace f;
        f.axis = d;
        f.upper = static_cast<int>(s);
        f.rect = c.face(2 * d);
        sk.faces_of[s][2 * d] = static_cast<int>(sk.faces.size());
        sk.faces.push_back(f);
      }
      LatticeFace f;
      f.axis = d;
      f.lower = static_cast<int>(s);
      f.upper = lat.find(hi);
      f.rect = c.face(2 * d + 1);
      sk.faces_of[s][2 * d + 1] = static_cast<int>(sk.faces.size());
      sk.faces.push_back(f);
    }
  }
  // sites come in lexicographic order, so the lower neighbour has already
  // registered the shared face
  for (std::size_t fi = 0; fi < sk.faces.size(); ++fi) {
    const auto& f = sk.faces[fi];
    if (f.lower >= 0 && f.upper >= 0) sk.faces_of[f.upper][2 * f.axis] = static_cast<int>(fi);
  }
  return sk;
}

std::vector<int> CubeDecomposition::bad_cubes() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == CubeLabel::bad) out.push_back(static_cast<int>(i));
  return out;
}

Vec3 cell_mean(const VectorField& field, const Cube& cube, int n) {
  const auto& g = gauss_legendre(n);
  std::array<std::vector<double>, 3> pts, wts;
  for (int d = 0; d < 3; ++d) map_rule(g, cube.lo()[d], cube.hi()[d], pts[d], wts[d]);
  Vec3 sum;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const double w = wts[0][i] * wts[1][j] * wts[2][k];
        sum += w * field.eval({pts[0][i], pts[1][j], pts[2][k]});
      }
  return sum / (cube.side * cube.side * cube.side);
}

CubeDecomposition classify(const VectorField& field, const CubeLattice& lattice, const QuadratureSpec& quad,
                           double label_tol) {
  if (quad.n_q < 2) throw InvalidInput("quadrature needs n_q >= 2");
  if (!(label_tol >= 0.0)) throw InvalidInput("label_tol must be non-negative");
  CubeDecomposition dec;
  dec.lattice = lattice;
  dec.skeleton = build_skeleton(lattice);
  dec.flux_unit = field.convention().flux_unit;
  dec.label_tol = label_tol;
  const auto sings = field.known_singularities();
  const auto& faces = dec.skeleton.faces;
  dec.face_flux.resize(faces.size());
  for (std::size_t f = 0; f < faces.size(); ++f) dec.face_flux[f] = rect_flux(field, faces[f].rect, quad, sings);

  const std::size_t n = lattice.size();
  dec.fluxes.assign(n, 0.0);
  dec.labels.assign(n, CubeLabel::good);
  dec.degrees.assign(n, 0);
  dec.ill_conditioned.assign(n, false);
  dec.cell_means.resize(n);
  for (std::size_t s = 0; s < n; ++s) {
    double total = 0.0;
    for (int f = 0; f < 6; ++f) total += face_sign(f) * dec.face_flux[dec.skeleton.faces_of[s][f]];
    dec.fluxes[s] = total;
    const Cube c = lattice.cube(s);
    for (const auto& sg : sings)
      if (surface_distance(c, sg.position).distance < c.side / quad.n_q) dec.ill_conditioned[s] = true;
    const double ratio = std::abs(total) / dec.flux_unit;
    if (dec.ill_conditioned[s] || !(ratio < 1.0 - label_tol)) {
      dec.labels[s] = CubeLabel::bad;
      dec.degrees[s] = static_cast<int>(std::lround(total / dec.flux_unit));
    }
    dec.cell_means[s] = cell_mean(field, c);
  }
  return dec;
}

DeviationScore deviation_score(const VectorField& field, const CubeDecomposition& dec, const QuadratureSpec& quad,
                               double p) {
  if (!(p >= 1.0)) throw InvalidInput("deviation exponent must be >= 1");
  const auto sings = field.known_singularities();
  double total = 0.0;
  for (const auto& f : dec.skeleton.faces) {
    double ml = 0.0, mu = 0.0;
    if (f.lower >= 0) ml = dec.cell_means[f.lower][f.axis];
    if (f.upper >= 0) mu = dec.cell_means[f.upper][f.axis];
    double acc = 0.0;
    for_each_rect_point(f.rect, quad, sings, [&](const Vec3& x, double w) {
      const double v = field.eval(x)[f.axis];
      if (f.lower >= 0) acc += w * std::pow(std::abs(v - ml), p);
      if (f.upper >= 0) acc += w * std::pow(std::abs(v - mu), p);
    });
    total += acc;
  }
  return {dec.lattice.a, dec.lattice.eps * total};
}

namespace {

bool guard_violated(const CubeLattice& lat, const std::vector<Singularity>& sings, double cell) {
  for (const auto& s : sings) {
    const LatticeIndex c = lat.cell_of(s.position);
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj)
        for (int dk = -1; dk <= 1; ++dk) {
          const int site = lat.find({c[0] + di, c[1] + dj, c[2] + dk});
          if (site >= 0 && surface_distance(lat.cube(site), s.position).distance < cell) return true;
        }
  }
  return false;
}

}  // namespace

TranslationChoice select_translation(const VectorField& field, double eps, std::uint64_t seed,
                                     const QuadratureSpec& quad, const TranslationOptions& opt) {
  if (opt.n_samples < 1) throw InvalidInput("need at least one translation sample");
  if (!(opt.int_tol > 0.0)) throw InvalidInput("int_tol must be positive");
  build_lattice(eps, {});  // validates eps
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto sings = field.known_singularities();
  const double unit = field.convention().flux_unit;

  TranslationChoice best;
  bool found = false;
  double best_deficit = std::numeric_limits<double>::infinity();
  for (int c = 0; c < opt.n_samples; ++c) {
    Vec3 a;
    do {
      a = eps * Vec3{u(rng), u(rng), u(rng)};
    } while (norm(a) > eps);
    CandidateReport rep;
    rep.a = a;
    rep.score = std::numeric_limits<double>::quiet_NaN();
    const CubeLattice lat = build_lattice(eps, a);
    if (guard_violated(lat, sings, eps / quad.n_q)) {
      rep.guard_ok = false;
      rep.deficit = std::numeric_limits<double>::infinity();
      best.candidates.push_back(rep);
      continue;
    }
    CubeDecomposition dec = classify(field, lat, quad, opt.label_tol);
    for (double f : dec.fluxes) rep.deficit = std::max(rep.deficit, nearest_multiple_distance(f, unit));
    best_deficit = std::min(best_deficit, rep.deficit);
    if (rep.deficit <= opt.int_tol) {
      rep.survived = true;
      const DeviationScore sc = deviation_score(field, dec, quad, opt.p);
      rep.score = sc.score;
      if (!found || sc.score < best.score.score) {
        found = true;
        best.a = a;
        best.score = sc;
        best.decomposition = std::move(dec);
      }
    }
    best.candidates.push_back(rep);
  }
  if (!found)
    throw NoValidTranslation("no sampled translation gives integral cube fluxes (best deficit " +
                                 std::to_string(best_deficit) + ")",
                             best_deficit);
  return best;
}

SweepTable bad_volume_sweep(const VectorField& field, const std::vector<double>& eps_list, std::uint64_t seed,
                            const QuadratureSpec& quad, const TranslationOptions& opt) {
  if (eps_list.size() < 3) throw InvalidInput("sweep needs at least 3 eps values");
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] < eps_list[i - 1])) throw InvalidInput("eps values must be strictly descending");
  SweepTable table;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    const double eps = eps_list[i];
    const auto choice = select_translation(field, eps, seed + i, quad, opt);
    SweepRow row;
    row.eps = eps;
    row.a = choice.a;
    row.n_bad = choice.decomposition.n_bad();
    row.volume = row.n_bad * eps * eps * eps;
    if (row.volume > 0.0) {
      lx.push_back(std::log(eps));
      ly.push_back(std::log(row.volume));
    }
    table.rows.push_back(row);
  }
  if (lx.size() >= 2) {
    const double n = static_cast<double>(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sx += lx[i];
      sy += ly[i];
      sxx += lx[i] * lx[i];
      sxy += lx[i] * ly[i];
    }
    table.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  return table;
}

}  // namespace intflux
