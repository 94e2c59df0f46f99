#include "intflux/faceform.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "intflux/error.hpp"

namespace intflux {

double CubeBoundaryData::face_total(int f) const {
  const double a = cell_size() * cell_size();
  double s = 0.0;
  for (double v : density[f]) s += v * a;
  return s;
}

double CubeBoundaryData::total() const {
  double s = 0.0;
  for (int f = 0; f < 6; ++f) s += face_total(f);
  return s;
}

CubeBoundaryData CubeBoundaryData::zero(const Cube& cube, int n_f) {
  CubeBoundaryData d;
  d.cube = cube;
  d.n_f = n_f;
  for (auto& v : d.density) v.assign(static_cast<std::size_t>(n_f) * n_f, 0.0);
  return d;
}

double FaceForm::cube_total(std::size_t site) const {
  double s = 0.0;
  for (int f = 0; f < 6; ++f) s += face_sign(f) * totals[skeleton.faces_of[site][f]];
  return s;
}

CubeBoundaryData FaceForm::cube_data(std::size_t site) const {
  CubeBoundaryData d;
  d.cube = lattice.cube(site);
  d.n_f = n_f;
  for (int f = 0; f < 6; ++f) {
    const auto src = face(skeleton.faces_of[site][f]);
    d.density[f].resize(src.size());
    for (std::size_t k = 0; k < src.size(); ++k) d.density[f][k] = face_sign(f) * src[k];
  }
  return d;
}

FaceForm restrict_to_skeleton(const VectorField& field, const CubeDecomposition& dec, int n_f,
                              const QuadratureSpec& cell_quad) {
  if (n_f < 1) throw InvalidInput("n_f must be positive");
  FaceForm ff;
  ff.lattice = dec.lattice;
  ff.skeleton = dec.skeleton;
  ff.n_f = n_f;
  ff.flux_unit = dec.flux_unit;
  const double h = ff.cell_size();
  const double area = ff.cell_area();
  const auto sings = field.known_singularities();
  const auto& faces = ff.skeleton.faces;
  ff.density.assign(faces.size() * n_f * n_f, 0.0);
  ff.totals.assign(faces.size(), 0.0);
  for (std::size_t fi = 0; fi < faces.size(); ++fi) {
    const AxisRect& r = faces[fi].rect;
    std::vector<Singularity> near;
    for (const auto& s : sings) {
      const double d = r.distance(s.position);
      if (d < h) {
        const int owner = faces[fi].lower >= 0 ? faces[fi].lower : faces[fi].upper;
        const int local = faces[fi].lower >= 0 ? 2 * faces[fi].axis + 1 : 2 * faces[fi].axis;
        throw IllConditionedQuadrature("singularity within the skeleton guard of face " + std::to_string(fi) +
                                           " (cube " + std::to_string(owner) + ")",
                                       local);
      }
      if (d < 2.0 * dec.lattice.eps) near.push_back(s);
    }
    auto dens = ff.face(fi);
    double total = 0.0;
    for (int j = 0; j < n_f; ++j)
      for (int i = 0; i < n_f; ++i) {
        AxisRect c = r;
        c.u0 = r.u0 + i * h;
        c.u1 = r.u0 + (i + 1) * h;
        c.v0 = r.v0 + j * h;
        c.v1 = r.v0 + (j + 1) * h;
        // cells close to a charge get a finer rule so cube totals stay integral
        QuadratureSpec q = cell_quad;
        for (const auto& sg : near)
          if (c.distance(sg.position) < 8.0 * h) q.n_q = std::max(q.n_q, 16);
        const double flux = rect_flux(field, c, q, near);
        dens[j * n_f + i] = flux / area;
        total += flux;
      }
    ff.totals[fi] = total;
  }
  return ff;
}

FaceForm smooth_skeleton(const FaceForm& form, double delta, SmoothingReport* report) {
  const double eps = form.lattice.eps;
  if (!(delta > 0.0) || !(delta < 0.25 * eps)) throw InvalidInput("smoothing width must lie in (0, eps/4)");
  const int n = form.n_f;
  const double h = form.cell_size();
  const double area = form.cell_area();
  const int reach = static_cast<int>(std::floor(delta / h));
  std::vector<double> kernel((2 * reach + 1) * (2 * reach + 1), 0.0);
  for (int dj = -reach; dj <= reach; ++dj)
    for (int di = -reach; di <= reach; ++di) {
      const double rho = h * std::sqrt(double(di * di + dj * dj)) / delta;
      kernel[(dj + reach) * (2 * reach + 1) + di + reach] = rho < 1.0 ? (1 - rho * rho) * (1 - rho * rho) : 0.0;
    }

  FaceForm out = form;
  SmoothingReport rep;
  std::vector<double> tmp(static_cast<std::size_t>(n) * n);
  for (std::size_t fi = 0; fi < form.skeleton.faces.size(); ++fi) {
    const auto src = form.face(fi);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        double num = 0.0, den = 0.0;
        for (int dj = -reach; dj <= reach; ++dj) {
          const int jj = j + dj;
          if (jj < 0 || jj >= n) continue;
          for (int di = -reach; di <= reach; ++di) {
            const int ii = i + di;
            if (ii < 0 || ii >= n) continue;
            const double w = kernel[(dj + reach) * (2 * reach + 1) + di + reach];
            num += w * src[jj * n + ii];
            den += w;
          }
        }
        tmp[j * n + i] = num / den;
      }
    const double target = form.totals[fi];
    double sum = 0.0, abs_sum = 0.0;
    for (double v : tmp) {
      sum += v * area;
      abs_sum += std::abs(v) * area;
    }
    auto dst = out.face(fi);
    if (sum == target) {
      std::copy(tmp.begin(), tmp.end(), dst.begin());
      ++rep.multiplicative;
    } else if (std::abs(sum) > 1e-12 * abs_sum && sum * target > 0.0) {
      const double scale = target / sum;
      for (std::size_t k = 0; k < tmp.size(); ++k) dst[k] = tmp[k] * scale;
      ++rep.multiplicative;
    } else {
      const double shift = (target - sum) / (area * tmp.size());
      for (std::size_t k = 0; k < tmp.size(); ++k) dst[k] = tmp[k] + shift;
      ++rep.additive;
      rep.additive_faces.push_back(static_cast<int>(fi));
    }
    // push the rounding residue of the cell sum into one cell
    for (int iter = 0; iter < 4; ++iter) {
      double s = 0.0;
      for (double v : dst) s += v * area;
      if (s == target) break;
      dst[0] += (target - s) / area;
    }
  }
  if (report) *report = rep;
  return out;
}

}  // namespace intflux
