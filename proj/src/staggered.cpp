#include "intflux/staggered.hpp"

#include <algorithm>
#include <cmath>

#include "intflux/error.hpp"

namespace intflux {

StaggeredField::StaggeredField(Vec3 origin, double spacing, std::array<int, 3> cells, FieldConvention convention)
    : origin_(origin), h_(spacing), cells_(cells), convention_(convention) {
  if (!(spacing > 0) || !is_finite(origin)) throw InvalidInput("staggered grid needs a finite origin and spacing");
  for (int c : cells)
    if (c < 1) throw InvalidInput("staggered grid needs at least one cell per axis");
  for (int a = 0; a < 3; ++a) {
    const auto d = face_dims(a);
    flux_[a].assign(static_cast<std::size_t>(d[0]) * d[1] * d[2], 0.0);
  }
}

std::array<int, 3> StaggeredField::face_dims(int axis) const {
  auto d = cells_;
  d[axis] += 1;
  return d;
}

std::size_t StaggeredField::face_index(int axis, int i, int j, int k) const {
  const auto d = face_dims(axis);
  return (static_cast<std::size_t>(k) * d[1] + j) * d[0] + i;
}

Vec3 StaggeredField::upper() const {
  return origin_ + Vec3{cells_[0] * h_, cells_[1] * h_, cells_[2] * h_};
}

Vec3 StaggeredField::cell_center(int i, int j, int k) const {
  return origin_ + Vec3{(i + 0.5) * h_, (j + 0.5) * h_, (k + 0.5) * h_};
}

double StaggeredField::divergence(int i, int j, int k) const {
  return flux(0, i + 1, j, k) - flux(0, i, j, k) + flux(1, i, j + 1, k) - flux(1, i, j, k) + flux(2, i, j, k + 1) -
         flux(2, i, j, k);
}

bool StaggeredField::contains_box(const Vec3& lo, const Vec3& hi) const {
  const Vec3 up = upper();
  const double slack = 1e-9 * h_;
  for (int a = 0; a < 3; ++a)
    if (lo[a] < origin_[a] - slack || hi[a] > up[a] + slack) return false;
  return true;
}

Vec3 StaggeredField::eval(const Vec3& x) const {
  std::array<int, 3> c{};
  std::array<double, 3> t{};
  for (int a = 0; a < 3; ++a) {
    const double s = (x[a] - origin_[a]) / h_;
    if (!(s >= -1e-9 && s <= cells_[a] + 1e-9)) throw OutOfRange("point outside the staggered grid");
    c[a] = std::clamp(static_cast<int>(std::floor(s)), 0, cells_[a] - 1);
    t[a] = std::clamp(s - c[a], 0.0, 1.0);
  }
  Vec3 out;
  const double area = h_ * h_;
  for (int a = 0; a < 3; ++a) {
    auto up = c;
    up[a] += 1;
    out[a] = ((1 - t[a]) * flux(a, c[0], c[1], c[2]) + t[a] * flux(a, up[0], up[1], up[2])) / area;
  }
  return out;
}

std::optional<double> StaggeredField::exact_rect_flux(const AxisRect& r) const {
  const int d = r.axis, au = tangent_u(d), av = tangent_v(d);
  const double s = (r.plane - origin_[d]) / h_;
  if (!(s >= -1e-9 && s <= cells_[d] + 1e-9)) throw OutOfRange("rectangle plane outside the staggered grid");
  const int kd = std::clamp(static_cast<int>(std::floor(s)), 0, cells_[d] - 1);
  const double td = std::clamp(s - kd, 0.0, 1.0);
  const double u0 = (r.u0 - origin_[au]) / h_, u1 = (r.u1 - origin_[au]) / h_;
  const double v0 = (r.v0 - origin_[av]) / h_, v1 = (r.v1 - origin_[av]) / h_;
  if (u0 < -1e-9 || v0 < -1e-9 || u1 > cells_[au] + 1e-9 || v1 > cells_[av] + 1e-9)
    throw OutOfRange("rectangle outside the staggered grid");
  const int iu_lo = std::max(0, static_cast<int>(std::floor(u0)));
  const int iu_hi = std::min(cells_[au] - 1, static_cast<int>(std::ceil(u1)) - 1);
  const int iv_lo = std::max(0, static_cast<int>(std::floor(v0)));
  const int iv_hi = std::min(cells_[av] - 1, static_cast<int>(std::ceil(v1)) - 1);
  double total = 0.0;
  for (int iv = iv_lo; iv <= iv_hi; ++iv) {
    const double b = std::min(v1 - iv, 1.0) - std::max(v0 - iv, 0.0);
    if (b <= 0) continue;
    for (int iu = iu_lo; iu <= iu_hi; ++iu) {
      const double a = std::min(u1 - iu, 1.0) - std::max(u0 - iu, 0.0);
      if (a <= 0) continue;
      std::array<int, 3> i{};
      i[au] = iu;
      i[av] = iv;
      i[d] = kd;
      const double lo = flux(d, i[0], i[1], i[2]);
      i[d] = kd + 1;
      const double hi = flux(d, i[0], i[1], i[2]);
      total += a * b * ((1 - td) * lo + td * hi);
    }
  }
  return total;
}

SampledField StaggeredField::to_sampled() const {
  const std::array<int, 3> nd{cells_[0] + 1, cells_[1] + 1, cells_[2] + 1};
  std::vector<Vec3> samples(static_cast<std::size_t>(nd[0]) * nd[1] * nd[2]);
  const double area = h_ * h_;
  for (int k = 0; k < nd[2]; ++k)
    for (int j = 0; j < nd[1]; ++j)
      for (int i = 0; i < nd[0]; ++i) {
        Vec3 v;
        for (int a = 0; a < 3; ++a) {
          const int au = tangent_u(a), av = tangent_v(a);
          double s = 0.0;
          int cnt = 0;
          for (int du = -1; du <= 0; ++du)
            for (int dv = -1; dv <= 0; ++dv) {
              std::array<int, 3> f{i, j, k};
              f[au] += du;
              f[av] += dv;
              if (f[au] < 0 || f[au] >= cells_[au] || f[av] < 0 || f[av] >= cells_[av]) continue;
              s += flux(a, f[0], f[1], f[2]);
              ++cnt;
            }
          v[a] = s / (cnt * area);
        }
        samples[(static_cast<std::size_t>(k) * nd[1] + j) * nd[0] + i] = v;
      }
  return SampledField(origin_, h_, nd, std::move(samples), convention_);
}

}  // namespace intflux
