#include "intflux/field.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "intflux/error.hpp"

namespace intflux {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

void check_charges(const std::vector<Singularity>& charges) {
  for (std::size_t i = 0; i < charges.size(); ++i) {
    const auto& c = charges[i];
    if (!is_finite(c.position)) throw InvalidInput("charge " + std::to_string(i) + " has a non-finite position");
    if (c.degree == 0) throw InvalidInput("charge " + std::to_string(i) + " has degree 0");
    if (norm(c.position) >= 1.0) throw InvalidInput("charge " + std::to_string(i) + " lies outside the unit ball");
    for (std::size_t j = 0; j < i; ++j) {
      if (charges[j].position == c.position)
        throw InvalidInput("charges " + std::to_string(j) + " and " + std::to_string(i) + " coincide");
    }
  }
}

}  // namespace

Vec3 AxisRect::point(double u, double v) const {
  Vec3 p;
  p[axis] = plane;
  p[tangent_u(axis)] = u;
  p[tangent_v(axis)] = v;
  return p;
}

double AxisRect::distance(const Vec3& p) const {
  const double du = std::max({u0 - p[tangent_u(axis)], 0.0, p[tangent_u(axis)] - u1});
  const double dv = std::max({v0 - p[tangent_v(axis)], 0.0, p[tangent_v(axis)] - v1});
  const double dn = p[axis] - plane;
  return std::sqrt(du * du + dv * dv + dn * dn);
}

AnalyticField::AnalyticField(std::vector<Singularity> charges, Background background,
                             FieldConvention convention, double core_radius)
    : charges_(std::move(charges)),
      background_(background),
      convention_(convention),
      core_radius_(core_radius) {
  check_charges(charges_);
  if (!(convention_.flux_unit > 0.0) || !std::isfinite(convention_.flux_unit))
    throw InvalidInput("flux_unit must be positive");
  if (!(core_radius_ >= 0.0)) throw InvalidInput("core_radius must be non-negative");
}

Vec3 AnalyticField::eval(const Vec3& x) const {
  Vec3 out;
  for (const auto& c : charges_) {
    const Vec3 d = x - c.position;
    const double r = norm(d);
    double scale;
    if (core_radius_ > 0.0 && r < core_radius_) {
      // uniformly charged ball: linear inside the core
      scale = 1.0 / (core_radius_ * core_radius_ * core_radius_);
    } else {
      if (r == 0.0) throw DomainError("evaluation at a charge position");
      scale = 1.0 / (r * r * r);
    }
    out += d * (c.degree * scale / kFourPi);
  }
  out *= convention_.flux_unit;
  if (const auto* cb = std::get_if<ConstantBackground>(&background_)) {
    out += cb->value;
  } else if (const auto* curl = std::get_if<CurlBackground>(&background_)) {
    out += cross(curl->omega, x);
    out += curl->shear * Vec3{x.y * x.z, x.z * x.x, x.x * x.y};
  }
  return out;
}

std::vector<Singularity> AnalyticField::known_singularities() const {
  if (core_radius_ > 0.0) return {};
  return charges_;
}

AnalyticField coulomb_superposition(std::vector<Singularity> charges, Background background,
                                    FieldConvention convention) {
  return AnalyticField(std::move(charges), background, convention);
}

DField::DField(MapDescriptor map, bool normalize, Partials partials, double fd_step)
    : map_(std::move(map)), normalize_(normalize), partials_(partials), fd_step_(fd_step) {
  if (const auto* h = std::get_if<HedgehogMap>(&map_)) {
    if (!is_finite(h->center)) throw InvalidInput("hedgehog center must be finite");
    const Mat3& o = h->orientation;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += o[k][i] * o[k][j];
        if (std::abs(s - (i == j ? 1.0 : 0.0)) > 1e-10)
          throw InvalidInput("unsupported map descriptor: orientation is not orthogonal");
      }
    }
  } else {
    const auto& c = std::get<ConstantMap>(map_);
    if (std::abs(norm(c.value) - 1.0) > 1e-10)
      throw InvalidInput("unsupported map descriptor: constant value must be a unit vector");
  }
  if (!(fd_step_ > 0.0)) throw InvalidInput("finite-difference step must be positive");
}

Vec3 DField::map_value(const Vec3& x) const {
  if (const auto* h = std::get_if<HedgehogMap>(&map_)) {
    const Vec3 y = x - h->center;
    const double r = norm(y);
    if (r == 0.0) throw DomainError("evaluation at the hedgehog center");
    return mul(h->orientation, y / r);
  }
  return std::get<ConstantMap>(map_).value;
}

std::array<Vec3, 3> DField::map_jacobian(const Vec3& x) const {
  std::array<Vec3, 3> cols;
  if (partials_ == Partials::finite_difference) {
    for (int k = 0; k < 3; ++k) {
      const Vec3 e = unit_axis(k) * fd_step_;
      cols[k] = (map_value(x + e) - map_value(x - e)) / (2.0 * fd_step_);
    }
    return cols;
  }
  if (const auto* h = std::get_if<HedgehogMap>(&map_)) {
    const Vec3 y = x - h->center;
    const double r = norm(y);
    if (r == 0.0) throw DomainError("evaluation at the hedgehog center");
    const Vec3 n = y / r;
    for (int k = 0; k < 3; ++k) cols[k] = mul(h->orientation, (unit_axis(k) - n * n[k]) / r);
    return cols;
  }
  return cols;
}

Vec3 DField::eval(const Vec3& x) const {
  const Vec3 u = map_value(x);
  const auto j = map_jacobian(x);
  Vec3 out{dot(u, cross(j[1], j[2])), dot(u, cross(j[2], j[0])), dot(u, cross(j[0], j[1]))};
  if (normalize_) out = out / kFourPi;
  return out;
}

FieldConvention DField::convention() const { return {normalize_ ? 1.0 : kFourPi}; }

std::vector<Singularity> DField::known_singularities() const {
  if (const auto* h = std::get_if<HedgehogMap>(&map_))
    return {{h->center, det(h->orientation) > 0 ? 1 : -1}};
  return {};
}

DField d_field(MapDescriptor map, bool normalize, Partials partials) {
  return DField(std::move(map), normalize, partials);
}

SampledField::SampledField(Vec3 origin, double spacing, std::array<int, 3> dims,
                           std::vector<Vec3> samples, FieldConvention convention)
    : origin_(origin), h_(spacing), dims_(dims), samples_(std::move(samples)), convention_(convention) {
  if (!is_finite(origin_)) throw InvalidInput("grid origin must be finite");
  if (!(h_ > 0.0) || !std::isfinite(h_)) throw InvalidInput("grid spacing must be positive");
  for (int d : dims_)
    if (d < 2) throw InvalidInput("grid needs at least 2 nodes per axis");
  const std::size_t n = static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
  if (samples_.size() != n)
    throw InvalidInput("sample count " + std::to_string(samples_.size()) + " does not match dims (" +
                       std::to_string(n) + ")");
  if (!(convention_.flux_unit > 0.0)) throw InvalidInput("flux_unit must be positive");
}

Vec3 SampledField::upper() const {
  return origin_ + h_ * Vec3{double(dims_[0] - 1), double(dims_[1] - 1), double(dims_[2] - 1)};
}

Vec3 SampledField::eval(const Vec3& x) const {
  std::array<int, 3> idx{};
  std::array<double, 3> t{};
  for (int a = 0; a < 3; ++a) {
    const double s = (x[a] - origin_[a]) / h_;
    const double top = dims_[a] - 1;
    if (!(s >= -1e-9 && s <= top + 1e-9)) throw OutOfRange("point outside the sampled grid");
    const double sc = std::clamp(s, 0.0, top);
    idx[a] = std::min(static_cast<int>(std::floor(sc)), dims_[a] - 2);
    t[a] = sc - idx[a];
  }
  Vec3 out;
  for (int c = 0; c < 8; ++c) {
    const int di = c & 1, dj = (c >> 1) & 1, dk = (c >> 2) & 1;
    const double w = (di ? t[0] : 1 - t[0]) * (dj ? t[1] : 1 - t[1]) * (dk ? t[2] : 1 - t[2]);
    if (w != 0.0) out += w * node(idx[0] + di, idx[1] + dj, idx[2] + dk);
  }
  return out;
}

bool SampledField::contains_box(const Vec3& lo, const Vec3& hi) const {
  const Vec3 up = upper();
  const double slack = 1e-9 * h_;
  for (int a = 0; a < 3; ++a)
    if (lo[a] < origin_[a] - slack || hi[a] > up[a] + slack) return false;
  return true;
}

std::optional<double> SampledField::exact_rect_flux(const AxisRect& r) const {
  const int d = r.axis, au = tangent_u(d), av = tangent_v(d);
  const double s = (r.plane - origin_[d]) / h_;
  const double top = dims_[d] - 1;
  if (!(s >= -1e-9 && s <= top + 1e-9)) throw OutOfRange("rectangle plane outside the sampled grid");
  const double sc = std::clamp(s, 0.0, top);
  const int kd = std::min(static_cast<int>(std::floor(sc)), dims_[d] - 2);
  const double td = sc - kd;

  const double u0 = (r.u0 - origin_[au]) / h_, u1 = (r.u1 - origin_[au]) / h_;
  const double v0 = (r.v0 - origin_[av]) / h_, v1 = (r.v1 - origin_[av]) / h_;
  if (u0 < -1e-9 || v0 < -1e-9 || u1 > dims_[au] - 1 + 1e-9 || v1 > dims_[av] - 1 + 1e-9)
    throw OutOfRange("rectangle outside the sampled grid");

  auto value = [&](int iu, int iv) {
    std::array<int, 3> i{};
    i[au] = iu;
    i[av] = iv;
    i[d] = kd;
    const double lo = node(i[0], i[1], i[2])[d];
    i[d] = kd + 1;
    const double hi = node(i[0], i[1], i[2])[d];
    return (1.0 - td) * lo + td * hi;
  };
  // exact integral of the bilinear interpolant, cell by cell
  auto weights = [](double a0, double a1) {
    const double q = 0.5 * (a1 * a1 - a0 * a0);
    return std::array<double, 2>{(a1 - a0) - q, q};
  };
  const int iu_lo = std::max(0, static_cast<int>(std::floor(u0)));
  const int iu_hi = std::min(dims_[au] - 2, static_cast<int>(std::ceil(u1)) - 1);
  const int iv_lo = std::max(0, static_cast<int>(std::floor(v0)));
  const int iv_hi = std::min(dims_[av] - 2, static_cast<int>(std::ceil(v1)) - 1);
  double total = 0.0;
  for (int iu = iu_lo; iu <= iu_hi; ++iu) {
    const double a0 = std::max(u0 - iu, 0.0), a1 = std::min(u1 - iu, 1.0);
    if (a1 <= a0) continue;
    const auto wu = weights(a0, a1);
    for (int iv = iv_lo; iv <= iv_hi; ++iv) {
      const double b0 = std::max(v0 - iv, 0.0), b1 = std::min(v1 - iv, 1.0);
      if (b1 <= b0) continue;
      const auto wv = weights(b0, b1);
      total += wu[0] * wv[0] * value(iu, iv) + wu[1] * wv[0] * value(iu + 1, iv) +
               wu[0] * wv[1] * value(iu, iv + 1) + wu[1] * wv[1] * value(iu + 1, iv + 1);
    }
  }
  return total * h_ * h_;
}

double point_charge_rect_flux(const Singularity& q, const AxisRect& r, double flux_unit) {
  const int d = r.axis;
  const double z = r.plane - q.position[d];
  if (z == 0.0) return 0.0;
  const double pu = q.position[tangent_u(d)], pv = q.position[tangent_v(d)];
  auto corner = [&](double x, double y) { return std::atan(x * y / (z * std::sqrt(x * x + y * y + z * z))); };
  const double x0 = r.u0 - pu, x1 = r.u1 - pu, y0 = r.v0 - pv, y1 = r.v1 - pv;
  const double omega = corner(x1, y1) - corner(x0, y1) - corner(x1, y0) + corner(x0, y0);
  return q.degree * flux_unit * omega / (4.0 * std::numbers::pi);
}

SampledField sample_field(const VectorField& field, Vec3 origin, double spacing,
                          std::array<int, 3> dims) {
  std::vector<Vec3> samples;
  samples.reserve(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2]);
  for (int k = 0; k < dims[2]; ++k)
    for (int j = 0; j < dims[1]; ++j)
      for (int i = 0; i < dims[0]; ++i) {
        const Vec3 x = origin + spacing * Vec3{double(i), double(j), double(k)};
        try {
          samples.push_back(field.eval(x));
        } catch (const DomainError&) {
          // node sits on a point singularity; the interpolant has no finite value to carry
          samples.push_back(Vec3{});
        }
      }
  return SampledField(origin, spacing, dims, std::move(samples), field.convention());
}

}  // namespace intflux
