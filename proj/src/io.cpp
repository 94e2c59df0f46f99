#include "intflux/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "intflux/error.hpp"

namespace intflux {

namespace fs = std::filesystem;

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

Json vec_json(const Vec3& v) { return Json::array({v.x, v.y, v.z}); }

Vec3 vec_from(const Json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw InvalidInput(std::string(what) + " must be an array of 3 numbers");
  for (const auto& e : j)
    if (!e.is_number()) throw InvalidInput(std::string(what) + " must be an array of 3 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Mat3 mat_from(const Json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw InvalidInput(std::string(what) + " must be a 3x3 array");
  Mat3 m{};
  for (int r = 0; r < 3; ++r) {
    const Vec3 row = vec_from(j[r], what);
    m[r] = {row.x, row.y, row.z};
  }
  return m;
}

Json mat_json(const Mat3& m) {
  Json j = Json::array();
  for (const auto& row : m) j.push_back(Json::array({row[0], row[1], row[2]}));
  return j;
}

double num(const Json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw InvalidInput(std::string(key) + " must be a number");
  return j[key].get<double>();
}

double num_required(const Json& j, const char* key) {
  if (!j.contains(key)) throw InvalidInput(std::string("missing ") + key);
  return num(j, key, 0.0);
}

std::array<int, 3> dims_from(const Json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw InvalidInput(std::string(what) + " must be 3 integers");
  std::array<int, 3> d{};
  for (int a = 0; a < 3; ++a) {
    if (!j[a].is_number_integer()) throw InvalidInput(std::string(what) + " must be 3 integers");
    d[a] = j[a].get<int>();
  }
  return d;
}

double swap_if_big(double v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    u = __builtin_bswap64(u);
    std::memcpy(&v, &u, 8);
  }
  return v;
}

void write_doubles(const fs::path& path, const std::vector<double>& v) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  for (double d : v) {
    const double le = swap_if_big(d);
    out.write(reinterpret_cast<const char*>(&le), 8);
  }
}

std::vector<double> read_doubles(const fs::path& path, std::size_t count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read " + path.string());
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::size_t>(in.tellg());
  if (bytes != 8 * count)
    throw InvalidInput(path.string() + " holds " + std::to_string(bytes) + " bytes, expected " + std::to_string(8 * count));
  in.seekg(0);
  std::vector<double> v(count);
  for (double& d : v) {
    in.read(reinterpret_cast<char*>(&d), 8);
    d = swap_if_big(d);
  }
  return v;
}

Background background_from(const Json& j) {
  if (j.is_null()) return NoBackground{};
  const std::string type = j.value("type", "");
  if (type == "none") return NoBackground{};
  if (type == "constant") return ConstantBackground{vec_from(j.at("value"), "background value")};
  if (type == "curl") return CurlBackground{vec_from(j.at("omega"), "background omega"), num(j, "shear", 0.0)};
  throw InvalidInput("unknown background type '" + type + "'");
}

Json background_json(const Background& b) {
  if (const auto* c = std::get_if<ConstantBackground>(&b)) return {{"type", "constant"}, {"value", vec_json(c->value)}};
  if (const auto* c = std::get_if<CurlBackground>(&b))
    return {{"type", "curl"}, {"omega", vec_json(c->omega)}, {"shear", c->shear}};
  return {{"type", "none"}};
}

fs::path data_path(const Json& spec, const fs::path& base) {
  if (!spec.contains("data") || !spec["data"].is_string()) throw InvalidInput("grid field spec needs a data file name");
  const fs::path p = spec["data"].get<std::string>();
  return p.is_absolute() ? p : base / p;
}

std::string csv_join(std::initializer_list<std::string> cells) {
  std::string s;
  bool first = true;
  for (const auto& c : cells) {
    if (!first) s += ',';
    s += c;
    first = false;
  }
  s += '\n';
  return s;
}

}  // namespace

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Json singularities_to_json(const std::vector<Singularity>& s) {
  Json j = Json::array();
  for (const auto& q : s) j.push_back({{"pos", vec_json(q.position)}, {"deg", q.degree}});
  return j;
}

std::vector<Singularity> singularities_from_json(const Json& j) {
  if (!j.is_array()) throw InvalidInput("singularity list must be an array");
  std::vector<Singularity> out;
  for (const auto& e : j) {
    if (!e.is_object() || !e.contains("pos") || !e.contains("deg") || !e["deg"].is_number_integer())
      throw InvalidInput("each singularity needs pos [x, y, z] and integer deg");
    out.push_back({vec_from(e["pos"], "pos"), e["deg"].get<int>()});
  }
  return out;
}

std::unique_ptr<VectorField> field_from_json(const Json& spec, const fs::path& base_dir) {
  if (!spec.is_object() || !spec.contains("kind") || !spec["kind"].is_string())
    throw InvalidInput("field spec needs a string 'kind'");
  const std::string kind = spec["kind"].get<std::string>();
  try {
    if (kind == "coulomb") {
      const auto charges = singularities_from_json(spec.value("charges", Json::array()));
      const FieldConvention conv{num(spec, "flux_unit", 1.0)};
      const Background bg = background_from(spec.value("background", Json()));
      const double core = num(spec, "core_radius", 0.0);
      if (core > 0) return std::make_unique<AnalyticField>(charges, bg, conv, core);
      return std::make_unique<AnalyticField>(coulomb_superposition(charges, bg, conv));
    }
    if (kind == "dfield") {
      const Json& m = spec.at("map");
      const std::string type = m.value("type", "");
      MapDescriptor map;
      if (type == "hedgehog") {
        HedgehogMap h;
        h.center = vec_from(m.value("center", Json::array({0, 0, 0})), "map center");
        if (m.contains("orientation")) h.orientation = mat_from(m["orientation"], "map orientation");
        map = h;
      } else if (type == "constant") {
        map = ConstantMap{vec_from(m.at("value"), "map value")};
      } else {
        throw InvalidInput("unsupported map descriptor '" + type + "'");
      }
      const std::string partials = spec.value("partials", "exact");
      if (partials != "exact" && partials != "finite_difference") throw InvalidInput("partials must be exact or finite_difference");
      return std::make_unique<DField>(map, spec.value("normalize", true),
                                      partials == "exact" ? Partials::exact : Partials::finite_difference);
    }
    if (kind == "linear") {
      return std::make_unique<LinearField>(mat_from(spec.at("matrix"), "matrix"),
                                           spec.contains("offset") ? vec_from(spec["offset"], "offset") : Vec3{});
    }
    if (kind == "sampled") {
      const auto dims = dims_from(spec.at("dims"), "dims");
      for (int d : dims)
        if (d < 2) throw InvalidInput("sampled dims must be at least 2");
      const std::size_t n = static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
      const auto raw = read_doubles(data_path(spec, base_dir), 3 * n);
      std::vector<Vec3> samples(n);
      for (std::size_t i = 0; i < n; ++i) samples[i] = {raw[3 * i], raw[3 * i + 1], raw[3 * i + 2]};
      return std::make_unique<SampledField>(vec_from(spec.at("origin"), "origin"), num_required(spec, "spacing"), dims,
                                            std::move(samples), FieldConvention{num(spec, "flux_unit", 1.0)});
    }
    if (kind == "staggered") {
      const auto cells = dims_from(spec.at("cells"), "cells");
      for (int d : cells)
        if (d < 1) throw InvalidInput("staggered cells must be positive");
      auto F = std::make_unique<StaggeredField>(vec_from(spec.at("origin"), "origin"), num_required(spec, "spacing"), cells,
                                                FieldConvention{num(spec, "flux_unit", 1.0)});
      std::size_t total = 0;
      for (int a = 0; a < 3; ++a) total += F->flux_array(a).size();
      const auto raw = read_doubles(data_path(spec, base_dir), total);
      std::size_t at = 0;
      for (int a = 0; a < 3; ++a)
        for (double& v : F->flux_array(a)) v = raw[at++];
      F->set_singularities(singularities_from_json(spec.value("singularities", Json::array())), num(spec, "guard", 0.0));
      return F;
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed ") + kind + " spec: " + e.what());
  }
  throw InvalidInput("unknown field kind '" + kind + "'");
}

std::unique_ptr<VectorField> load_field(const fs::path& path) {
  Json spec;
  try {
    spec = Json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
  return field_from_json(spec, path.parent_path());
}

Json field_to_json(const VectorField& field) {
  if (const auto* f = dynamic_cast<const AnalyticField*>(&field)) {
    Json j{{"kind", "coulomb"}, {"charges", singularities_to_json(f->charges())}, {"background", background_json(f->background())},
           {"flux_unit", f->convention().flux_unit}};
    if (f->core_radius() > 0) j["core_radius"] = f->core_radius();
    return j;
  }
  if (const auto* f = dynamic_cast<const DField*>(&field)) {
    Json map;
    if (const auto* h = std::get_if<HedgehogMap>(&f->map()))
      map = {{"type", "hedgehog"}, {"center", vec_json(h->center)}, {"orientation", mat_json(h->orientation)}};
    else
      map = {{"type", "constant"}, {"value", vec_json(std::get<ConstantMap>(f->map()).value)}};
    return {{"kind", "dfield"}, {"map", map}, {"normalize", f->normalized()},
            {"partials", f->partials() == Partials::exact ? "exact" : "finite_difference"}};
  }
  if (const auto* f = dynamic_cast<const LinearField*>(&field))
    return {{"kind", "linear"}, {"matrix", mat_json(f->matrix())}, {"offset", vec_json(f->offset())}};
  throw InvalidInput("field_to_json: grid fields are written with save_field");
}

void save_field(const VectorField& field, const fs::path& json_path) {
  fs::path bin = json_path;
  bin.replace_extension(".bin");
  Json j;
  if (const auto* f = dynamic_cast<const SampledField*>(&field)) {
    std::vector<double> raw;
    raw.reserve(3 * f->samples().size());
    for (const auto& v : f->samples()) {
      raw.push_back(v.x);
      raw.push_back(v.y);
      raw.push_back(v.z);
    }
    write_doubles(bin, raw);
    j = {{"kind", "sampled"}, {"origin", vec_json(f->origin())}, {"spacing", f->spacing()},
         {"dims", Json::array({f->dims()[0], f->dims()[1], f->dims()[2]})}, {"data", bin.filename().string()},
         {"flux_unit", f->convention().flux_unit}};
  } else if (const auto* f = dynamic_cast<const StaggeredField*>(&field)) {
    std::vector<double> raw;
    for (int a = 0; a < 3; ++a) raw.insert(raw.end(), f->flux_array(a).begin(), f->flux_array(a).end());
    write_doubles(bin, raw);
    j = {{"kind", "staggered"}, {"origin", vec_json(f->origin())}, {"spacing", f->spacing()},
         {"cells", Json::array({f->cells()[0], f->cells()[1], f->cells()[2]})}, {"data", bin.filename().string()},
         {"flux_unit", f->convention().flux_unit}, {"singularities", singularities_to_json(f->known_singularities())},
         {"guard", f->singular_guard()}};
  } else {
    j = field_to_json(field);
  }
  write_text(json_path, j.dump(2) + "\n");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string scan_csv(const ScanReport& r) {
  std::string s = "center_x,center_y,center_z,radius,flux,nearest_int_dist,skipped\n";
  for (const auto& e : r.entries)
    s += csv_join({fmt(e.center.x), fmt(e.center.y), fmt(e.center.z), fmt(e.radius), fmt(e.flux), fmt(e.nearest_int_dist),
                   e.skipped ? "1" : "0"});
  return s;
}

Json scan_summary(const ScanReport& r) {
  return {{"entries", r.entries.size()}, {"violations", r.violations}, {"skipped", r.skipped},
          {"max_deviation", r.max_deviation}, {"tol", r.tol}, {"seed", r.seed}};
}

Json decomposition_to_json(const CubeDecomposition& d) {
  Json sites = Json::array();
  for (std::size_t i = 0; i < d.lattice.size(); ++i)
    sites.push_back({{"center", vec_json(d.lattice.sites[i])}, {"flux", d.fluxes[i]},
                     {"label", d.labels[i] == CubeLabel::bad ? "bad" : "good"}, {"degree", d.degrees[i]},
                     {"mean", vec_json(d.cell_means[i])}});
  return {{"eps", d.lattice.eps}, {"a", vec_json(d.lattice.a)}, {"flux_unit", d.flux_unit}, {"n_bad", d.n_bad()},
          {"sites", sites}};
}

std::string sweep_csv(const SweepTable& t) {
  std::string s = "eps,a_x,a_y,a_z,n_bad,volume\n";
  for (const auto& r : t.rows)
    s += csv_join({fmt(r.eps), fmt(r.a.x), fmt(r.a.y), fmt(r.a.z), std::to_string(r.n_bad), fmt(r.volume)});
  return s;
}

std::string diagnostics_csv(const RegularizedField& r) {
  std::string s =
      "site,center_x,center_y,center_z,bad,degree,total,d_residual,codiff_residual,laplace_residual,max_cell_divergence,"
      "degenerate\n";
  for (const auto& c : r.cubes) {
    const Vec3 x = r.lattice.sites[c.site];
    s += csv_join({std::to_string(c.site), fmt(x.x), fmt(x.y), fmt(x.z), c.bad ? "1" : "0", std::to_string(c.degree),
                   fmt(c.total), fmt(c.d_residual), fmt(c.codiff_residual), fmt(c.laplace_residual),
                   fmt(c.max_cell_divergence), c.degenerate ? "1" : "0"});
  }
  return s;
}

void export_regularized(const RegularizedField& r, const fs::path& dir, const std::string& stem) {
  fs::create_directories(dir);
  save_field(*r.field, dir / (stem + ".json"));
  save_field(r.field->to_sampled(), dir / (stem + "_sampled.json"));
  write_text(dir / (stem + "_singularities.json"), singularities_to_json(r.singularities).dump(2) + "\n");
  write_text(dir / (stem + "_diagnostics.csv"), diagnostics_csv(r));
}

Json current_to_json(const Current1& L) {
  Json segs = Json::array();
  for (const auto& s : L.segments)
    segs.push_back({{"start", vec_json(s.start)}, {"end", vec_json(s.end)}, {"multiplicity", s.multiplicity}});
  return {{"mass", L.mass()}, {"segments", segs}};
}

Current1 current_from_json(const Json& j) {
  Current1 L;
  try {
    for (const auto& s : j.at("segments")) {
      const int m = s.at("multiplicity").get<int>();
      if (m < 1) throw InvalidInput("segment multiplicity must be positive");
      L.segments.push_back({vec_from(s.at("start"), "start"), vec_from(s.at("end"), "end"), m});
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed current: ") + e.what());
  }
  return L;
}

std::string current_csv(const Current1& L) {
  std::string s = "segment,point,x,y,z,multiplicity\n";
  for (std::size_t i = 0; i < L.segments.size(); ++i) {
    const auto& g = L.segments[i];
    s += csv_join({std::to_string(i), "0", fmt(g.start.x), fmt(g.start.y), fmt(g.start.z), std::to_string(g.multiplicity)});
    s += csv_join({std::to_string(i), "1", fmt(g.end.x), fmt(g.end.y), fmt(g.end.z), std::to_string(g.multiplicity)});
  }
  return s;
}

Json certificate_to_json(const DualCertificate& d, const Certification& c) {
  return {{"singularities", singularities_to_json(d.singularities)}, {"potential", d.potential}, {"dual_value", d.value},
          {"primal_mass", c.primal_mass}, {"gap", c.gap}, {"certified", c.certified}};
}

std::string asymptotics_csv(const std::vector<AsymptoticRow>& rows) {
  std::string s = "k,pairing,bound,ratio\n";
  for (const auto& r : rows)
    s += csv_join({std::to_string(r.k), fmt(r.pairing), r.bound ? fmt(*r.bound) : "", fmt(r.ratio)});
  return s;
}

}  // namespace intflux
