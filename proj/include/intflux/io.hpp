#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "intflux/asymptotics.hpp"
#include "intflux/connection.hpp"
#include "intflux/cubedecomp.hpp"
#include "intflux/field.hpp"
#include "intflux/flux.hpp"
#include "intflux/regularize.hpp"
#include "intflux/staggered.hpp"

namespace intflux {

using Json = nlohmann::ordered_json;

// Field files are JSON documents with a "kind":
//   coulomb    charges [{"pos": [x, y, z], "deg": d}], optional background
//              {"type": "constant", "value": [..]} or {"type": "curl",
//              "omega": [..], "shear": s}, optional flux_unit, core_radius
//   dfield     map {"type": "hedgehog", "center": [..], "orientation": 3x3}
//              or {"type": "constant", "value": [..]}; normalize; partials
//   linear     matrix (3x3), offset
//   sampled    origin, spacing, dims, data (binary file name), flux_unit
//   staggered  origin, spacing, cells, data, flux_unit, singularities, guard
// Binary blobs are little-endian float64. Sampled: (vx, vy, vz) per node,
// x fastest. Staggered: the three face-flux arrays in axis order, each x
// fastest over its face grid. Relative data paths resolve against the
// directory of the JSON file.

/// Parses a field spec; throws InvalidInput on malformed input.
std::unique_ptr<VectorField> field_from_json(const Json& spec, const std::filesystem::path& base_dir = {});
std::unique_ptr<VectorField> load_field(const std::filesystem::path& path);

/// JSON spec of an analytic, D-field or linear field.
Json field_to_json(const VectorField& field);

/// Writes spec + binary blob for grid fields, JSON only for the others.
void save_field(const VectorField& field, const std::filesystem::path& json_path);

Json singularities_to_json(const std::vector<Singularity>& s);
std::vector<Singularity> singularities_from_json(const Json& j);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Shortest round-trip decimal form of a double ("nan", "inf" for the others).
std::string fmt(double v);

std::string scan_csv(const ScanReport& r);
Json scan_summary(const ScanReport& r);

Json decomposition_to_json(const CubeDecomposition& d);
std::string sweep_csv(const SweepTable& t);

std::string diagnostics_csv(const RegularizedField& r);
/// Writes <stem>.json/.bin (staggered), <stem>_sampled.json/.bin,
/// <stem>_singularities.json and <stem>_diagnostics.csv into dir.
void export_regularized(const RegularizedField& r, const std::filesystem::path& dir, const std::string& stem);

Json current_to_json(const Current1& L);
Current1 current_from_json(const Json& j);
/// One row per segment endpoint: segment, point, x, y, z, multiplicity.
std::string current_csv(const Current1& L);
Json certificate_to_json(const DualCertificate& d, const Certification& c);

std::string asymptotics_csv(const std::vector<AsymptoticRow>& rows);

}  // namespace intflux
