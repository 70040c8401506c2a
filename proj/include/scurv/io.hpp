#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "scurv/certifier.hpp"
#include "scurv/chart.hpp"
#include "scurv/convergence.hpp"
#include "scurv/curvature.hpp"
#include "scurv/geodesic.hpp"
#include "scurv/hypersurface.hpp"
#include "scurv/mm_space.hpp"
#include "scurv/spectral.hpp"

namespace scurv {

using nlohmann::json;

inline constexpr const char* kVersion = "0.3.0";

/// Space JSON. Either explicit data
///   {"n", "resolution", "points", "mass": [...], "dist": [[...]], "sampling", "scale"}
/// with "embedded": {"kind", "coords", "radius", "periods"} in place of "dist"
/// for model-geometry backends, or a generator spec
///   {"generator": "sphere" | "flat_torus" | "hyperbolic_disk" | "interval", ...}.
/// Product and subset backends are written as dense distances.
json space_to_json(const FiniteMMSpace& space);
FiniteMMSpace space_from_json(const json& j);

/// Density spec: {"kind": "zero" | "gaussian" | "band_limited" | "sin_product" | "bump" | "linear", ...}.
ScalarFn density_from_json(const json& j, int n, double length);

/// Chart JSON. Either raw {"n", "shape", "origin", "spacing", "periodic", "g": [[n*n]...], "f": [...]}
/// or {"generator": "flat_torus" | "round_sphere_patch" | "gaussian_density_plane" |
/// "spherical_band" | "sphere_line_product", ..., "density": {...}}.
json chart_to_json(const ChartMetric& chart);
ChartMetric chart_from_json(const json& j);

/// Atlas for closed surfaces: {"generator": "sphere_atlas", "count", "density"} or
/// any closed chart spec (read as a torus atlas).
Atlas atlas_from_json(const json& j);

json to_json(const NdimReport& r);
json to_json(const CertificateResult& r);
json to_json(const LowerBoundEstimate& r);
json to_json(const BgReport& r);
json to_json(const CdReport& r);
json to_json(const StabilityReport& r);
json to_json(const ExpansionReport& r);
json to_json(const ResidualReport& r);
json to_json(const GaussBonnetReport& r);

json read_json_file(const std::string& path);
/// Deterministic dump: sorted keys, two-space indent, trailing newline.
void write_json_file(const std::string& path, const json& j);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace scurv
