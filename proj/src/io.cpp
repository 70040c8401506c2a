#include "scurv/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "scurv/errors.hpp"
#include "scurv/generators.hpp"

namespace scurv {

namespace {

constexpr double kPi = std::numbers::pi;

json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd to_vector(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

const char* kind_name(EmbeddedMetric::Kind k) {
  switch (k) {
    case EmbeddedMetric::Kind::euclidean: return "euclidean";
    case EmbeddedMetric::Kind::sphere: return "sphere";
    case EmbeddedMetric::Kind::flat_torus: return "flat_torus";
    case EmbeddedMetric::Kind::hyperbolic: return "hyperbolic";
  }
  return "euclidean";
}

EmbeddedMetric::Kind kind_from_name(const std::string& s) {
  if (s == "euclidean") return EmbeddedMetric::Kind::euclidean;
  if (s == "sphere") return EmbeddedMetric::Kind::sphere;
  if (s == "flat_torus") return EmbeddedMetric::Kind::flat_torus;
  if (s == "hyperbolic") return EmbeddedMetric::Kind::hyperbolic;
  throw DomainError("unknown embedded metric kind '" + s + "'");
}

FiniteMMSpace space_from_generator(const json& j) {
  const std::string gen = j.at("generator").get<std::string>();
  const auto seed = get_or<std::uint64_t>(j, "seed", 1);
  const Sampling mode = sampling_from_string(get_or<std::string>(j, "mode", "stratified"));
  if (gen == "sphere") {
    return sphere_sample(j.at("n").get<int>(), get_or(j, "sec", 1.0), j.at("count").get<int>(), mode, seed);
  }
  if (gen == "flat_torus") {
    const int n = j.at("n").get<int>();
    const int count = j.at("count").get<int>();
    const double length = get_or(j, "length", 2 * kPi);
    return flat_torus_grid(std::vector<double>(n, length), std::vector<int>(n, count));
  }
  if (gen == "hyperbolic_disk") {
    return hyperbolic_disk(j.at("rho").get<double>(), j.at("count").get<int>(), mode, seed);
  }
  if (gen == "interval") return interval_grid(j.at("length").get<double>(), j.at("count").get<int>());
  throw DomainError("unknown space generator '" + gen + "'");
}

}  // namespace

json space_to_json(const FiniteMMSpace& space) {
  json j;
  j["n"] = space.dim_hint();
  j["resolution"] = space.resolution();
  j["points"] = space.size();
  j["mass"] = vec(space.mass());
  j["sampling"] = to_string(space.sampling());
  j["provenance"] = space.provenance();
  if (const auto* e = std::get_if<EmbeddedMetric>(&space.metric())) {
    json emb;
    emb["kind"] = kind_name(e->kind);
    json rows = json::array();
    for (Eigen::Index i = 0; i < e->coords.rows(); ++i) {
      rows.push_back(std::vector<double>(e->coords.row(i).data(), e->coords.row(i).data() + e->coords.cols()));
    }
    emb["coords"] = rows;
    emb["radius"] = e->radius;
    emb["periods"] = vec(e->periods);
    j["embedded"] = emb;
    j["scale"] = space.scale();
    return j;
  }
  const Eigen::MatrixXd d = distance_matrix(space);
  json rows = json::array();
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    std::vector<double> row(d.cols());
    for (Eigen::Index k = 0; k < d.cols(); ++k) row[k] = d(i, k);
    rows.push_back(row);
  }
  j["dist"] = rows;
  j["scale"] = 1.0;
  return j;
}

FiniteMMSpace space_from_json(const json& j) {
  if (j.contains("generator")) return space_from_generator(j);
  const int n = j.at("n").get<int>();
  const Eigen::VectorXd mass = to_vector(j.at("mass"));
  const Sampling sampling = sampling_from_string(get_or<std::string>(j, "sampling", "exact"));
  const double scale = get_or(j, "scale", 1.0);
  const std::string prov = get_or<std::string>(j, "provenance", "json");
  if (j.contains("points") && j.at("points").get<std::size_t>() != static_cast<std::size_t>(mass.size())) {
    throw DomainError("space JSON: 'points' does not match the mass vector");
  }
  if (j.contains("embedded")) {
    const json& e = j.at("embedded");
    EmbeddedMetric m;
    m.kind = kind_from_name(e.at("kind").get<std::string>());
    const auto& rows = e.at("coords");
    const auto dim = rows.empty() ? 0 : rows.at(0).size();
    m.coords.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto r = rows.at(i).get<std::vector<double>>();
      if (r.size() != dim) throw DomainError("space JSON: ragged coordinate rows");
      for (std::size_t k = 0; k < dim; ++k) m.coords(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = r[k];
    }
    m.radius = get_or(e, "radius", 1.0);
    if (e.contains("periods")) m.periods = to_vector(e.at("periods"));
    return FiniteMMSpace(std::move(m), mass, n, sampling, scale, prov);
  }
  const auto& rows = j.at("dist");
  const auto N = static_cast<Eigen::Index>(rows.size());
  DenseMetric dm;
  dm.dist.resize(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    const auto r = rows.at(static_cast<std::size_t>(i)).get<std::vector<double>>();
    if (static_cast<Eigen::Index>(r.size()) != N) throw DomainError("space JSON: distance matrix is not square");
    for (Eigen::Index k = 0; k < N; ++k) dm.dist(i, k) = r[static_cast<std::size_t>(k)];
  }
  return FiniteMMSpace(std::move(dm), mass, n, sampling, scale, prov);
}

ScalarFn density_from_json(const json& j, int n, double length) {
  if (j.is_null()) return {};
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "zero") return {};
  if (kind == "gaussian") {
    const double s = get_or(j, "scale", 0.25);
    return [s, n](const Eigen::Vector3d& x) { return s * x.head(n).squaredNorm(); };
  }
  if (kind == "band_limited") {
    return band_limited_function(n, get_or(j, "max_mode", 1), get_or(j, "amplitude", 0.3),
                                 get_or(j, "length", length), get_or<std::uint64_t>(j, "seed", 1));
  }
  if (kind == "sin_product") {
    const double a = get_or(j, "amplitude", 0.3);
    return [a](const Eigen::Vector3d& x) { return a * std::sin(x(0)) * std::sin(x(1)); };
  }
  if (kind == "bump") {
    const double a = get_or(j, "amplitude", 0.5);
    const double w = get_or(j, "width", 0.5);
    const auto c = get_or<std::vector<double>>(j, "center", {0, 0, 0});
    if (c.size() != 3) throw DomainError("bump density: center needs three entries");
    const Eigen::Vector3d cv(c[0], c[1], c[2]);
    return [a, w, cv](const Eigen::Vector3d& x) { return a * std::exp(-(x - cv).squaredNorm() / (2 * w * w)); };
  }
  if (kind == "linear") {
    const auto c = get_or<std::vector<double>>(j, "coefficients", {0, 0, 0});
    if (c.size() != 3) throw DomainError("linear density: coefficients need three entries");
    const Eigen::Vector3d cv(c[0], c[1], c[2]);
    return [cv](const Eigen::Vector3d& x) { return cv.dot(x); };
  }
  throw DomainError("unknown density kind '" + kind + "'");
}

json chart_to_json(const ChartMetric& chart) {
  json j;
  j["n"] = chart.n;
  j["shape"] = chart.shape;
  j["origin"] = chart.origin;
  j["spacing"] = chart.spacing;
  j["periodic"] = chart.periodic;
  j["provenance"] = chart.provenance;
  json g = json::array();
  for (const auto& m : chart.g) {
    std::vector<double> e;
    for (int a = 0; a < chart.n; ++a) {
      for (int b = 0; b < chart.n; ++b) e.push_back(m(a, b));
    }
    g.push_back(e);
  }
  j["g"] = g;
  j["f"] = vec(chart.f);
  return j;
}

ChartMetric chart_from_json(const json& j) {
  if (j.contains("generator")) {
    const std::string gen = j.at("generator").get<std::string>();
    const json dens = j.contains("density") ? j.at("density") : json();
    if (gen == "flat_torus") {
      const int n = j.at("n").get<int>();
      const double length = get_or(j, "length", 2 * kPi);
      return flat_torus_chart(n, j.at("count").get<int>(), length, density_from_json(dens, n, length));
    }
    if (gen == "round_sphere_patch") {
      return round_sphere_patch(j.at("count").get<int>(), get_or(j, "half_width", 1.0), density_from_json(dens, 2, 0));
    }
    if (gen == "gaussian_density_plane") {
      return gaussian_density_plane(j.at("count").get<int>(), get_or(j, "half_width", 2.5));
    }
    if (gen == "spherical_band") {
      return spherical_band(j.at("n_theta").get<int>(), j.at("n_phi").get<int>(), get_or(j, "theta0", kPi / 4),
                            get_or(j, "theta1", 3 * kPi / 4), density_from_json(dens, 2, 0));
    }
    if (gen == "sphere_line_product") {
      return sphere_line_product(j.at("count").get<int>(), get_or(j, "half_width", 0.8), density_from_json(dens, 3, 0));
    }
    throw DomainError("unknown chart generator '" + gen + "'");
  }
  ChartMetric c;
  c.n = j.at("n").get<int>();
  if (c.n < 1 || c.n > 3) throw DomainError("chart JSON: n must be 1, 2 or 3");
  c.shape = j.at("shape").get<std::array<int, 3>>();
  c.origin = get_or(j, "origin", std::array<double, 3>{0, 0, 0});
  c.spacing = j.at("spacing").get<std::array<double, 3>>();
  c.periodic = get_or(j, "periodic", std::array<bool, 3>{false, false, false});
  c.provenance = get_or<std::string>(j, "provenance", "json");
  const auto& g = j.at("g");
  if (g.size() != c.nodes()) throw DomainError("chart JSON: metric array does not match the shape");
  c.g.resize(c.nodes());
  for (std::size_t p = 0; p < c.nodes(); ++p) {
    const auto e = g.at(p).get<std::vector<double>>();
    if (e.size() != static_cast<std::size_t>(c.n * c.n)) throw DomainError("chart JSON: metric entry has wrong size");
    c.g[p] = Eigen::Matrix3d::Identity();
    for (int a = 0; a < c.n; ++a) {
      for (int b = 0; b < c.n; ++b) c.g[p](a, b) = e[static_cast<std::size_t>(a * c.n + b)];
    }
  }
  c.f = j.contains("f") ? to_vector(j.at("f")) : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(c.nodes()));
  if (c.f.size() != static_cast<Eigen::Index>(c.nodes())) throw DomainError("chart JSON: density size mismatch");
  c.validate();
  return c;
}

Atlas atlas_from_json(const json& j) {
  if (j.contains("generator") && j.at("generator") == "sphere_atlas") {
    const json dens = j.contains("density") ? j.at("density") : json();
    return sphere_atlas(j.at("count").get<int>(), density_from_json(dens, 3, 0));
  }
  return torus_atlas(chart_from_json(j));
}

json to_json(const NdimReport& r) {
  return json{{"n", r.n},           {"r_lo", r.r_lo},
              {"r_hi", r.r_hi},     {"radii", r.radii},
              {"max_deviation", r.max_deviation}, {"tolerance", r.tolerance},
              {"pass", r.pass},     {"note", r.note}};
}

json to_json(const CertificateResult& r) {
  json worst = json::array();
  for (const auto& m : r.worst_margins) {
    worst.push_back({{"point", m.point}, {"eps", m.eps}, {"gamma", m.gamma}, {"margin", m.margin}, {"sigma", m.sigma}});
  }
  return json{{"n", r.n},
              {"kappa", r.kappa},
              {"verdict", r.pass},
              {"sc_radius", r.sc_radius},
              {"min_radius", r.min_radius},
              {"slack", r.slack},
              {"sigma_factor", r.sigma_factor},
              {"sampling", r.sampling},
              {"resolution", r.resolution},
              {"eps_grid", r.eps_grid},
              {"gamma_grid", r.gamma_grid},
              {"gamma_radius", r.gamma_radius},
              {"worst_margins", worst},
              {"comparisons", r.comparisons},
              {"violations", r.violations},
              {"inconclusive", r.inconclusive},
              {"note", r.note}};
}

json to_json(const LowerBoundEstimate& r) {
  json trace = json::array();
  for (const auto& [k, pass] : r.trace) trace.push_back({{"kappa", k}, {"pass", pass}});
  return json{{"kappa_hat", r.kappa_hat},
              {"nonneg_pass", r.nonneg_pass},
              {"kappa_floor", r.kappa_floor},
              {"evaluations", r.evaluations},
              {"trace", trace}};
}

json to_json(const BgReport& r) {
  json v = json::array();
  for (const auto& e : r.violations) {
    v.push_back({{"point", e.point}, {"r", e.r}, {"R", e.big_r}, {"ratio", e.ratio}, {"bound", e.bound},
                 {"sigma", e.sigma}});
  }
  return json{{"n", r.n},
              {"kappa", r.kappa},
              {"radii", r.radii},
              {"checked", r.checked},
              {"violation_count", r.violation_count},
              {"sigma_factor", r.sigma_factor},
              {"violations", v},
              {"consistent", r.consistent()}};
}

json to_json(const CdReport& r) {
  return json{{"n", r.n},
              {"kappa_cd", r.kappa_cd},
              {"certified_kappa", r.certified_kappa},
              {"slack", r.slack},
              {"ndim_pass", r.ndim_pass},
              {"bg_consistent", r.bg_consistent},
              {"preconditions_hold", r.preconditions_hold},
              {"conclusion_holds", r.conclusion_holds},
              {"bishop_gromov", to_json(r.bg)},
              {"certificate", to_json(r.certificate)}};
}

json to_json(const StabilityReport& r) {
  json steps = json::array();
  for (const auto& s : r.steps) {
    json infl = json::array();
    for (const auto& c : s.inflation) {
      infl.push_back({{"point", c.point},
                      {"preimage", c.preimage},
                      {"r", c.r},
                      {"gamma", c.gamma},
                      {"inclusion", c.inclusion},
                      {"member_measure", c.member_measure},
                      {"model_bound", c.model_bound},
                      {"sigma", c.sigma},
                      {"holds", c.holds}});
    }
    steps.push_back({{"epsilon", s.distortion.epsilon},
                     {"distortion", s.distortion.distortion},
                     {"surjectivity_defect", s.distortion.surjectivity_defect},
                     {"tv", s.tv},
                     {"sc_radius", s.sc_radius},
                     {"inflation", infl},
                     {"inflation_skipped", s.inflation_skipped},
                     {"inflation_holds", s.inflation_holds}});
  }
  return json{{"steps", steps},
              {"epsilon_nonincreasing", r.epsilon_nonincreasing},
              {"tv_decreasing", r.tv_decreasing},
              {"tv_nonincreasing", r.tv_nonincreasing},
              {"limit_certificate", to_json(r.limit_certificate)},
              {"radius_tolerance", r.radius_tolerance},
              {"limit_pass", r.limit_pass},
              {"inflation_all", r.inflation_all}};
}

json to_json(const ExpansionReport& r) {
  return json{{"deficit", r.deficit},
              {"predicted", r.predicted},
              {"relative_error", r.relative_error},
              {"r4_fit", r.fit.r4},
              {"predicted_r4", r.predicted_r4},
              {"condition", r.fit.condition},
              {"ill_conditioned", r.fit.ill_conditioned},
              {"radii", r.volumes.radii},
              {"volumes", r.volumes.volumes},
              {"ratios", r.volumes.ratios},
              {"richardson", r.volumes.richardson}};
}

json to_json(const ResidualReport& r) {
  return json{{"residual", r.residual}, {"max_abs", r.max_abs}, {"rhs_scale", r.rhs_scale}};
}

json to_json(const GaussBonnetReport& r) {
  return json{{"integral", r.integral},
              {"rhs", r.rhs},
              {"grad_integral", r.grad_integral},
              {"laplacian_integral", r.laplacian_integral},
              {"residual", r.residual}};
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw PreconditionError("invalid JSON in '" + path + "': " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw PreconditionError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw PreconditionError("cannot write '" + path + "'");
  for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
  out << '\n' << std::setprecision(17);
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << row[k];
    out << '\n';
  }
}

}  // namespace scurv
