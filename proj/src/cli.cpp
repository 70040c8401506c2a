#include "scurv/cli.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>

#include "scurv/errors.hpp"
#include "scurv/generators.hpp"
#include "scurv/model_spaces.hpp"

namespace scurv {

namespace {

constexpr double kPi = std::numbers::pi;

enum class Kind { number, integer, text, flag, list, object };

struct OptionSpec {
  std::string name;
  Kind kind;
  json fallback;
  std::string help;
};

struct CommandSpec {
  std::string name;
  std::string help;
  std::vector<OptionSpec> options;
};

const std::vector<OptionSpec>& certifier_options() {
  static const std::vector<OptionSpec> opts{
      {"slack", Kind::number, 1e-6, "relative strictness slack"},
      {"sigma_factor", Kind::number, 2.0, "per-comparison noise band in sigmas"},
      {"familywise_alpha", Kind::number, 0.05, "family-wise level of the noise band (0 disables)"},
      {"grid_ratio", Kind::number, 1.15, "ratio of the radius grid"},
      {"gamma_points", Kind::integer, 32, "number of model radii gamma"},
      {"min_radius", Kind::number, 0.0, "required sc radius (0: the certified radius)"},
      {"ledger_size", Kind::integer, 16, "number of worst margins reported"},
  };
  return opts;
}

std::vector<CommandSpec> build_commands() {
  auto with_cert = [](std::vector<OptionSpec> v) {
    const auto& c = certifier_options();
    v.insert(v.end(), c.begin(), c.end());
    return v;
  };
  const OptionSpec space{"space", Kind::object, nullptr, "space JSON file or inline object"};
  const OptionSpec chart{"chart", Kind::object, nullptr, "chart JSON file or inline object"};
  return {
      {"model-vol",
       "ball volumes of a model space",
       {{"model", Kind::text, "sphere", "euclidean | sphere | product"},
        {"n", Kind::integer, 2, "dimension"},
        {"sec", Kind::number, 1.0, "sectional curvature of the sphere"},
        {"gamma", Kind::number, 1.0, "radius of the S^2 factor"},
        {"r_max", Kind::number, 0.0, "largest radius (0: diameter or 3)"},
        {"points", Kind::integer, 33, "number of radii"}}},
      {"ndim",
       "n-dimensional condition of a finite space",
       {space,
        {"n", Kind::integer, 0, "dimension (0: the space's hint)"},
        {"r_lo", Kind::number, 0.0, "smallest radius (0: twice the resolution)"},
        {"r_hi", Kind::number, 0.0, "largest radius (0: a quarter of the diameter)"},
        {"tolerance", Kind::number, 0.05, "allowed intercept deviation"}}},
      {"certify",
       "volumic scalar curvature certificate",
       with_cert({space,
                  {"n", Kind::integer, 0, "dimension (0: the space's hint)"},
                  {"kappa", Kind::number, 0.0, "lower bound to certify"},
                  {"radius", Kind::number, 0.0, "certified radius R (0: 0.45 of the diameter)"},
                  {"estimate", Kind::flag, false, "also estimate the largest certified bound"}})},
      {"bg-check",
       "generalized Bishop-Gromov ratio test",
       {space,
        {"n", Kind::integer, 0, "dimension (0: the space's hint)"},
        {"kappa", Kind::number, 0.0, "CD lower bound"},
        {"r_max", Kind::number, 0.0, "largest radius (0: automatic)"},
        {"sigma_factor", Kind::number, 2.0, "noise band in sigmas"},
        {"familywise_alpha", Kind::number, 0.05, "family-wise level of the band"}}},
      {"cd-verify",
       "CD(kappa, n) implies Sc^vol_n >= n kappa on a sample",
       with_cert({space,
                  {"n", Kind::integer, 0, "dimension (0: the space's hint)"},
                  {"kappa", Kind::number, 0.0, "CD lower bound"},
                  {"radius", Kind::number, 0.0, "certified radius (0: 0.45 of the diameter)"},
                  {"theorem_slack", Kind::number, 0.1, "certify n kappa (1 - slack)"}})},
      {"converge",
       "stability of certificates along a converging sequence",
       with_cert({{"generator", Kind::text, "sphere_perturbation", "sphere_perturbation | files"},
                  {"n", Kind::integer, 3, "sphere dimension"},
                  {"count", Kind::integer, 8000, "atoms of the limit sample"},
                  {"steps", Kind::list, json::array({3, 4, 5, 6, 7}), "perturbation indices i"},
                  {"seed", Kind::integer, 1, "sampling seed"},
                  {"limit", Kind::object, nullptr, "limit space (files mode)"},
                  {"sequence", Kind::object, nullptr, "array of member spaces (files mode)"},
                  {"kappa", Kind::number, 5.4, "certified bound"},
                  {"radius", Kind::number, 1.5, "certified radius"}})},
      {"curvature",
       "curvature fields and Sc_{alpha,beta} of a chart",
       {chart,
        {"alpha", Kind::number, 3.0, "Laplacian weight"},
        {"beta", Kind::number, 3.0, "gradient weight"}}},
      {"conformal-check",
       "conformal identities on a chart",
       {chart,
        {"mode", Kind::text, "cgy", "cgy | density"},
        {"w", Kind::object, json{{"kind", "band_limited"}, {"max_mode", 1}, {"amplitude", 0.18}, {"seed", 2}},
         "conformal factor spec (cgy mode)"},
        {"prefactor", Kind::text, "corrected", "density mode target: stated | corrected"},
        {"margin", Kind::integer, 3, "excluded boundary layers of open charts"},
        {"tolerance", Kind::number, 1e-3, "largest accepted residual"}}},
      {"ball-expansion",
       "weighted geodesic ball volumes and their r^2 coefficient",
       {chart,
        {"node", Kind::integer, -1, "center node (-1: chart center)"},
        {"r_lo", Kind::number, 0.05, "smallest fitted radius"},
        {"r_hi", Kind::number, 0.4, "largest radius"},
        {"quartic", Kind::flag, true, "fit an r^4 term as well"},
        {"steps", Kind::integer, 256, "RK4 steps"},
        {"angles", Kind::integer, 64, "azimuthal nodes"},
        {"polar", Kind::integer, 32, "polar Gauss nodes (n = 3)"},
        {"tolerance", Kind::number, 0.05, "largest accepted relative error"}}},
      {"gauss-bonnet",
       "weighted Gauss-Bonnet identity on a closed surface",
       {chart,
        {"alpha", Kind::number, 3.0, "Laplacian weight"},
        {"beta", Kind::number, 3.0, "gradient weight"},
        {"tolerance", Kind::number, 1e-3, "largest accepted residual"}}},
      {"torus-scan",
       "minimum of Sc_{alpha,beta} on a flat torus",
       {chart,
        {"alpha", Kind::number, 3.0, "Laplacian weight"},
        {"beta", Kind::number, 3.0, "gradient weight"},
        {"threshold", Kind::number, 1e-9, "the scan passes when min <= threshold"}}},
      {"spectral",
       "principal eigenvalue of the conformal Laplacian",
       {chart,
        {"potential", Kind::number, nullptr, "constant synthetic scalar curvature (default: Sc_g)"},
        {"dense", Kind::flag, false, "also run the dense eigensolver"},
        {"tolerance", Kind::number, 1e-8, "relative eigenvalue tolerance"},
        {"max_iterations", Kind::integer, 2000, "inverse iteration cap"}}},
      {"hypersurface",
       "weighted mean curvature and L_f stability of a closed hypersurface",
       {chart,
        {"kind", Kind::text, "circle", "circle | latitude | revolution"},
        {"center", Kind::list, json::array({0.0, 0.0, 0.0}), "center in chart coordinates"},
        {"radius", Kind::number, 1.0, "circle radius"},
        {"theta", Kind::number, kPi / 2, "latitude of a latitude curve"},
        {"major", Kind::number, 2.0, "major radius (revolution)"},
        {"minor", Kind::number, 0.5, "minor radius (revolution)"},
        {"count", Kind::integer, 128, "nodes along the first parameter"},
        {"count2", Kind::integer, 32, "nodes along the second parameter"},
        {"phase", Kind::number, 0.0, "parameter offset"},
        {"check", Kind::text, "fminimal", "fminimal | stable | none"},
        {"tolerance", Kind::number, 1e-6, "f-minimality tolerance"}}},
  };
}

const std::vector<CommandSpec>& commands() {
  static const std::vector<CommandSpec> c = build_commands();
  return c;
}

const CommandSpec& find_command(const std::string& name) {
  for (const auto& c : commands()) {
    if (c.name == name) return c;
  }
  throw PreconditionError("unknown command '" + name + "'");
}

std::string flag_name(const std::string& key) {
  std::string s = key;
  std::replace(s.begin(), s.end(), '_', '-');
  return "--" + s;
}

json parse_value(const OptionSpec& o, const std::string& text) {
  auto number = [&](const std::string& t) {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (t.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument("trailing characters");
    return v;
  };
  try {
    switch (o.kind) {
      case Kind::number: return number(text);
      case Kind::integer: {
        std::size_t used = 0;
        const long long v = std::stoll(text, &used);
        if (used != text.size()) throw std::invalid_argument("not an integer");
        return v;
      }
      case Kind::text: return text;
      case Kind::flag: return text != "false" && text != "0";
      case Kind::list: {
        // "[1, 2]" as JSON, or plain "1,2".
        if (!text.empty() && text.front() == '[') return json::parse(text);
        json arr = json::array();
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) arr.push_back(number(item));
        return arr;
      }
      case Kind::object: {
        // Inline JSON or a file path.
        if (!text.empty() && (text.front() == '{' || text.front() == '[')) return json::parse(text);
        return text;
      }
    }
  } catch (const std::exception& e) {
    throw PreconditionError("invalid value '" + text + "' for " + flag_name(o.name) + ": " + e.what());
  }
  return nullptr;
}

// ---- parameter access --------------------------------------------------

double num(const json& p, const char* key) {
  const json& v = p.at(key);
  if (!v.is_number()) throw PreconditionError(std::string("parameter '") + key + "' must be a number");
  return v.get<double>();
}

int integer(const json& p, const char* key) {
  const json& v = p.at(key);
  if (!v.is_number()) throw PreconditionError(std::string("parameter '") + key + "' must be an integer");
  return static_cast<int>(v.get<double>());
}

std::string text(const json& p, const char* key) { return p.at(key).get<std::string>(); }

json resolve_object(const json& v, const char* key) {
  if (v.is_null()) throw PreconditionError(std::string("missing required parameter '") + key + "'");
  if (v.is_string()) return read_json_file(v.get<std::string>());
  return v;
}

FiniteMMSpace load_space(const json& p) { return space_from_json(resolve_object(p.at("space"), "space")); }
ChartMetric load_chart(const json& p) { return chart_from_json(resolve_object(p.at("chart"), "chart")); }

CertifierConfig certifier_config(const json& p) {
  CertifierConfig c;
  c.slack = num(p, "slack");
  c.sigma_factor = num(p, "sigma_factor");
  c.familywise_alpha = num(p, "familywise_alpha");
  c.grid_ratio = num(p, "grid_ratio");
  c.gamma_points = integer(p, "gamma_points");
  c.min_radius = num(p, "min_radius");
  c.ledger_size = integer(p, "ledger_size");
  return c;
}

int space_dim(const json& p, const FiniteMMSpace& s) {
  const int n = integer(p, "n");
  return n > 0 ? n : s.dim_hint();
}

double default_radius(const json& p, const FiniteMMSpace& s) {
  const double r = num(p, "radius");
  return r > 0 ? r : 0.45 * s.max_distance();
}

// ---- commands ----------------------------------------------------------

RunOutcome cmd_model_vol(const json& p) {
  const std::string model = text(p, "model");
  const int n = integer(p, "n");
  ModelSpace m;
  if (model == "euclidean") {
    m = Euclidean{n};
  } else if (model == "sphere") {
    m = RoundSphere{n, num(p, "sec")};
  } else if (model == "product") {
    m = ProductS2xE{num(p, "gamma"), n};
  } else {
    throw PreconditionError("unknown model '" + model + "'");
  }
  validate(m);
  double r_max = num(p, "r_max");
  if (!(r_max > 0)) r_max = std::isfinite(diameter(m)) ? diameter(m) : 3.0;
  const int points = integer(p, "points");
  if (points < 2) throw PreconditionError("points must be at least 2");
  RunOutcome out;
  out.csv_header = {"r", "volume"};
  json table = json::array();
  for (int k = 0; k < points; ++k) {
    const double r = r_max * k / (points - 1);
    const double v = ball_volume(m, r);
    table.push_back({r, v});
    out.csv_rows.push_back({r, v});
  }
  out.report = {{"model", describe(m)}, {"scalar_curvature", scalar_curvature(m)}, {"table", table}};
  return out;
}

RunOutcome cmd_ndim(const json& p) {
  const FiniteMMSpace s = load_space(p);
  const int n = space_dim(p, s);
  double lo = num(p, "r_lo"), hi = num(p, "r_hi");
  if (!(lo > 0)) lo = 2 * s.resolution();
  if (!(hi > 0)) hi = 0.25 * s.max_distance();
  const NdimReport r = ndim_condition_fit(s, n, lo, hi, num(p, "tolerance"));
  RunOutcome out;
  out.report = to_json(r);
  out.exit_code = r.pass ? kExitPass : kExitFail;
  out.csv_header = {"r", "intercept"};
  for (std::size_t k = 0; k < r.intercepts.size() && k < r.radii.size(); ++k) out.csv_rows.push_back({r.radii[k], r.intercepts[k]});
  return out;
}

RunOutcome cmd_certify(const json& p) {
  const FiniteMMSpace s = load_space(p);
  const int n = space_dim(p, s);
  const double kappa = num(p, "kappa");
  const double big_r = default_radius(p, s);
  const CertifierConfig cfg = certifier_config(p);
  const CertificateResult c =
      kappa > 0 ? certify_kappa(s, n, kappa, big_r, cfg) : certify_nonneg(s, n, big_r, cfg);
  RunOutcome out;
  out.report = to_json(c);
  out.report["radius"] = big_r;
  if (p.at("estimate").get<bool>()) out.report["estimate"] = to_json(estimate_lower_bound(s, n, big_r, cfg));
  out.exit_code = c.pass ? kExitPass : kExitFail;
  out.csv_header = {"gamma", "margin"};
  for (const auto& m : c.worst_margins) out.csv_rows.push_back({m.gamma, m.margin});
  return out;
}

RunOutcome cmd_bg(const json& p) {
  const FiniteMMSpace s = load_space(p);
  const int n = space_dim(p, s);
  BgConfig cfg;
  cfg.r_max = num(p, "r_max");
  cfg.sigma_factor = num(p, "sigma_factor");
  cfg.familywise_alpha = num(p, "familywise_alpha");
  const BgReport r = bishop_gromov_check(s, n, num(p, "kappa"), cfg);
  RunOutcome out;
  out.report = to_json(r);
  out.exit_code = r.consistent() ? kExitPass : kExitFail;
  out.csv_header = {"r", "R", "ratio", "bound"};
  for (const auto& v : r.violations) out.csv_rows.push_back({v.r, v.big_r, v.ratio, v.bound});
  return out;
}

RunOutcome cmd_cd(const json& p) {
  const FiniteMMSpace s = load_space(p);
  const int n = space_dim(p, s);
  const CdReport r = verify_cd_theorem(s, n, num(p, "kappa"), default_radius(p, s), num(p, "theorem_slack"),
                                       certifier_config(p));
  RunOutcome out;
  out.report = to_json(r);
  out.exit_code = r.preconditions_hold && r.conclusion_holds ? kExitPass : kExitFail;
  out.csv_header = {"gamma", "margin"};
  for (const auto& m : r.certificate.worst_margins) out.csv_rows.push_back({m.gamma, m.margin});
  return out;
}

RunOutcome cmd_converge(const json& p) {
  const std::string gen = text(p, "generator");
  std::vector<FiniteMMSpace> seq;
  std::vector<std::vector<int>> maps;
  std::optional<FiniteMMSpace> limit;
  if (gen == "sphere_perturbation") {
    limit = sphere_sample(integer(p, "n"), 1.0, integer(p, "count"), Sampling::stratified,
                          static_cast<std::uint64_t>(integer(p, "seed")));
    for (const auto& iv : p.at("steps")) {
      const double i = iv.get<double>();
      if (!(i > 1)) throw PreconditionError("perturbation indices must exceed 1");
      Eigen::VectorXd m = limit->mass();
      for (Eigen::Index k = 0; k < m.size(); ++k) m(k) *= 1 + (k % 2 == 0 ? 1.0 : -1.0) / i;
      seq.emplace_back(limit->metric(), m, limit->dim_hint(), limit->sampling(), limit->scale(),
                       "perturbed 1/" + std::to_string(static_cast<int>(i)));
    }
  } else if (gen == "files") {
    limit = space_from_json(resolve_object(p.at("limit"), "limit"));
    const json list = resolve_object(p.at("sequence"), "sequence");
    for (const auto& item : list) seq.push_back(space_from_json(item.is_string() ? read_json_file(item) : item));
  } else {
    throw PreconditionError("unknown converge generator '" + gen + "'");
  }
  std::vector<int> identity(limit->size());
  for (std::size_t k = 0; k < identity.size(); ++k) identity[k] = static_cast<int>(k);
  for (const auto& s : seq) {
    if (s.size() != limit->size()) throw PreconditionError("members and limit must share atoms for identity maps");
    maps.push_back(identity);
  }
  StabilityConfig cfg;
  cfg.certifier = certifier_config(p);
  const StabilityReport r = stability_experiment(seq, maps, *limit, integer(p, "n"), num(p, "kappa"), num(p, "radius"), cfg);
  RunOutcome out;
  out.report = to_json(r);
  out.exit_code = r.limit_pass && r.tv_nonincreasing && r.inflation_all ? kExitPass : kExitFail;
  out.csv_header = {"step", "epsilon", "tv"};
  for (std::size_t k = 0; k < r.steps.size(); ++k) {
    out.csv_rows.push_back({static_cast<double>(k), r.steps[k].distortion.epsilon, r.steps[k].tv});
  }
  return out;
}

json field_summary(const ChartMetric& c, const CurvatureFields& cf, const Eigen::VectorXd& v) {
  return {{"min", v.minCoeff()}, {"max", v.maxCoeff()}, {"mean", v.mean()}, {"integral", integrate(c, cf, v)}};
}

RunOutcome cmd_curvature(const json& p) {
  const ChartMetric c = load_chart(p);
  const CurvatureFields cf = curvature_fields(c);
  const Eigen::VectorXd sab = weighted_scalar_curvature(cf, num(p, "alpha"), num(p, "beta"));
  RunOutcome out;
  out.report = {{"n", c.n},
                {"nodes", c.nodes()},
                {"provenance", c.provenance},
                {"scalar", field_summary(c, cf, cf.scalar)},
                {"weighted_scalar", field_summary(c, cf, sab)},
                {"laplacian_f", field_summary(c, cf, cf.lap_f)},
                {"grad_f_norm2", field_summary(c, cf, cf.grad_norm2)}};
  out.csv_header = {"node", "scalar", "weighted_scalar"};
  for (std::size_t k = 0; k < c.nodes(); ++k) {
    out.csv_rows.push_back({static_cast<double>(k), cf.scalar(static_cast<Eigen::Index>(k)), sab(static_cast<Eigen::Index>(k))});
  }
  return out;
}

RunOutcome cmd_conformal(const json& p) {
  const ChartMetric c = load_chart(p);
  const std::string mode = text(p, "mode");
  const double tol = num(p, "tolerance");
  RunOutcome out;
  if (mode == "cgy") {
    const json wspec = p.at("w");
    const double length = c.closed() ? c.shape[0] * c.spacing[0] : 2 * kPi;
    const ScalarFn wf = density_from_json(wspec, c.n, length);
    const Eigen::VectorXd w = wf ? sample_field(c, wf) : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(c.nodes()));
    const ResidualReport r = cgy_invariance_residual(c, w, integer(p, "margin"));
    out.report = {{"mode", mode}, {"cgy", to_json(r)}};
    out.exit_code = r.max_abs <= tol ? kExitPass : kExitFail;
  } else if (mode == "density") {
    const ConformalDensityReport r = conformal_metric_from_density(c, integer(p, "margin"));
    const std::string pref = text(p, "prefactor");
    if (pref != "stated" && pref != "corrected") throw PreconditionError("prefactor must be stated or corrected");
    const ResidualReport& used = pref == "stated" ? r.stated : r.corrected;
    out.report = {{"mode", mode}, {"prefactor", pref}, {"stated", to_json(r.stated)}, {"corrected", to_json(r.corrected)}};
    out.exit_code = used.max_abs <= tol ? kExitPass : kExitFail;
  } else {
    throw PreconditionError("unknown conformal-check mode '" + mode + "'");
  }
  return out;
}

RunOutcome cmd_ball(const json& p) {
  const ChartMetric c = load_chart(p);
  int node = integer(p, "node");
  if (node < 0) node = c.index(c.shape[0] / 2, c.shape[1] / 2, c.shape[2] / 2);
  GeodesicConfig g;
  g.steps = integer(p, "steps");
  g.angles = integer(p, "angles");
  g.polar = integer(p, "polar");
  const ExpansionReport r = volume_expansion_fit(c, node, num(p, "r_lo"), num(p, "r_hi"), p.at("quartic").get<bool>(), g);
  RunOutcome out;
  out.report = to_json(r);
  out.report["node"] = node;
  out.exit_code = r.relative_error <= num(p, "tolerance") && !r.fit.ill_conditioned ? kExitPass : kExitFail;
  out.csv_header = {"r", "volume", "ratio"};
  for (std::size_t k = 0; k < r.volumes.radii.size(); ++k) {
    out.csv_rows.push_back({r.volumes.radii[k], r.volumes.volumes[k], r.volumes.ratios[k]});
  }
  return out;
}

RunOutcome cmd_gauss_bonnet(const json& p) {
  const Atlas atlas = atlas_from_json(resolve_object(p.at("chart"), "chart"));
  const GaussBonnetReport r = gauss_bonnet_weighted_check(atlas, num(p, "alpha"), num(p, "beta"));
  RunOutcome out;
  out.report = to_json(r);
  out.report["euler_characteristic"] = atlas.euler_characteristic;
  out.exit_code = r.residual <= num(p, "tolerance") ? kExitPass : kExitFail;
  return out;
}

RunOutcome cmd_torus(const json& p) {
  const ChartMetric c = load_chart(p);
  const double m = torus_obstruction_scan(c, num(p, "alpha"), num(p, "beta"));
  RunOutcome out;
  out.report = {{"min_weighted_scalar", m}, {"obstructed", m <= num(p, "threshold")}};
  out.exit_code = m <= num(p, "threshold") ? kExitPass : kExitFail;
  return out;
}

RunOutcome cmd_spectral(const json& p) {
  const ChartMetric c = load_chart(p);
  std::optional<Eigen::VectorXd> pot;
  if (!p.at("potential").is_null()) pot = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(c.nodes()), num(p, "potential"));
  EigenConfig ec;
  ec.tolerance = num(p, "tolerance");
  ec.max_iterations = integer(p, "max_iterations");
  const ConformalSpectrum r = conformal_laplacian_min_eig(c, pot, ec);
  RunOutcome out;
  out.report = {{"lambda1", r.eig.lambda},
                {"iterations", r.eig.iterations},
                {"residual", r.eig.residual},
                {"operator_norm", r.eig.operator_norm},
                {"positive", r.positive},
                {"inconclusive", r.inconclusive}};
  out.csv_header = {"mode", "eigenvalue"};
  out.csv_rows.push_back({0.0, r.eig.lambda});
  if (p.at("dense").get<bool>()) {
    const Eigen::VectorXd spec = dense_spectrum(conformal_laplacian(c, pot));
    out.report["dense_lambda1"] = spec(0);
    out.csv_rows.clear();
    for (Eigen::Index k = 0; k < spec.size(); ++k) out.csv_rows.push_back({static_cast<double>(k), spec(k)});
  }
  out.exit_code = r.positive ? kExitPass : kExitFail;
  return out;
}

RunOutcome cmd_hypersurface(const json& p) {
  auto c = std::make_shared<const ChartMetric>(load_chart(p));
  const std::string kind = text(p, "kind");
  auto center = p.at("center").get<std::vector<double>>();
  center.resize(3, 0.0);
  const int count = integer(p, "count");
  DiscreteHypersurface s;
  if (kind == "circle") {
    s = circle_hypersurface(c, {center[0], center[1]}, num(p, "radius"), count, num(p, "phase"));
  } else if (kind == "latitude") {
    s = latitude_hypersurface(c, num(p, "theta"), count, num(p, "phase"));
  } else if (kind == "revolution") {
    s = torus_of_revolution(c, {center[0], center[1], center[2]}, num(p, "major"), num(p, "minor"),
                            {count, integer(p, "count2")});
  } else {
    throw PreconditionError("unknown hypersurface kind '" + kind + "'");
  }
  const double res = f_minimal_residual(s);
  const StabilityIndex idx = lf_stability_index(s);
  const std::string check = text(p, "check");
  RunOutcome out;
  out.report = {{"kind", kind},
                {"nodes", s.nodes()},
                {"f_minimal_residual", res},
                {"mean_curvature_max", s.mean_curvature.cwiseAbs().maxCoeff()},
                {"index", idx.index},
                {"strict_index", idx.strict_index},
                {"near_kernel", idx.near_kernel},
                {"kernel_band", idx.kernel_band},
                {"lowest_eigenvalues", std::vector<double>(idx.spectrum.data(),
                                                           idx.spectrum.data() + std::min<Eigen::Index>(8, idx.spectrum.size()))}};
  out.csv_header = {"mode", "eigenvalue"};
  for (Eigen::Index k = 0; k < idx.spectrum.size(); ++k) out.csv_rows.push_back({static_cast<double>(k), idx.spectrum(k)});
  if (check == "fminimal") {
    out.exit_code = res <= num(p, "tolerance") ? kExitPass : kExitFail;
  } else if (check == "stable") {
    out.exit_code = idx.stable() ? kExitPass : kExitFail;
  } else if (check != "none") {
    throw PreconditionError("check must be fminimal, stable or none");
  }
  return out;
}

using Handler = RunOutcome (*)(const json&);

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> h{
      {"model-vol", cmd_model_vol},   {"ndim", cmd_ndim},
      {"certify", cmd_certify},       {"bg-check", cmd_bg},
      {"cd-verify", cmd_cd},          {"converge", cmd_converge},
      {"curvature", cmd_curvature},   {"conformal-check", cmd_conformal},
      {"ball-expansion", cmd_ball},   {"gauss-bonnet", cmd_gauss_bonnet},
      {"torus-scan", cmd_torus},      {"spectral", cmd_spectral},
      {"hypersurface", cmd_hypersurface},
  };
  return h;
}

}  // namespace

std::vector<std::string> command_names() {
  std::vector<std::string> out;
  for (const auto& c : commands()) out.push_back(c.name);
  return out;
}

json default_params(const std::string& command) {
  json p = json::object();
  for (const auto& o : find_command(command).options) p[o.name] = o.fallback;
  return p;
}

RunOutcome execute(const ExperimentConfig& config) {
  const CommandSpec& spec = find_command(config.command);
  json params = default_params(config.command);
  for (const auto& [key, value] : config.params.items()) {
    if (!params.contains(key)) throw PreconditionError("unknown parameter '" + key + "' for " + spec.name);
    params[key] = value;
  }
  RunOutcome out = handlers().at(spec.name)(params);
  json report;
  report["command"] = spec.name;
  report["config"] = params;
  report["version"] = kVersion;
  report["result"] = out.report;
  report["exit_code"] = out.exit_code;
  out.report = report;
  return out;
}

int run(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  try {
    const RunOutcome r = execute(config);
    if (config.output.empty()) {
      out << r.report.dump(2) << '\n';
    } else {
      write_json_file(config.output, r.report);
    }
    if (!config.csv.empty()) write_csv(config.csv, r.csv_header, r.csv_rows);
    return r.exit_code;
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ResourceError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const json::exception& e) {
    err << "error: malformed input: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  }
}

ParsedArgs parse_command_line(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  ParsedArgs parsed;
  CLI::App app{"Synthetic and weighted scalar curvature toolkit", "scurv"};
  app.require_subcommand(1);
  std::map<std::string, std::map<std::string, std::string>> values;
  std::map<std::string, std::map<std::string, bool>> flags;
  std::map<std::string, std::string> config_file, output, csv;
  for (const auto& spec : commands()) {
    CLI::App* sub = app.add_subcommand(spec.name, spec.help);
    for (const auto& o : spec.options) {
      if (o.kind == Kind::flag) {
        sub->add_flag(flag_name(o.name), flags[spec.name][o.name], o.help);
      } else {
        sub->add_option(flag_name(o.name), values[spec.name][o.name], o.help);
      }
    }
    sub->add_option("--config", config_file[spec.name], "JSON file whose fields override the flags");
    sub->add_option("-o,--output", output[spec.name], "report path (default: standard output)");
    sub->add_option("--csv", csv[spec.name], "table path");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    parsed.done = true;
    parsed.exit_code = app.exit(e, out, err) == 0 ? kExitPass : kExitUsage;
    return parsed;
  }
  for (const auto& spec : commands()) {
    CLI::App* sub = app.get_subcommand(spec.name);
    if (!sub->parsed()) continue;
    ExperimentConfig& c = parsed.config;
    c.command = spec.name;
    c.params = json::object();
    for (const auto& o : spec.options) {
      if (sub->count(flag_name(o.name)) == 0) continue;
      if (o.kind == Kind::flag) {
        c.params[o.name] = flags[spec.name][o.name];
      } else {
        try {
          c.params[o.name] = parse_value(o, values[spec.name][o.name]);
        } catch (const PreconditionError& e) {
          err << "error: " << e.what() << '\n';
          parsed.done = true;
          parsed.exit_code = kExitUsage;
          return parsed;
        }
      }
    }
    c.output = output[spec.name];
    c.csv = csv[spec.name];
    if (!config_file[spec.name].empty()) {
      try {
        const json file = read_json_file(config_file[spec.name]);
        if (!file.is_object()) throw PreconditionError("config must be a JSON object");
        for (const auto& [key, value] : file.items()) {
          if (key == "output") {
            c.output = value.get<std::string>();
          } else if (key == "csv") {
            c.csv = value.get<std::string>();
          } else {
            c.params[key] = value;
          }
        }
      } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        parsed.done = true;
        parsed.exit_code = kExitUsage;
        return parsed;
      }
    }
  }
  return parsed;
}

int cli_main(int argc, const char* const* argv) {
  const ParsedArgs parsed = parse_command_line(argc, argv, std::cout, std::cerr);
  if (parsed.done) return parsed.exit_code;
  return run(parsed.config, std::cout, std::cerr);
}

}  // namespace scurv
