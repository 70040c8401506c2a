#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "scurv/cli.hpp"
#include "scurv/errors.hpp"
#include "scurv/generators.hpp"
#include "scurv/io.hpp"

using namespace scurv;
namespace fs = std::filesystem;

namespace {

std::string config_path(const std::string& name) { return std::string(SCURV_CONFIG_DIR) + "/" + name; }

fs::path scratch_dir() {
  const fs::path p = fs::temp_directory_path() / "scurv_cli_tests";
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void check_same_space(const FiniteMMSpace& a, const FiniteMMSpace& b) {
  REQUIRE(a.size() == b.size());
  CHECK(a.dim_hint() == b.dim_hint());
  CHECK(a.sampling() == b.sampling());
  CHECK(a.mass() == b.mass());
  CHECK(distance_matrix(a) == distance_matrix(b));
  CHECK(a.resolution() == b.resolution());
}

ParsedArgs parse(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  args.insert(args.begin(), "scurv");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return parse_command_line(static_cast<int>(argv.size()), argv.data(), out, err);
}

int run_args(const std::vector<std::string>& args, std::string* stdout_text = nullptr) {
  std::ostringstream out, err;
  const ParsedArgs p = parse(args, out, err);
  const int code = p.done ? p.exit_code : run(p.config, out, err);
  if (stdout_text) *stdout_text = out.str();
  return code;
}

const json small_sphere = {{"generator", "sphere"}, {"n", 2}, {"count", 2000}, {"mode", "lattice"}, {"seed", 3}};

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("space JSON round trips") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.1, 1);
    Eigen::MatrixXd d(5, 5);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j <= i; ++j) d(i, j) = d(j, i) = i == j ? 0 : 1 + u(rng);
    const FiniteMMSpace dense(DenseMetric{d}, Eigen::VectorXd::LinSpaced(5, 0.3, 1.1), 2, Sampling::iid, 1.7);
    const auto a = sphere_sample(3, 2, 100, Sampling::stratified, 4);
    const auto t = flat_torus_grid({1.0, 2.0}, {5, 6});
    const std::vector<FiniteMMSpace> spaces{dense,
                                            a,
                                            t,
                                            hyperbolic_disk(1.2, 60),
                                            interval_grid(2, 9),
                                            scale_space(a, 0.5),
                                            product_space(interval_grid(1, 4), t),
                                            restrict_space(a, {1, 4, 9, 16})};
    for (const auto& s : spaces) {
      const json j = space_to_json(s);
      check_same_space(s, space_from_json(j));
      // Through text as well.
      check_same_space(s, space_from_json(json::parse(j.dump())));
    }
  }

  TEST_CASE("space generators") {
    check_same_space(space_from_json(small_sphere), sphere_sample(2, 1, 2000, Sampling::lattice, 3));
    const json torus = {{"generator", "flat_torus"}, {"n", 2}, {"count", 8}, {"length", 2.0}};
    check_same_space(space_from_json(torus), flat_torus_grid({2.0, 2.0}, {8, 8}));
    CHECK_THROWS_AS(space_from_json(json{{"generator", "klein_bottle"}}), DomainError);
  }

  TEST_CASE("chart JSON round trips") {
    const auto c = spherical_band(17, 32, 0.5, 2.6, [](const Eigen::Vector3d& x) { return 0.3 * std::cos(x(1)); });
    const auto back = chart_from_json(json::parse(chart_to_json(c).dump()));
    CHECK(back.n == c.n);
    CHECK(back.shape == c.shape);
    CHECK(back.origin == c.origin);
    CHECK(back.spacing == c.spacing);
    CHECK(back.periodic == c.periodic);
    CHECK(back.f == c.f);
    for (std::size_t p = 0; p < c.nodes(); ++p) REQUIRE(back.g[p] == c.g[p]);

    const json gen = {{"generator", "flat_torus"}, {"n", 2}, {"count", 16}, {"length", 3.0},
                      {"density", {{"kind", "gaussian"}}}};
    const auto g = chart_from_json(gen);
    const auto ref = flat_torus_chart(2, 16, 3.0, [](const Eigen::Vector3d& x) { return x.squaredNorm() / 4; });
    CHECK(g.f == ref.f);
    CHECK(chart_from_json({{"generator", "flat_torus"}, {"n", 3}, {"count", 8}}).f.cwiseAbs().maxCoeff() == 0);
    CHECK_THROWS_AS(density_from_json({{"kind", "mystery"}}, 2, 1.0), DomainError);
  }

  TEST_CASE("JSON files are written deterministically") {
    const json j = {{"zeta", 1}, {"alpha", {1.5, 2.25}}, {"mid", {{"b", true}, {"a", nullptr}}}};
    const auto p = scratch_dir() / "det.json";
    write_json_file(p.string(), j);
    const std::string first = slurp(p);
    write_json_file(p.string(), read_json_file(p.string()));
    CHECK(slurp(p) == first);
    CHECK(first.find("\"alpha\"") < first.find("\"zeta\""));
    CHECK(first.back() == '\n');
    CHECK_THROWS(read_json_file((scratch_dir() / "does_not_exist.json").string()));
  }

  TEST_CASE("commands and defaults") {
    const auto names = command_names();
    const std::vector<std::string> expected{"model-vol",  "ndim",          "certify",        "bg-check",     "cd-verify",
                                            "converge",   "curvature",     "conformal-check", "ball-expansion",
                                            "gauss-bonnet", "torus-scan",  "spectral",       "hypersurface"};
    CHECK(names == expected);
    for (const auto& n : names) CHECK(default_params(n).is_object());
    CHECK_THROWS_AS(default_params("nope"), PreconditionError);
  }

  TEST_CASE("command line parsing") {
    std::ostringstream out, err;
    const auto p = parse({"certify", "--space", "x.json", "--n", "3", "--kappa", "5.4", "--estimate", "-o", "r.json"}, out, err);
    REQUIRE_FALSE(p.done);
    CHECK(p.config.command == "certify");
    CHECK(p.config.params.at("n") == 3);
    CHECK(p.config.params.at("kappa") == 5.4);
    CHECK(p.config.params.at("estimate") == true);
    CHECK(p.config.params.at("space") == "x.json");
    CHECK(p.config.output == "r.json");
    CHECK_FALSE(p.config.params.contains("radius"));

    const auto cfg = scratch_dir() / "override.json";
    write_json_file(cfg.string(), {{"kappa", 2.0}, {"csv", "t.csv"}});
    const auto q = parse({"certify", "--kappa", "5.4", "--config", cfg.string()}, out, err);
    REQUIRE_FALSE(q.done);
    CHECK(q.config.params.at("kappa") == 2.0);
    CHECK(q.config.csv == "t.csv");

    const auto list = parse({"converge", "--steps", "[3, 4, 5]"}, out, err);
    REQUIRE_FALSE(list.done);
    CHECK(list.config.params.at("steps") == json::array({3, 4, 5}));
    const auto plain = parse({"converge", "--steps", "3,4,5"}, out, err);
    REQUIRE_FALSE(plain.done);
    CHECK(plain.config.params.at("steps") == json::array({3.0, 4.0, 5.0}));
    CHECK(parse({"certify", "--kappa", "5.4x"}, out, err).exit_code == kExitUsage);

    CHECK(parse({"certify", "--bogus", "1"}, out, err).exit_code == kExitUsage);
    CHECK(parse({}, out, err).exit_code == kExitUsage);
    CHECK(parse({"certify", "--n", "three"}, out, err).exit_code == kExitUsage);
    const auto help = parse({"--help"}, out, err);
    CHECK(help.done);
    CHECK(help.exit_code == kExitPass);
  }

  TEST_CASE("reports embed the resolved configuration") {
    const auto r = execute({"model-vol", {{"model", "product"}, {"n", 3}, {"gamma", 0.5}}, "", ""});
    CHECK(r.exit_code == kExitPass);
    CHECK(r.report.at("command") == "model-vol");
    CHECK(r.report.at("version") == kVersion);
    CHECK(r.report.at("config").at("gamma") == 0.5);
    CHECK(r.report.at("config").at("points") == 33);
    CHECK(r.report.at("exit_code") == 0);
    CHECK(r.csv_rows.size() == 33);
    CHECK_THROWS_AS(execute({"model-vol", {{"gama", 0.5}}, "", ""}), PreconditionError);
  }

  TEST_CASE("exit codes") {
    const std::string torus = config_path("torus2.json");
    CHECK(run_args({"torus-scan", "--chart", torus, "--alpha", "3", "--beta", "3"}) == kExitPass);
    CHECK(run_args({"certify", "--space", torus, "--n", "2", "--kappa", "1"}) == kExitFail);
    CHECK(run_args({"certify", "--n", "2"}) == kExitUsage);
    CHECK(run_args({"certify", "--space", config_path("missing.json")}) == kExitUsage);
    CHECK(run_args({"model-vol", "--model", "sphere", "--sec", "-1"}) == kExitUsage);
    CHECK(run_args({"spectral", "--chart", R"({"generator": "flat_torus", "n": 3, "count": 8})", "--potential", "0.3",
                    "--max-iterations", "1", "--tolerance", "1e-15"}) == kExitNumeric);
  }

  TEST_CASE("every command runs on a small input") {
    const json sphere = small_sphere;
    const json torus_chart = {{"generator", "flat_torus"}, {"n", 2}, {"count", 32}, {"length", 6.283185307179586},
                              {"density", {{"kind", "band_limited"}, {"max_mode", 1}, {"amplitude", 0.3}, {"seed", 5}}}};
    const json box = {{"generator", "flat_torus"}, {"n", 3}, {"count", 12}, {"length", 6.283185307179586}};
    const json patch = {{"generator", "round_sphere_patch"}, {"count", 33}, {"half_width", 1.0}};
    const json gauss = {{"generator", "gaussian_density_plane"}, {"count", 65}, {"half_width", 2.5}};
    struct Case {
      std::string command;
      json params;
      int code;
    };
    const std::vector<Case> cases{
        {"model-vol", {{"model", "sphere"}, {"n", 3}}, kExitPass},
        {"ndim", {{"space", sphere}}, kExitPass},
        {"certify", {{"space", sphere}, {"kappa", 1.8}, {"radius", 1.0}}, kExitPass},
        {"certify", {{"space", sphere}, {"kappa", 8.0}, {"radius", 1.0}}, kExitFail},
        {"bg-check", {{"space", sphere}, {"kappa", 1.0}}, kExitPass},
        {"cd-verify", {{"space", sphere}, {"kappa", 1.0}, {"radius", 1.0}}, kExitPass},
        {"converge", {{"n", 2}, {"count", 2000}, {"kappa", 1.5}, {"radius", 1.0}, {"steps", {3, 5}}}, kExitPass},
        {"curvature", {{"chart", torus_chart}}, kExitPass},
        {"conformal-check", {{"chart", torus_chart}}, kExitPass},
        {"conformal-check", {{"chart", box}, {"mode", "density"}}, kExitPass},
        {"ball-expansion", {{"chart", patch}, {"r_hi", 0.3}}, kExitPass},
        {"gauss-bonnet", {{"chart", {{"generator", "sphere_atlas"}, {"count", 65}}}}, kExitPass},
        {"gauss-bonnet", {{"chart", torus_chart}}, kExitPass},
        {"torus-scan", {{"chart", torus_chart}}, kExitPass},
        {"spectral", {{"chart", box}, {"potential", 0.8}, {"dense", true}}, kExitPass},
        {"spectral", {{"chart", box}}, kExitFail},
        {"hypersurface", {{"chart", gauss}, {"radius", 1.4142135623730951}}, kExitPass},
        {"hypersurface", {{"chart", gauss}, {"radius", 1.0}}, kExitFail},
        {"hypersurface", {{"chart", gauss}, {"radius", 1.0}, {"check", "stable"}}, kExitFail},
    };
    for (const auto& c : cases) {
      CAPTURE(c.command);
      CAPTURE(c.params.dump());
      std::ostringstream out, err;
      const int code = run({c.command, c.params, "", ""}, out, err);
      CHECK(code == c.code);
      CAPTURE(err.str());
      CHECK(json::parse(out.str()).at("exit_code") == code);
    }
  }

  TEST_CASE("file outputs are byte-identical across runs") {
    const auto dir = scratch_dir();
    const std::vector<std::vector<std::string>> invocations{
        {"model-vol", "--model", "product", "--n", "4"},
        {"torus-scan", "--chart", config_path("torus2.json")},
        {"hypersurface", "--chart", R"({"generator": "gaussian_density_plane", "count": 65, "half_width": 2.5})",
         "--radius", "1.4142135623730951"},
    };
    for (const auto& args : invocations) {
      std::vector<std::string> a = args;
      a.insert(a.end(), {"-o", (dir / "a.json").string(), "--csv", (dir / "a.csv").string()});
      std::vector<std::string> b = args;
      b.insert(b.end(), {"-o", (dir / "b.json").string(), "--csv", (dir / "b.csv").string()});
      const int ca = run_args(a);
      const int cb = run_args(b);
      CHECK(ca == cb);
      CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
      CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
      CHECK_FALSE(slurp(dir / "a.csv").empty());
    }
  }
}
