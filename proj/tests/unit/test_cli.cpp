#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gwtails/cli.hpp"
#include "gwtails/error.hpp"

using namespace gwtails;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir()
{
    const fs::path dir = fs::temp_directory_path() / "gwtails_cli_test";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

ExperimentConfig parse(std::vector<std::string> args)
{
    std::ostringstream out;
    auto c = parse_command_line(args, out);
    REQUIRE(c.has_value());
    return *c;
}

int run_cli(std::vector<std::string> args, std::string* err_text = nullptr)
{
    std::ostringstream out, err;
    const int code = cli_main(args, out, err);
    if (err_text) *err_text = err.str();
    return code;
}

}  // namespace

TEST_CASE("flags populate the config")
{
    const auto c = parse({"estimate", "--law", "pareto(alpha=2,scale=1)", "--n", "5", "--x", "100"});
    CHECK(c.subcommand == Subcommand::Estimate);
    CHECK(c.law == "pareto(alpha=2,scale=1)");
    CHECK(c.n == std::vector<Horizon>{5});
    CHECK(c.x == std::vector<double>{100.0});
    CHECK(c.seed == 0);

    const auto g = parse({"approximate", "--law", "pareto(alpha=2)", "--x-geo", "50,2,8", "--n", "3,inf", "--method",
                          "weibull"});
    CHECK(g.resolved_x() == std::vector<double>{50, 100, 200, 400, 800, 1600, 3200, 6400});
    CHECK(g.n == std::vector<Horizon>{3, std::nullopt});
    CHECK(g.approx == "weibull");
}

TEST_CASE("malformed input is reported with position")
{
    auto c = parse({"estimate", "--law", "pareto(alpha=2,, scale=1)", "--x", "10"});
    try {
        validate_config(c);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.token() == ",");
        CHECK(e.column() == 16);
    }

    try {
        parse_config_json("{\n  \"law\": \"pareto(alpha=2)\",\n  oops\n}");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(e.column() == 3);
    }
    try {
        parse_config_json(R"j({"law": "pareto(alpha=2)", "colour": 1})j");
        FAIL("expected UnknownField");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnknownField);
    }
    CHECK_THROWS_AS(parse({"estimate", "--x", "1,abc"}), ParseError);
}

TEST_CASE("config JSON round trip")
{
    ExperimentConfig c;
    c.subcommand = Subcommand::Bound;
    c.law = "tuned(weibull(beta=0.3), m=2)";
    c.n = {2, 5, std::nullopt};
    c.x = {0.1, 1.0 / 3.0, 1e6};
    c.x_geo = GeometricGridSpec{10.0, 1.5, 7};
    c.replicas = 123456;
    c.seed = 18446744073709551615ull;
    c.workers = 3;
    c.eps = 0.125;
    c.method = "23";
    c.track_x = 42.0;
    c.track_eps = 0.2;
    c.shift = "2m";
    c.y = 0.7;
    c.lambda = 1e-3;
    c.check = "sstar";
    CHECK(parse_config_json(config_to_json(c)) == c);
    CHECK(parse_config_json(config_to_json(ExperimentConfig{})) == ExperimentConfig{});
}

TEST_CASE("flags override config file fields")
{
    const auto path = scratch_dir() / "base.json";
    std::ofstream(path) << R"j({"law": "pareto(alpha=3)", "replicas": 77, "x": [1, 2], "seed": 5})j";
    const auto c = parse({"estimate", "--config", path.string(), "--replicas", "99"});
    CHECK(c.law == "pareto(alpha=3)");
    CHECK(c.replicas == 99);
    CHECK(c.x == std::vector<double>{1, 2});
    CHECK(c.seed == 5);
}

TEST_CASE("GWTAILS_SEED overrides the default seed only")
{
    ::setenv("GWTAILS_SEED", "1234", 1);
    CHECK(parse({"estimate"}).seed == 1234);
    CHECK(parse({"estimate", "--seed", "9"}).seed == 9);
    ::unsetenv("GWTAILS_SEED");
    CHECK(parse({"estimate"}).seed == 0);
}

TEST_CASE("help prints and returns nothing")
{
    std::ostringstream out;
    CHECK_FALSE(parse_command_line({"--help"}, out).has_value());
    CHECK(out.str().find("--law") != std::string::npos);
}

TEST_CASE("exit codes")
{
    const auto dir = scratch_dir();
    const std::string out = (dir / "exact.csv").string();
    CHECK(run_cli({"estimate", "--law", "finite(0:0.25, 2:0.75)", "--n", "2", "--x", "0.88888888888888884",
                   "--method", "exact", "--out", out}) == 0);
    const std::string body = slurp(out);
    CHECK(body.find("2,0.88888888888888884,exact,0.421875,") != std::string::npos);
    CHECK(fs::exists(out + ".manifest.json"));

    std::string err;
    CHECK(run_cli({"estimate", "--law", "pareto(alpha=0.5)", "--x", "10", "--out", out}, &err) == 2);
    CHECK(err.find("alpha") != std::string::npos);
    CHECK(run_cli({"estimate", "--law", "pareto(alpha=2", "--x", "10", "--out", out}) == 2);
    CHECK(run_cli({"estimate", "--law", "finite(0:0.5, 2:0.5)", "--x", "10", "--out", out}) == 2);
    CHECK(run_cli({"estimate", "--law", "pareto(alpha=2)", "--x", "10,5", "--out", out}) == 2);
    CHECK(run_cli({"frobnicate"}) == 2);
    // lambda * y beyond the exponent range is a numeric failure
    CHECK(run_cli({"bound", "--law", "tuned(pareto(alpha=3), m=2)", "--shift", "2m", "--prop", "chebyshev", "--n", "4",
                   "--x", "200", "--y", "100", "--lambda", "10", "--out", out}) == 3);
}

TEST_CASE("explicit lambda works beyond the summand support")
{
    const auto dir = scratch_dir();
    const std::string out = (dir / "cheb.csv").string();
    REQUIRE(run_cli({"bound", "--law", "finite(0:0.25, 2:0.75)", "--prop", "chebyshev", "--shift", "m", "--n", "5",
                     "--x", "4", "--y", "2", "--lambda", "0.5", "--out", out}) == 0);
    const std::string body = slurp(out);
    // eta = xi - 1.5 never exceeds y = 2: no jump term, full mgf
    const auto row = body.substr(body.find('\n') + 1);
    CHECK(row.rfind("5,4,chebyshev,", 0) == 0);
    const double expect = std::exp(-2.0) * std::pow(0.25 * std::exp(-0.75) + 0.75 * std::exp(0.25), 5);
    const double bound = std::stod(row.substr(14));
    CHECK(bound == doctest::Approx(expect).epsilon(1e-12));
    CHECK(row.find("," + format_real(bound) + ",0," + format_real(bound) + ",0.5,2,") != std::string::npos);
}

TEST_CASE("equal manifests give byte-identical CSV bodies")
{
    const auto dir = scratch_dir();
    const std::vector<std::string> base{"estimate", "--law", "tuned(pareto(alpha=2), m=2)", "--n", "3", "--x",
                                        "5,10", "--replicas", "20000", "--seed", "42", "--workers", "2"};
    auto a = base, b = base;
    a.insert(a.end(), {"--out", (dir / "a.csv").string()});
    b.insert(b.end(), {"--out", (dir / "b.csv").string()});
    REQUIRE(run_cli(a) == 0);
    REQUIRE(run_cli(b) == 0);
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));

    const auto manifest = nlohmann::json::parse(slurp(dir / "a.csv.manifest.json"));
    CHECK(manifest["seed"] == 42);
    CHECK(manifest["config"]["replicas"] == 20000);
    CHECK(manifest.contains("wall_time_seconds"));
    CHECK(manifest["versions"]["gwtails"] == kVersion);
}

TEST_CASE("every subcommand runs")
{
    const auto dir = scratch_dir();
    auto out = [&](const char* name) { return (dir / name).string(); };
    CHECK(run_cli({"simulate", "--law", "tuned(pareto(alpha=2), m=2)", "--n", "4", "--replicas", "10",
                   "--track-events", "x=5,eps=0.1", "--out", out("traj.csv")}) == 0);
    const auto traj = slurp(out("traj.csv"));
    CHECK(traj.rfind("replica,k,Z_k,W_k,max_offspring,b_k,a_k\n", 0) == 0);
    CHECK(std::count(traj.begin(), traj.end(), '\n') == 1 + 10 * 5);

    CHECK(run_cli({"estimate", "--law", "tuned(pareto(alpha=2), m=2)", "--n", "3", "--x", "100", "--method",
                   "bigjump", "--replicas", "2000", "--out", out("bj.csv")}) == 0);
    CHECK(slurp(out("bj.csv")).find("breakdown_k2") != std::string::npos);

    CHECK(run_cli({"approximate", "--law", "logcorr(p=2, x0=3)", "--method", "index_one", "--n", "inf", "--x",
                   "1000,10000", "--out", out("approx.csv")}) == 0);
    CHECK(run_cli({"diagnose", "--law", "tuned(weibull(beta=0.3), m=2)", "--check", "all",
                   "--out", out("report.json")}) == 0);
    const auto report = nlohmann::json::parse(slurp(out("report.json")));
    CHECK(report["reports"].size() == 8);
    CHECK(report["regime"]["regime"] == "Weibull_principal");

    CHECK(run_cli({"bound", "--law", "tuned(pareto(alpha=3), m=2)", "--prop", "22", "--eps", "0.5", "--n", "10",
                   "--x", "100,200", "--out", out("bounds.csv")}) == 0);
    CHECK(run_cli({"compare", "--law", "tuned(pareto(alpha=2), m=2)", "--n", "3", "--x", "50,100", "--method",
                   "bigjump", "--approx", "series", "--replicas", "1000", "--out", out("cmp.csv")}) == 0);
    CHECK(slurp(out("cmp.csv")).find("ratio") != std::string::npos);
}
