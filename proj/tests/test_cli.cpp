#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pwsde/config.hpp"
#include "pwsde/errors.hpp"
#include "pwsde/problems.hpp"
#include "pwsde/rng.hpp"
#include "pwsde/run.hpp"
#include "pwsde/transform.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace pwsde;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "pwsde_test_cli" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<std::string> read_lines(const fs::path& p) {
    std::ifstream f(p);
    std::vector<std::string> out;
    for (std::string line; std::getline(f, line);) out.push_back(line);
    return out;
}

std::vector<double> split_numbers(const std::string& line) {
    std::vector<double> out;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) out.push_back(std::stod(cell));
    return out;
}

}  // namespace

TEST_CASE("registry lookups") {
    const SdeProblem circle = problems::lookup("circle2d");
    REQUIRE(circle.surface);
    CHECK(std::holds_alternative<Sphere>(circle.surface->shape()));
    CHECK(circle.surface->reach() == 1.0);
    CHECK(circle.dim == 2);

    const SdeProblem gbm = problems::lookup("gbm1d");
    CHECK_FALSE(gbm.surface);
    CHECK(build_transform(gbm).is_identity());

    const SdeProblem step = problems::lookup("step1d");
    CHECK(alpha_surface(step, *step.surface, Vec::Zero(1))[0] == doctest::Approx(1.0));

    try {
        problems::lookup("typo2d");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("did you mean") != std::string::npos);
        CHECK(msg.find("circle2d") != std::string::npos);
        CHECK(msg.find("registered") != std::string::npos);
    }
}

TEST_CASE("delta grammar") {
    const auto range = parse_deltas("2^-6..2^-8");
    REQUIRE(range.size() == 3);
    CHECK(range[0] == 0x1p-6);
    CHECK(range[2] == 0x1p-8);
    CHECK(parse_deltas("2^-8..2^-6").size() == 3);
    CHECK(parse_deltas("2^-3")[0] == 0.125);
    const auto mixed = parse_deltas("0.5, 2^-2,0.0625");
    REQUIRE(mixed.size() == 3);
    CHECK(mixed[1] == 0.25);
    CHECK_THROWS_AS(parse_deltas("2^-a..2^-3"), ConfigError);
    CHECK_THROWS_AS(parse_deltas("-0.5"), ConfigError);
    CHECK_THROWS_AS(parse_deltas("0.5,,0.25"), ConfigError);
}

TEST_CASE("surface grammar") {
    const auto sphere = parse_surface("sphere(0,0;1)");
    CHECK(std::holds_alternative<Sphere>(sphere.shape()));
    CHECK(sphere.reach() == 1.0);
    CHECK(parse_surface("sphere(1,2,0.5)").signed_distance((Vec(2) << 1, 2).finished()) == -0.5);
    const auto plane = parse_surface("hyperplane(0,2;4)");
    CHECK(plane.signed_distance((Vec(2) << 7, 3).finished()) == doctest::Approx(1.0));
    const auto points = parse_surface("pointset1d(-1, 0.5, 2)");
    CHECK(points.reach() == 0.75);
    CHECK(parse_surface(points.describe()).describe() == points.describe());
    CHECK_THROWS_AS(parse_surface("torus(1,2)"), ConfigError);
    CHECK_THROWS_AS(parse_surface("sphere(1)"), ConfigError);
    CHECK_THROWS_AS(parse_surface("pointset1d(1,0)"), ConfigError);
    CHECK_THROWS_AS(parse_surface("sphere 0,0;1"), ConfigError);
}

TEST_CASE("parse_config reads keys, comments and reports line numbers") {
    const ExperimentConfig c = parse_config(
        "# experiment\n"
        "command = occupation\n"
        "problem = step1d   # inline comment\n"
        "\n"
        "scheme=gm\n"
        "deltas = 2^-4..2^-6\n"
        "paths = 12\n"
        "seed = 99\n"
        "ref-levels = 9\n"
        "eps = 0.1, 0.2\n"
        "initial = 0.3\n"
        "horizon = 0.5\n"
        "surface = pointset1d(0)\n");
    CHECK(c.command == Command::occupation);
    CHECK(c.problem == "step1d");
    CHECK(c.scheme == SchemeChoice::gm);
    CHECK(c.deltas.size() == 3);
    CHECK(c.paths == 12);
    CHECK(c.seed == 99);
    CHECK(c.ref_levels == 9);
    CHECK(c.eps == std::vector<double>{0.1, 0.2});
    CHECK(c.initial == std::vector<double>{0.3});
    CHECK(c.horizon == 0.5);
    CHECK(c.surface == "pointset1d(0)");

    try {
        parse_config("paths = 3\nbogus = 1\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config("paths\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("paths = -3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("scheme = rk4\n"), ConfigError);
}

TEST_CASE("config round trip is idempotent") {
    const KeyedStream rng(2718);
    std::uint64_t k = 0;
    const auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng.bits(k++) % n); };
    const Command commands[] = {Command::simulate, Command::convergence, Command::occupation, Command::excursion,
                                Command::dump_transform};
    const SchemeChoice schemes[] = {SchemeChoice::em, SchemeChoice::gm, SchemeChoice::both};
    for (int trial = 0; trial < 200; ++trial) {
        ExperimentConfig c;
        c.command = commands[pick(5)];
        c.problem = problems::names()[pick(3)];
        c.scheme = schemes[pick(3)];
        for (std::size_t i = 0, n = pick(5); i < n; ++i) c.deltas.push_back(std::ldexp(1.0, -static_cast<int>(pick(20))));
        if (pick(2)) c.delta = std::ldexp(1.0, -static_cast<int>(pick(16)));
        c.paths = 1 + pick(5000);
        c.seed = rng.bits(k++);
        c.ref_levels = static_cast<int>(pick(20));
        for (std::size_t i = 0, n = pick(4); i < n; ++i) c.eps.push_back(rng.uniform(k++));
        if (pick(2)) c.out = "out/run" + std::to_string(trial) + ".csv";
        c.grid = 2 + pick(3000);
        if (pick(2)) c.initial = std::vector<double>{rng.normal(k++), 1e-7 * rng.normal(k++)};
        if (pick(2)) c.horizon = 0.25 + rng.uniform(k++);
        if (pick(2)) c.surface = "sphere(0," + std::to_string(trial) + ";1.5)";

        const std::string text = serialize(c);
        const ExperimentConfig back = parse_config(text);
        CAPTURE(text);
        CHECK(back == c);
        CHECK(serialize(back) == text);
    }
}

TEST_CASE("resolve_problem applies overrides") {
    ExperimentConfig c;
    c.problem = "circle2d";
    c.initial = std::vector<double>{0.9, 0.0};
    c.horizon = 0.5;
    c.surface = "sphere(0,0;0.8)";
    const SdeProblem p = resolve_problem(c);
    CHECK(p.initial[0] == 0.9);
    CHECK(p.horizon == 0.5);
    CHECK(p.surface->reach() == 0.8);
    c.initial = std::vector<double>{1.0};
    CHECK_THROWS_AS(resolve_problem(c), ConfigError);
}

TEST_CASE("run: simulate writes a path CSV") {
    const fs::path dir = scratch("simulate");
    ExperimentConfig c = parse_config("command = simulate\nproblem = step1d\ndelta = 2^-10\nseed = 1\n");
    c.out = (dir / "sim").string();
    std::ostringstream out, err;
    const RunResult r = run(c, out, err);
    CHECK(r.exit_code == kExitOk);
    CHECK(err.str().empty());
    for (const char* scheme : {"em", "gm"}) {
        const auto lines = read_lines(dir / (std::string("sim.") + scheme + ".csv"));
        REQUIRE(lines.size() == 1026);
        CHECK(lines[0] == "t,x1,in_band");
        CHECK(lines[1] == "0,0.1,1");
        CHECK(split_numbers(lines.back())[0] == 1.0);
    }
    const auto sidecar = read_lines(dir / "sim.transform.txt");
    CHECK(std::find(sidecar.begin(), sidecar.end(), "c=0.15") != sidecar.end());
    CHECK(std::find(sidecar.begin(), sidecar.end(), "sup_alpha=1") != sidecar.end());
}

TEST_CASE("run: dump-transform on step1d is monotone") {
    const fs::path dir = scratch("dump");
    ExperimentConfig c;
    c.command = Command::dump_transform;
    c.problem = "step1d";
    c.grid = 1001;
    c.out = (dir / "dump.csv").string();
    std::ostringstream out, err;
    REQUIRE(run(c, out, err).exit_code == kExitOk);
    const auto lines = read_lines(dir / "dump.csv");
    REQUIRE(lines.size() == 1002);
    CHECK(lines[0] == "x1,G1,det_jacobian");
    double prev_g = -1e300;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto v = split_numbers(lines[i]);
        CHECK(v[2] > 0.0);
        CHECK(v[1] > prev_g);
        prev_g = v[1];
    }
}

TEST_CASE("run: convergence, occupation and excursion outputs") {
    const fs::path dir = scratch("experiments");
    std::ostringstream out, err;
    ExperimentConfig conv = parse_config("command = convergence\nproblem = step1d\ndeltas = 2^-3..2^-5\n"
                                         "paths = 16\nref_levels = 8\nseed = 4\n");
    conv.out = (dir / "conv").string();
    REQUIRE(run(conv, out, err).exit_code == kExitOk);
    for (const char* scheme : {"em", "gm"}) {
        const auto lines = read_lines(dir / (std::string("conv.") + scheme + ".csv"));
        REQUIRE(lines.size() == 5);
        CHECK(lines[0] == "delta,error,n_paths,ci_half_width");
        CHECK(lines[4].rfind("# fitted_order=", 0) == 0);
    }
    CHECK(out.str().find("gm fitted_order=") != std::string::npos);

    ExperimentConfig occ = parse_config("command = occupation\nproblem = circle2d\ndelta = 2^-6\npaths = 20\n");
    occ.out = (dir / "occ").string();
    REQUIRE(run(occ, out, err).exit_code == kExitOk);
    const auto occ_lines = read_lines(dir / "occ.csv");
    REQUIRE(occ_lines.size() == 4);
    CHECK(occ_lines[0] == "eps,delta,occupation,n_paths");

    ExperimentConfig exc = parse_config("command = excursion\nproblem = circle2d\ndelta = 2^-6\npaths = 20\n");
    exc.out = (dir / "exc").string();
    REQUIRE(run(exc, out, err).exit_code == kExitOk);
    CHECK(read_lines(dir / "exc.csv")[0] == "eps,delta,probability,n_paths");
}

TEST_CASE("run: exit codes") {
    std::ostringstream out, err;
    ExperimentConfig c;
    c.problem = "typo2d";
    CHECK(run(c, out, err).exit_code == kExitConfig);
    CHECK(err.str().find("did you mean") != std::string::npos);

    ExperimentConfig odd;
    odd.command = Command::simulate;
    odd.problem = "step1d";
    odd.delta = 0.3;
    odd.out = (scratch("codes") / "odd").string();
    CHECK(run(odd, out, err).exit_code == kExitConfig);

    ExperimentConfig no_surface;
    no_surface.command = Command::occupation;
    no_surface.problem = "gbm1d";
    no_surface.out = (scratch("codes") / "none").string();
    CHECK(run(no_surface, out, err).exit_code == kExitConfig);

    std::ostringstream e2;
    CHECK(report_error(ModelError("sigma degenerate"), e2) == kExitModel);
    CHECK(report_error(NumericError("no convergence"), e2) == kExitNumeric);
    CHECK(report_error(ConstructionError("certificate"), e2) == kExitNumeric);
    CHECK(report_error(ConfigError("bad key"), e2) == kExitConfig);
    CHECK(report_error(ArgumentError("bad delta"), e2) == kExitConfig);
    CHECK(e2.str().find("model assumption violated: sigma degenerate") != std::string::npos);
}

TEST_CASE("output_prefix") {
    ExperimentConfig c;
    CHECK(output_prefix(c) == "convergence_circle2d");
    c.out = "results/run.csv";
    CHECK(output_prefix(c) == "results/run");
    c.out = "results/run";
    CHECK(output_prefix(c) == "results/run");
}
