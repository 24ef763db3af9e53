#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "hklab/io.hpp"
#include "hklab/scenario.hpp"
#include "hklab/zoo.hpp"

using namespace hklab;
namespace fs = std::filesystem;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    fs::path dir = fs::temp_directory_path() / "hklab_scenario_tests";
    fs::create_directories(dir);
    fs::path p = dir / name;
    std::ofstream out(p);
    out << content;
    return p.string();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

Scenario small_scenario() {
    Scenario s;
    zoo::GeneratorSpec gen;
    gen.family = "cycle";
    gen.n = 48;
    gen.measure = "normalizing";
    s.generator = gen;
    s.params = GeometryParams{3.0, 1.0, std::numeric_limits<double>::infinity()};
    s.sv_r1 = 8.0;
    s.sv_r2 = 20.0;
    s.budget = {2, 120, 1};
    s.times = parse_times("logspace:512:5120:6");
    s.pair_sample = 4;
    s.variant = BoundVariant::normalized;
    s.seed = 7;
    return s;
}

}  // namespace

TEST_CASE("time grid specs") {
    auto logs = parse_times("logspace:2:32:5");
    REQUIRE(logs.size() == 5);
    CHECK(logs.front() == doctest::Approx(2.0));
    CHECK(logs.back() == doctest::Approx(32.0));
    CHECK(logs[1] / logs[0] == doctest::Approx(2.0));

    auto list = parse_times("0.5,1,8");
    CHECK(list == std::vector<double>{0.5, 1.0, 8.0});

    CHECK_THROWS_AS(parse_times("logspace:0:5:3"), ConfigError);
    CHECK_THROWS_AS(parse_times(""), ConfigError);
}

TEST_CASE("scenario file parsing and validation") {
    std::string path = write_temp("ok.json", R"({
      "graph": {"generator": {"family": "cycle", "n": 24, "measure": "normalizing"}},
      "params": {"n": 3.5, "d": 2.0, "p": "inf"},
      "sv": {"r1": 2.0, "r2": 6.0},
      "grids": {"times": [1.0, 2.0], "pairs": [["1", "5"], ["2", "9"]]},
      "suite": ["elementary", "zeta-asymptotics"],
      "variant": "normalized",
      "seed": 99
    })");
    auto s = load_scenario(path);
    CHECK(s.generator);
    CHECK(s.params.n == 3.5);
    CHECK(std::isinf(s.params.p));
    CHECK(s.times.size() == 2);
    CHECK(s.pairs.size() == 2);
    CHECK(s.seed == 99);
    CHECK(s.variant == BoundVariant::normalized);

    auto bad_p = write_temp("bad_p.json", R"({
      "graph": {"generator": {"family": "cycle", "n": 8}},
      "params": {"n": 3.0, "d": 1.0, "p": 1.0}
    })");
    CHECK_THROWS_AS(load_scenario(bad_p), ConfigError);

    auto bad_suite = write_temp("bad_suite.json", R"({
      "graph": {"generator": {"family": "cycle", "n": 8}},
      "suite": ["no-such-statement"]
    })");
    try {
        load_scenario(bad_suite);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field == "suite");
    }

    auto no_graph = write_temp("no_graph.json", R"({"seed": 3})");
    CHECK_THROWS_AS(load_scenario(no_graph), ConfigError);

    auto missing_file = write_temp("missing_file.json", R"({
      "graph": {"file": "does_not_exist_anywhere.json"}
    })");
    CHECK_THROWS_AS(load_scenario(missing_file), ConfigError);
}

TEST_CASE("workbench resolves grids and samples deterministically") {
    auto s = small_scenario();
    auto bench = open_workbench(s);
    CHECK(bench.graph->vertex_count() == 48);
    CHECK(bench.sample_vertices.size() == 4);
    CHECK(bench.grid.pairs.size() == 10);  // 4 choose 2 plus diagonal
    CHECK(bench.grid.times.size() == 6);

    auto bench2 = open_workbench(s);
    CHECK(bench2.sample_vertices == bench.sample_vertices);

    s.pairs = {{"1", "5"}};
    s.pair_sample = 0;
    auto explicit_bench = open_workbench(s);
    CHECK(explicit_bench.grid.pairs.size() == 1);
    CHECK(explicit_bench.sample_vertices.size() == 2);
}

TEST_CASE("certification targets gate the result") {
    auto s = small_scenario();
    auto bench = open_workbench(s);
    auto result = run_certify(s, bench);
    CHECK(result.all_pass);
    REQUIRE(result.estimates.size() == 4);
    for (const auto& e : result.estimates) {
        CHECK(e.sobolev > 0.0);
        CHECK(e.doubling >= 1.0);
    }

    s.targets.sobolev = result.estimates[0].sobolev / 10.0;
    auto strict = run_certify(s, bench);
    CHECK_FALSE(strict.all_pass);
}

TEST_CASE("certificates resolve from file or inline targets") {
    auto s = small_scenario();
    auto bench = open_workbench(s);
    CHECK_THROWS_AS(resolve_certificates(s, bench, "", "mv2"), HypothesisError);

    s.targets.sobolev = 5.0;
    s.targets.doubling = 4.0;
    auto inline_certs = resolve_certificates(s, bench, "", "mv2");
    CHECK(inline_certs.size() == bench.sample_vertices.size());
    CHECK(inline_certs.begin()->second.sobolev == 5.0);

    auto certify = run_certify(s, bench);
    fs::path dir = fs::temp_directory_path() / "hklab_scenario_tests";
    fs::create_directories(dir);
    std::string cert_path = (dir / "certs.json").string();
    write_sv_json(*bench.graph, certify.estimates, cert_path);
    s.targets = {};
    auto from_file = resolve_certificates(s, bench, cert_path, "mv2");
    CHECK(from_file.size() == 4);
    for (const auto& [v, c] : from_file) {
        CHECK(c.r == 8.0);
        CHECK(c.R == 20.0);
        CHECK(c.sobolev > 0.0);
    }
}

TEST_CASE("verify runs a fast sub-suite and reports") {
    auto s = small_scenario();
    s.suite = {"zeta-asymptotics", "sigma-identity", "davies-optimizer", "ball-interior",
               "cutoff-gradient", "intrinsic", "semigroup-laws"};
    s.jobs = 2;
    auto bench = open_workbench(s);
    auto result = run_verify(s, bench, "");
    CHECK(result.summary.failed == 0);
    CHECK(result.summary.passed > 0);
    CHECK(result.summary.total == static_cast<int>(result.reports.size()));
}

TEST_CASE("verify aborts with a named statement when certificates are missing") {
    auto s = small_scenario();
    s.suite = {"zeta-asymptotics", "final-gaussian"};
    auto bench = open_workbench(s);
    try {
        run_verify(s, bench, "");
        FAIL("expected HypothesisError");
    } catch (const HypothesisError& e) {
        CHECK(e.statement == "final-gaussian");
    }
}

TEST_CASE("scan produces passing bounds and byte-identical reruns") {
    auto s = small_scenario();
    auto bench = open_workbench(s);
    auto certify = run_certify(s, bench);
    fs::path dir = fs::temp_directory_path() / "hklab_scenario_tests";
    std::string cert_path = (dir / "scan_certs.json").string();
    write_sv_json(*bench.graph, certify.estimates, cert_path);

    auto scan = run_scan(s, bench, cert_path);
    CHECK(scan.summary.total == 60);
    CHECK(scan.summary.passed == scan.summary.total);

    std::string csv1 = (dir / "bounds1.csv").string();
    std::string csv2 = (dir / "bounds2.csv").string();
    write_bound_csv(scan.reports, csv1);
    auto bench2 = open_workbench(s);
    auto scan2 = run_scan(s, bench2, cert_path);
    write_bound_csv(scan2.reports, csv2);
    CHECK(read_file(csv1) == read_file(csv2));
    CHECK(!read_file(csv1).empty());
}

TEST_CASE("io round trips") {
    auto g = zoo::cycle(6, zoo::Measure::normalizing);
    fs::path dir = fs::temp_directory_path() / "hklab_scenario_tests";
    fs::create_directories(dir);
    std::string gpath = (dir / "graph.json").string();
    save_graph_json(g.to_data(), gpath);
    auto loaded = WeightedGraph::build(load_graph_json(gpath));
    CHECK(loaded.vertex_count() == 6);
    CHECK(loaded.measure(0) == 2.0);

    std::vector<CheckReport> checks;
    checks.push_back(make_report("demo", "one, with \"quotes\"", 1.0, 2.0, 1e-9, false, 42));
    std::string cpath = (dir / "checks.csv").string();
    write_check_csv(checks, cpath);
    auto back = load_check_csv(cpath);
    REQUIRE(back.size() == 1);
    CHECK(back[0].statement == "demo");
    CHECK(back[0].instance == "one, with \"quotes\"");
    CHECK(back[0].lhs == 1.0);
    CHECK(back[0].pass);

    std::vector<BoundReport> bounds(1);
    bounds[0].x = 1;
    bounds[0].y = 2;
    bounds[0].t = 3.5;
    bounds[0].log_lhs = -1.25;
    bounds[0].log_rhs = 4.0;
    bounds[0].log_margin = 5.25;
    bounds[0].pass = true;
    std::string bpath = (dir / "bounds.csv").string();
    write_bound_csv(bounds, bpath);
    auto bback = load_bound_csv(bpath);
    REQUIRE(bback.size() == 1);
    CHECK(bback[0].log_margin == 5.25);

    write_margin_svg(bounds, g, (dir / "m.svg").string());
    CHECK(read_file((dir / "m.svg").string()).find("<svg") == 0);
}

TEST_CASE("format_double is stable and round trips") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(-3.0) == "-3");
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
    double v = 1.0 / 3.0;
    CHECK(std::stod(format_double(v)) == v);
}
