#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "hklab/io.hpp"
#include "hklab/lab.hpp"
#include "hklab/scenario.hpp"

namespace fs = std::filesystem;
using namespace hklab;

namespace {

std::string fresh_out_dir(const std::string& requested) {
    if (!requested.empty()) {
        fs::create_directories(requested);
        return requested;
    }
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", std::gmtime(&now));
    std::string dir = std::string("hklab-out-") + buf;
    fs::create_directories(dir);
    return dir;
}

struct CommonFlags {
    std::string scenario_path;
    std::string certificates;
    std::string out;
    std::string times;
    std::string suite;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int jobs = 0;
    std::string format = "csv";
};

Scenario load_with_overrides(const CommonFlags& flags) {
    Scenario s = load_scenario(flags.scenario_path);
    if (flags.seed_set) s.seed = flags.seed;
    if (flags.jobs > 0) s.jobs = flags.jobs;
    if (!flags.times.empty()) s.times = parse_times(flags.times);
    if (!flags.suite.empty()) {
        s.suite.clear();
        std::stringstream ss(flags.suite);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) s.suite.push_back(item);
    }
    return s;
}

void print_check_table(const std::vector<CheckReport>& reports) {
    std::map<std::string, std::array<int, 4>> by_statement;  // pass, fail, skip, vacuous
    for (const auto& r : reports) {
        auto& row = by_statement[r.statement];
        if (r.skipped)
            ++row[2];
        else if (r.pass)
            ++row[0];
        else
            ++row[1];
        if (r.vacuous()) ++row[3];
    }
    std::printf("%-26s %6s %6s %6s %9s\n", "statement", "pass", "fail", "skip", "vacuous");
    for (const auto& [name, row] : by_statement)
        std::printf("%-26s %6d %6d %6d %9d\n", name.c_str(), row[0], row[1], row[2], row[3]);
    for (const auto& r : reports)
        if (!r.pass && !r.skipped)
            std::printf("FAIL  %s | %s | margin %s %s\n", r.statement.c_str(), r.instance.c_str(),
                        format_double(r.margin).c_str(), r.note.c_str());
}

int cmd_generate(const std::string& scenario_path, zoo::GeneratorSpec spec,
                 const std::string& out_file) {
    if (!scenario_path.empty()) {
        Scenario s = load_scenario(scenario_path);
        if (!s.generator) throw ConfigError("graph.generator", "scenario has no generator stanza");
        spec = *s.generator;
    }
    auto graph = zoo::generate(spec);
    save_graph_json(graph.to_data(), out_file);
    std::printf("wrote %s: %d vertices, %d edges\n", out_file.c_str(), graph.vertex_count(),
                graph.edge_count());
    return 0;
}

int cmd_inspect(const std::string& graph_file, double cap, GeometryParams params,
                std::vector<std::string> center_ids, const std::string& times,
                const std::string& out) {
    auto graph = std::make_shared<const WeightedGraph>(
        WeightedGraph::build(load_graph_json(graph_file)));
    auto metric = default_intrinsic_metric(*graph, cap);
    auto heat = HeatSystem::build(graph);
    std::string dir = fresh_out_dir(out);

    std::printf("graph: %d vertices, %d edges, total measure %s\n", graph->vertex_count(),
                graph->edge_count(), format_double(graph->total_measure()).c_str());
    std::printf("metric: jump size %s, intrinsic slack min %s\n",
                format_double(metric.jump_size()).c_str(),
                format_double(metric.intrinsic_slack().minCoeff()).c_str());
    std::printf("spectrum: bottom %s, top %s\n",
                format_double(heat.lambda_bottom()).c_str(),
                format_double(heat.eigenvalues()[heat.eigenvalues().size() - 1]).c_str());

    if (center_ids.empty()) center_ids.push_back(graph->id_of(0));
    for (const auto& id : center_ids) {
        int center = graph->index_of(id);
        auto grid = radius_grid(metric, center, metric.jump_size() / 2.0,
                                metric.matrix().row(center).maxCoeff());
        auto profile = build_profile(*graph, metric, center, params, grid);
        std::string path = dir + "/profile_" + id + ".csv";
        write_profile_csv(*graph, profile, path);
        std::printf("wrote %s (%zu radii)\n", path.c_str(), profile.rows.size());
    }
    if (!times.empty()) {
        std::vector<KernelSlice> slices;
        for (double t : parse_times(times)) slices.push_back(heat.heat_kernel(t));
        std::string path = dir + "/kernel.csv";
        write_kernel_csv(*graph, slices, path);
        std::printf("wrote %s\n", path.c_str());
    }
    return 0;
}

int cmd_certify(const CommonFlags& flags) {
    Scenario scenario = load_with_overrides(flags);
    auto bench = open_workbench(scenario);
    auto result = run_certify(scenario, bench);
    std::string dir = fresh_out_dir(flags.out);
    write_sv_json(*bench.graph, result.estimates, dir + "/certificates.json");
    for (const auto& e : result.estimates)
        std::printf("center %s: C_S = %s (converged %d), C_D = %s on [%s, %s]%s\n",
                    bench.graph->id_of(e.center).c_str(), format_double(e.sobolev).c_str(),
                    e.converged ? 1 : 0, format_double(e.doubling).c_str(),
                    format_double(e.r1).c_str(), format_double(e.r2).c_str(),
                    e.pass ? "" : "  [exceeds target]");
    std::printf("wrote %s/certificates.json\n", dir.c_str());
    return result.all_pass ? 0 : 1;
}

int cmd_verify(const CommonFlags& flags) {
    Scenario scenario = load_with_overrides(flags);
    auto bench = open_workbench(scenario);
    auto result = run_verify(scenario, bench, flags.certificates);
    std::string dir = fresh_out_dir(flags.out);
    if (flags.format == "json" || flags.format == "both")
        write_check_summary_json(result.reports, dir + "/summary.json");
    write_check_csv(result.reports, dir + "/checks.csv");
    write_check_summary_json(result.reports, dir + "/summary.json");
    print_check_table(result.reports);
    std::printf("total %d, passed %d, failed %d, skipped %d, vacuous passes %d\n",
                result.summary.total, result.summary.passed, result.summary.failed,
                result.summary.skipped, result.summary.vacuous);
    std::printf("wrote %s/checks.csv\n", dir.c_str());
    return result.summary.failed == 0 ? 0 : 1;
}

int cmd_scan(const CommonFlags& flags, bool svg) {
    Scenario scenario = load_with_overrides(flags);
    auto bench = open_workbench(scenario);
    auto result = run_scan(scenario, bench, flags.certificates);
    std::string dir = fresh_out_dir(flags.out);
    write_bound_csv(result.reports, dir + "/bounds.csv");
    write_bound_summary_json(result.reports, dir + "/summary.json");
    if (svg) write_margin_svg(result.reports, *bench.graph, dir + "/margins.svg");
    std::printf("bounds: %d checked, %d passed, %d vacuous, min log-margin %s\n",
                result.summary.total, result.summary.passed, result.summary.vacuous,
                format_double(result.summary.min_log_margin).c_str());
    std::printf("wrote %s/bounds.csv\n", dir.c_str());
    return result.summary.passed == result.summary.total ? 0 : 1;
}

int cmd_report(const std::string& dir) {
    std::vector<CheckReport> checks;
    std::vector<BoundReport> bounds;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        auto name = entry.path().filename().string();
        if (name == "checks.csv") {
            auto part = load_check_csv(entry.path().string());
            checks.insert(checks.end(), part.begin(), part.end());
        } else if (name == "bounds.csv") {
            auto part = load_bound_csv(entry.path().string());
            bounds.insert(bounds.end(), part.begin(), part.end());
        }
    }
    if (checks.empty() && bounds.empty()) {
        std::fprintf(stderr, "no checks.csv or bounds.csv under %s\n", dir.c_str());
        return 2;
    }
    int failures = 0;
    if (!checks.empty()) {
        print_check_table(checks);
        auto s = summarize(checks);
        failures += s.failed;
        write_check_summary_json(checks, dir + "/summary_checks.json");
    }
    if (!bounds.empty()) {
        auto s = summarize_bounds(bounds);
        std::printf("bounds: %d checked, %d passed, %d vacuous, min log-margin %s\n", s.total,
                    s.passed, s.vacuous, format_double(s.min_log_margin).c_str());
        failures += s.total - s.passed;
        write_bound_summary_json(bounds, dir + "/summary_bounds.json");
    }
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"heat kernel laboratory for weighted-graph Laplacians"};
    app.require_subcommand(1);

    CommonFlags flags;
    zoo::GeneratorSpec gen_spec;
    std::string gen_out = "graph.json";
    std::string inspect_graph, inspect_times, report_dir;
    std::vector<std::string> inspect_centers;
    double inspect_cap = 1.0;
    GeometryParams inspect_params;
    std::string inspect_p = "inf";
    bool scan_svg = false;

    auto add_common = [&flags](CLI::App* cmd, bool with_certificates) {
        cmd->add_option("--scenario", flags.scenario_path, "scenario JSON file")->required();
        cmd->add_option("--out", flags.out, "output directory (default: timestamped)");
        cmd->add_option("--jobs", flags.jobs, "worker cap (default: logical cores)");
        cmd->add_option("--times", flags.times, "time grid: comma list or logspace:a:b:n");
        auto* seed = cmd->add_option("--seed", flags.seed, "override the scenario seed");
        seed->each([&flags](const std::string&) { flags.seed_set = true; });
        if (with_certificates)
            cmd->add_option("--certificates", flags.certificates,
                            "certificates.json from a certify run");
    };

    auto* generate = app.add_subcommand("generate", "write a generated graph file");
    generate->add_option("--scenario", flags.scenario_path, "scenario with a generator stanza");
    generate->add_option("--family", gen_spec.family,
                         "path|cycle|lattice_box|complete|antitree|random_weighted");
    generate->add_option("--n", gen_spec.n, "vertex count");
    generate->add_option("--width", gen_spec.width, "lattice width");
    generate->add_option("--height", gen_spec.height, "lattice height");
    generate->add_option("--sphere-count", gen_spec.sphere_count, "antitree spheres");
    generate->add_option("--gamma", gen_spec.gamma, "antitree growth exponent in (0,2)");
    generate->add_option("--edge-prob", gen_spec.edge_prob, "random edge probability");
    generate->add_option("--weight-lo", gen_spec.weights.lo, "random weight lower bound");
    generate->add_option("--weight-hi", gen_spec.weights.hi, "random weight upper bound");
    generate->add_option("--measure", gen_spec.measure, "counting|normalizing|uniform");
    generate->add_option("--uniform-m", gen_spec.uniform_m, "uniform measure value");
    generate->add_flag("--dirichlet", gen_spec.dirichlet, "flag the family boundary Dirichlet");
    generate->add_option("--gen-seed", gen_spec.seed, "generator seed");
    generate->add_option("--out", gen_out, "output graph file");

    auto* inspect = app.add_subcommand("inspect", "profile dumps for a graph file");
    inspect->add_option("--graph", inspect_graph, "graph JSON file")->required();
    inspect->add_option("--cap", inspect_cap, "intrinsic metric cap");
    inspect->add_option("--n", inspect_params.n, "Sobolev dimension");
    inspect->add_option("--d", inspect_params.d, "doubling dimension");
    inspect->add_option("--p", inspect_p, "mean exponent or inf");
    inspect->add_option("--center", inspect_centers, "profile centers (vertex ids)");
    inspect->add_option("--times", inspect_times, "dump kernel slices on this grid");
    inspect->add_option("--out", flags.out, "output directory");

    auto* certify = app.add_subcommand("certify", "estimate SV constants per center");
    add_common(certify, false);

    auto* verify = app.add_subcommand("verify", "run the inequality suite");
    add_common(verify, true);
    verify->add_option("--suite", flags.suite, "comma list of statement ids");
    verify->add_option("--format", flags.format, "csv|json|both")
        ->check(CLI::IsMember({"csv", "json", "both"}));

    auto* scan = app.add_subcommand("scan", "kernel vs assembled bound over the grid");
    add_common(scan, true);
    scan->add_flag("--svg", scan_svg, "emit a log-margin plot");

    auto* report = app.add_subcommand("report", "aggregate a results directory");
    report->add_option("--dir", report_dir, "directory with checks.csv / bounds.csv")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (generate->parsed()) return cmd_generate(flags.scenario_path, gen_spec, gen_out);
        if (inspect->parsed()) {
            if (inspect_p == "inf")
                inspect_params.p = std::numeric_limits<double>::infinity();
            else
                inspect_params.p = std::stod(inspect_p);
            return cmd_inspect(inspect_graph, inspect_cap, inspect_params, inspect_centers,
                               inspect_times, flags.out);
        }
        if (certify->parsed()) return cmd_certify(flags);
        if (verify->parsed()) return cmd_verify(flags);
        if (scan->parsed()) return cmd_scan(flags, scan_svg);
        if (report->parsed()) return cmd_report(report_dir);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const HypothesisError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
