// Acceptance suite: one test case per criterion, each printing a PASS/FAIL
// line with its measured quantity and elapsed time.

#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>

#include "hklab/io.hpp"
#include "hklab/lab.hpp"
#include "hklab/scenario.hpp"
#include "hklab/zoo.hpp"
#include "test_support.hpp"

using namespace hklab;
using hklab::testing::Rng;
namespace fs = std::filesystem;

namespace {

struct Stopwatch {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

void verdict(int criterion, bool pass, const std::string& detail, double seconds) {
    std::printf("[%s] criterion %2d: %s (%.1fs)\n", pass ? "PASS" : "FAIL", criterion,
                detail.c_str(), seconds);
    std::fflush(stdout);
}

fs::path out_dir() {
    fs::path dir = fs::temp_directory_path() / "hklab_acceptance";
    fs::create_directories(dir);
    return dir;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

std::string scenario_path() {
    return std::string(HKLAB_SCENARIO_DIR) + "/normalized_cycle.json";
}

VertexFunction lipschitz_profile(Rng& rng, const IntrinsicMetric& rho, double kappa) {
    int base = rng.below(rho.vertex_count());
    VertexFunction w(rho.vertex_count());
    for (int x = 0; x < w.size(); ++x) w[x] = -kappa * rho(base, x);
    return w;
}

VertexFunction random_nonneg(Rng& rng, int n, double lo = 0.0, double hi = 2.0) {
    VertexFunction f(n);
    for (int i = 0; i < n; ++i) f[i] = rng.uniform(lo, hi);
    return f;
}

}  // namespace

TEST_CASE("criterion 1: closed-form kernel on the two-vertex graph") {
    Stopwatch clock;
    auto hs = HeatSystem::build(
        std::make_shared<WeightedGraph>(WeightedGraph::build(testing::two_vertex_data())));
    double worst = 0.0;
    for (double t : {0.1, 1.0, 10.0}) {
        auto slice = hs.heat_kernel(t);
        worst = std::max(worst, std::abs(slice.p(0, 1) - (1.0 - std::exp(-2.0 * t)) / 2.0));
        worst = std::max(worst, std::abs(slice.p(1, 0) - (1.0 - std::exp(-2.0 * t)) / 2.0));
    }
    bool pass = worst <= 1e-10;
    verdict(1, pass, "two-vertex kernel vs (1-e^{-2t})/2, max deviation " + format_double(worst),
            clock.seconds());
    CHECK(pass);
}

TEST_CASE("criterion 2: semigroup laws on ten zoo graphs") {
    Stopwatch clock;
    std::vector<WeightedGraph> graphs;
    graphs.push_back(zoo::cycle(5, zoo::Measure::counting));
    graphs.push_back(zoo::cycle(300, zoo::Measure::normalizing));
    graphs.push_back(zoo::path(60, zoo::Measure::counting));
    graphs.push_back(zoo::path(300, zoo::Measure::normalizing, true));
    graphs.push_back(zoo::complete(15, zoo::Measure::counting));
    graphs.push_back(zoo::lattice_box(9, 9, zoo::Measure::counting, false));
    graphs.push_back(zoo::antitree(1.0, 9, zoo::Measure::counting, false));
    graphs.push_back(zoo::antitree(1.5, 7, zoo::Measure::normalizing, false));
    graphs.push_back(zoo::random_weighted(50, 0.12, {0.4, 1.8}, 5));
    graphs.push_back(zoo::random_weighted(30, 0.25, {0.5, 1.5}, 9));
    REQUIRE(graphs.size() == 10);

    double worst_sym = 0.0, worst_complete = 0.0, worst_ck = 0.0;
    for (auto& graph : graphs) {
        auto g = std::make_shared<WeightedGraph>(std::move(graph));
        auto hs = HeatSystem::build(g);
        const auto& m = g->measure();
        for (double t : {0.1, 1.0, 5.0}) {
            auto slice = hs.heat_kernel(t);
            worst_sym = std::max(worst_sym,
                                 (slice.p - slice.p.transpose()).cwiseAbs().maxCoeff());
            if (!g->has_dirichlet())
                for (int x = 0; x < g->vertex_count(); ++x)
                    worst_complete = std::max(
                        worst_complete,
                        std::abs((m.array() * slice.p.col(x).array()).sum() - 1.0));
            for (double s : {0.1, 1.0, 5.0}) {
                Eigen::MatrixXd lhs = slice.p * m.asDiagonal() * hs.heat_kernel(s).p;
                worst_ck = std::max(
                    worst_ck, (lhs - hs.heat_kernel(t + s).p).cwiseAbs().maxCoeff());
            }
        }
    }
    bool pass = worst_sym <= 1e-12 && worst_complete <= 1e-9 && worst_ck <= 1e-9;
    verdict(2, pass,
            "symmetry " + format_double(worst_sym) + ", completeness " +
                format_double(worst_complete) + ", Chapman-Kolmogorov " + format_double(worst_ck),
            clock.seconds());
    CHECK(worst_sym <= 1e-12);
    CHECK(worst_complete <= 1e-9);
    CHECK(worst_ck <= 1e-9);
}

TEST_CASE("criterion 3: integrated maximum principle on random instances") {
    Stopwatch clock;
    int failures = 0;
    double worst_jump = -1e300;
    for (int i = 0; i < 100; ++i) {
        Rng rng(4000 + static_cast<std::uint64_t>(i));
        int n = 6 + rng.below(25);  // <= 30 vertices
        auto g = std::make_shared<WeightedGraph>(
            zoo::random_weighted(n, 0.3, {0.3, 2.0}, 8000 + static_cast<std::uint64_t>(i)));
        auto hs = HeatSystem::build(g);
        auto rho = default_intrinsic_metric(*g, 1.0);
        double kappa = rng.uniform(0.05, 1.5);
        VertexFunction omega = lipschitz_profile(rng, rho, kappa);
        VertexFunction f = random_nonneg(rng, n);
        std::vector<double> grid;
        for (int k = 0; k < 50; ++k) grid.push_back(0.1 * k);
        auto rep = phi_monotone(hs, rho, omega, kappa, f, grid, 1e-9);
        if (!rep.pass) ++failures;
        worst_jump = std::max(worst_jump, rep.lhs);
    }
    bool pass = failures == 0;
    verdict(3, pass,
            "100 instances, failures " + std::to_string(failures) + ", worst upward jump " +
                format_double(worst_jump),
            clock.seconds());
    CHECK(pass);
}

TEST_CASE("criterion 4: elementary inequalities") {
    Stopwatch clock;
    auto reports = check_elementary({0.6, 1.0, 2.0, 7.5}, 100000, 424242);
    bool pass = true;
    double worst = 1e300;
    for (const auto& r : reports) {
        pass = pass && r.pass;
        worst = std::min(worst, r.margin);
    }
    verdict(4, pass,
            "3 inequalities x 1e5 draws per applicable p, min relative margin " +
                format_double(worst),
            clock.seconds());
    CHECK(pass);
}

TEST_CASE("criterion 5: energy estimate with exact spectral derivative") {
    Stopwatch clock;
    int done = 0, failures = 0;
    double min_margin = 1e300;
    for (int i = 0; done < 50; ++i) {
        Rng rng(5000 + static_cast<std::uint64_t>(i));
        int n = 10 + rng.below(31);  // <= 40 vertices
        auto g = std::make_shared<WeightedGraph>(
            zoo::random_weighted(n, 0.25, {0.3, 1.8}, 9000 + static_cast<std::uint64_t>(i)));
        auto hs = HeatSystem::build(g);
        auto rho = default_intrinsic_metric(*g, 1.0);
        VertexFunction omega = lipschitz_profile(rng, rho, rng.uniform(0.05, 1.0));
        auto v = SolutionSample::evolve(hs, omega, random_nonneg(rng, n), 0.1, 3.0);
        int center = rng.below(n);
        double r2 = rng.uniform(2.0, 5.0);
        double width = r2 - 0.8 - rho.jump_size();
        if (width <= 0.05) continue;
        VertexSet b = ball(rho, center, r2);
        VertexSet interior = combinatorial_interior(*g, b);
        VertexFunction phi = cutoff(*g, rho, ball(rho, center, 0.8), width);
        for (int x = 0; x < n; ++x)
            if (!contains(interior, x)) phi[x] = 0.0;
        double p = std::vector<double>{1.0, 2.0, 3.0}[static_cast<size_t>(rng.below(3))];
        auto rep = check_caccioppoli(*g, v, phi, b, p, {0.3, 0.9, 1.7, 2.6});
        ++done;
        min_margin = std::min(min_margin, rep.margin);
        if (rep.margin < -1e-8) ++failures;
    }
    bool pass = failures == 0;
    verdict(5, pass, "50 instances, min margin " + format_double(min_margin), clock.seconds());
    CHECK(pass);
}

TEST_CASE("criterion 6: interpolation and supersolution maximal inequality") {
    Stopwatch clock;
    int violations = 0;
    for (int i = 0; i < 10000; ++i) {
        Rng rng(6000 + static_cast<std::uint64_t>(i));
        int n = 1 + rng.below(14);
        Eigen::VectorXd mu(n), v(n);
        for (int k = 0; k < n; ++k) {
            mu[k] = std::exp(rng.uniform(-3.0, 2.0));
            v[k] = rng.uniform(-4.0, 4.0);
        }
        double p = rng.uniform() < 0.25 ? std::numeric_limits<double>::infinity()
                                        : rng.uniform(1.0, 9.0);
        if (!check_interpolation(mu, v, p).pass) ++violations;
    }

    int super_violations = 0;
    for (int i = 0; i < 30; ++i) {
        Rng rng(6600 + static_cast<std::uint64_t>(i));
        int n = 8 + rng.below(20);
        auto g = std::make_shared<WeightedGraph>(
            zoo::random_weighted(n, 0.3, {0.4, 1.7}, 6800 + static_cast<std::uint64_t>(i)));
        auto hs = HeatSystem::build(g);
        auto rho = default_intrinsic_metric(*g, 1.0);
        VertexFunction omega = lipschitz_profile(rng, rho, rng.uniform(0.05, 0.7));
        auto v = SolutionSample::evolve(hs, omega, random_nonneg(rng, n, 0.05, 1.6), 0.1, 4.0,
                                        rng.uniform(0.0, 0.4));
        VertexSet b = ball(rho, rng.below(n), rng.uniform(1.0, 4.0));
        double vol = 0.0;
        for (int x : b) vol += g->measure(x);
        Eigen::VectorXd mu = g->measure() / vol;
        double s = 1.0 + rng.uniform(0.0, 2.0);
        double p = rng.uniform() < 0.3 ? std::numeric_limits<double>::infinity()
                                       : rng.uniform(1.3, 6.0);
        if (!check_supersolution_maximal(*g, b, mu, v, 0.3, 0.9, 2.0, 3.6, s, p).pass)
            ++super_violations;
    }
    bool pass = violations == 0 && super_violations == 0;
    verdict(6, pass,
            "interpolation violations " + std::to_string(violations) +
                ", supersolution violations " + std::to_string(super_violations),
            clock.seconds());
    CHECK(pass);
}

TEST_CASE("criterion 7: graph Gaussian asymptotics") {
    Stopwatch clock;
    double deviation = std::abs(zeta(1.0, 100.0, 1.0) * 200.0 - 1.0);
    bool zero_exact = true;
    for (double t : {0.01, 0.5, 7.0, 300.0, 1e6})
        zero_exact = zero_exact && zeta(0.0, t, 1.0) == 0.0 && zeta(0.0, t, 0.25) == 0.0;
    bool pass = deviation <= 0.01 && zero_exact;
    verdict(7, pass,
            "|2t/r^2 zeta - 1| = " + format_double(deviation) + ", zeta(0,t) exact zero: " +
                (zero_exact ? "yes" : "no"),
            clock.seconds());
    CHECK(pass);
}

TEST_CASE("criterion 8: polynomial correction comparison") {
    Stopwatch clock;
    int violations = 0;
    for (double n : {3.0, 4.0})
        for (int i = 1; i <= 100; ++i)
            for (int j = 1; j <= 100; ++j) {
                double r = 0.12 * i, t = 0.2 * j;
                double ours = poly_correction(r, t, 1.0, n);
                double manifold = std::pow(std::max(1.0, r * r / t), n / 2.0);
                if (ours > manifold * (1.0 + 1e-12)) ++violations;
            }
    bool pass = violations == 0;
    verdict(8, pass, "100x100 grid, n in {3,4}, violations " + std::to_string(violations),
            clock.seconds());
    CHECK(pass);
}

TEST_CASE("criterion 9: Davies optimizer identity") {
    Stopwatch clock;
    auto f = [](double eta, double theta) { return -eta + (std::cosh(eta) - 1.0) / theta; };
    double worst_argmin = 0.0;
    for (double theta : {0.1, 1.0, 10.0}) {
        const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
        double a = 0.0, b = 20.0;
        double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
        while (b - a > 1e-5) {
            if (f(c, theta) < f(d, theta))
                b = d;
            else
                a = c;
            c = b - inv_phi * (b - a);
            d = a + inv_phi * (b - a);
        }
        double m = (a + b) / 2.0;
        double fa = f(a, theta), fm = f(m, theta), fb = f(b, theta);
        double num = (m - a) * (m - a) * (fm - fb) - (m - b) * (m - b) * (fm - fa);
        double den = (m - a) * (fm - fb) - (m - b) * (fm - fa);
        double argmin = den != 0.0 ? m - 0.5 * num / den : m;
        worst_argmin = std::max(worst_argmin, std::abs(argmin - std::asinh(theta)));
    }
    double worst_identity = 0.0;
    for (double s : {0.5, 1.0, 2.0})
        for (double r : {0.2, 1.0, 4.0, 15.0})
            for (double t : {0.1, 1.0, 9.0, 120.0}) {
                auto opt = davies_exponent_optimizer(r, t, s);
                worst_identity =
                    std::max(worst_identity, std::abs(r / s * opt.f_value + zeta(r, t, s)));
            }
    bool pass = worst_argmin <= 1e-8 && worst_identity <= 1e-10;
    verdict(9, pass,
            "argmin deviation " + format_double(worst_argmin) + ", identity residual " +
                format_double(worst_identity),
            clock.seconds());
    CHECK(pass);
}

TEST_CASE("criterion 10: end-to-end bound on the normalized 300-cycle") {
    Stopwatch clock;
    auto scenario = load_scenario(scenario_path());
    auto bench = open_workbench(scenario);
    REQUIRE(bench.graph->vertex_count() == 300);
    REQUIRE(bench.sample_vertices.size() == 20);
    REQUIRE(bench.grid.times.size() == 20);
    REQUIRE(bench.grid.times.front() == doctest::Approx(8.0 * 42.0 * 42.0));

    auto certify = run_certify(scenario, bench);
    fs::path cert_path = out_dir() / "criterion10_certificates.json";
    write_sv_json(*bench.graph, certify.estimates, cert_path.string());

    auto scan = run_scan(scenario, bench, cert_path.string());
    write_bound_csv(scan.reports, (out_dir() / "criterion10_bounds.csv").string());

    int total = scan.summary.total;
    int violations = total - scan.summary.passed;
    bool pass = violations == 0 && total == 210 * 20;
    verdict(10, pass,
            std::to_string(total) + " (pair,t) points, violations " + std::to_string(violations) +
                ", min log-margin " + format_double(scan.summary.min_log_margin) +
                ", vacuous passes " + std::to_string(scan.summary.vacuous),
            clock.seconds());
    CHECK(pass);
}

TEST_CASE("criterion 11: antitree volume dimension") {
    Stopwatch clock;
    auto g = zoo::antitree(1.0, 40, zoo::Measure::counting);
    auto rho = default_intrinsic_metric(g, 1.0);
    int root = g.index_of("0:0");
    double r_max = rho.matrix().row(root).maxCoeff();
    double r_lo = r_max / 10.0;

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    for (double r : radius_grid(rho, root, r_lo, r_max)) {
        if (!(r > 0.0)) continue;
        double x = std::log(r), y = std::log(ball_volume(g, rho, root, r));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++count;
    }
    double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    bool pass = std::abs(slope - 4.0) <= 0.6;
    verdict(11, pass,
            "gamma 1, 40 spheres: least-squares slope " + format_double(slope) +
                " over [" + format_double(r_lo) + ", " + format_double(r_max) +
                "], expected 4 +- 0.6",
            clock.seconds());
    if (!pass)
        std::printf(
            "      note: the d = 4 regime needs larger truncations; the same estimator gives\n"
            "      ~3.47 at 200 spheres and ~3.85 at 3000 (distance offset ~1.16 dominates the\n"
            "      decade available at 40 spheres, where every reading stays near 2.8)\n");
    CHECK(pass);
}

TEST_CASE("criterion 12: theta decay envelope") {
    Stopwatch clock;
    double lo = 1e300, hi = 0.0;
    for (double s : {0.7, 1.0}) {
        double beta = 4.0 / 3.0;
        double gamma = std::log(beta) / std::sqrt(4.0 * s);
        // log grid plus the exact floor steps of kappa
        std::vector<double> grid;
        for (double r = 16.0 * s; r <= 1e4 * s; r *= 1.03) grid.push_back(r);
        for (int j = 0; 4.0 * s * (j + 2.0) * (j + 2.0) <= 1e4 * s; ++j) {
            double step = 4.0 * s * (j + 2.0) * (j + 2.0);
            if (step >= 16.0 * s) {
                grid.push_back(step);
                grid.push_back(std::nextafter(step, 0.0));
            }
        }
        for (double r : grid) {
            if (r < 16.0 * s || r > 1e4 * s) continue;
            double v = kappa_theta(r, s, beta).theta * std::exp(gamma * std::sqrt(r));
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    bool pass = lo > 0.0 && std::isfinite(hi);
    verdict(12, pass,
            "theta(r) e^{gamma sqrt r} in [" + format_double(lo) + ", " + format_double(hi) +
                "] over r in [16S, 1e4 S]",
            clock.seconds());
    CHECK(pass);
    CHECK(hi / lo < 20.0);  // genuinely two-sided comparability
}

TEST_CASE("criterion 13: determinism of the criterion-10 scenario") {
    Stopwatch clock;
    auto scenario = load_scenario(scenario_path());
    auto run_once = [&](const fs::path& dir) {
        fs::create_directories(dir);
        auto bench = open_workbench(scenario);
        auto certify = run_certify(scenario, bench);
        write_sv_json(*bench.graph, certify.estimates, (dir / "certificates.json").string());
        auto scan = run_scan(scenario, bench, (dir / "certificates.json").string());
        write_bound_csv(scan.reports, (dir / "bounds.csv").string());
    };
    fs::path d1 = out_dir() / "det1";
    fs::path d2 = out_dir() / "det2";
    run_once(d1);
    run_once(d2);
    bool certs_equal = read_file(d1 / "certificates.json") == read_file(d2 / "certificates.json");
    bool bounds_equal = read_file(d1 / "bounds.csv") == read_file(d2 / "bounds.csv");
    bool nonempty = !read_file(d1 / "bounds.csv").empty();
    bool pass = certs_equal && bounds_equal && nonempty;
    verdict(13, pass,
            std::string("byte-identical reruns: certificates ") + (certs_equal ? "yes" : "no") +
                ", bounds " + (bounds_equal ? "yes" : "no"),
            clock.seconds());
    CHECK(pass);
}
