#include <doctest.h>

#include <cmath>
#include <memory>

#include "hklab/lab.hpp"
#include "hklab/zoo.hpp"
#include "test_support.hpp"

using namespace hklab;
using hklab::testing::Rng;

namespace {

struct LabFixture {
    std::shared_ptr<WeightedGraph> g;
    HeatSystem hs;
    IntrinsicMetric rho;

    explicit LabFixture(WeightedGraph graph)
        : g(std::make_shared<WeightedGraph>(std::move(graph))),
          hs(HeatSystem::build(g)),
          rho(default_intrinsic_metric(*g, 1.0)) {}

    VertexFunction random_nonneg(Rng& rng, double lo = 0.0, double hi = 2.0) const {
        VertexFunction f(g->vertex_count());
        for (int i = 0; i < f.size(); ++i) f[i] = rng.uniform(lo, hi);
        return f;
    }

    VertexFunction lipschitz_omega(Rng& rng, double kappa) const {
        int base = rng.below(g->vertex_count());
        VertexFunction w(g->vertex_count());
        for (int x = 0; x < w.size(); ++x) w[x] = -kappa * rho(base, x);
        return w;
    }
};

}  // namespace

TEST_CASE("quadrature resolves smooth integrands to the requested tolerance") {
    double one = integrate([](double t) { return std::exp(-t); }, 0.0, 3.0);
    CHECK(one == doctest::Approx(1.0 - std::exp(-3.0)).epsilon(1e-12));
    double poly = integrate([](double t) { return t * t * t; }, -1.0, 2.0);
    CHECK(poly == doctest::Approx(15.0 / 4.0).epsilon(1e-12));
    CHECK(integrate([](double) { return 1.0; }, 2.0, 2.0) == 0.0);
}

TEST_CASE("solution samples satisfy their differential identity") {
    Rng rng(11);
    LabFixture fx(zoo::cycle(12, zoo::Measure::counting));
    VertexFunction omega = fx.lipschitz_omega(rng, 0.6);
    VertexFunction f = fx.random_nonneg(rng);

    auto sol = SolutionSample::evolve(fx.hs, omega, f, 0.1, 2.0);
    CHECK(sol.kind() == SolutionSample::Kind::solution);
    CHECK(sol.audit().pass);

    auto super = SolutionSample::evolve(fx.hs, omega, f, 0.1, 2.0, 0.4);
    CHECK(super.kind() == SolutionSample::Kind::supersolution);
    CHECK(super.audit().pass);
    CHECK_FALSE(super.is_subsolution());

    // exact derivative against a centered difference
    double t = 0.9, h = 1e-6;
    VertexFunction fd = (sol.value(t + h) - sol.value(t - h)) / (2.0 * h);
    CHECK((fd - sol.derivative(t)).cwiseAbs().maxCoeff() < 1e-7);

    CHECK_THROWS_AS(SolutionSample::evolve(fx.hs, omega, (-f).eval(), 0.1, 2.0), GraphError);
}

TEST_CASE("elementary inequalities hold on mixed-scale draws") {
    auto reports = check_elementary({0.6, 1.0, 2.0, 7.5}, 20000, 77);
    REQUIRE(reports.size() == 3);
    for (const auto& r : reports) {
        CAPTURE(r.statement);
        CHECK(r.pass);
    }
    // a = b collapses the first inequality to 0 >= 0; b = 0, p = 1 gives equality
    CHECK(reports[0].margin >= -1e-12);
}

TEST_CASE("pointwise claim margin stays nonnegative over random data") {
    auto rep = check_pointwise_claim(10000, {1.0, 2.0, 3.0}, 5);
    CHECK(rep.pass);
    // constant v on the pair: the gradient term drops out, margin nonnegative
    auto rep_const = check_pointwise_claim(1, {1.0}, 999);
    CHECK(rep_const.pass);
}

TEST_CASE("energy estimate for subsolutions") {
    Rng rng(21);
    for (int trial = 0; trial < 6; ++trial) {
        LabFixture fx(trial % 2 == 0
                          ? zoo::cycle(14 + 2 * trial, zoo::Measure::counting)
                          : zoo::random_weighted(12 + trial, 0.3, {0.4, 1.6}, 100 + trial));
        VertexFunction omega = fx.lipschitz_omega(rng, rng.uniform(0.1, 1.0));
        auto v = SolutionSample::evolve(fx.hs, omega, fx.random_nonneg(rng), 0.2, 3.0);

        int center = rng.below(fx.g->vertex_count());
        double r2 = rng.uniform(2.5, 5.0);
        VertexSet b = ball(fx.rho, center, r2);
        double width = r2 - 1.0 - fx.rho.jump_size();
        if (width <= 0.1) continue;
        VertexFunction phi = cutoff(*fx.g, fx.rho, ball(fx.rho, center, 1.0), width);
        for (int x = 0; x < fx.g->vertex_count(); ++x)
            if (!contains(combinatorial_interior(*fx.g, b), x)) phi[x] = 0.0;

        for (double p : {1.0, 2.0, 3.0}) {
            auto rep = check_caccioppoli(*fx.g, v, phi, b, p, {0.3, 0.8, 1.5, 2.7});
            CAPTURE(trial);
            CAPTURE(p);
            CHECK(rep.pass);
        }
    }

    // zero data gives 0 <= 0
    LabFixture fx(zoo::cycle(8, zoo::Measure::counting));
    auto zero = SolutionSample::evolve(fx.hs, VertexFunction::Zero(8), VertexFunction::Zero(8),
                                       0.1, 1.0);
    VertexSet all{0, 1, 2, 3, 4, 5, 6, 7};
    auto rep = check_caccioppoli(*fx.g, zero, VertexFunction::Ones(8), all, 2.0, {0.5});
    CHECK(rep.pass);

    // support violation is rejected
    VertexFunction bad = VertexFunction::Ones(8);
    VertexSet part{0, 1, 2};
    CHECK_THROWS_WITH_AS(check_caccioppoli(*fx.g, zero, bad, part, 1.0, {0.5}),
                         doctest::Contains("support"), GraphError);
}

TEST_CASE("maximal inequality for subsolutions on nested balls") {
    Rng rng(31);
    LabFixture fx(zoo::cycle(30, zoo::Measure::normalizing));
    for (int trial = 0; trial < 8; ++trial) {
        VertexFunction omega = fx.lipschitz_omega(rng, rng.uniform(0.05, 0.8));
        auto v = SolutionSample::evolve(fx.hs, omega, fx.random_nonneg(rng), 0.1, 4.0);
        int center = rng.below(30);
        double r1 = rng.uniform(1.0, 3.0);
        double r2 = r1 + fx.rho.jump_size() + rng.uniform(0.5, 3.0);
        auto rep = check_maximal_subsolution(*fx.g, fx.rho, center, v, r1, r2, 0.2, 1.0, 3.5,
                                             rng.uniform() < 0.5 ? 1.0 : 2.0);
        CHECK(rep.pass);
    }
    // R2 barely above R1 + S: the constant blows up, a low-information pass
    Rng rng2(33);
    VertexFunction omega = fx.lipschitz_omega(rng2, 0.3);
    auto w = SolutionSample::evolve(fx.hs, omega, fx.random_nonneg(rng2), 0.1, 4.0);
    auto blow = check_maximal_subsolution(*fx.g, fx.rho, 0, w, 2.0,
                                          2.0 + fx.rho.jump_size() + 0.01, 0.2, 1.0, 3.5, 1.0);
    CHECK(blow.pass);
    CHECK(blow.rhs > 1e3 * std::max(1.0, blow.lhs));

    // ordering violations raise
    auto v = SolutionSample::evolve(fx.hs, VertexFunction::Zero(30),
                                    VertexFunction::Ones(30), 0.1, 4.0);
    CHECK_THROWS_AS(
        check_maximal_subsolution(*fx.g, fx.rho, 0, v, 2.0, 2.5, 0.2, 1.0, 3.5, 1.0),
        GraphError);
    CHECK_THROWS_AS(
        check_maximal_subsolution(*fx.g, fx.rho, 0, v, 1.0, 4.0, 1.0, 0.2, 3.5, 1.0),
        GraphError);
}

TEST_CASE("parabolic step under a certified Sobolev constant") {
    Rng rng(41);
    LabFixture fx(zoo::cycle(36, zoo::Measure::normalizing));
    double r1 = 2.0, r2 = 4.0, r3 = 6.5;
    auto sob = sobolev_constant(*fx.g, fx.rho, 0, r2, 3.0);
    for (int trial = 0; trial < 5; ++trial) {
        VertexFunction omega = fx.lipschitz_omega(rng, rng.uniform(0.05, 0.5));
        auto v = SolutionSample::evolve(fx.hs, omega, fx.random_nonneg(rng, 0.1, 2.0), 0.1, 5.0);
        auto rep = check_parabolic_step(*fx.g, fx.rho, 0, v, r1, r2, r3, 0.2, 1.2, 4.5, 1.0, 3.0,
                                        sob.constant);
        CHECK(rep.pass);
    }
    auto v = SolutionSample::evolve(fx.hs, VertexFunction::Zero(36), VertexFunction::Ones(36),
                                    0.1, 5.0);
    CHECK(check_parabolic_step(*fx.g, fx.rho, 0, v, r1, r2, r3, 0.2, 1.2, 4.5, 1.0, 3.0,
                               sob.constant)
              .pass);
    CHECK_THROWS_WITH_AS(check_parabolic_step(*fx.g, fx.rho, 0, v, r1, r2, r3, 0.2, 1.2, 4.5, 1.0,
                                              3.0, 0.0),
                         doctest::Contains("not certified"), GraphError);

    // monotone-constant sanity plus hypothesis sensitivity: the rhs scales
    // linearly with the fed Sobolev constant, so undersizing can only shrink it
    Rng rng2(43);
    VertexFunction omega = fx.lipschitz_omega(rng2, 0.2);
    auto u = SolutionSample::evolve(fx.hs, omega, fx.random_nonneg(rng2, 0.1, 2.0), 0.1, 5.0);
    auto full = check_parabolic_step(*fx.g, fx.rho, 0, u, r1, r2, r3, 0.2, 1.2, 4.5, 1.0, 3.0,
                                     sob.constant);
    auto tiny = check_parabolic_step(*fx.g, fx.rho, 0, u, r1, r2, r3, 0.2, 1.2, 4.5, 1.0, 3.0,
                                     sob.constant * 1e-12);
    CHECK(tiny.rhs == doctest::Approx(full.rhs * 1e-12).epsilon(1e-9));
    CHECK_FALSE(tiny.pass);  // negative control: an undersized constant is detected
}

TEST_CASE("space-time iteration at the step-count boundary and one step up") {
    Rng rng(47);
    LabFixture fx(zoo::cycle(160, zoo::Measure::normalizing));
    GeometryParams params{3.0, 1.0, std::numeric_limits<double>::infinity()};
    for (double radius : {32.0, 72.0}) {
        auto sv = sv_check(*fx.g, fx.rho, 0, radius / 2.0, radius, params.n, params.d, {},
                           {2, 120, 3});
        CHECK(moser_step_count(radius, 1.0) == (radius == 32.0 ? 0 : 1));
        VertexFunction omega = fx.lipschitz_omega(rng, 0.01);
        double T = radius * radius + 2.0;
        auto v = SolutionSample::evolve(fx.hs, omega, fx.random_nonneg(rng, 0.1, 1.2), 1.0,
                                        T + radius * radius + 1.0);
        auto rep = check_spacetime_iteration(*fx.g, fx.rho, 0, v, radius, T, 0.5, params.n,
                                             params.d, sv.sobolev, sv.doubling);
        CHECK(rep.pass);
        CHECK(rep.log_scale);
    }
    auto v = SolutionSample::evolve(fx.hs, VertexFunction::Zero(160),
                                    VertexFunction::Ones(160), 1.0, 3000.0);
    CHECK_THROWS_AS(check_spacetime_iteration(*fx.g, fx.rho, 0, v, 20.0, 1500.0, 0.5, 3.0, 1.0,
                                              1.0, 1.0),
                    GraphError);
}

TEST_CASE("interpolation between lp spaces") {
    Rng rng(51);
    for (int trial = 0; trial < 2000; ++trial) {
        int n = 1 + rng.below(12);
        Eigen::VectorXd mu(n), v(n);
        for (int i = 0; i < n; ++i) {
            mu[i] = std::exp(rng.uniform(-3.0, 2.0));
            v[i] = rng.uniform(-4.0, 4.0);
        }
        double p = rng.uniform() < 0.2 ? std::numeric_limits<double>::infinity()
                                       : rng.uniform(1.0, 8.0);
        CHECK(check_interpolation(mu, v, p).pass);
    }
    // singleton space: equality up to the mu normalization
    Eigen::VectorXd mu1(1), v1(1);
    mu1 << 0.7;
    v1 << -2.0;
    auto rep = check_interpolation(mu1, v1, 2.0);
    CHECK(rep.pass);
    // ||v||_inf = 2, ||mu^{-1}||_2 ||v||_2 = (0.7/0.49)^{1/2} (0.7*4)^{1/2} = 2
    CHECK(rep.lhs == doctest::Approx(2.0));
    CHECK(rep.rhs == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("supersolution maximal inequality on fixed space") {
    Rng rng(61);
    LabFixture fx(zoo::cycle(16, zoo::Measure::counting));
    VertexSet b = ball(fx.rho, 0, 4.0);
    double vol = 0.0;
    for (int x : b) vol += fx.g->measure(x);
    Eigen::VectorXd mu = fx.g->measure() / vol;

    for (int trial = 0; trial < 10; ++trial) {
        VertexFunction omega = fx.lipschitz_omega(rng, rng.uniform(0.05, 0.6));
        double ramp = rng.uniform() < 0.5 ? 0.0 : rng.uniform(0.0, 0.5);
        auto v = SolutionSample::evolve(fx.hs, omega, fx.random_nonneg(rng, 0.1, 1.5), 0.1, 4.0,
                                        ramp);
        double s = trial == 0 ? 1.0 : rng.uniform(1.0, 3.0);
        double p = rng.uniform() < 0.3 ? std::numeric_limits<double>::infinity()
                                       : rng.uniform(1.5, 6.0);
        auto rep = check_supersolution_maximal(*fx.g, b, mu, v, 0.3, 0.9, 2.0, 3.6, s, p);
        CHECK(rep.pass);
    }

    // constant initial data on the boundaryless graph stays constant
    auto v = SolutionSample::evolve(fx.hs, VertexFunction::Zero(16),
                                    VertexFunction::Constant(16, 1.4), 0.1, 4.0);
    auto rep = check_supersolution_maximal(*fx.g, b, mu, v, 0.3, 0.9, 2.0, 3.6, 2.0, 3.0);
    CHECK(rep.pass);
    CHECK(rep.lhs == doctest::Approx(1.4 * 1.4));
}

TEST_CASE("time iteration: single step and iterated sup bound") {
    Rng rng(71);
    LabFixture fx(zoo::cycle(18, zoo::Measure::counting));
    VertexSet b = ball(fx.rho, 2, 5.0);
    double vol = 0.0;
    for (int x : b) vol += fx.g->measure(x);
    Eigen::VectorXd mu = fx.g->measure() / vol;

    for (int trial = 0; trial < 8; ++trial) {
        VertexFunction omega = fx.lipschitz_omega(rng, rng.uniform(0.05, 0.5));
        auto v = SolutionSample::evolve(fx.hs, omega, fx.random_nonneg(rng, 0.1, 1.5), 0.05, 6.0,
                                        rng.uniform(0.0, 0.3));
        double p = trial % 2 == 0 ? std::numeric_limits<double>::infinity() : 3.0;
        double q = std::isinf(p) ? 1.0 : p / (p - 1.0);
        double beta = 1.0 + rng.uniform(0.2, 0.9) / q;
        auto step = check_time_iteration_step(*fx.g, b, mu, v, 0.3, 0.8, 1.6, 2.8, 1.0 + trial,
                                              p, beta);
        CHECK(step.pass);
        auto full = check_time_iteration(*fx.g, b, mu, v, 3.0, 0.9, trial % 3, p, beta);
        CHECK(full.pass);
    }

    auto v = SolutionSample::evolve(fx.hs, VertexFunction::Zero(18), VertexFunction::Ones(18),
                                    0.05, 6.0);
    CHECK_THROWS_WITH_AS(
        check_time_iteration_step(*fx.g, b, mu, v, 0.3, 0.8, 1.6, 2.8, 1.0, 3.0, 1.9),
        doctest::Contains("beta"), GraphError);

    // constant data makes the integral closed-form, exposing G for an
    // independent reimplementation of its formula
    double c = 1.3;
    auto vc = SolutionSample::evolve(fx.hs, VertexFunction::Zero(18),
                                     VertexFunction::Constant(18, c), 0.05, 6.0);
    double T = 3.0, delta = 0.9, p = 3.0, beta = 1.2;
    int k = 2;
    double q = p / (p - 1.0);
    auto rep = check_time_iteration(*fx.g, b, mu, vc, T, delta, k, p, beta);
    CHECK(rep.pass);
    double mu_b = 0.0;
    for (int x : b) mu_b += mu[x];
    Eigen::VectorXd deg(18), inv_mu = mu.cwiseInverse();
    for (int x = 0; x < 18; ++x) deg[x] = fx.g->weighted_degree(x);
    double bk = std::pow(beta, k);
    double log_g = std::log(4.0) * ((4.0 + 1.0 / std::log(beta)) + beta / (beta - 1.0)) /
                       (beta - 1.0) +
                   1.0 / bk *
                       std::log((std::max(1.0, std::pow(mu_b, 1.0 / p)) +
                                 delta * T * lp_norm(b, mu, deg, p)) *
                                std::pow(lp_norm(b, mu, inv_mu, p), q));
    // v = c identically: rhs = log G + log c^2 + log(mu(B))/(beta^k q)
    CHECK(rep.rhs == doctest::Approx(log_g + 2.0 * std::log(c) + std::log(mu_b) / (bk * q))
                         .epsilon(1e-9));
    CHECK(rep.lhs == doctest::Approx(2.0 * std::log(c)).epsilon(1e-12));
}

TEST_CASE("l2 mean value inequality with pivot side-check") {
    Rng rng(81);
    // p = infinity: R0 = 72 S; jump size on the normalized cycle is 1
    LabFixture fx(zoo::cycle(160, zoo::Measure::normalizing));
    GeometryParams params{3.0, 1.0, std::numeric_limits<double>::infinity()};
    double radius = 72.0;
    auto sv = sv_check(*fx.g, fx.rho, 0, radius / 2.0, radius, params.n, params.d, {}, {2, 150, 3});

    VertexFunction omega = fx.lipschitz_omega(rng, 0.02);
    double T = radius * radius + 10.0;
    auto v = SolutionSample::evolve(fx.hs, omega, fx.random_nonneg(rng, 0.1, 1.0), 1.0,
                                    T + radius * radius + 1.0);
    auto result = check_mv2(*fx.g, fx.rho, 0, v, radius, T, 0.5, params, sv.sobolev, sv.doubling);
    CHECK(result.main.pass);
    CHECK(result.main.log_scale);
    CHECK(result.pivot.pass);

    CHECK_THROWS_WITH_AS(check_mv2(*fx.g, fx.rho, 0, v, 40.0, T, 0.5, params, sv.sobolev,
                                   sv.doubling),
                         doctest::Contains("needs R >="), GraphError);
    CHECK_THROWS_WITH_AS(check_mv2(*fx.g, fx.rho, 0, v, radius, T, 0.5, params, 0.0, sv.doubling),
                         doctest::Contains("not certified"), GraphError);
}

TEST_CASE("pivot holds on a parameter grid") {
    for (double n : {2.5, 3.0, 4.0, 6.0})
        for (double q : {1.0, 1.5, 2.0, 4.0}) {
            GeometryParams params{n, 1.0, q <= 1.0 ? std::numeric_limits<double>::infinity()
                                                   : q / (q - 1.0)};
            double r0 = mean_value_min_radius(1.0, n, q);
            for (double radius : {r0, 2.0 * r0, 10.0 * r0}) {
                int kappa = kappa_theta(radius / 2.0, 1.0, params.beta()).kappa;
                CHECK(std::pow(params.alpha(), kappa) >=
                      std::pow(params.beta(), kappa) * q * (1.0 - 1e-12));
            }
        }
}

TEST_CASE("abstract kernel bound via semigroup control") {
    Rng rng(91);
    LabFixture fx(zoo::cycle(72, zoo::Measure::normalizing));
    GeometryParams params{3.0, 1.0, std::numeric_limits<double>::infinity()};
    double r = 16.0, R = 32.0;  // diameter 36, so the window stays certifiable
    int far = 36;               // antipodal center
    auto sv = sv_check(*fx.g, fx.rho, 0, r, R, params.n, params.d, {}, {2, 120, 5});
    auto sv2 = sv_check(*fx.g, fx.rho, far, r, R, params.n, params.d, {}, {2, 120, 5});

    double T = 4.0 * r * r;
    double delta = 0.5;
    auto phi1 = make_davies_phi(*fx.g, fx.rho, 0, T, delta, r, R, params, sv.sobolev, sv.doubling);
    auto phi2 =
        make_davies_phi(*fx.g, fx.rho, far, T, delta, r, R, params, sv2.sobolev, sv2.doubling);

    std::vector<VertexFunction> samples;
    for (int i = 0; i < 3; ++i) samples.push_back(fx.random_nonneg(rng, 0.0, 2.0));

    auto rep = check_davies_abstract(fx.hs, fx.rho, 0, far, T, phi1, phi2,
                                     {0.0, 0.005, 0.01, 0.02, 0.05}, samples);
    CHECK(rep.pass);

    // with positive separation, a small kappa > 0 beats the kappa = 0 member
    auto at_zero = check_davies_abstract(fx.hs, fx.rho, 0, far, T, phi1, phi2, {0.0}, samples);
    CHECK(rep.rhs <= at_zero.rhs + 1e-12);
    CHECK(rep.rhs < at_zero.rhs - 0.01);
}

TEST_CASE("end-to-end assembled bound against the exact kernel") {
    LabFixture fx(zoo::cycle(100, zoo::Measure::normalizing));
    GeometryParams params{3.0, 1.0, std::numeric_limits<double>::infinity()};
    BoundGrid grid;
    grid.pairs = {{0, 25}, {0, 50}, {13, 13}};
    grid.times = {8.0 * 16.0 * 16.0, 8.0 * 16.0 * 16.0 * 4.0};
    auto reports = check_final_theorem(fx.hs, fx.rho, {0, 13, 25, 50}, 16.0, 34.0, params, grid,
                                       {}, {2, 120, 7});
    CHECK(reports.size() == 6);
    for (const auto& r : reports) CHECK(r.pass);

    // corrupted constant: negative control
    for (const auto& r : reports) CHECK_FALSE(r.lhs <= r.rhs - 3000.0);
}

TEST_CASE("parallel runner keeps job order and captures failures") {
    std::vector<std::function<CheckReport()>> jobs;
    for (int i = 0; i < 16; ++i)
        jobs.push_back([i] {
            CheckReport r;
            r.statement = "job-" + std::to_string(i);
            r.pass = true;
            return r;
        });
    jobs.push_back([]() -> CheckReport { throw GraphError("deliberate failure"); });
    auto results = run_parallel(jobs, 4);
    REQUIRE(results.size() == 17);
    for (int i = 0; i < 16; ++i) CHECK(results[static_cast<size_t>(i)].statement == "job-" + std::to_string(i));
    CHECK(results[16].statement == "error");
    CHECK_FALSE(results[16].pass);
    CHECK(results[16].note.find("deliberate") != std::string::npos);
}
