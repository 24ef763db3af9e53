#include <doctest.h>

#include <cmath>
#include <memory>

#include "hklab/semigroup.hpp"
#include "hklab/zoo.hpp"

using namespace hklab;

TEST_CASE("generators produce valid graphs") {
    std::vector<WeightedGraph> graphs;
    graphs.push_back(zoo::path(6));
    graphs.push_back(zoo::cycle(5));
    graphs.push_back(zoo::lattice_box(3, 4, zoo::Measure::counting, true));
    graphs.push_back(zoo::complete(7, zoo::Measure::normalizing));
    graphs.push_back(zoo::antitree(1.5, 5, zoo::Measure::counting, true));
    graphs.push_back(zoo::random_weighted(12, 0.4, {0.5, 1.5}, 3));
    for (const auto& g : graphs) CHECK(validate(g.to_data()).empty());
}

TEST_CASE("cycle(5) with counting measure has degree 2 everywhere") {
    auto g = zoo::cycle(5, zoo::Measure::counting);
    CHECK(g.vertex_count() == 5);
    for (int x = 0; x < 5; ++x) CHECK(g.deg(x) == 2.0);
}

TEST_CASE("normalizing measure gives Deg = 1 on every generator") {
    std::vector<WeightedGraph> graphs;
    graphs.push_back(zoo::cycle(9, zoo::Measure::normalizing));
    graphs.push_back(zoo::lattice_box(3, 3, zoo::Measure::normalizing));
    graphs.push_back(zoo::antitree(0.9, 5, zoo::Measure::normalizing));
    graphs.push_back(zoo::random_weighted(10, 0.5, {0.2, 2.0}, 5, zoo::Measure::normalizing));
    for (const auto& g : graphs)
        for (int x = 0; x < g.vertex_count(); ++x)
            CHECK(g.weighted_degree(x) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("Dirichlet path has positive spectral bottom") {
    auto g = zoo::path(300, zoo::Measure::normalizing, /*dirichlet_ends=*/true);
    auto hs = HeatSystem::build(std::make_shared<WeightedGraph>(std::move(g)));
    CHECK(hs.lambda_bottom() > 0.0);
}

TEST_CASE("random generator is reproducible") {
    auto a = zoo::random_weighted(20, 0.3, {0.5, 1.5}, 42);
    auto b = zoo::random_weighted(20, 0.3, {0.5, 1.5}, 42);
    auto c = zoo::random_weighted(20, 0.3, {0.5, 1.5}, 43);
    REQUIRE(a.edge_count() == b.edge_count());
    for (int i = 0; i < a.edge_count(); ++i) {
        CHECK(a.edges()[static_cast<size_t>(i)].u == b.edges()[static_cast<size_t>(i)].u);
        CHECK(a.edges()[static_cast<size_t>(i)].weight == b.edges()[static_cast<size_t>(i)].weight);
    }
    bool differs = a.edge_count() != c.edge_count();
    for (int i = 0; !differs && i < a.edge_count(); ++i)
        differs = a.edges()[static_cast<size_t>(i)].weight != c.edges()[static_cast<size_t>(i)].weight;
    CHECK(differs);
}

TEST_CASE("antitree spheres, degrees, truncation") {
    auto g = zoo::antitree(1.0, 4, zoo::Measure::counting);
    // sphere sizes 1, 1, 2, 3
    CHECK(g.vertex_count() == 7);
    std::vector<int> sizes{1, 1, 2, 3};
    for (int k = 0; k < 4; ++k) {
        int expected = (k == 0 ? 0 : sizes[static_cast<size_t>(k - 1)]) +
                       (k == 3 ? 0 : sizes[static_cast<size_t>(k + 1)]);
        int v = g.index_of(std::to_string(k) + ":0");
        CHECK(g.deg(v) == static_cast<double>(expected));
    }

    auto t = zoo::antitree(1.0, 4, zoo::Measure::counting, /*truncate=*/true);
    CHECK(t.has_dirichlet());
    for (int i = 0; i < 3; ++i) CHECK(t.is_dirichlet(t.index_of("3:" + std::to_string(i))));
    // interior vertices keep their true degrees
    for (int k = 0; k < 3; ++k) {
        int v = t.index_of(std::to_string(k) + ":0");
        CHECK(t.deg(v) == g.deg(g.index_of(std::to_string(k) + ":0")));
    }

    CHECK_THROWS_AS(zoo::antitree(2.0, 4), GraphError);
    CHECK_THROWS_AS(zoo::antitree(0.0, 4), GraphError);
}

TEST_CASE("antitree degrees grow without bound in the sphere count") {
    auto max_deg = [](const WeightedGraph& g) {
        double out = 0.0;
        for (int x = 0; x < g.vertex_count(); ++x) out = std::max(out, g.deg(x));
        return out;
    };
    auto big = zoo::antitree(1.2, 12, zoo::Measure::counting);
    auto small = zoo::antitree(1.2, 6, zoo::Measure::counting);
    // deg on sphere k is s_{k-1} + s_{k+1}; the widest interior sphere dominates
    CHECK(max_deg(big) == std::floor(std::pow(9.0, 1.2)) + std::floor(std::pow(11.0, 1.2)));
    CHECK(max_deg(big) > max_deg(small));
}

TEST_CASE("generator spec dispatch") {
    zoo::GeneratorSpec spec;
    spec.family = "cycle";
    spec.n = 8;
    spec.measure = "normalizing";
    auto g = zoo::generate(spec);
    CHECK(g.vertex_count() == 8);
    CHECK(g.measure(0) == 2.0);

    spec.family = "unknown";
    CHECK_THROWS_AS(zoo::generate(spec), GraphError);
    spec.family = "cycle";
    spec.measure = "bogus";
    CHECK_THROWS_AS(zoo::generate(spec), GraphError);
}
