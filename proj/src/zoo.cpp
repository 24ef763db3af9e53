#include "hklab/zoo.hpp"

#include <cmath>
#include <random>
#include <unordered_map>

namespace hklab::zoo {

namespace {

WeightedGraph finish(GraphData data, Measure measure, double uniform_m) {
    switch (measure) {
        case Measure::counting:
            for (auto& v : data.vertices) v.m = 1.0;
            break;
        case Measure::uniform:
            for (auto& v : data.vertices) v.m = uniform_m;
            break;
        case Measure::normalizing: {
            std::unordered_map<std::string, double> deg;
            for (const auto& e : data.edges) {
                deg[e.u] += e.b;
                deg[e.v] += e.b;
            }
            for (auto& v : data.vertices) v.m = deg[v.id];
            break;
        }
    }
    return WeightedGraph::build(data);
}

}  // namespace

WeightedGraph path(int n, Measure measure, bool dirichlet_ends, double uniform_m) {
    if (n < 2) throw GraphError("path needs n >= 2");
    GraphData d;
    for (int i = 0; i < n; ++i) d.vertices.push_back({std::to_string(i + 1), 1.0});
    for (int i = 0; i + 1 < n; ++i)
        d.edges.push_back({std::to_string(i + 1), std::to_string(i + 2), 1.0});
    if (dirichlet_ends) d.dirichlet = {"1", std::to_string(n)};
    return finish(std::move(d), measure, uniform_m);
}

WeightedGraph cycle(int n, Measure measure, double uniform_m) {
    if (n < 3) throw GraphError("cycle needs n >= 3");
    GraphData d;
    for (int i = 0; i < n; ++i) d.vertices.push_back({std::to_string(i + 1), 1.0});
    for (int i = 0; i < n; ++i)
        d.edges.push_back({std::to_string(i + 1), std::to_string((i + 1) % n + 1), 1.0});
    return finish(std::move(d), measure, uniform_m);
}

WeightedGraph lattice_box(int w, int h, Measure measure, bool dirichlet_frame, double uniform_m) {
    if (w < 2 || h < 2) throw GraphError("lattice box needs w, h >= 2");
    GraphData d;
    auto name = [w](int i, int j) { return std::to_string(j * w + i + 1); };
    for (int j = 0; j < h; ++j)
        for (int i = 0; i < w; ++i) {
            d.vertices.push_back({name(i, j), 1.0});
            if (dirichlet_frame && (i == 0 || j == 0 || i == w - 1 || j == h - 1))
                d.dirichlet.push_back(name(i, j));
        }
    for (int j = 0; j < h; ++j)
        for (int i = 0; i < w; ++i) {
            if (i + 1 < w) d.edges.push_back({name(i, j), name(i + 1, j), 1.0});
            if (j + 1 < h) d.edges.push_back({name(i, j), name(i, j + 1), 1.0});
        }
    return finish(std::move(d), measure, uniform_m);
}

WeightedGraph complete(int n, Measure measure, double uniform_m) {
    if (n < 2) throw GraphError("complete graph needs n >= 2");
    GraphData d;
    for (int i = 0; i < n; ++i) d.vertices.push_back({std::to_string(i + 1), 1.0});
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            d.edges.push_back({std::to_string(i + 1), std::to_string(j + 1), 1.0});
    return finish(std::move(d), measure, uniform_m);
}

WeightedGraph antitree(double gamma, int sphere_count, Measure measure, bool truncate,
                       double uniform_m) {
    if (!(gamma > 0.0 && gamma < 2.0)) throw GraphError("antitree exponent must lie in (0,2)");
    if (sphere_count < 2) throw GraphError("antitree needs at least 2 spheres");
    GraphData d;
    std::vector<std::vector<std::string>> spheres(static_cast<size_t>(sphere_count));
    for (int k = 0; k < sphere_count; ++k) {
        // floor(0^gamma) would empty the root sphere; a single root keeps it rooted
        int size = k == 0 ? 1 : static_cast<int>(std::floor(std::pow(k, gamma)));
        for (int i = 0; i < size; ++i) {
            std::string id = std::to_string(k) + ":" + std::to_string(i);
            spheres[static_cast<size_t>(k)].push_back(id);
            d.vertices.push_back({id, 1.0});
        }
    }
    for (int k = 0; k + 1 < sphere_count; ++k)
        for (const auto& u : spheres[static_cast<size_t>(k)])
            for (const auto& v : spheres[static_cast<size_t>(k + 1)])
                d.edges.push_back({u, v, 1.0});
    if (truncate) d.dirichlet = spheres.back();
    return finish(std::move(d), measure, uniform_m);
}

WeightedGraph random_weighted(int n, double edge_prob, WeightRange weights, std::uint64_t seed,
                              Measure measure, double uniform_m) {
    if (n < 2) throw GraphError("random graph needs n >= 2");
    if (!(edge_prob > 0.0 && edge_prob <= 1.0)) throw GraphError("edge probability must be in (0,1]");
    std::mt19937_64 rng(seed);
    auto uniform = [&rng](double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    };
    constexpr int retry_budget = 100;
    for (int attempt = 0; attempt < retry_budget; ++attempt) {
        GraphData d;
        for (int i = 0; i < n; ++i) d.vertices.push_back({std::to_string(i + 1), 1.0});
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (uniform(0.0, 1.0) < edge_prob)
                    d.edges.push_back(
                        {std::to_string(i + 1), std::to_string(j + 1), uniform(weights.lo, weights.hi)});
        if (validate(d).empty()) return finish(std::move(d), measure, uniform_m);
    }
    throw GraphError("random graph stayed disconnected after " + std::to_string(retry_budget) +
                     " attempts");
}

WeightedGraph generate(const GeneratorSpec& spec) {
    Measure measure = Measure::counting;
    if (spec.measure == "normalizing")
        measure = Measure::normalizing;
    else if (spec.measure == "uniform")
        measure = Measure::uniform;
    else if (spec.measure != "counting")
        throw GraphError("unknown measure choice: " + spec.measure);

    if (spec.family == "path") return path(spec.n, measure, spec.dirichlet, spec.uniform_m);
    if (spec.family == "cycle") return cycle(spec.n, measure, spec.uniform_m);
    if (spec.family == "lattice_box")
        return lattice_box(spec.width, spec.height, measure, spec.dirichlet, spec.uniform_m);
    if (spec.family == "complete") return complete(spec.n, measure, spec.uniform_m);
    if (spec.family == "antitree")
        return antitree(spec.gamma, spec.sphere_count, measure, spec.dirichlet, spec.uniform_m);
    if (spec.family == "random_weighted")
        return random_weighted(spec.n, spec.edge_prob, spec.weights, spec.seed, measure,
                               spec.uniform_m);
    throw GraphError("unknown generator family: " + spec.family);
}

}  // namespace hklab::zoo
