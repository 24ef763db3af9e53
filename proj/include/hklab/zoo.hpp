#pragma once

#include <cstdint>
#include <string>

#include "hklab/graph.hpp"

namespace hklab::zoo {

enum class Measure {
    counting,     // m = 1
    normalizing,  // m = deg, the normalized Laplacian
    uniform,      // m = constant user value
};

struct WeightRange {
    double lo = 1.0;
    double hi = 1.0;
};

WeightedGraph path(int n, Measure measure = Measure::counting, bool dirichlet_ends = false,
                   double uniform_m = 1.0);
WeightedGraph cycle(int n, Measure measure = Measure::counting, double uniform_m = 1.0);
WeightedGraph lattice_box(int w, int h, Measure measure = Measure::counting,
                          bool dirichlet_frame = false, double uniform_m = 1.0);
WeightedGraph complete(int n, Measure measure = Measure::counting, double uniform_m = 1.0);

/// Rooted antitree: one root sphere, then spheres of floor(k^gamma) vertices,
/// consecutive spheres joined completely bipartitely; unit weights. With
/// `truncate` the outermost sphere is flagged Dirichlet (not deleted), so
/// interior vertices keep their true degrees.
WeightedGraph antitree(double gamma, int sphere_count, Measure measure = Measure::counting,
                       bool truncate = false, double uniform_m = 1.0);

/// Erdos-Renyi draw with uniform weights in `weights`; retries disconnected
/// draws up to a fixed budget, then throws.
WeightedGraph random_weighted(int n, double edge_prob, WeightRange weights, std::uint64_t seed,
                              Measure measure = Measure::counting, double uniform_m = 1.0);

/// Scenario-file stanza describing one generator invocation.
struct GeneratorSpec {
    std::string family;  // path|cycle|lattice_box|complete|antitree|random_weighted
    int n = 0;
    int width = 0, height = 0;
    int sphere_count = 0;
    double gamma = 1.0;
    double edge_prob = 0.5;
    WeightRange weights;
    std::string measure = "counting";
    double uniform_m = 1.0;
    bool dirichlet = false;
    std::uint64_t seed = 1;
};

WeightedGraph generate(const GeneratorSpec& spec);

}  // namespace hklab::zoo
