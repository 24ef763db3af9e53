#pragma once

#include <Eigen/Core>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hklab {

using VertexFunction = Eigen::VectorXd;
using VertexSet = std::vector<int>;  // sorted, unique dense indices

/// Raw graph description as parsed from a file or assembled by a generator,
/// before any invariant has been established. Edges may appear in either or
/// both orientations here; `validate` reports every inconsistency.
struct GraphData {
    struct Vertex {
        std::string id;
        double m = 1.0;
    };
    struct Edge {
        std::string u, v;
        double b = 1.0;
    };
    std::vector<Vertex> vertices;
    std::vector<Edge> edges;
    std::vector<std::string> dirichlet;
};

struct Violation {
    std::string where;  // vertex id or "u-v" edge label
    std::string what;
};

/// Diagnostic scan of a raw graph description. Never throws; an empty result
/// means every invariant holds (symmetry, b >= 0, no self loops, m > 0,
/// connectivity, known dirichlet ids, no duplicate edges).
std::vector<Violation> validate(const GraphData& data);

class GraphError : public std::runtime_error {
  public:
    explicit GraphError(const std::string& msg, std::vector<Violation> v = {})
        : std::runtime_error(msg), violations(std::move(v)) {}
    std::vector<Violation> violations;
};

/// Finite weighted graph over (X, m): symmetric edge weights b, strictly
/// positive vertex measure m, optionally a Dirichlet boundary subset used to
/// truncate infinite graphs. Immutable after construction; every operation on
/// it is a pure function, safe for concurrent reads.
class WeightedGraph {
  public:
    struct Edge {
        int u, v;       // u < v
        double weight;  // b(u,v) > 0
    };

    /// Canonicalizes and checks `data`; throws GraphError listing all
    /// violations if any invariant fails.
    static WeightedGraph build(const GraphData& data);

    int vertex_count() const { return static_cast<int>(ids_.size()); }
    int edge_count() const { return static_cast<int>(edges_.size()); }

    const std::string& id_of(int x) const { return ids_[static_cast<size_t>(x)]; }
    /// Dense index for a vertex identifier; throws on unknown id.
    int index_of(const std::string& id) const;
    bool has_vertex(const std::string& id) const;

    double measure(int x) const { return m_[x]; }
    const Eigen::VectorXd& measure() const { return m_; }
    double total_measure() const { return m_.sum(); }

    /// deg(x) = sum_y b(x,y)
    double deg(int x) const { return deg_[x]; }
    /// Deg(x) = deg(x)/m(x), the weighted vertex degree
    double weighted_degree(int x) const { return deg_[x] / m_[x]; }

    std::span<const std::pair<int, double>> neighbors(int x) const {
        return {adj_[static_cast<size_t>(x)].data(), adj_[static_cast<size_t>(x)].size()};
    }
    const std::vector<Edge>& edges() const { return edges_; }

    bool is_dirichlet(int x) const { return dirichlet_[static_cast<size_t>(x)] != 0; }
    bool has_dirichlet() const { return interior_.size() != ids_.size(); }
    /// Non-Dirichlet vertices, ascending.
    const VertexSet& interior_vertices() const { return interior_; }

    GraphData to_data() const;

  private:
    WeightedGraph() = default;

    std::vector<std::string> ids_;
    Eigen::VectorXd m_;
    Eigen::VectorXd deg_;
    std::vector<Edge> edges_;
    std::vector<std::vector<std::pair<int, double>>> adj_;
    std::vector<char> dirichlet_;
    VertexSet interior_;
};

/// Divergence-form Laplacian: (Delta f)(x) = (1/m(x)) sum_y b(x,y)(f(x)-f(y)).
/// Dirichlet vertices are zero-extended: their f-values are treated as 0 and
/// the output vanishes there.
VertexFunction laplacian_apply(const WeightedGraph& g, const VertexFunction& f);

/// |nabla f|(x) = ( (1/m(x)) sum_y b(x,y)(f(x)-f(y))^2 )^{1/2}
double gradient_norm(const WeightedGraph& g, const VertexFunction& f, int x);

/// Combinatorial interior: vertices of A with no edge leaving A.
VertexSet combinatorial_interior(const WeightedGraph& g, const VertexSet& a);

/// Sandwiched Laplacian: (Delta_omega v)(x) = e^{omega(x)} Delta(e^{-omega} v)(x).
VertexFunction sandwiched_apply(const WeightedGraph& g, const VertexFunction& omega,
                                const VertexFunction& v);

/// h(omega) = sup_x sum_y (b(x,y)/m(x)) |(e^w(x)-e^w(y))(e^-w(x)-e^-w(y))|
///          = sup_x sum_y (b(x,y)/m(x)) 2(cosh(w(x)-w(y)) - 1)
double h_omega(const WeightedGraph& g, const VertexFunction& omega);

/// Dirichlet energy form: (1/2) sum_{x,y} b(x,y)(f(x)-f(y))(h(x)-h(y)).
double energy_form(const WeightedGraph& g, const VertexFunction& f, const VertexFunction& h);

/// m-weighted inner product on l2(X,m).
double inner_m(const WeightedGraph& g, const VertexFunction& f, const VertexFunction& h);

bool contains(const VertexSet& s, int x);
VertexSet sorted_unique(VertexSet s);

}  // namespace hklab
