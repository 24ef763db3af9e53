#include "hklab/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>
#include <unordered_set>

namespace hklab {

namespace {

std::unordered_map<std::string, int> index_map(const GraphData& data) {
    std::unordered_map<std::string, int> idx;
    idx.reserve(data.vertices.size());
    for (size_t i = 0; i < data.vertices.size(); ++i)
        idx.emplace(data.vertices[i].id, static_cast<int>(i));
    return idx;
}

bool connected_ignoring_boundary(int n, const std::vector<std::vector<int>>& adj) {
    if (n == 0) return false;
    std::vector<char> seen(static_cast<size_t>(n), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
        int x = stack.back();
        stack.pop_back();
        for (int y : adj[static_cast<size_t>(x)]) {
            if (!seen[static_cast<size_t>(y)]) {
                seen[static_cast<size_t>(y)] = 1;
                ++count;
                stack.push_back(y);
            }
        }
    }
    return count == n;
}

}  // namespace

std::vector<Violation> validate(const GraphData& data) {
    std::vector<Violation> out;
    auto idx = index_map(data);
    if (idx.size() != data.vertices.size())
        out.push_back({"", "duplicate vertex identifiers"});
    for (const auto& v : data.vertices) {
        if (!(v.m > 0.0))
            out.push_back({v.id, "measure positivity violation: m must be > 0"});
    }

    // One slot per undirected pair; a second entry in the same orientation is
    // a duplicate, a mismatched weight in the reverse orientation breaks
    // symmetry.
    std::map<std::pair<int, int>, double> forward;
    std::vector<std::vector<int>> adj(data.vertices.size());
    for (const auto& e : data.edges) {
        auto iu = idx.find(e.u);
        auto iv = idx.find(e.v);
        const std::string label = e.u + "-" + e.v;
        if (iu == idx.end() || iv == idx.end()) {
            out.push_back({label, "edge references unknown vertex"});
            continue;
        }
        if (iu->second == iv->second) {
            out.push_back({label, "self loop: b(x,x) must be 0"});
            continue;
        }
        if (!(e.b >= 0.0)) {
            out.push_back({label, "edge weight must be nonnegative"});
            continue;
        }
        if (e.b == 0.0) continue;  // explicit zero weight: not an edge
        int a = std::min(iu->second, iv->second);
        int b = std::max(iu->second, iv->second);
        auto [it, inserted] = forward.try_emplace({a, b}, e.b);
        if (inserted) {
            adj[static_cast<size_t>(a)].push_back(b);
            adj[static_cast<size_t>(b)].push_back(a);
        } else if (it->second != e.b) {
            out.push_back({label, "symmetry violation: b(x,y) != b(y,x)"});
        } else {
            out.push_back({label, "duplicate edge"});
        }
    }

    for (const auto& id : data.dirichlet) {
        if (idx.find(id) == idx.end())
            out.push_back({id, "dirichlet set references unknown vertex"});
    }

    if (!connected_ignoring_boundary(static_cast<int>(data.vertices.size()), adj))
        out.push_back({"", "graph is not connected"});
    return out;
}

WeightedGraph WeightedGraph::build(const GraphData& data) {
    auto violations = validate(data);
    if (!violations.empty()) {
        std::string msg = "invalid graph:";
        for (const auto& v : violations) {
            msg += " [" + v.where + "] " + v.what + ";";
        }
        throw GraphError(msg, std::move(violations));
    }

    WeightedGraph g;
    auto idx = index_map(data);
    const int n = static_cast<int>(data.vertices.size());
    g.ids_.resize(static_cast<size_t>(n));
    g.m_.resize(n);
    for (int i = 0; i < n; ++i) {
        g.ids_[static_cast<size_t>(i)] = data.vertices[static_cast<size_t>(i)].id;
        g.m_[i] = data.vertices[static_cast<size_t>(i)].m;
    }

    std::map<std::pair<int, int>, double> canon;
    for (const auto& e : data.edges) {
        if (e.b == 0.0) continue;
        int a = idx.at(e.u), b = idx.at(e.v);
        canon.emplace(std::minmax(a, b), e.b);
    }
    g.adj_.resize(static_cast<size_t>(n));
    g.deg_ = Eigen::VectorXd::Zero(n);
    g.edges_.reserve(canon.size());
    for (const auto& [uv, w] : canon) {
        g.edges_.push_back({uv.first, uv.second, w});
        g.adj_[static_cast<size_t>(uv.first)].emplace_back(uv.second, w);
        g.adj_[static_cast<size_t>(uv.second)].emplace_back(uv.first, w);
        g.deg_[uv.first] += w;
        g.deg_[uv.second] += w;
    }
    for (auto& nb : g.adj_) std::sort(nb.begin(), nb.end());

    g.dirichlet_.assign(static_cast<size_t>(n), 0);
    for (const auto& id : data.dirichlet) g.dirichlet_[static_cast<size_t>(idx.at(id))] = 1;
    for (int i = 0; i < n; ++i)
        if (!g.dirichlet_[static_cast<size_t>(i)]) g.interior_.push_back(i);
    return g;
}

int WeightedGraph::index_of(const std::string& id) const {
    for (size_t i = 0; i < ids_.size(); ++i)
        if (ids_[i] == id) return static_cast<int>(i);
    throw GraphError("unknown vertex id: " + id);
}

bool WeightedGraph::has_vertex(const std::string& id) const {
    return std::find(ids_.begin(), ids_.end(), id) != ids_.end();
}

GraphData WeightedGraph::to_data() const {
    GraphData data;
    for (int i = 0; i < vertex_count(); ++i)
        data.vertices.push_back({ids_[static_cast<size_t>(i)], m_[i]});
    for (const auto& e : edges_)
        data.edges.push_back({ids_[static_cast<size_t>(e.u)], ids_[static_cast<size_t>(e.v)], e.weight});
    for (int i = 0; i < vertex_count(); ++i)
        if (is_dirichlet(i)) data.dirichlet.push_back(ids_[static_cast<size_t>(i)]);
    return data;
}

VertexFunction laplacian_apply(const WeightedGraph& g, const VertexFunction& f) {
    const int n = g.vertex_count();
    if (f.size() != n) throw GraphError("function/graph size mismatch");
    VertexFunction out = VertexFunction::Zero(n);
    for (int x = 0; x < n; ++x) {
        if (g.is_dirichlet(x)) continue;
        double fx = f[x];
        double acc = 0.0;
        for (auto [y, w] : g.neighbors(x)) {
            double fy = g.is_dirichlet(y) ? 0.0 : f[y];
            acc += w * (fx - fy);
        }
        out[x] = acc / g.measure(x);
    }
    return out;
}

double gradient_norm(const WeightedGraph& g, const VertexFunction& f, int x) {
    double acc = 0.0;
    for (auto [y, w] : g.neighbors(x)) {
        double d = f[x] - f[y];
        acc += w * d * d;
    }
    return std::sqrt(acc / g.measure(x));
}

VertexSet combinatorial_interior(const WeightedGraph& g, const VertexSet& a) {
    std::vector<char> in(static_cast<size_t>(g.vertex_count()), 0);
    for (int x : a) in[static_cast<size_t>(x)] = 1;
    VertexSet out;
    for (int x : a) {
        bool interior = true;
        for (auto [y, w] : g.neighbors(x)) {
            (void)w;
            if (!in[static_cast<size_t>(y)]) {
                interior = false;
                break;
            }
        }
        if (interior) out.push_back(x);
    }
    return sorted_unique(std::move(out));
}

VertexFunction sandwiched_apply(const WeightedGraph& g, const VertexFunction& omega,
                                const VertexFunction& v) {
    VertexFunction scaled = (v.array() * (-omega.array()).exp()).matrix();
    VertexFunction lap = laplacian_apply(g, scaled);
    return (lap.array() * omega.array().exp()).matrix();
}

double h_omega(const WeightedGraph& g, const VertexFunction& omega) {
    double sup = 0.0;
    for (int x = 0; x < g.vertex_count(); ++x) {
        double acc = 0.0;
        for (auto [y, w] : g.neighbors(x))
            acc += w * 2.0 * (std::cosh(omega[x] - omega[y]) - 1.0);
        sup = std::max(sup, acc / g.measure(x));
    }
    return sup;
}

double energy_form(const WeightedGraph& g, const VertexFunction& f, const VertexFunction& h) {
    double acc = 0.0;
    for (const auto& e : g.edges())
        acc += e.weight * (f[e.u] - f[e.v]) * (h[e.u] - h[e.v]);
    return acc;
}

double inner_m(const WeightedGraph& g, const VertexFunction& f, const VertexFunction& h) {
    return (g.measure().array() * f.array() * h.array()).sum();
}

bool contains(const VertexSet& s, int x) {
    return std::binary_search(s.begin(), s.end(), x);
}

VertexSet sorted_unique(VertexSet s) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

}  // namespace hklab
