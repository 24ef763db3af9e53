#include "hklab/metric.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>

namespace hklab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Single-source shortest paths for given symmetric edge lengths.
Eigen::VectorXd dijkstra(const WeightedGraph& g,
                         const std::vector<std::vector<std::pair<int, double>>>& lengths,
                         int source) {
    const int n = g.vertex_count();
    Eigen::VectorXd dist = Eigen::VectorXd::Constant(n, kInf);
    dist[source] = 0.0;
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    heap.emplace(0.0, source);
    while (!heap.empty()) {
        auto [d, x] = heap.top();
        heap.pop();
        if (d > dist[x]) continue;
        for (auto [y, len] : lengths[static_cast<size_t>(x)]) {
            double nd = d + len;
            if (nd < dist[y]) {
                dist[y] = nd;
                heap.emplace(nd, y);
            }
        }
    }
    return dist;
}

}  // namespace

IntrinsicMetric shortest_path_metric(
    const WeightedGraph& g, const std::vector<std::vector<std::pair<int, double>>>& lengths) {
    const int n = g.vertex_count();
    Eigen::MatrixXd rho(n, n);
    for (int s = 0; s < n; ++s) rho.col(s) = dijkstra(g, lengths, s);
    if (!rho.allFinite()) throw GraphError("disconnected graph: path metric undefined");
    // Symmetrize exactly; Dijkstra from both ends can differ in the last ulp.
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) rho(i, j) = rho(j, i) = std::min(rho(i, j), rho(j, i));
    return IntrinsicMetric::from_matrix_impl(g, std::move(rho), /*check_triangle=*/false);
}

IntrinsicMetric IntrinsicMetric::from_matrix(const WeightedGraph& g, Eigen::MatrixXd rho) {
    return from_matrix_impl(g, std::move(rho), /*check_triangle=*/true);
}

IntrinsicMetric IntrinsicMetric::from_matrix_impl(const WeightedGraph& g, Eigen::MatrixXd rho,
                                                  bool check_triangle) {
    const int n = g.vertex_count();
    if (rho.rows() != n || rho.cols() != n) throw GraphError("metric/graph size mismatch");
    constexpr double tol = 1e-12;
    for (int i = 0; i < n; ++i) {
        if (rho(i, i) != 0.0) throw GraphError("metric diagonal must be exactly zero");
        for (int j = 0; j < n; ++j) {
            if (rho(i, j) < 0.0) throw GraphError("metric entries must be nonnegative");
            if (std::abs(rho(i, j) - rho(j, i)) > tol) throw GraphError("metric must be symmetric");
        }
    }
    if (check_triangle) {
        const double scale = std::max(1.0, rho.maxCoeff());
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    if (rho(i, j) > rho(i, k) + rho(k, j) + tol * scale)
                        throw GraphError("triangle inequality violated");
    }

    IntrinsicMetric m;
    m.rho_ = std::move(rho);
    m.slack_.resize(n);
    for (int x = 0; x < n; ++x) {
        double s = 0.0;
        for (auto [y, w] : g.neighbors(x)) {
            double d = m.rho_(x, y);
            s += w * d * d;
            m.jump_size_ = std::max(m.jump_size_, d);
        }
        m.slack_[x] = g.measure(x) - s;
    }
    return m;
}

double IntrinsicMetric::to_set(int x, const VertexSet& a) const {
    double d = kInf;
    for (int v : a) d = std::min(d, rho_(x, v));
    return d;
}

IntrinsicMetric default_intrinsic_metric(const WeightedGraph& g, double cap) {
    if (!(cap > 0.0)) throw GraphError("metric cap must be positive");
    const int n = g.vertex_count();
    std::vector<std::vector<std::pair<int, double>>> lengths(static_cast<size_t>(n));
    for (const auto& e : g.edges()) {
        double du = g.weighted_degree(e.u), dv = g.weighted_degree(e.v);
        double len = std::min(std::sqrt(std::min(1.0 / du, 1.0 / dv)), cap);
        lengths[static_cast<size_t>(e.u)].emplace_back(e.v, len);
        lengths[static_cast<size_t>(e.v)].emplace_back(e.u, len);
    }
    return shortest_path_metric(g, lengths);
}

IntrinsicMetric combinatorial_metric(const WeightedGraph& g) {
    const int n = g.vertex_count();
    std::vector<std::vector<std::pair<int, double>>> lengths(static_cast<size_t>(n));
    for (const auto& e : g.edges()) {
        lengths[static_cast<size_t>(e.u)].emplace_back(e.v, 1.0);
        lengths[static_cast<size_t>(e.v)].emplace_back(e.u, 1.0);
    }
    return shortest_path_metric(g, lengths);
}

std::vector<CheckReport> is_intrinsic(const WeightedGraph& g, const Eigen::MatrixXd& rho) {
    std::vector<CheckReport> out;
    for (int x = 0; x < g.vertex_count(); ++x) {
        double s = 0.0;
        for (auto [y, w] : g.neighbors(x)) s += w * rho(x, y) * rho(x, y);
        auto r = make_report("intrinsic-inequality", "vertex " + g.id_of(x), s, g.measure(x), 1e-12);
        out.push_back(std::move(r));
    }
    return out;
}

VertexSet ball(const IntrinsicMetric& rho, int x, double radius) {
    if (radius < 0.0) throw GraphError("ball radius must be nonnegative");
    VertexSet out;
    for (int y = 0; y < rho.vertex_count(); ++y)
        if (rho(x, y) <= radius) out.push_back(y);
    return out;
}

CheckReport ball_interior_inclusion(const WeightedGraph& g, const IntrinsicMetric& rho, int x,
                                    double radius) {
    CheckReport r;
    r.statement = "ball-interior-inclusion";
    r.instance = "center " + g.id_of(x) + ", R = " + std::to_string(radius);
    const double s = rho.jump_size();
    if (radius < s) {
        r.skipped = true;
        r.pass = true;
        r.note = "R < S: inner ball empty by convention, check skipped";
        return r;
    }
    VertexSet inner = ball(rho, x, radius - s);
    VertexSet interior = combinatorial_interior(g, ball(rho, x, radius));
    int outside = 0;
    for (int v : inner)
        if (!contains(interior, v)) ++outside;
    r.lhs = outside;
    r.rhs = 0.0;
    r.margin = -static_cast<double>(outside);
    r.pass = outside == 0;
    if (!r.pass) r.note = "vertices of B(R-S) escaping B(R)^circ";
    return r;
}

VertexFunction cutoff(const WeightedGraph& g, const IntrinsicMetric& rho, const VertexSet& a,
                      double radius) {
    if (a.empty()) throw GraphError("cutoff requires a nonempty base set");
    if (!(radius > 0.0)) throw GraphError("cutoff radius must be positive");
    VertexFunction phi(g.vertex_count());
    for (int x = 0; x < g.vertex_count(); ++x)
        phi[x] = std::max(0.0, 1.0 - rho.to_set(x, a) / radius);
    return phi;
}

double sup_gradient_norm_sq(const WeightedGraph& g, const VertexFunction& f) {
    double sup = 0.0;
    for (int x = 0; x < g.vertex_count(); ++x) {
        double gn = gradient_norm(g, f, x);
        sup = std::max(sup, gn * gn);
    }
    return sup;
}

IntrinsicMetric metric_from_csv(const WeightedGraph& g, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw GraphError("cannot open metric file: " + path);
    const int n = g.vertex_count();
    Eigen::MatrixXd rho = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd seen = Eigen::MatrixXd::Zero(n, n);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string u, v, d;
        if (!std::getline(ss, u, ',') || !std::getline(ss, v, ',') || !std::getline(ss, d, ','))
            throw GraphError("malformed metric row: " + line);
        if (u == "u" && v == "v") continue;  // header
        int iu = g.index_of(u), iv = g.index_of(v);
        double val = std::stod(d);
        if (seen(iu, iv) != 0.0 && rho(iu, iv) != val)
            throw GraphError("conflicting metric entries for " + u + "," + v);
        rho(iu, iv) = rho(iv, iu) = val;
        seen(iu, iv) = seen(iv, iu) = 1.0;
    }
    return IntrinsicMetric::from_matrix(g, std::move(rho));
}

}  // namespace hklab
