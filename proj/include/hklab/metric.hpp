#pragma once

#include <Eigen/Core>

#include "hklab/check.hpp"
#include "hklab/graph.hpp"

namespace hklab {

/// Pseudo-metric adapted to the operator: sum_y b(x,y) rho(x,y)^2 <= m(x) at
/// every vertex. Stores the full distance matrix, the jump size
/// S = max{rho(x,y) : b(x,y) > 0}, and the per-vertex intrinsic slack
/// m(x) - sum_y b(x,y) rho(x,y)^2.
class IntrinsicMetric {
  public:
    /// Wraps a distance matrix; checks symmetry, zero diagonal and the
    /// triangle inequality within 1e-12, computes jump size and slack.
    /// Does not require the intrinsic inequality: use `is_intrinsic` /
    /// `intrinsic_slack` to interrogate it.
    static IntrinsicMetric from_matrix(const WeightedGraph& g, Eigen::MatrixXd rho);

    double operator()(int x, int y) const { return rho_(x, y); }
    const Eigen::MatrixXd& matrix() const { return rho_; }
    double jump_size() const { return jump_size_; }
    const Eigen::VectorXd& intrinsic_slack() const { return slack_; }
    bool intrinsic(double tol = 1e-12) const { return slack_.minCoeff() >= -tol; }
    int vertex_count() const { return static_cast<int>(rho_.rows()); }

    /// Distance to a set: min_{a in A} rho(x, a).
    double to_set(int x, const VertexSet& a) const;

  private:
    IntrinsicMetric() = default;
    static IntrinsicMetric from_matrix_impl(const WeightedGraph& g, Eigen::MatrixXd rho,
                                            bool check_triangle);
    friend IntrinsicMetric shortest_path_metric(
        const WeightedGraph& g, const std::vector<std::vector<std::pair<int, double>>>& lengths);

    Eigen::MatrixXd rho_;
    double jump_size_ = 0.0;
    Eigen::VectorXd slack_;
};

/// All-pairs shortest-path metric for explicit symmetric edge lengths.
/// Satisfies the triangle inequality by construction.
IntrinsicMetric shortest_path_metric(
    const WeightedGraph& g, const std::vector<std::vector<std::pair<int, double>>>& lengths);

/// Path metric with edge length (1/Deg(x) ^ 1/Deg(y))^{1/2} ^ cap, which is
/// intrinsic for every weighted graph; all-pairs distances via Dijkstra from
/// each vertex. The cap bounds the jump size.
IntrinsicMetric default_intrinsic_metric(const WeightedGraph& g, double cap = 1.0);

/// Combinatorial (hop-count) path metric. Intrinsic iff Deg <= 1 everywhere.
IntrinsicMetric combinatorial_metric(const WeightedGraph& g);

/// Per-vertex report of the intrinsic inequality slack for an arbitrary
/// symmetric candidate matrix.
std::vector<CheckReport> is_intrinsic(const WeightedGraph& g, const Eigen::MatrixXd& rho);

/// Closed ball B_x(R) = {y : rho(x,y) <= R}.
VertexSet ball(const IntrinsicMetric& rho, int x, double radius);

/// Checks the inclusion B(R-S) subset of B(R)^circ (skipped for R < S).
CheckReport ball_interior_inclusion(const WeightedGraph& g, const IntrinsicMetric& rho, int x,
                                    double radius);

/// Cut-off function phi_{A,R} = (1 - rho(.,A)/R)_+ : equal to 1 on A, zero
/// outside B_A(R), with sup |nabla phi|^2 <= 1/R^2.
VertexFunction cutoff(const WeightedGraph& g, const IntrinsicMetric& rho, const VertexSet& a,
                      double radius);

/// sup_x |nabla f|(x), the quantity bounded by 1/R^2 for cut-offs.
double sup_gradient_norm_sq(const WeightedGraph& g, const VertexFunction& f);

/// Loads a metric override from CSV rows "u,v,rho"; symmetrizes, fills the
/// diagonal with zeros, and validates via from_matrix.
IntrinsicMetric metric_from_csv(const WeightedGraph& g, const std::string& path);

}  // namespace hklab
