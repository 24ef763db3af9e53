#pragma once

#include <Eigen/Core>
#include <list>
#include <map>
#include <memory>
#include <mutex>

#include "hklab/check.hpp"
#include "hklab/graph.hpp"
#include "hklab/metric.hpp"

namespace hklab {

/// One materialized heat-kernel slice: the full matrix p_t(x,y), the density
/// of e^{-t Delta} with respect to m. Rows/columns at Dirichlet vertices are
/// zero.
struct KernelSlice {
    double t = 0.0;
    Eigen::MatrixXd p;
};

/// Spectral decomposition of the m-symmetrized Laplacian restricted to the
/// non-Dirichlet vertices. Immutable after build; kernel slices at distinct
/// times are independent and cached under a byte-budgeted LRU.
class HeatSystem {
  public:
    static HeatSystem build(std::shared_ptr<const WeightedGraph> g);

    const WeightedGraph& graph() const { return *g_; }
    std::shared_ptr<const WeightedGraph> graph_ptr() const { return g_; }

    /// Eigenvalues of the (Dirichlet) Laplacian, ascending.
    const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
    /// Bottom of the spectrum.
    double lambda_bottom() const { return eigenvalues_[0]; }
    /// Eigenvectors as columns, m-orthonormal, zero at Dirichlet vertices.
    const Eigen::MatrixXd& eigenvectors() const { return phi_; }

    /// Relative reconstruction error of the assembled operator, a build-time
    /// diagnostic.
    double reconstruction_error() const { return reconstruction_error_; }

    KernelSlice heat_kernel(double t) const;
    double heat_kernel(double t, int x, int y) const;

    /// P_t f, with Dirichlet vertices clamped to zero.
    VertexFunction apply(double t, const VertexFunction& f) const;

    /// P_t^omega f = e^omega P_t (e^-omega f).
    VertexFunction apply_sandwiched(const VertexFunction& omega, double t,
                                    const VertexFunction& f) const;

    /// Operator norm of P_t^omega on l2(X,m).
    double sandwiched_operator_norm(const VertexFunction& omega, double t) const;

    void set_cache_budget_mb(double mb) const;

  private:
    HeatSystem() = default;

    std::shared_ptr<const WeightedGraph> g_;
    std::vector<int> interior_;  // operator domain
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXd phi_;  // n x k, zero rows at Dirichlet vertices
    double reconstruction_error_ = 0.0;

    struct Cache {
        std::mutex mutex;
        std::map<double, std::pair<Eigen::MatrixXd, std::list<double>::iterator>> slices;
        std::list<double> order;  // most recent first
        size_t budget_bytes = 256ull << 20;
        size_t used_bytes = 0;
    };
    std::unique_ptr<Cache> cache_ = std::make_unique<Cache>();
};

/// e^{-t Delta} f without a full decomposition: Lanczos approximation of the
/// action of the matrix exponential, refined until the change between
/// consecutive Krylov dimensions drops below `tol` relative to the result
/// norm. Escape hatch for graphs too large for a dense decomposition.
VertexFunction expm_action(const WeightedGraph& g, double t, const VertexFunction& f,
                           double tol = 1e-10);

/// Monotonicity audit of the integrated maximum principle: for a
/// kappa-Lipschitz omega, Phi(t) = exp(2*Lambda*t - gamma(kappa*S)*t)
/// * ||e^omega P_t f||_2^2 must be non-increasing. Reports the largest upward
/// jump along the grid against slack tol*Phi(0).
CheckReport phi_monotone(const HeatSystem& hs, const IntrinsicMetric& rho,
                         const VertexFunction& omega, double kappa, const VertexFunction& f,
                         const std::vector<double>& time_grid, double tol = 1e-9);

/// Best Lipschitz constant of omega with respect to rho (exhaustive pair scan).
double lipschitz_constant(const IntrinsicMetric& rho, const VertexFunction& omega);

}  // namespace hklab
