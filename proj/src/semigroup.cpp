#include "hklab/semigroup.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdlib>

namespace hklab {

HeatSystem HeatSystem::build(std::shared_ptr<const WeightedGraph> g) {
    HeatSystem hs;
    hs.g_ = std::move(g);
    const WeightedGraph& graph = *hs.g_;
    hs.interior_ = graph.interior_vertices();
    const int n = graph.vertex_count();
    const int k = static_cast<int>(hs.interior_.size());
    if (k == 0) throw GraphError("heat system needs at least one non-Dirichlet vertex");

    // A = D^{1/2} L D^{-1/2} on the interior block, D = diag(m). Entries:
    // A_xy = Deg(x) delta_xy - b(x,y)/sqrt(m(x)m(y)).
    std::vector<int> pos(static_cast<size_t>(n), -1);
    for (int i = 0; i < k; ++i) pos[static_cast<size_t>(hs.interior_[static_cast<size_t>(i)])] = i;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i) {
        int x = hs.interior_[static_cast<size_t>(i)];
        a(i, i) = graph.weighted_degree(x);
        for (auto [y, w] : graph.neighbors(x)) {
            int j = pos[static_cast<size_t>(y)];
            if (j >= 0) a(i, j) = -w / std::sqrt(graph.measure(x) * graph.measure(y));
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
    if (solver.info() != Eigen::Success)
        throw GraphError("eigensolver failed; operator norm ~ " + std::to_string(a.norm()));
    hs.eigenvalues_ = solver.eigenvalues();
    // Clamp the tiny negative round-off at the bottom of a PSD spectrum.
    for (int i = 0; i < k; ++i)
        if (hs.eigenvalues_[i] < 0.0 && hs.eigenvalues_[i] > -1e-12 * std::max(1.0, a.norm()))
            hs.eigenvalues_[i] = 0.0;

    Eigen::MatrixXd assembled = solver.eigenvectors() *
                                hs.eigenvalues_.asDiagonal() *
                                solver.eigenvectors().transpose();
    hs.reconstruction_error_ = (assembled - a).norm() / std::max(1.0, a.norm());

    // m-orthonormal eigenvectors on the full vertex set: phi = D^{-1/2} q.
    hs.phi_ = Eigen::MatrixXd::Zero(n, k);
    for (int i = 0; i < k; ++i) {
        int x = hs.interior_[static_cast<size_t>(i)];
        hs.phi_.row(x) = solver.eigenvectors().row(i) / std::sqrt(graph.measure(x));
    }

    if (const char* env = std::getenv("HKLAB_CACHE_MB")) {
        char* end = nullptr;
        double mb = std::strtod(env, &end);
        if (end != env && mb > 0) hs.set_cache_budget_mb(mb);
    }
    return hs;
}

void HeatSystem::set_cache_budget_mb(double mb) const {
    std::lock_guard lock(cache_->mutex);
    cache_->budget_bytes = static_cast<size_t>(mb * (1 << 20));
}

KernelSlice HeatSystem::heat_kernel(double t) const {
    if (t < 0.0) throw GraphError("heat kernel requires t >= 0");
    {
        std::lock_guard lock(cache_->mutex);
        auto it = cache_->slices.find(t);
        if (it != cache_->slices.end()) {
            cache_->order.splice(cache_->order.begin(), cache_->order, it->second.second);
            return {t, it->second.first};
        }
    }

    const int n = g_->vertex_count();
    Eigen::VectorXd decay = (-t * eigenvalues_.array()).exp();
    Eigen::MatrixXd p = phi_ * decay.asDiagonal() * phi_.transpose();
    // Exact symmetry; the product above is symmetric only up to round-off.
    p = ((p + p.transpose()) * 0.5).eval();

    std::lock_guard lock(cache_->mutex);
    size_t bytes = static_cast<size_t>(n) * static_cast<size_t>(n) * sizeof(double);
    if (bytes <= cache_->budget_bytes) {
        while (cache_->used_bytes + bytes > cache_->budget_bytes && !cache_->order.empty()) {
            double evict = cache_->order.back();
            cache_->order.pop_back();
            cache_->used_bytes -= static_cast<size_t>(cache_->slices[evict].first.size()) * sizeof(double);
            cache_->slices.erase(evict);
        }
        auto [it, inserted] = cache_->slices.try_emplace(t);
        if (inserted) {
            cache_->order.push_front(t);
            it->second = {p, cache_->order.begin()};
            cache_->used_bytes += bytes;
        }
    }
    return {t, std::move(p)};
}

double HeatSystem::heat_kernel(double t, int x, int y) const {
    if (t < 0.0) throw GraphError("heat kernel requires t >= 0");
    Eigen::VectorXd decay = (-t * eigenvalues_.array()).exp();
    return (phi_.row(x).array() * phi_.row(y).array() * decay.transpose().array()).sum();
}

VertexFunction HeatSystem::apply(double t, const VertexFunction& f) const {
    if (t < 0.0) throw GraphError("semigroup requires t >= 0");
    const int n = g_->vertex_count();
    if (f.size() != n) throw GraphError("function/graph size mismatch");
    // Coefficients in the m-weighted eigenbasis: c_k = <f, phi_k>_m.
    Eigen::VectorXd c = phi_.transpose() * (g_->measure().array() * f.array()).matrix();
    c.array() *= (-t * eigenvalues_.array()).exp();
    return phi_ * c;
}

VertexFunction HeatSystem::apply_sandwiched(const VertexFunction& omega, double t,
                                            const VertexFunction& f) const {
    VertexFunction scaled = (f.array() * (-omega.array()).exp()).matrix();
    VertexFunction out = apply(t, scaled);
    return (out.array() * omega.array().exp()).matrix();
}

double HeatSystem::sandwiched_operator_norm(const VertexFunction& omega, double t) const {
    // On l2(X,m): || E e^{-tA} E^{-1} ||_2 with E = diag(e^omega) in the
    // symmetrizing coordinates; largest singular value.
    const int k = static_cast<int>(interior_.size());
    Eigen::VectorXd e(k);
    for (int i = 0; i < k; ++i) e[i] = std::exp(omega[interior_[static_cast<size_t>(i)]]);
    Eigen::MatrixXd q(k, k);
    for (int i = 0; i < k; ++i) {
        int x = interior_[static_cast<size_t>(i)];
        q.row(i) = phi_.row(x) * std::sqrt(g_->measure(x));
    }
    Eigen::MatrixXd core = q * (-t * eigenvalues_.array()).exp().matrix().asDiagonal() * q.transpose();
    Eigen::MatrixXd m = e.asDiagonal() * core * e.cwiseInverse().asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gram(m.transpose() * m);
    return std::sqrt(std::max(0.0, gram.eigenvalues().maxCoeff()));
}

VertexFunction expm_action(const WeightedGraph& g, double t, const VertexFunction& f,
                           double tol) {
    const int n = g.vertex_count();
    if (f.size() != n) throw GraphError("function/graph size mismatch");
    // Symmetrized coordinates: w = D^{1/2} f, apply e^{-tA}, map back.
    Eigen::VectorXd sqrt_m = g.measure().array().sqrt();
    Eigen::VectorXd w = (f.array() * sqrt_m.array()).matrix();
    for (int x = 0; x < n; ++x)
        if (g.is_dirichlet(x)) w[x] = 0.0;

    auto apply_a = [&](const Eigen::VectorXd& v) {
        Eigen::VectorXd out(n);
        for (int x = 0; x < n; ++x) {
            if (g.is_dirichlet(x)) {
                out[x] = 0.0;
                continue;
            }
            double acc = g.weighted_degree(x) * v[x];
            for (auto [y, wt] : g.neighbors(x))
                if (!g.is_dirichlet(y)) acc -= wt / (sqrt_m[x] * sqrt_m[y]) * v[y];
            out[x] = acc;
        }
        return out;
    };

    double beta = w.norm();
    if (beta == 0.0) return VertexFunction::Zero(n);

    const int max_dim = std::min(n, 200);
    std::vector<Eigen::VectorXd> basis;
    basis.push_back(w / beta);
    Eigen::VectorXd alpha(max_dim), eta(max_dim);
    Eigen::VectorXd prev_result;
    for (int j = 0; j < max_dim; ++j) {
        Eigen::VectorXd v = apply_a(basis[static_cast<size_t>(j)]);
        alpha[j] = basis[static_cast<size_t>(j)].dot(v);
        v -= alpha[j] * basis[static_cast<size_t>(j)];
        if (j > 0) v -= eta[j - 1] * basis[static_cast<size_t>(j - 1)];
        // Full reorthogonalization keeps the small Krylov basis clean.
        for (const auto& b : basis) v -= b.dot(v) * b;
        eta[j] = v.norm();

        const int m = j + 1;
        Eigen::MatrixXd tridiag = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) {
            tridiag(i, i) = alpha[i];
            if (i + 1 < m) tridiag(i, i + 1) = tridiag(i + 1, i) = eta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tridiag);
        Eigen::VectorXd small = es.eigenvectors() *
                                ((-t * es.eigenvalues().array()).exp() *
                                 es.eigenvectors().row(0).transpose().array())
                                    .matrix() *
                                beta;
        Eigen::VectorXd result = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < m; ++i) result += small[i] * basis[static_cast<size_t>(i)];

        if (j > 0 && (result - prev_result).norm() <= tol * std::max(1e-300, result.norm())) {
            prev_result = result;
            break;
        }
        prev_result = result;
        if (eta[j] <= 1e-14 * std::max(1.0, alpha.head(m).cwiseAbs().maxCoeff())) break;
        basis.push_back(v / eta[j]);
    }
    return (prev_result.array() / sqrt_m.array()).matrix();
}

CheckReport phi_monotone(const HeatSystem& hs, const IntrinsicMetric& rho,
                         const VertexFunction& omega, double kappa, const VertexFunction& f,
                         const std::vector<double>& time_grid, double tol) {
    double actual = lipschitz_constant(rho, omega);
    if (actual > kappa * (1.0 + 1e-9) + 1e-12)
        throw GraphError("omega is not " + std::to_string(kappa) + "-Lipschitz (actual " +
                         std::to_string(actual) + ")");
    const WeightedGraph& g = hs.graph();
    const double s = rho.jump_size();
    const double rate = 2.0 * hs.lambda_bottom() - 2.0 / (s * s) * (std::cosh(kappa * s) - 1.0);

    auto value = [&](double t) {
        VertexFunction u = hs.apply(t, f);
        double norm_sq = (g.measure().array() * (u.array() * omega.array().exp()).square()).sum();
        return std::exp(rate * t) * norm_sq;
    };

    double phi0 = value(time_grid.empty() ? 0.0 : time_grid.front());
    double prev = phi0;
    double worst_jump = 0.0;
    for (size_t i = 1; i < time_grid.size(); ++i) {
        double cur = value(time_grid[i]);
        worst_jump = std::max(worst_jump, cur - prev);
        prev = cur;
    }
    auto r = make_report("integrated-max-principle", "grid of " + std::to_string(time_grid.size()),
                         worst_jump, 0.0, tol * phi0);
    return r;
}

double lipschitz_constant(const IntrinsicMetric& rho, const VertexFunction& omega) {
    double best = 0.0;
    const int n = rho.vertex_count();
    for (int x = 0; x < n; ++x)
        for (int y = x + 1; y < n; ++y) {
            double d = rho(x, y);
            if (d > 0.0) best = std::max(best, std::abs(omega[x] - omega[y]) / d);
        }
    return best;
}

}  // namespace hklab
