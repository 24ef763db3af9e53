#include "hklab/bounds.hpp"

#include <cmath>

namespace hklab {

namespace {

void require_time(double t) {
    if (!(t > 0.0)) throw GraphError("time must be positive");
}

/// sqrt(t^2 + r^2 S^2) - t without cancellation.
double sqrt_excess(double r, double t, double s) {
    double rs = r * s;
    return rs * rs / (std::sqrt(t * t + rs * rs) + t);
}

}  // namespace

double zeta(double r, double t, double jump_size) {
    require_time(t);
    if (r < 0.0) throw GraphError("zeta needs r >= 0");
    if (!(jump_size > 0.0)) throw GraphError("zeta needs S > 0");
    if (r == 0.0) return 0.0;
    const double s = jump_size;
    return r / s * std::asinh(r * s / t) - r * r / (std::sqrt(t * t + r * r * s * s) + t);
}

double sigma(double r, double t, double jump_size) {
    require_time(t);
    const double s = jump_size;
    double z = r * s / t;
    return 2.0 * r * r / (t * t * (std::sqrt(1.0 + z * z) + 1.0));
}

double log_poly_correction(double r, double t, double jump_size, double n) {
    require_time(t);
    double value = sqrt_excess(r, t, jump_size) / (jump_size * jump_size);
    return value > 1.0 ? n / 2.0 * std::log(value) : 0.0;
}

double poly_correction(double r, double t, double jump_size, double n) {
    return std::exp(log_poly_correction(r, t, jump_size, n));
}

DaviesOptimum davies_exponent_optimizer(double r, double t, double jump_size) {
    require_time(t);
    if (r == 0.0) return {0.0, 0.0};
    double theta = r * jump_size / t;
    DaviesOptimum out;
    out.eta_star = std::asinh(theta);
    out.f_value = theta / (std::sqrt(1.0 + theta * theta) + 1.0) - out.eta_star;
    return out;
}

double log_c_beta(double beta) {
    if (!(beta > 1.0)) throw GraphError("beta must exceed 1");
    return std::log(4.0) * ((4.0 + 1.0 / std::log(beta)) + beta / (beta - 1.0)) / (beta - 1.0);
}

double log_c_dn(double n, double d, double sobolev, double doubling) {
    double first = std::max(0.0, std::log(doubling));
    double second = std::max(0.0, (n / 2.0 + 1.0) * std::log(doubling) + n / 2.0 * std::log(sobolev));
    double power = 8.0 * ((n + 2.0) * (d + 1.0) + n * n + n) + 1.0;
    return first + second + power * std::log(10.0);
}

double log_c_dnb(double n, double d, double beta, double sobolev, double doubling) {
    return log_c_beta(beta) + log_c_dn(n, d, sobolev, doubling);
}

namespace {

void check_center(const CenterCertificate& c) {
    c.params.validate();
    if (c.vertex < 0) throw GraphError("bound inputs: certificate lacks a vertex");
    if (!(c.r > 0.0) || c.R < 2.0 * c.r)
        throw GraphError("bound inputs need R >= 2r > 0");
    if (!(c.sobolev > 0.0) || !(c.doubling > 0.0))
        throw GraphError("bound inputs need positive certified constants");
}

void check_time_hypothesis(const CenterCertificate& ci, const CenterCertificate& cj, double t) {
    double t0 = 8.0 * std::max(ci.r * ci.r, cj.r * cj.r);
    if (t < t0)
        throw GraphError("bound hypothesis t >= 8 max{r_i^2, r_j^2} fails: t = " +
                         std::to_string(t) + " < " + std::to_string(t0));
}

/// Shared non-Gamma factors of the assembled bound.
BoundFactors frame_factors(const WeightedGraph& g, const IntrinsicMetric& rho,
                           const CenterCertificate& ci, const CenterCertificate& cj, double t,
                           double lambda, bool drop_spectral) {
    const double s = rho.jump_size();
    const double rho_ij = rho(ci.vertex, cj.vertex);
    const double n_ij = (ci.params.n + cj.params.n) / 2.0;

    BoundFactors f;
    f.log_constant = (3.0 + n_ij + ci.params.d + cj.params.d) * std::log(2.0) + 1.0 +
                     std::log(ci.doubling) + std::log(cj.doubling) +
                     0.5 * (log_c_dnb(ci.params.n, ci.params.d, ci.params.beta(), ci.sobolev,
                                      ci.doubling) +
                            log_c_dnb(cj.params.n, cj.params.d, cj.params.beta(), cj.sobolev,
                                      cj.doubling));
    f.log_poly = log_poly_correction(rho_ij, t, s, n_ij);
    double vol_i = ball_volume(g, rho, ci.vertex, std::min(std::sqrt(t), ci.R));
    double vol_j = ball_volume(g, rho, cj.vertex, std::min(std::sqrt(t), cj.R));
    f.log_volume = -0.5 * (std::log(vol_i) + std::log(vol_j));
    f.spectral = drop_spectral
                     ? 0.0
                     : -lambda * (t - 0.5 * (std::min(t, ci.R * ci.R) + std::min(t, cj.R * cj.R)));
    f.gaussian = -zeta(rho_ij, t, s);
    return f;
}

double tau_of(const CenterCertificate& c, double t) { return std::min(std::sqrt(t / 8.0), c.R / 2.0); }

}  // namespace

BoundFactors main_bound_rhs(const WeightedGraph& g, const IntrinsicMetric& rho,
                            const CenterCertificate& ci, const CenterCertificate& cj, double t,
                            double lambda) {
    check_center(ci);
    check_center(cj);
    check_time_hypothesis(ci, cj, t);
    BoundFactors f = frame_factors(g, rho, ci, cj, t, lambda, /*drop_spectral=*/false);
    f.log_gamma_i = log_gamma_error(g, rho, ci.vertex, tau_of(ci, t), ci.params);
    f.log_gamma_j = log_gamma_error(g, rho, cj.vertex, tau_of(cj, t), cj.params);
    return f;
}

namespace {

bool measure_is_degree(const WeightedGraph& g) {
    for (int x = 0; x < g.vertex_count(); ++x)
        if (std::abs(g.measure(x) - g.deg(x)) > 1e-12 * std::max(1.0, g.deg(x))) return false;
    return true;
}

/// Gamma cap of the normalized case: [(1+tau^2)(C_S^{n/2}(2 tau^2+1)^{n/2})^q]^theta.
double log_gamma_normalized(const CenterCertificate& c, const IntrinsicMetric& rho, double tau) {
    double q = c.params.q();
    double n = c.params.n;
    double theta = kappa_theta(tau, rho.jump_size(), c.params.beta()).theta;
    return theta * (std::log1p(tau * tau) +
                    q * (n / 2.0) * (std::log(c.sobolev) + std::log(2.0 * tau * tau + 1.0)));
}

}  // namespace

BoundFactors special_case_rhs(const WeightedGraph& g, const IntrinsicMetric& rho,
                              const CenterCertificate& ci, const CenterCertificate& cj, double t,
                              double lambda, const BoundOptions& options) {
    if (options.variant == BoundVariant::general) return main_bound_rhs(g, rho, ci, cj, t, lambda);
    check_center(ci);
    check_center(cj);
    check_time_hypothesis(ci, cj, t);

    switch (options.variant) {
        case BoundVariant::normalized: {
            if (!measure_is_degree(g))
                throw GraphError("normalized variant hypothesis fails: m != deg");
            BoundFactors f = frame_factors(g, rho, ci, cj, t, lambda, false);
            f.log_gamma_i = log_gamma_normalized(ci, rho, tau_of(ci, t));
            f.log_gamma_j = log_gamma_normalized(cj, rho, tau_of(cj, t));
            return f;
        }
        case BoundVariant::positive_measure: {
            double inf_m = g.measure().minCoeff();
            if (!(inf_m > 0.0))
                throw GraphError("positive-measure variant hypothesis fails: inf m = 0");
            BoundFactors f = frame_factors(g, rho, ci, cj, t, lambda, false);
            auto gamma_cap = [&](const CenterCertificate& c) {
                double tau = tau_of(c, t);
                double q = c.params.q();
                auto e = kappa_theta(tau, rho.jump_size(), c.params.beta());
                double dp = degree_mean(g, rho, c.vertex, tau, c.params.p);
                double mu = mu_term(g, rho, c.vertex, c.r, c.params.d, q);
                // M_p <= 1/inf m and vol(tau) <= C_D (tau/r)^d vol(r) by doubling
                return e.theta *
                       (std::log(mu) + std::log1p(tau * tau * dp) - q * std::log(inf_m) +
                        q * std::log(c.doubling) + q * c.params.d * std::log(tau / c.r));
            };
            f.log_gamma_i = gamma_cap(ci);
            f.log_gamma_j = gamma_cap(cj);
            return f;
        }
        case BoundVariant::degenerating: {
            const double r1 = options.degenerate_r1;
            const double cap = options.degenerate_cap;
            if (!(r1 > 0.0) || !(cap > 0.0))
                throw GraphError("degenerating variant needs a positive anchor radius and cap");
            // verify the growth hypothesis on the realized radius grid
            for (const auto& c : {ci, cj}) {
                double gamma_rate = c.params.gamma_rate(rho.jump_size());
                for (double r : radius_grid(rho, c.vertex, r1, rho.matrix().maxCoeff())) {
                    double allowed = cap * std::exp(std::exp(gamma_rate * std::sqrt(r)));
                    if (degree_mean(g, rho, c.vertex, r, c.params.p) > allowed ||
                        inverse_measure_mean(g, rho, c.vertex, r, c.params.p) > allowed)
                        throw GraphError(
                            "degenerating variant hypothesis fails: mean growth cap exceeded at R "
                            "= " +
                            std::to_string(r));
                }
            }
            // R = infinity: tau = sqrt(t/8), volumes at sqrt(t), no spectral term
            BoundFactors f;
            const double s = rho.jump_size();
            const double rho_ij = rho(ci.vertex, cj.vertex);
            const double n_ij = (ci.params.n + cj.params.n) / 2.0;
            f.log_constant = (3.0 + n_ij + ci.params.d + cj.params.d) * std::log(2.0) + 1.0 +
                             std::log(ci.doubling) + std::log(cj.doubling) +
                             0.5 * (log_c_dnb(ci.params.n, ci.params.d, ci.params.beta(),
                                              ci.sobolev, ci.doubling) +
                                    log_c_dnb(cj.params.n, cj.params.d, cj.params.beta(),
                                              cj.sobolev, cj.doubling));
            f.log_poly = log_poly_correction(rho_ij, t, s, n_ij);
            f.log_volume = -0.5 * (std::log(ball_volume(g, rho, ci.vertex, std::sqrt(t))) +
                                   std::log(ball_volume(g, rho, cj.vertex, std::sqrt(t))));
            f.spectral = 0.0;
            f.gaussian = -zeta(rho_ij, t, s);
            double tau = std::sqrt(t / 8.0);
            double mu_1 = std::max(mu_term(g, rho, ci.vertex, r1, ci.params.d, ci.params.q()),
                                   mu_term(g, rho, cj.vertex, r1, cj.params.d, cj.params.q()));
            auto gamma_cap = [&](const CenterCertificate& c) {
                double q = c.params.q();
                auto e = kappa_theta(tau, s, c.params.beta());
                double grown = std::exp(c.params.gamma_rate(s) * std::sqrt(tau));
                return e.theta * (std::log1p(tau * tau * cap * std::exp(grown)) +
                                  q * (std::log(cap) + grown) + q * std::log(c.doubling) +
                                  q * c.params.d * std::log(tau / r1) + std::log(mu_1));
            };
            f.log_gamma_i = gamma_cap(ci);
            f.log_gamma_j = gamma_cap(cj);
            (void)lambda;  // Lambda = 0 in this regime
            return f;
        }
        default:
            throw GraphError("unknown bound variant");
    }
}

std::vector<BoundReport> verify_bound(const HeatSystem& hs, const IntrinsicMetric& rho,
                                      const std::map<int, CenterCertificate>& certificates,
                                      const BoundGrid& grid, const BoundOptions& options) {
    const WeightedGraph& g = hs.graph();
    std::vector<BoundReport> out;
    out.reserve(grid.pairs.size() * grid.times.size());
    for (auto [x, y] : grid.pairs) {
        auto it_x = certificates.find(x);
        auto it_y = certificates.find(y);
        if (it_x == certificates.end() || it_y == certificates.end())
            throw GraphError("verify_bound: missing certificate for a grid vertex");
        for (double t : grid.times) {
            BoundReport r;
            r.x = x;
            r.y = y;
            r.t = t;
            r.rho = rho(x, y);
            r.factors = special_case_rhs(g, rho, it_x->second, it_y->second, t,
                                         hs.lambda_bottom(), options);
            double lhs = hs.heat_kernel(t, x, y);
            r.log_lhs = lhs > 0.0 ? std::log(lhs) : -std::numeric_limits<double>::infinity();
            r.log_rhs = r.factors.log_rhs();
            r.log_margin = r.log_rhs - r.log_lhs;
            r.pass = r.log_lhs <= r.log_rhs + std::log1p(1e-9);
            r.vacuous = r.pass && r.log_margin > CheckReport::vacuous_log_margin;
            out.push_back(std::move(r));
        }
    }
    return out;
}

BoundSummary summarize_bounds(const std::vector<BoundReport>& reports) {
    BoundSummary s;
    for (const auto& r : reports) {
        ++s.total;
        if (r.pass) ++s.passed;
        if (r.vacuous) ++s.vacuous;
        if (r.log_margin < s.min_log_margin) {
            s.min_log_margin = r.log_margin;
            s.worst_x = r.x;
            s.worst_y = r.y;
            s.worst_t = r.t;
        }
    }
    return s;
}

}  // namespace hklab
