#pragma once

#include <map>
#include <vector>

#include "hklab/geometry.hpp"
#include "hklab/semigroup.hpp"

namespace hklab {

/// Graph Gaussian: zeta_S(r,t) = (1/S^2)(rS arsinh(rS/t) + t - sqrt(t^2+r^2S^2)).
/// Compensated for rS << t; ~ r^2/2t for large t. Requires t > 0.
double zeta(double r, double t, double jump_size);

/// Optimized Davies rate: sigma(r,t) = 2 S^{-2} (sqrt(1 + r^2 S^2/t^2) - 1).
double sigma(double r, double t, double jump_size);

/// Space-time polynomial correction (1 v S^{-2}(sqrt(t^2 + r^2 S^2) - t))^{n/2},
/// returned in log scale; tends to 1 v r^{n/2} as t -> 0 and to 1 as t -> inf.
double log_poly_correction(double r, double t, double jump_size, double n);
double poly_correction(double r, double t, double jump_size, double n);

struct DaviesOptimum {
    double eta_star = 0.0;  // argmin of eta -> -eta + (cosh(eta)-1)/theta
    double f_value = 0.0;   // F(theta) at the minimum
};
/// Minimizer of the Davies exponent at theta = rS/t (t = 2T); closed form
/// eta* = arsinh(theta), F(theta) = (sqrt(1+theta^2)-1)/theta - arsinh(theta),
/// tied to zeta through (r/S) F(rS/t) = -zeta_S(r,t).
DaviesOptimum davies_exponent_optimizer(double r, double t, double jump_size);

/// ln C_beta with C_beta = 4^{((4 + 1/ln beta) + beta/(beta-1))/(beta-1)}.
double log_c_beta(double beta);
/// ln C_{d,n} = ln[(1 v C_D)(1 v C_D^{n/2+1} C_S^{n/2}) 10^{8((n+2)(d+1)+n^2+n)+1}].
double log_c_dn(double n, double d, double sobolev, double doubling);
/// ln C_{d,n,beta} = ln C_beta + ln C_{d,n}.
double log_c_dnb(double n, double d, double beta, double sobolev, double doubling);

/// Certified hypothesis block for one center: SV(r, R) constants and the
/// dimension parameters they were certified with.
struct CenterCertificate {
    int vertex = -1;
    double r = 0.0, R = 0.0;  // SV interval, R >= 2r
    GeometryParams params;
    double sobolev = 0.0;
    double doubling = 1.0;
};

enum class BoundVariant {
    general,           // full error-function route
    normalized,        // m = deg: Gamma replaced by the Sobolev-only cap
    positive_measure,  // inf m > 0: mu/degree prefactor
    degenerating,      // super-exponentially capped means, spectral term dropped
};

struct BoundOptions {
    BoundVariant variant = BoundVariant::general;
    double degenerate_cap = 1.0;  // C with M_p, D_p <= C exp(exp(gamma sqrt r))
    double degenerate_r1 = 1.0;   // anchor radius R_1 of the degenerating case
};

/// Log-space factor breakdown of an assembled right-hand side. log_rhs() is
/// the exact sum of the parts, so reports can show where the mass sits.
struct BoundFactors {
    double log_constant = 0.0;  // explicit theorem constant
    double log_gamma_i = 0.0;   // error-function (or substituted) factor at x_i
    double log_gamma_j = 0.0;
    double log_poly = 0.0;      // polynomial correction
    double log_volume = 0.0;    // -(1/2) ln of each ball volume
    double spectral = 0.0;      // -Lambda (t - ...)
    double gaussian = 0.0;      // -zeta_S(rho, t)
    double log_rhs() const {
        return log_constant + log_gamma_i + log_gamma_j + log_poly + log_volume + spectral +
               gaussian;
    }
};

/// Assembled Gaussian upper bound for p_t(x_i, x_j) under certified SV
/// hypotheses; requires t >= 8 max{r_i^2, r_j^2} and R_k >= 2 r_k.
BoundFactors main_bound_rhs(const WeightedGraph& g, const IntrinsicMetric& rho,
                            const CenterCertificate& ci, const CenterCertificate& cj, double t,
                            double lambda);

/// Variant right-hand sides with the documented constant substitutions; the
/// variant hypotheses are verified (m = deg; inf m > 0; mean growth cap) and
/// an uncertified hypothesis raises.
BoundFactors special_case_rhs(const WeightedGraph& g, const IntrinsicMetric& rho,
                              const CenterCertificate& ci, const CenterCertificate& cj, double t,
                              double lambda, const BoundOptions& options);

struct BoundReport {
    int x = 0, y = 0;
    double t = 0.0;
    double rho = 0.0;
    double log_lhs = 0.0;  // -inf when the kernel value underflows to <= 0
    double log_rhs = 0.0;
    double log_margin = 0.0;
    bool pass = false;
    bool vacuous = false;
    BoundFactors factors;
};

struct BoundGrid {
    std::vector<std::pair<int, int>> pairs;
    std::vector<double> times;
};

/// Compares the exact kernel against the assembled rhs on a grid; one report
/// per (x, y, t). Certificates must cover every vertex in the pair list.
std::vector<BoundReport> verify_bound(const HeatSystem& hs, const IntrinsicMetric& rho,
                                      const std::map<int, CenterCertificate>& certificates,
                                      const BoundGrid& grid, const BoundOptions& options = {});

struct BoundSummary {
    int total = 0;
    int passed = 0;
    int vacuous = 0;
    double min_log_margin = std::numeric_limits<double>::infinity();
    int worst_x = -1, worst_y = -1;
    double worst_t = 0.0;
};
BoundSummary summarize_bounds(const std::vector<BoundReport>& reports);

}  // namespace hklab
