#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hklab/check.hpp"
#include "hklab/graph.hpp"
#include "hklab/metric.hpp"

namespace hklab {

/// Dimension/exponent block (n, d, p) with the derived quantities used by the
/// iteration machinery. p = infinity selects the sup-variant of the means and
/// makes q exactly 1.
struct GeometryParams {
    double n = 3.0;  // > 2
    double d = 1.0;  // > 0
    double p = std::numeric_limits<double>::infinity();  // in (1, inf]

    double q() const { return std::isinf(p) ? 1.0 : p / (p - 1.0); }
    double alpha() const { return 1.0 + 2.0 / n; }
    double beta() const { return 1.0 + 1.0 / std::max(n, 2.0 * q()); }
    /// decay rate of theta: theta(r) ~ e^{-gamma sqrt r}
    double gamma_rate(double jump_size) const;
    void validate() const;
};

double ball_volume(const WeightedGraph& g, const IntrinsicMetric& rho, int x, double radius);

/// D_p: p-mean of the weighted vertex degree over the ball (sup for p = inf).
double degree_mean(const WeightedGraph& g, const IntrinsicMetric& rho, int x, double radius,
                   double p);

/// M_p: p-mean of 1/m over the ball (sup for p = inf).
double inverse_measure_mean(const WeightedGraph& g, const IntrinsicMetric& rho, int x,
                            double radius, double p);

/// mu_x(R) = 1 v (m(B_x(R))/R^d)^q ; R must be positive.
double mu_term(const WeightedGraph& g, const IntrinsicMetric& rho, int x, double radius, double d,
               double q);

struct IterationExponent {
    int kappa = 0;       // floor(sqrt(r/4S) - 2), clamped at 0
    double theta = 0.5;  // 1/(2 beta^kappa), in (0, 1/2]
    bool clamped = false;
};
/// The iteration count/exponent pair; for r < 16S kappa is clamped to 0 so
/// theta stays <= 1/2 on small radii (flagged).
IterationExponent kappa_theta(double r, double jump_size, double beta);

/// K(R,S) = floor(sqrt(R/8S) - 2); requires R >= 32S.
int moser_step_count(double radius, double jump_size);

/// Smallest radius for the l2 mean value inequality:
/// 8S (ln q / ln(alpha/beta) + 3)^2.
double mean_value_min_radius(double jump_size, double n, double q);

/// log of the geometry error function
/// Gamma_x(r) = [(1 + r^2 D_p(r)) M_p(r)^q m(B(r))^q]^{theta(r)}.
double log_gamma_error(const WeightedGraph& g, const IntrinsicMetric& rho, int x, double r,
                       const GeometryParams& params);
double gamma_error(const WeightedGraph& g, const IntrinsicMetric& rho, int x, double r,
                   const GeometryParams& params);

struct DoublingEstimate {
    double constant = 1.0;  // smallest C_D valid on [r1, r2]
    double worst_r1 = 0.0, worst_r2 = 0.0;
};
/// Exact smallest C_D with m(B(r2)) <= C_D (r2/r1)^d m(B(r1)) on
/// R1 <= r1 <= r2 <= R2, via the step structure of r -> m(B(r)).
DoublingEstimate doubling_constant(const WeightedGraph& g, const IntrinsicMetric& rho, int x,
                                   double r1, double r2, double d);

struct AscentBudget {
    int random_starts = 4;
    int max_iterations = 400;
    std::uint64_t seed = 1;
};

struct SobolevEstimate {
    double constant = 0.0;  // certified lower bound for the best C_S at this radius
    double radius = 0.0;
    VertexFunction certificate;  // maximizing candidate, supported in B(R)^circ
    bool converged = false;      // every ascent start reached gradient norm < 1e-8
};
/// Rayleigh-type estimate of the Sobolev constant at a single radius:
/// sup over candidates u (supported in B(R)^circ) of
///   (m(B)^{2/n}/R^2) ||u||_{2n/(n-2)}^2 / (|||nabla u|||_2^2 + R^{-2}||u||_2^2)
/// by multi-start projected gradient ascent plus deterministic test functions.
/// Always a valid lower bound; the certificate reproduces it.
SobolevEstimate sobolev_constant(const WeightedGraph& g, const IntrinsicMetric& rho, int x,
                                 double radius, double n, const AscentBudget& budget = {});

/// The scale-invariant ratio a candidate u realizes (diagnostic / certificate
/// replay).
double sobolev_ratio(const WeightedGraph& g, const IntrinsicMetric& rho, int x, double radius,
                     double n, const VertexFunction& u);

struct SVTargets {
    std::optional<double> sobolev;
    std::optional<double> doubling;
};

struct SVEstimate {
    int center = 0;
    double r1 = 0.0, r2 = 0.0;
    double n = 0.0, d = 0.0;
    double sobolev = 0.0;   // max over the radius grid
    double doubling = 1.0;  // exact on [r1, r2]
    std::vector<SobolevEstimate> per_radius;
    DoublingEstimate doubling_detail;
    bool converged = false;
    bool pass = true;  // against declared targets, vacuously true without them
    std::string note;
};
/// Certifies SV(n, d, R1, R2) at x: Sobolev estimates on the (lossless)
/// realized-distance grid plus one doubling run; pass iff both achieved
/// constants stay within the declared targets, when given.
SVEstimate sv_check(const WeightedGraph& g, const IntrinsicMetric& rho, int x, double r1,
                    double r2, double n, double d, const SVTargets& targets = {},
                    const AscentBudget& budget = {});

/// Realized distances from x intersected with [r1, r2], endpoints included.
std::vector<double> radius_grid(const IntrinsicMetric& rho, int x, double r1, double r2);

/// Per-center radial profile for dumps: one row per grid radius.
struct GeometryProfile {
    int center = 0;
    GeometryParams params;
    double jump_size = 0.0;
    struct Row {
        double radius;
        double volume;
        double degree_mean;
        double inverse_measure_mean;
        double mu;
        double theta;
        int kappa;
        double gamma;
    };
    std::vector<Row> rows;
};
GeometryProfile build_profile(const WeightedGraph& g, const IntrinsicMetric& rho, int x,
                              const GeometryParams& params, const std::vector<double>& radii);

}  // namespace hklab
