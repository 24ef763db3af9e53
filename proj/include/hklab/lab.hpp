#pragma once

#include <functional>
#include <vector>

#include "hklab/bounds.hpp"
#include "hklab/check.hpp"
#include "hklab/geometry.hpp"
#include "hklab/semigroup.hpp"

namespace hklab {

/// Composite Gauss-Legendre quadrature (64-point panels), panels doubled until
/// the result is stable to `rel_tol` of the integrand scale.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-8);

/// Test object for the differential inequalities: v_t = P_t^omega f for f >= 0
/// (an exact solution of d/dt v + Delta_omega v = 0, hence sub- and
/// supersolution), optionally plus a nonnegative time ramp c (t - t_lo)
/// e^omega which tilts it into a strict supersolution. Values and time
/// derivatives come from the spectral representation, so derivatives are
/// exact; `audit` rechecks the defining inequality with finite differences.
class SolutionSample {
  public:
    enum class Kind { solution, subsolution, supersolution };

    static SolutionSample evolve(const HeatSystem& hs, VertexFunction omega, VertexFunction f,
                                 double t_lo, double t_hi, double ramp_rate = 0.0);

    VertexFunction value(double t) const;
    VertexFunction derivative(double t) const;  // exact d/dt

    Kind kind() const { return ramp_rate_ > 0.0 ? Kind::supersolution : Kind::solution; }
    bool is_subsolution() const { return ramp_rate_ == 0.0; }
    bool is_supersolution() const { return true; }
    double t_lo() const { return t_lo_; }
    double t_hi() const { return t_hi_; }
    const VertexFunction& omega() const { return omega_; }
    const WeightedGraph& graph() const { return hs_->graph(); }

    /// Finite-difference audit of (d/dt + Delta_omega) v {=, >=} 0 on the
    /// domain; fails if the residual exceeds tol relative to the data scale.
    CheckReport audit(int time_samples = 7, double tol = 1e-7) const;

  private:
    const HeatSystem* hs_ = nullptr;  // must outlive the sample
    VertexFunction omega_;
    Eigen::VectorXd coeff_;  // spectral coefficients of e^{-omega} f
    double t_lo_ = 0.0, t_hi_ = 0.0;
    double ramp_rate_ = 0.0;
};

/// l^p norm on a finite measure space (B, mu); p in [1, inf].
double lp_norm(const VertexSet& b, const Eigen::VectorXd& mu, const Eigen::VectorXd& w, double p);

/// Elementary two-point inequalities used by the energy estimates:
///   (a^{2p-1} - b^{2p-1})(a - b)  >= (2p-1)/p^2 (a^p - b^p)^2     (p > 1/2)
///   |a^{2p-1} b - b^{2p-1} a|     <= (p-1)/p |a^{2p} - b^{2p}|    (p >= 1)
///   (a^{2p-1} + b^{2p-1})|a - b|  <= 4 |a^p - b^p| (a^p + b^p)    (p >= 1/2)
/// Each report covers sample_count random nonnegative pairs per applicable p.
std::vector<CheckReport> check_elementary(const std::vector<double>& p_grid, int sample_count,
                                          std::uint64_t seed);

/// Two-point lower bound behind the energy estimate: for positive weights
/// psi = e^omega, values v >= 0, cut-off values phi in [0,1] and p >= 1,
///   grad(phi^2 v^{2p-1} psi) grad(psi^{-1} v)
///     >= (1/2p) av(phi^2) (grad v^p)^2
///        - (6+160p) (|grad psi grad psi^{-1}| av(phi^2) + (grad phi)^2) av(v^{2p}).
CheckReport check_pointwise_claim(int pair_samples, const std::vector<double>& p_grid,
                                  std::uint64_t seed);

/// Energy (Caccioppoli-type) estimate for subsolutions: at each sampled t,
///   d/dt ||phi v^p||_2^2 + 1/2 ||phi |grad v^p|||_2^2
///     <= 166 p^2 (h(omega) + |||grad phi|||_inf^2) ||1_B v^p||_2^2,
/// with the time derivative taken from the spectral representation.
/// Requires 0 <= phi <= 1 supported in the combinatorial interior of B.
CheckReport check_caccioppoli(const WeightedGraph& g, const SolutionSample& v,
                              const VertexFunction& phi, const VertexSet& b, double p,
                              const std::vector<double>& times);

/// Maximal inequality for subsolutions on nested balls B(R1) and B(R2) with
/// R2 - S > R1 and times T1 < T2 < T3.
CheckReport check_maximal_subsolution(const WeightedGraph& g, const IntrinsicMetric& rho,
                                      int center, const SolutionSample& v, double r1, double r2,
                                      double t1, double t2, double t3, double p);

/// One parabolic step: the Sobolev inequality at R2 turns averaged L^{2p}
/// space-time norms on B(R3) into L^{2p alpha} norms on B(R1). `sobolev` is
/// the certified constant at radius R2 (uncertified -> error).
CheckReport check_parabolic_step(const WeightedGraph& g, const IntrinsicMetric& rho, int center,
                                 const SolutionSample& v, double r1, double r2, double r3,
                                 double t1, double t2, double t3, double p, double n,
                                 double sobolev);

/// Full iteration in space and time: K = floor(sqrt(R/8S) - 2) steps from
/// B(R) down to B(R/2), in log scale (the closed-form constant is
/// astronomically large).
CheckReport check_spacetime_iteration(const WeightedGraph& g, const IntrinsicMetric& rho,
                                      int center, const SolutionSample& v, double radius, double T,
                                      double delta, double n, double d, double sobolev,
                                      double doubling);

/// Interpolation between discrete l^p spaces: ||v||_inf <= ||mu^{-1}||_p ||v||_q.
CheckReport check_interpolation(const Eigen::VectorXd& mu, const Eigen::VectorXd& v, double p);

/// Maximal inequality for supersolutions on fixed space (B, mu):
///   max_{[T2,T3]} ||v^s||_1 <= (mu(B)^{1/p}/(T4-T3) + s ||Deg||_p)
///                              int_{T1}^{T4} ||v^s||_q.
CheckReport check_supersolution_maximal(const WeightedGraph& g, const VertexSet& b,
                                        const Eigen::VectorXd& mu, const SolutionSample& v,
                                        double t1, double t2, double t3, double t4, double s,
                                        double p);

/// One beta-step of the iteration in time, beta in (1, 1 + 1/q).
CheckReport check_time_iteration_step(const WeightedGraph& g, const VertexSet& b,
                                      const Eigen::VectorXd& mu, const SolutionSample& v,
                                      double t1, double t2, double t3, double t4, double s,
                                      double p, double beta);

/// Iterated sup bound on the fixed space (B, mu), in log scale:
///   sup v^2 <= G ((1/2 delta T) int sum mu v^{2 beta^k q})^{1/(beta^k q)}.
CheckReport check_time_iteration(const WeightedGraph& g, const VertexSet& b,
                                 const Eigen::VectorXd& mu, const SolutionSample& v, double T,
                                 double delta, int k, double p, double beta);

struct Mv2Result {
    CheckReport main;   // the mean value inequality in log scale
    CheckReport pivot;  // arithmetic side-check alpha^kappa >= beta^kappa q
};
/// l2 mean value inequality at radius R >= R0(S, n, q) under certified
/// SV(R/2, R) constants, for nonnegative solutions on the doubled cylinder.
Mv2Result check_mv2(const WeightedGraph& g, const IntrinsicMetric& rho, int center,
                    const SolutionSample& v, double radius, double T, double tau,
                    const GeometryParams& params, double sobolev, double doubling);

/// Half of the kernel bound machinery: phi built the way the final assembly
/// builds it, from mean-value constants at one center.
struct DaviesPhi {
    double log_c = 0.0;      // ln C_{d,n,beta} at the center
    double log_gamma = 0.0;  // ln Gamma(r'/2)
    double n = 3.0;
    double r_prime = 0.0;  // effective radius r'
    double delta = 0.5;
    double volume = 0.0;  // m(B(r'))
    double a = 0.0, b = 0.0;  // time window [T - delta r'^2, T + delta r'^2]

    /// ln phi(h): phi^{-2} = e^{log_c} Gamma^2 (1+delta r'^2 h)^{n/2+1}
    ///            / (delta^{n/2+1} r'^2 volume)
    double log_phi(double h) const;
};
DaviesPhi make_davies_phi(const WeightedGraph& g, const IntrinsicMetric& rho, int center, double T,
                          double delta, double r, double R, const GeometryParams& params,
                          double sobolev, double doubling);

/// Abstract kernel bound from semigroup control: verifies the hypothesis
///   phi(h(omega))^2 (P_T^omega f)(x)^2 <= int_a^b ||P_t^omega f||_2^2 dt
/// on the supplied nonnegative sample functions (error if it fails: the
/// statement is conditional), then checks
///   p_2T(x1,x2) <= min over the kappa grid of
///     e^{omega(x2)-omega(x1)}/(phi_1 phi_2) prod_i (int ||P^omega||^2)^{1/2}
/// with omega = -kappa min(rho(x1,.), rho(x1,x2)).
CheckReport check_davies_abstract(const HeatSystem& hs, const IntrinsicMetric& rho, int x1, int x2,
                                  double T, const DaviesPhi& phi1, const DaviesPhi& phi2,
                                  const std::vector<double>& kappa_grid,
                                  const std::vector<VertexFunction>& f_samples);

/// End to end: certify SV at both centers, assemble the Gaussian bound, and
/// compare against the exact kernel on the grid.
std::vector<CheckReport> check_final_theorem(const HeatSystem& hs, const IntrinsicMetric& rho,
                                             const std::vector<int>& centers, double r, double R,
                                             const GeometryParams& params, const BoundGrid& grid,
                                             const BoundOptions& options = {},
                                             const AscentBudget& budget = {});

/// Runs independent jobs on a small worker pool; results keep the job order.
std::vector<CheckReport> run_parallel(const std::vector<std::function<CheckReport()>>& jobs,
                                      int workers);

}  // namespace hklab
