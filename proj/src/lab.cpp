#include "hklab/lab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace hklab {

namespace {

struct SplitMix {
    std::uint64_t state;
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
};

double pow_pos(double v, double e) { return std::pow(std::max(v, 0.0), e); }

/// 64-point Gauss-Legendre nodes/weights on [-1,1], Newton on P_64.
const std::vector<std::pair<double, double>>& gl64() {
    static const std::vector<std::pair<double, double>> table = [] {
        constexpr int n = 64;
        std::vector<std::pair<double, double>> out(n);
        for (int i = 0; i < n; ++i) {
            double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            out[static_cast<size_t>(i)] = {x, 2.0 / ((1.0 - x * x) * dp * dp)};
        }
        return out;
    }();
    return table;
}

double gl_panel(const std::function<double(double)>& f, double a, double b) {
    double mid = (a + b) / 2.0, half = (b - a) / 2.0;
    double acc = 0.0;
    for (auto [x, w] : gl64()) acc += w * f(mid + half * x);
    return acc * half;
}

/// Dense max of a smooth scalar function over [a, b].
double grid_max(const std::function<double(double)>& f, double a, double b, int samples = 97) {
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < samples; ++i)
        best = std::max(best, f(a + (b - a) * i / (samples - 1.0)));
    return best;
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol) {
    if (b < a) throw GraphError("integration interval is reversed");
    if (a == b) return 0.0;
    double prev = gl_panel(f, a, b);
    for (int panels = 2; panels <= 64; panels *= 2) {
        double acc = 0.0;
        for (int i = 0; i < panels; ++i)
            acc += gl_panel(f, a + (b - a) * i / panels, a + (b - a) * (i + 1) / panels);
        if (std::abs(acc - prev) <= rel_tol * std::max(std::abs(acc), 1e-300)) return acc;
        prev = acc;
    }
    return prev;
}

SolutionSample SolutionSample::evolve(const HeatSystem& hs, VertexFunction omega, VertexFunction f,
                                      double t_lo, double t_hi, double ramp_rate) {
    if (t_lo < 0.0 || t_hi <= t_lo) throw GraphError("solution sample needs 0 <= t_lo < t_hi");
    if (ramp_rate < 0.0) throw GraphError("supersolution ramp must be nonnegative");
    if (f.minCoeff() < 0.0) throw GraphError("solution sample needs nonnegative initial data");
    SolutionSample s;
    s.hs_ = &hs;
    s.omega_ = std::move(omega);
    const auto& g = hs.graph();
    Eigen::VectorXd scaled = (f.array() * (-s.omega_.array()).exp() * g.measure().array()).matrix();
    s.coeff_ = hs.eigenvectors().transpose() * scaled;
    s.t_lo_ = t_lo;
    s.t_hi_ = t_hi;
    s.ramp_rate_ = ramp_rate;
    return s;
}

VertexFunction SolutionSample::value(double t) const {
    Eigen::VectorXd decay = (-t * hs_->eigenvalues().array()).exp();
    VertexFunction base = hs_->eigenvectors() * (decay.array() * coeff_.array()).matrix();
    VertexFunction out = (base.array() * omega_.array().exp()).matrix();
    if (ramp_rate_ > 0.0)
        out += (ramp_rate_ * (t - t_lo_) * omega_.array().exp()).matrix();
    return out;
}

VertexFunction SolutionSample::derivative(double t) const {
    Eigen::VectorXd decay =
        (-t * hs_->eigenvalues().array()).exp() * (-hs_->eigenvalues().array());
    VertexFunction base = hs_->eigenvectors() * (decay.array() * coeff_.array()).matrix();
    VertexFunction out = (base.array() * omega_.array().exp()).matrix();
    if (ramp_rate_ > 0.0) out += (ramp_rate_ * omega_.array().exp()).matrix();
    return out;
}

CheckReport SolutionSample::audit(int time_samples, double tol) const {
    const auto& g = hs_->graph();
    double worst = std::numeric_limits<double>::infinity();  // min of allowed margin
    double scale = 1.0;
    for (int i = 0; i < time_samples; ++i) {
        double t = t_lo_ + (t_hi_ - t_lo_) * (i + 0.5) / time_samples;
        double h = 1e-5 * std::max(1.0, t);
        VertexFunction fd = (value(t + h) - value(t - h)) / (2.0 * h);
        VertexFunction residual = fd + sandwiched_apply(g, omega_, value(t));
        scale = std::max({scale, value(t).cwiseAbs().maxCoeff(), fd.cwiseAbs().maxCoeff()});
        for (int x = 0; x < g.vertex_count(); ++x) {
            double r = residual[x];
            // solutions must vanish, supersolutions must stay nonnegative
            double m = ramp_rate_ > 0.0 ? r : -std::abs(r);
            worst = std::min(worst, m);
        }
    }
    auto rep = make_report("solution-audit",
                           ramp_rate_ > 0.0 ? "supersolution residual" : "solution residual",
                           -worst, 0.0, tol * scale);
    return rep;
}

double lp_norm(const VertexSet& b, const Eigen::VectorXd& mu, const Eigen::VectorXd& w, double p) {
    if (std::isinf(p)) {
        double sup = 0.0;
        for (int x : b) sup = std::max(sup, std::abs(w[x]));
        return sup;
    }
    if (!(p >= 1.0)) throw GraphError("lp norm needs p >= 1");
    double acc = 0.0;
    for (int x : b) acc += mu[x] * std::pow(std::abs(w[x]), p);
    return std::pow(acc, 1.0 / p);
}

std::vector<CheckReport> check_elementary(const std::vector<double>& p_grid, int sample_count,
                                          std::uint64_t seed) {
    SplitMix rng{seed};
    auto draw = [&rng]() {
        // mixed scales, occasionally zero
        double u = rng.uniform();
        if (u < 0.05) return 0.0;
        return std::exp(rng.uniform(-6.0, 3.0));
    };

    struct Spec {
        const char* name;
        double p_min;
        bool open;  // strict inequality at p_min
        // returns (small side, big side)
        std::pair<double, double> (*eval)(double a, double b, double p);
    };
    const Spec specs[3] = {
        {"elementary-energy", 0.5, true,
         [](double a, double b, double p) {
             double big = (std::pow(a, 2 * p - 1) - std::pow(b, 2 * p - 1)) * (a - b);
             double small = (2 * p - 1) / (p * p) * std::pow(std::pow(a, p) - std::pow(b, p), 2.0);
             return std::make_pair(small, big);
         }},
        {"elementary-antisymmetric", 1.0, false,
         [](double a, double b, double p) {
             double small = std::abs(std::pow(a, 2 * p - 1) * b - std::pow(b, 2 * p - 1) * a);
             double big = (p - 1) / p * std::abs(std::pow(a, 2 * p) - std::pow(b, 2 * p));
             return std::make_pair(small, big);
         }},
        {"elementary-sum", 0.5, false,
         [](double a, double b, double p) {
             double small = (std::pow(a, 2 * p - 1) + std::pow(b, 2 * p - 1)) * std::abs(a - b);
             double big = 4.0 * std::abs(std::pow(a, p) - std::pow(b, p)) *
                          (std::pow(a, p) + std::pow(b, p));
             return std::make_pair(small, big);
         }},
    };

    std::vector<CheckReport> out;
    for (const auto& spec : specs) {
        double worst = std::numeric_limits<double>::infinity();
        double worst_lhs = 0.0, worst_rhs = 0.0;
        long samples = 0;
        for (double p : p_grid) {
            if (p < spec.p_min || (spec.open && p == spec.p_min)) continue;
            for (int i = 0; i < sample_count; ++i) {
                double a = draw(), b = draw();
                auto [small, big] = spec.eval(a, b, p);
                double scale = std::max({std::abs(small), std::abs(big), 1e-300});
                double rel = (big - small) / scale;
                if (rel < worst) {
                    worst = rel;
                    worst_lhs = small;
                    worst_rhs = big;
                }
                ++samples;
            }
        }
        auto rep = make_report(spec.name, std::to_string(samples) + " draws", worst_lhs, worst_rhs,
                               1e-12 * std::max({std::abs(worst_lhs), std::abs(worst_rhs), 1e-300}),
                               false, seed);
        rep.margin = worst;  // relative margin across all draws
        rep.tolerance = 1e-12;
        rep.pass = worst >= -1e-12;
        out.push_back(std::move(rep));
    }
    return out;
}

CheckReport check_pointwise_claim(int pair_samples, const std::vector<double>& p_grid,
                                  std::uint64_t seed) {
    SplitMix rng{seed};
    double worst = std::numeric_limits<double>::infinity();
    for (double p : p_grid) {
        if (p < 1.0) continue;
        for (int i = 0; i < pair_samples; ++i) {
            double vx = rng.uniform() < 0.04 ? 0.0 : std::exp(rng.uniform(-3.0, 1.5));
            double vy = rng.uniform() < 0.04 ? 0.0 : std::exp(rng.uniform(-3.0, 1.5));
            double px = std::exp(rng.uniform(-2.0, 2.0));  // psi = e^omega
            double py = std::exp(rng.uniform(-2.0, 2.0));
            double fx = rng.uniform(), fy = rng.uniform();  // phi in [0,1]

            double av_phi2 = 0.5 * (fx * fx + fy * fy);
            double av_v2p = 0.5 * (std::pow(vx, 2 * p) + std::pow(vy, 2 * p));
            double grad_phi = fx - fy;
            double grad_vp = std::pow(vx, p) - std::pow(vy, p);
            double psi_term = std::abs((px - py) * (1.0 / px - 1.0 / py));

            double lhs = (fx * fx * std::pow(vx, 2 * p - 1) * px -
                          fy * fy * std::pow(vy, 2 * p - 1) * py) *
                         (vx / px - vy / py);
            double rhs = 1.0 / (2.0 * p) * av_phi2 * grad_vp * grad_vp -
                         (6.0 + 160.0 * p) * (psi_term * av_phi2 + grad_phi * grad_phi) * av_v2p;
            double scale = std::max({std::abs(lhs), std::abs(rhs), 1.0});
            worst = std::min(worst, (lhs - rhs) / scale);
        }
    }
    auto rep = make_report("pointwise-claim",
                           std::to_string(pair_samples) + " pairs per exponent", 0.0, 0.0, 1e-12,
                           false, seed);
    rep.margin = worst;
    rep.pass = worst >= -1e-12;
    return rep;
}

CheckReport check_caccioppoli(const WeightedGraph& g, const SolutionSample& v,
                              const VertexFunction& phi, const VertexSet& b, double p,
                              const std::vector<double>& times) {
    if (!(p >= 1.0)) throw GraphError("energy estimate needs p >= 1");
    if (!v.is_subsolution()) throw GraphError("energy estimate needs a subsolution");
    VertexSet interior = combinatorial_interior(g, b);
    for (int x = 0; x < g.vertex_count(); ++x) {
        if (phi[x] < -1e-15 || phi[x] > 1.0 + 1e-12)
            throw GraphError("cut-off must take values in [0,1]");
        if (phi[x] > 1e-15 && !contains(interior, x))
            throw GraphError("cut-off support escapes the combinatorial interior of B");
    }

    const double h = h_omega(g, v.omega());
    const double grad_phi_sq = sup_gradient_norm_sq(g, phi);
    double worst = std::numeric_limits<double>::infinity();
    double worst_lhs = 0.0, worst_rhs = 0.0, scale = 1.0;
    for (double t : times) {
        VertexFunction vt = v.value(t);
        VertexFunction dvt = v.derivative(t);
        double ddt = 0.0;
        for (int x = 0; x < g.vertex_count(); ++x)
            ddt += g.measure(x) * phi[x] * phi[x] * 2.0 * p * pow_pos(vt[x], 2.0 * p - 1.0) *
                   dvt[x];
        double grad_term = 0.0;
        for (int x = 0; x < g.vertex_count(); ++x) {
            if (phi[x] == 0.0) continue;
            double acc = 0.0;
            for (auto [y, w] : g.neighbors(x)) {
                double d = pow_pos(vt[x], p) - pow_pos(vt[y], p);
                acc += w * d * d;
            }
            grad_term += phi[x] * phi[x] * acc;
        }
        double lhs = ddt + 0.5 * grad_term;
        double mass = 0.0;
        for (int x : b) mass += g.measure(x) * pow_pos(vt[x], 2.0 * p);
        double rhs = 166.0 * p * p * (h + grad_phi_sq) * mass;
        scale = std::max({scale, std::abs(rhs), std::abs(lhs)});
        if (rhs - lhs < worst) {
            worst = rhs - lhs;
            worst_lhs = lhs;
            worst_rhs = rhs;
        }
    }
    auto rep = make_report("caccioppoli", "min margin over " + std::to_string(times.size()) +
                                              " sample times",
                           worst_lhs, worst_rhs, 1e-8 * scale);
    rep.margin = worst;
    rep.pass = worst >= -rep.tolerance;
    return rep;
}

CheckReport check_maximal_subsolution(const WeightedGraph& g, const IntrinsicMetric& rho,
                                      int center, const SolutionSample& v, double r1, double r2,
                                      double t1, double t2, double t3, double p) {
    const double s = rho.jump_size();
    if (!(r2 - s > r1)) throw GraphError("maximal inequality needs R2 - S > R1");
    if (!(t1 < t2 && t2 < t3)) throw GraphError("maximal inequality needs T1 < T2 < T3");
    if (!(p >= 1.0)) throw GraphError("maximal inequality needs p >= 1");
    if (!v.is_subsolution()) throw GraphError("maximal inequality needs a subsolution");

    VertexSet inner = ball(rho, center, r1);
    VertexSet outer = ball(rho, center, r2);
    auto mass = [&](const VertexSet& set, double t) {
        VertexFunction vt = v.value(t);
        double acc = 0.0;
        for (int x : set) acc += g.measure(x) * pow_pos(vt[x], 2.0 * p);
        return acc;
    };
    auto grad_mass = [&](double t) {
        VertexFunction vt = v.value(t);
        double acc = 0.0;
        for (int x : inner) {
            double e = 0.0;
            for (auto [y, w] : g.neighbors(x)) {
                double d = pow_pos(vt[x], p) - pow_pos(vt[y], p);
                e += w * d * d;
            }
            acc += e;
        }
        return acc;
    };

    double lhs = grid_max([&](double t) { return mass(inner, t); }, t2, t3) +
                 integrate([&](double t) { return grad_mass(t); }, t2, t3);
    double h = h_omega(g, v.omega());
    double factor = 332.0 * p * p *
                    (h + 1.0 / ((r2 - r1 - s) * (r2 - r1 - s)) + 1.0 / (t2 - t1));
    double rhs = factor * integrate([&](double t) { return mass(outer, t); }, t1, t3);
    auto rep = make_report("maximal-subsolution",
                           "R1 = " + std::to_string(r1) + ", R2 = " + std::to_string(r2), lhs, rhs,
                           1e-9 * std::max(1.0, rhs));
    return rep;
}

CheckReport check_parabolic_step(const WeightedGraph& g, const IntrinsicMetric& rho, int center,
                                 const SolutionSample& v, double r1, double r2, double r3,
                                 double t1, double t2, double t3, double p, double n,
                                 double sobolev) {
    const double s = rho.jump_size();
    if (!(sobolev > 0.0))
        throw GraphError("parabolic step: Sobolev hypothesis at R2 is not certified");
    if (!(0.0 <= r1 && r1 < r2 && r2 < r3 && r1 < r2 - s && r2 < r3 - s))
        throw GraphError("parabolic step needs R1 < R2 - S and R2 < R3 - S");
    if (!(t1 < t2 && t2 < t3)) throw GraphError("parabolic step needs T1 < T2 < T3");
    if (!(n > 2.0) || !(p >= 1.0)) throw GraphError("parabolic step needs n > 2, p >= 1");

    const double alpha = 1.0 + 2.0 / n;
    VertexSet b1 = ball(rho, center, r1);
    VertexSet b3 = ball(rho, center, r3);
    double vol1 = ball_volume(g, rho, center, r1);
    double vol2 = ball_volume(g, rho, center, r2);
    double vol3 = ball_volume(g, rho, center, r3);

    auto avg_mass = [&](const VertexSet& set, double vol, double power, double t) {
        VertexFunction vt = v.value(t);
        double acc = 0.0;
        for (int x : set) acc += g.measure(x) * pow_pos(vt[x], power);
        return acc / vol;
    };
    double lhs = integrate([&](double t) { return avg_mass(b1, vol1, 2.0 * p * alpha, t); }, t2,
                           t3) /
                 (t3 - t2);
    double inner = integrate([&](double t) { return avg_mass(b3, vol3, 2.0 * p, t); }, t1, t3) /
                   (t3 - t1);

    double h = h_omega(g, v.omega());
    double c0 = sobolev * std::pow(996.0, alpha) * std::pow(p, 2.0 * alpha) * r2 * r2 *
                (vol3 / vol1) * std::pow(vol3 / vol2, 2.0 / n) *
                std::pow(t3 - t1, alpha) / (t3 - t2) *
                std::pow(h + 1.0 / ((r3 - r2 - s) * (r3 - r2 - s)) +
                             1.0 / ((r2 - r1 - s) * (r2 - r1 - s)) + 1.0 / (t2 - t1),
                         alpha);
    double rhs = c0 * std::pow(inner, alpha);
    return make_report("parabolic-step", "radii " + std::to_string(r1) + "/" + std::to_string(r2) +
                                             "/" + std::to_string(r3),
                       lhs, rhs, 1e-9 * std::max(1.0, rhs));
}

CheckReport check_spacetime_iteration(const WeightedGraph& g, const IntrinsicMetric& rho,
                                      int center, const SolutionSample& v, double radius, double T,
                                      double delta, double n, double d, double sobolev,
                                      double doubling) {
    if (!(sobolev > 0.0) || !(doubling > 0.0))
        throw GraphError("space-time iteration: SV hypothesis is not certified");
    if (!(delta > 0.0 && delta <= 1.0)) throw GraphError("space-time iteration needs delta in (0,1]");
    const int steps = moser_step_count(radius, rho.jump_size());
    const double alpha = 1.0 + 2.0 / n;
    const double power = 2.0 * std::pow(alpha, steps);

    VertexSet half = ball(rho, center, radius / 2.0);
    VertexSet full = ball(rho, center, radius);
    double vol_half = ball_volume(g, rho, center, radius / 2.0);
    double vol_full = ball_volume(g, rho, center, radius);

    auto avg_mass = [&](const VertexSet& set, double vol, double pw, double t) {
        VertexFunction vt = v.value(t);
        double acc = 0.0;
        for (int x : set) acc += g.measure(x) * pow_pos(vt[x], pw);
        return acc / vol;
    };
    double half_r = radius / 2.0;
    double lhs_int = integrate([&](double t) { return avg_mass(half, vol_half, power, t); },
                               T - delta * half_r * half_r, T + delta * half_r * half_r);
    double log_lhs = std::log(std::max(lhs_int / (2.0 * delta * half_r * half_r), 1e-300)) /
                     std::pow(alpha, steps);

    double rhs_int = integrate([&](double t) { return avg_mass(full, vol_full, 2.0, t); },
                               T - delta * radius * radius, T + delta * radius * radius);
    double h = h_omega(g, v.omega());
    double log_rhs = log_c_dn(n, d, sobolev, doubling) +
                     (n / 2.0 + 1.0) * std::log1p(delta * radius * radius * h) -
                     (n / 2.0 + 1.0) * std::log(delta) - 2.0 * std::log(radius) +
                     std::log(std::max(rhs_int, 1e-300));
    auto rep = make_report("spacetime-iteration",
                           "R = " + std::to_string(radius) + ", K = " + std::to_string(steps),
                           log_lhs, log_rhs, 1e-9, true);
    return rep;
}

CheckReport check_interpolation(const Eigen::VectorXd& mu, const Eigen::VectorXd& v, double p) {
    if (mu.minCoeff() <= 0.0) throw GraphError("interpolation needs a positive measure");
    VertexSet all(static_cast<size_t>(mu.size()));
    for (int i = 0; i < mu.size(); ++i) all[static_cast<size_t>(i)] = i;
    double q = std::isinf(p) ? 1.0 : p / (p - 1.0);
    double lhs = lp_norm(all, mu, v, std::numeric_limits<double>::infinity());
    double rhs = lp_norm(all, mu, mu.cwiseInverse(), p) * lp_norm(all, mu, v, q);
    return make_report("interpolation", "p = " + std::to_string(p), lhs, rhs,
                       1e-12 * std::max(1.0, rhs));
}

CheckReport check_supersolution_maximal(const WeightedGraph& g, const VertexSet& b,
                                        const Eigen::VectorXd& mu, const SolutionSample& v,
                                        double t1, double t2, double t3, double t4, double s,
                                        double p) {
    if (!(s >= 1.0)) throw GraphError("supersolution maximal inequality needs s >= 1");
    if (!(t1 <= t2 && t2 <= t3 && t3 < t4))
        throw GraphError("supersolution maximal inequality needs T1 <= T2 <= T3 < T4");
    if (!v.is_supersolution()) throw GraphError("needs a supersolution");
    double q = std::isinf(p) ? 1.0 : p / (p - 1.0);

    auto power_vec = [&](double t) {
        VertexFunction vt = v.value(t);
        Eigen::VectorXd w(vt.size());
        for (int x = 0; x < vt.size(); ++x) w[x] = pow_pos(vt[x], s);
        return w;
    };
    double lhs = grid_max([&](double t) { return lp_norm(b, mu, power_vec(t), 1.0); }, t2, t3);

    double mu_b = 0.0;
    for (int x : b) mu_b += mu[x];
    Eigen::VectorXd deg(g.vertex_count());
    for (int x = 0; x < g.vertex_count(); ++x) deg[x] = g.weighted_degree(x);
    double factor = std::pow(mu_b, std::isinf(p) ? 0.0 : 1.0 / p) / (t4 - t3) +
                    s * lp_norm(b, mu, deg, p);
    double rhs =
        factor * integrate([&](double t) { return lp_norm(b, mu, power_vec(t), q); }, t1, t4);
    return make_report("supersolution-maximal", "s = " + std::to_string(s), lhs, rhs,
                       1e-9 * std::max(1.0, rhs));
}

CheckReport check_time_iteration_step(const WeightedGraph& g, const VertexSet& b,
                                      const Eigen::VectorXd& mu, const SolutionSample& v,
                                      double t1, double t2, double t3, double t4, double s,
                                      double p, double beta) {
    double q = std::isinf(p) ? 1.0 : p / (p - 1.0);
    if (!(beta > 1.0 && beta < 1.0 + 1.0 / q))
        throw GraphError("iteration step needs beta in (1, 1 + 1/q)");
    if (!(s >= 1.0)) throw GraphError("iteration step needs s >= 1");
    if (!(t1 <= t2 && t2 <= t3 && t3 < t4)) throw GraphError("bad time ordering");

    auto norm_at = [&](double power, double t) {
        VertexFunction vt = v.value(t);
        Eigen::VectorXd w(vt.size());
        for (int x = 0; x < vt.size(); ++x) w[x] = pow_pos(vt[x], power);
        return lp_norm(b, mu, w, q);
    };
    double lhs = integrate([&](double t) { return norm_at(s * beta, t); }, t2, t3);

    double mu_b = 0.0;
    for (int x : b) mu_b += mu[x];
    Eigen::VectorXd deg(g.vertex_count());
    for (int x = 0; x < g.vertex_count(); ++x) deg[x] = g.weighted_degree(x);
    Eigen::VectorXd inv_mu = mu.cwiseInverse();
    double bracket = s *
                     (std::max(1.0, std::pow(mu_b, std::isinf(p) ? 0.0 : 1.0 / p)) / (t4 - t3) +
                      lp_norm(b, mu, deg, p)) *
                     std::pow(lp_norm(b, mu, inv_mu, p), q);
    double rhs = std::pow(bracket, beta - 1.0) *
                 std::pow(integrate([&](double t) { return norm_at(s, t); }, t1, t4), beta);
    return make_report("time-iteration-step", "beta = " + std::to_string(beta), lhs, rhs,
                       1e-9 * std::max(1.0, rhs));
}

CheckReport check_time_iteration(const WeightedGraph& g, const VertexSet& b,
                                 const Eigen::VectorXd& mu, const SolutionSample& v, double T,
                                 double delta, int k, double p, double beta) {
    double q = std::isinf(p) ? 1.0 : p / (p - 1.0);
    if (!(beta > 1.0 && beta < 1.0 + 1.0 / q))
        throw GraphError("time iteration needs beta in (1, 1 + 1/q)");
    if (k < 0) throw GraphError("time iteration needs k >= 0");
    if (!(delta > 0.0) || !(T > 0.0)) throw GraphError("time iteration needs positive delta, T");

    double sup_sq = grid_max(
        [&](double t) {
            VertexFunction vt = v.value(t);
            double best = 0.0;
            for (int x : b) best = std::max(best, vt[x] * vt[x]);
            return best;
        },
        (1.0 - delta / 2.0) * T, (1.0 + delta / 2.0) * T);
    double log_lhs = std::log(std::max(sup_sq, 1e-300));

    double mu_b = 0.0;
    for (int x : b) mu_b += mu[x];
    Eigen::VectorXd deg(g.vertex_count());
    for (int x = 0; x < g.vertex_count(); ++x) deg[x] = g.weighted_degree(x);
    double bk = std::pow(beta, k);
    double power = 2.0 * bk * q;
    double integral = integrate(
        [&](double t) {
            VertexFunction vt = v.value(t);
            double acc = 0.0;
            for (int x : b) acc += mu[x] * pow_pos(vt[x], power);
            return acc;
        },
        (1.0 - delta) * T, (1.0 + delta) * T);
    double log_g =
        log_c_beta(beta) +
        1.0 / bk *
            std::log((std::max(1.0, std::pow(mu_b, std::isinf(p) ? 0.0 : 1.0 / p)) +
                      delta * T * lp_norm(b, mu, deg, p)) *
                     std::pow(lp_norm(b, mu, mu.cwiseInverse(), p), q));
    double log_rhs =
        log_g + std::log(std::max(integral / (2.0 * delta * T), 1e-300)) / (bk * q);
    return make_report("time-iteration", "k = " + std::to_string(k), log_lhs, log_rhs, 1e-9, true);
}

Mv2Result check_mv2(const WeightedGraph& g, const IntrinsicMetric& rho, int center,
                    const SolutionSample& v, double radius, double T, double tau,
                    const GeometryParams& params, double sobolev, double doubling) {
    params.validate();
    if (!(sobolev > 0.0) || !(doubling > 0.0))
        throw GraphError("mean value inequality: SV hypothesis is not certified");
    if (!(tau > 0.0 && tau <= 1.0)) throw GraphError("mean value inequality needs tau in (0,1]");
    double q = params.q();
    double r0 = mean_value_min_radius(rho.jump_size(), params.n, q);
    if (radius < r0)
        throw GraphError("mean value inequality needs R >= " + std::to_string(r0));

    VertexSet half = ball(rho, center, radius / 2.0);
    VertexSet full = ball(rho, center, radius);
    double sup_sq = grid_max(
        [&](double t) {
            VertexFunction vt = v.value(t);
            double best = 0.0;
            for (int x : half) best = std::max(best, vt[x] * vt[x]);
            return best;
        },
        T - tau * radius * radius / 8.0, T + tau * radius * radius / 8.0);

    double integral = integrate(
        [&](double t) {
            VertexFunction vt = v.value(t);
            double acc = 0.0;
            for (int x : full) acc += g.measure(x) * vt[x] * vt[x];
            return acc;
        },
        T - tau * radius * radius, T + tau * radius * radius);

    double h = h_omega(g, v.omega());
    double log_rhs = log_c_dnb(params.n, params.d, params.beta(), sobolev, doubling) +
                     2.0 * log_gamma_error(g, rho, center, radius / 2.0, params) +
                     (params.n / 2.0 + 1.0) * std::log1p(tau * radius * radius * h) -
                     (params.n / 2.0 + 1.0) * std::log(tau) - 2.0 * std::log(radius) -
                     std::log(ball_volume(g, rho, center, radius)) +
                     std::log(std::max(integral, 1e-300));

    Mv2Result out;
    out.main = make_report("mv2", "R = " + std::to_string(radius),
                           std::log(std::max(sup_sq, 1e-300)), log_rhs, 1e-9, true);

    int kappa = kappa_theta(radius / 2.0, rho.jump_size(), params.beta()).kappa;
    double lhs_pivot = kappa * std::log(params.beta()) + std::log(q);
    double rhs_pivot = kappa * std::log(params.alpha());
    out.pivot = make_report("mv2-pivot", "kappa = " + std::to_string(kappa), lhs_pivot, rhs_pivot,
                            1e-12, true);
    return out;
}

double DaviesPhi::log_phi(double h) const {
    double log_inv_sq = log_c + 2.0 * log_gamma + (n / 2.0 + 1.0) * std::log1p(delta * r_prime * r_prime * h) -
                        (n / 2.0 + 1.0) * std::log(delta) - 2.0 * std::log(r_prime) -
                        std::log(volume);
    return -0.5 * log_inv_sq;
}

DaviesPhi make_davies_phi(const WeightedGraph& g, const IntrinsicMetric& rho, int center, double T,
                          double delta, double r, double R, const GeometryParams& params,
                          double sobolev, double doubling) {
    params.validate();
    if (!(sobolev > 0.0) || !(doubling > 0.0))
        throw GraphError("davies phi: SV hypothesis is not certified");
    DaviesPhi phi;
    phi.n = params.n;
    phi.delta = delta;
    phi.r_prime = std::max(std::min(std::sqrt(T), R), 2.0 * r);
    if (T - delta * phi.r_prime * phi.r_prime < 0.0)
        throw GraphError("davies phi needs T >= delta r'^2");
    phi.log_c = log_c_dnb(params.n, params.d, params.beta(), sobolev, doubling);
    phi.log_gamma = log_gamma_error(g, rho, center, phi.r_prime / 2.0, params);
    phi.volume = ball_volume(g, rho, center, phi.r_prime);
    phi.a = T - delta * phi.r_prime * phi.r_prime;
    phi.b = T + delta * phi.r_prime * phi.r_prime;
    return phi;
}

CheckReport check_davies_abstract(const HeatSystem& hs, const IntrinsicMetric& rho, int x1, int x2,
                                  double T, const DaviesPhi& phi1, const DaviesPhi& phi2,
                                  const std::vector<double>& kappa_grid,
                                  const std::vector<VertexFunction>& f_samples) {
    const WeightedGraph& g = hs.graph();
    const int n = g.vertex_count();

    VertexFunction profile(n);
    for (int x = 0; x < n; ++x) profile[x] = std::min(rho(x1, x), rho(x1, x2));

    auto norm_sq_m = [&g](const VertexFunction& u) {
        return (g.measure().array() * u.array().square()).sum();
    };

    // hypothesis: phi(h(w))^2 (P_T^w f)(x)^2 <= int_a^b ||P_t^w f||_2^2 dt
    auto hypothesis = [&](const VertexFunction& omega, int x, const DaviesPhi& phi) {
        double h = h_omega(g, omega);
        for (const auto& f : f_samples) {
            double lhs = std::exp(2.0 * phi.log_phi(h)) *
                         std::pow(hs.apply_sandwiched(omega, T, f)[x], 2.0);
            double rhs = integrate(
                [&](double t) { return norm_sq_m(hs.apply_sandwiched(omega, t, f)); }, phi.a,
                phi.b, 1e-10);
            if (lhs > rhs * (1.0 + 1e-9))
                throw GraphError("davies hypothesis fails at kernel center " + g.id_of(x));
        }
    };

    double best = std::numeric_limits<double>::infinity();
    for (double kappa : kappa_grid) {
        VertexFunction omega = (-kappa * profile.array()).matrix();
        hypothesis(omega, x1, phi1);
        hypothesis((-omega).eval(), x2, phi2);
        double h = h_omega(g, omega);
        double log_i1 = (omega[x2] - omega[x1]) - phi1.log_phi(h) - phi2.log_phi(h);
        double int1 = integrate(
            [&](double t) { return std::pow(hs.sandwiched_operator_norm(omega, t), 2.0); },
            phi1.a, phi1.b, 1e-9);
        double int2 = integrate(
            [&](double t) { return std::pow(hs.sandwiched_operator_norm(omega, t), 2.0); },
            phi2.a, phi2.b, 1e-9);
        best = std::min(best, log_i1 + 0.5 * std::log(int1) + 0.5 * std::log(int2));
    }

    double kernel = hs.heat_kernel(2.0 * T, x1, x2);
    double log_lhs = kernel > 0.0 ? std::log(kernel) : -std::numeric_limits<double>::infinity();
    return make_report("davies-abstract",
                       "pair (" + g.id_of(x1) + ", " + g.id_of(x2) + "), T = " + std::to_string(T),
                       log_lhs, best, 1e-9, true);
}

std::vector<CheckReport> check_final_theorem(const HeatSystem& hs, const IntrinsicMetric& rho,
                                             const std::vector<int>& centers, double r, double R,
                                             const GeometryParams& params, const BoundGrid& grid,
                                             const BoundOptions& options,
                                             const AscentBudget& budget) {
    const WeightedGraph& g = hs.graph();
    std::map<int, CenterCertificate> certs;
    for (int c : centers) {
        auto sv = sv_check(g, rho, c, r, R, params.n, params.d, {}, budget);
        CenterCertificate cert;
        cert.vertex = c;
        cert.r = r;
        cert.R = R;
        cert.params = params;
        cert.sobolev = sv.sobolev;
        cert.doubling = sv.doubling;
        certs[c] = cert;
    }
    auto reports = verify_bound(hs, rho, certs, grid, options);
    std::vector<CheckReport> out;
    out.reserve(reports.size());
    for (const auto& b : reports) {
        auto rep = make_report("final-gaussian",
                               "(" + g.id_of(b.x) + ", " + g.id_of(b.y) + "), t = " +
                                   std::to_string(b.t),
                               b.log_lhs, b.log_rhs, std::log1p(1e-9), true);
        out.push_back(std::move(rep));
    }
    return out;
}

std::vector<CheckReport> run_parallel(const std::vector<std::function<CheckReport()>>& jobs,
                                      int workers) {
    std::vector<CheckReport> results(jobs.size());
    if (workers < 1) workers = 1;
    workers = std::min<int>(workers, static_cast<int>(jobs.size()));
    std::atomic<size_t> next{0};
    auto work = [&] {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            try {
                results[i] = jobs[i]();
            } catch (const std::exception& e) {
                results[i].statement = "error";
                results[i].note = e.what();
                results[i].pass = false;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    return results;
}

}  // namespace hklab
