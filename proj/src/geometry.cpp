#include "hklab/geometry.hpp"

#include <algorithm>
#include <cmath>

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
};

}  // namespace

double GeometryParams::gamma_rate(double jump_size) const {
    return std::log(beta()) / std::sqrt(4.0 * jump_size);
}

void GeometryParams::validate() const {
    if (!(n > 2.0)) throw GraphError("dimension n must exceed 2");
    if (!(d > 0.0)) throw GraphError("dimension d must be positive");
    if (!(p > 1.0)) throw GraphError("mean exponent p must lie in (1, inf]");
}

double ball_volume(const WeightedGraph& g, const IntrinsicMetric& rho, int x, double radius) {
    double acc = 0.0;
    for (int y : ball(rho, x, radius)) acc += g.measure(y);
    return acc;
}

double degree_mean(const WeightedGraph& g, const IntrinsicMetric& rho, int x, double radius,
                   double p) {
    if (!(p > 1.0)) throw GraphError("mean exponent p must lie in (1, inf]");
    VertexSet b = ball(rho, x, radius);
    if (std::isinf(p)) {
        double sup = 0.0;
        for (int y : b) sup = std::max(sup, g.weighted_degree(y));
        return sup;
    }
    double vol = 0.0, acc = 0.0;
    for (int y : b) {
        vol += g.measure(y);
        acc += g.measure(y) * std::pow(g.weighted_degree(y), p);
    }
    return std::pow(acc / vol, 1.0 / p);
}

double inverse_measure_mean(const WeightedGraph& g, const IntrinsicMetric& rho, int x,
                            double radius, double p) {
    if (!(p > 1.0)) throw GraphError("mean exponent p must lie in (1, inf]");
    VertexSet b = ball(rho, x, radius);
    if (std::isinf(p)) {
        double sup = 0.0;
        for (int y : b) sup = std::max(sup, 1.0 / g.measure(y));
        return sup;
    }
    double vol = 0.0, acc = 0.0;
    for (int y : b) {
        vol += g.measure(y);
        acc += g.measure(y) * std::pow(g.measure(y), -p);
    }
    return std::pow(acc / vol, 1.0 / p);
}

double mu_term(const WeightedGraph& g, const IntrinsicMetric& rho, int x, double radius, double d,
               double q) {
    if (!(radius > 0.0)) throw GraphError("mu requires a positive radius");
    double ratio = ball_volume(g, rho, x, radius) / std::pow(radius, d);
    return std::max(1.0, std::pow(ratio, q));
}

IterationExponent kappa_theta(double r, double jump_size, double beta) {
    if (r < 0.0) throw GraphError("kappa/theta need r >= 0");
    if (!(jump_size > 0.0)) throw GraphError("jump size must be positive");
    if (!(beta > 1.0)) throw GraphError("beta must exceed 1");
    IterationExponent out;
    double raw = std::floor(std::sqrt(r / (4.0 * jump_size)) - 2.0);
    if (raw < 0.0) {
        out.kappa = 0;
        out.clamped = true;
    } else {
        out.kappa = static_cast<int>(raw);
    }
    out.theta = 0.5 * std::pow(beta, -out.kappa);
    return out;
}

int moser_step_count(double radius, double jump_size) {
    if (radius < 32.0 * jump_size)
        throw GraphError("space-time iteration assumes R >= 32S");
    return static_cast<int>(std::floor(std::sqrt(radius / (8.0 * jump_size)) - 2.0));
}

double mean_value_min_radius(double jump_size, double n, double q) {
    GeometryParams params{n, 1.0, q <= 1.0 ? std::numeric_limits<double>::infinity() : q / (q - 1.0)};
    double ratio = std::log(q) / std::log(params.alpha() / params.beta());
    return 8.0 * jump_size * (ratio + 3.0) * (ratio + 3.0);
}

double log_gamma_error(const WeightedGraph& g, const IntrinsicMetric& rho, int x, double r,
                       const GeometryParams& params) {
    if (!(r > 0.0)) throw GraphError("error function needs r > 0");
    params.validate();
    double q = params.q();
    auto exponent = kappa_theta(r, rho.jump_size(), params.beta());
    double dp = degree_mean(g, rho, x, r, params.p);
    double mp = inverse_measure_mean(g, rho, x, r, params.p);
    double vol = ball_volume(g, rho, x, r);
    return exponent.theta * (std::log1p(r * r * dp) + q * std::log(mp) + q * std::log(vol));
}

double gamma_error(const WeightedGraph& g, const IntrinsicMetric& rho, int x, double r,
                   const GeometryParams& params) {
    return std::exp(log_gamma_error(g, rho, x, r, params));
}

std::vector<double> radius_grid(const IntrinsicMetric& rho, int x, double r1, double r2) {
    std::vector<double> grid{r1, r2};
    for (int y = 0; y < rho.vertex_count(); ++y) {
        double d = rho(x, y);
        if (d >= r1 && d <= r2) grid.push_back(d);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

DoublingEstimate doubling_constant(const WeightedGraph& g, const IntrinsicMetric& rho, int x,
                                   double r1, double r2, double d) {
    if (!(r1 > 0.0) || r2 < r1) throw GraphError("doubling needs 0 < R1 <= R2");
    auto grid = radius_grid(rho, x, r1, r2);
    // Volume is a right-continuous step function jumping exactly on the grid.
    // The ratio m(B(b))/b^d * a^d/m(B(a)) is maximized with the outer radius b
    // at the left end of a constancy interval (volume already jumped, radius
    // smallest) and the inner radius a at the right end (volume still small,
    // radius largest, approached from below).
    const size_t k = grid.size();
    std::vector<double> vol_at(k);      // m(B(grid[i]))
    std::vector<double> vol_before(k);  // lim_{r -> grid[i]^-} m(B(r)) = previous step
    for (size_t i = 0; i < k; ++i) vol_at[i] = ball_volume(g, rho, x, grid[i]);
    vol_before[0] = vol_at[0];
    for (size_t i = 1; i < k; ++i) vol_before[i] = vol_at[i - 1];

    DoublingEstimate best;
    best.constant = 1.0;
    best.worst_r1 = best.worst_r2 = r1;
    auto consider = [&](double inner_r, double inner_vol, double outer_r, double outer_vol) {
        if (inner_r > outer_r) return;
        double c = outer_vol * std::pow(inner_r, d) / (inner_vol * std::pow(outer_r, d));
        if (c > best.constant) {
            best.constant = c;
            best.worst_r1 = inner_r;
            best.worst_r2 = outer_r;
        }
    };
    for (size_t i = 0; i < k; ++i) {
        for (size_t j = i; j < k; ++j) {
            consider(grid[i], vol_at[i], grid[j], vol_at[j]);
            // inner radius approaching grid[i] from below (volume one step lower)
            if (i > 0) consider(grid[i], vol_before[i], grid[j], vol_at[j]);
        }
    }
    return best;
}

double sobolev_ratio(const WeightedGraph& g, const IntrinsicMetric& rho, int x, double radius,
                     double n, const VertexFunction& u) {
    const double r_exp = 2.0 * n / (n - 2.0);
    double vol = ball_volume(g, rho, x, radius);
    double lp = 0.0, l2 = 0.0;
    for (int y = 0; y < g.vertex_count(); ++y) {
        lp += g.measure(y) * std::pow(std::abs(u[y]), r_exp);
        l2 += g.measure(y) * u[y] * u[y];
    }
    if (l2 == 0.0) return 0.0;
    double numer = std::pow(vol, 2.0 / n) / (radius * radius) * std::pow(lp, 2.0 / r_exp);
    double denom = 2.0 * energy_form(g, u, u) + l2 / (radius * radius);
    return numer / denom;
}

SobolevEstimate sobolev_constant(const WeightedGraph& g, const IntrinsicMetric& rho, int x,
                                 double radius, double n, const AscentBudget& budget) {
    if (!(n > 2.0)) throw GraphError("Sobolev estimate needs n > 2");
    VertexSet interior = combinatorial_interior(g, ball(rho, x, radius));
    if (interior.empty())
        throw GraphError("Sobolev estimate: B(R)^circ is empty at R = " + std::to_string(radius));

    const int nv = g.vertex_count();
    const double r_exp = 2.0 * n / (n - 2.0);
    const double vol = ball_volume(g, rho, x, radius);
    const double c_num = std::pow(vol, 2.0 / n) / (radius * radius);

    SobolevEstimate best;
    best.radius = radius;
    best.converged = true;

    auto consider = [&](const VertexFunction& u) {
        double r = sobolev_ratio(g, rho, x, radius, n, u);
        if (r > best.constant) {
            best.constant = r;
            best.certificate = u;
        }
    };

    // deterministic candidates: vertex indicators and a tent over the set
    for (int y : interior) {
        VertexFunction u = VertexFunction::Zero(nv);
        u[y] = 1.0;
        consider(u);
    }
    {
        VertexFunction u = VertexFunction::Zero(nv);
        for (int y : interior) u[y] = 1.0;
        consider(u);
        VertexFunction tent = cutoff(g, rho, {x}, std::max(radius / 2.0, rho.jump_size()));
        for (int y = 0; y < nv; ++y)
            if (!contains(interior, y)) tent[y] = 0.0;
        if (tent.cwiseAbs().maxCoeff() > 0.0) consider(tent);
    }

    // projected gradient ascent on log(ratio) over functions on the interior
    auto ascend = [&](VertexFunction u) {
        for (int y = 0; y < nv; ++y)
            if (!contains(interior, y)) u[y] = 0.0;
        double l2 = std::sqrt((g.measure().array() * u.array().square()).sum());
        if (l2 == 0.0) return false;
        u /= l2;
        double step = 0.1;
        double current = sobolev_ratio(g, rho, x, radius, n, u);
        bool converged = false;
        for (int it = 0; it < budget.max_iterations; ++it) {
            double lp = 0.0, l22 = 0.0;
            for (int y : interior) {
                lp += g.measure(y) * std::pow(std::abs(u[y]), r_exp);
                l22 += g.measure(y) * u[y] * u[y];
            }
            double numer = c_num * std::pow(lp, 2.0 / r_exp);
            double energy = 2.0 * energy_form(g, u, u);
            double denom = energy + l22 / (radius * radius);

            VertexFunction grad = VertexFunction::Zero(nv);
            for (int y : interior) {
                double gn = 2.0 * c_num * std::pow(lp, 2.0 / r_exp - 1.0) * g.measure(y) *
                            std::pow(std::abs(u[y]), r_exp - 1.0) * (u[y] >= 0.0 ? 1.0 : -1.0);
                double lu = 0.0;
                for (auto [z, w] : g.neighbors(y)) lu += w * (u[y] - u[z]);
                double gd = 4.0 * lu + 2.0 * g.measure(y) * u[y] / (radius * radius);
                grad[y] = gn / numer - gd / denom;
            }
            double gnorm = grad.norm();
            if (gnorm < 1e-8) {
                converged = true;
                break;
            }
            // backtracking on the log-ratio
            bool moved = false;
            for (int half = 0; half < 30; ++half) {
                VertexFunction trial = u + step * grad;
                double tl2 = std::sqrt((g.measure().array() * trial.array().square()).sum());
                if (tl2 > 0.0) {
                    trial /= tl2;
                    double value = sobolev_ratio(g, rho, x, radius, n, trial);
                    if (value > current) {
                        u = trial;
                        current = value;
                        step *= 1.5;
                        moved = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if (!moved) {
                converged = gnorm < 1e-6;  // stalled at numerical resolution
                break;
            }
        }
        consider(u);
        return converged;
    };

    // deterministic starts
    {
        VertexFunction u = VertexFunction::Zero(nv);
        u[interior.front()] = 1.0;
        if (!ascend(u)) best.converged = false;
        VertexFunction ones = VertexFunction::Zero(nv);
        for (int y : interior) ones[y] = 1.0;
        if (!ascend(ones)) best.converged = false;
    }
    for (int s = 0; s < budget.random_starts; ++s) {
        SplitMix rng{budget.seed + static_cast<std::uint64_t>(s) * 0x9e3779b9ull};
        VertexFunction u = VertexFunction::Zero(nv);
        for (int y : interior) u[y] = rng.uniform() * 2.0 - 1.0;
        if (!ascend(u)) best.converged = false;
    }
    return best;
}

SVEstimate sv_check(const WeightedGraph& g, const IntrinsicMetric& rho, int x, double r1,
                    double r2, double n, double d, const SVTargets& targets,
                    const AscentBudget& budget) {
    if (r2 < r1) throw GraphError("SV check needs R1 <= R2");
    SVEstimate out;
    out.center = x;
    out.r1 = r1;
    out.r2 = r2;
    out.n = n;
    out.d = d;
    out.converged = true;
    for (double r : radius_grid(rho, x, r1, r2)) {
        auto est = sobolev_constant(g, rho, x, r, n, budget);
        out.sobolev = std::max(out.sobolev, est.constant);
        if (!est.converged) out.converged = false;
        out.per_radius.push_back(std::move(est));
    }
    out.doubling_detail = doubling_constant(g, rho, x, r1, r2, d);
    out.doubling = out.doubling_detail.constant;
    if (targets.sobolev && out.sobolev > *targets.sobolev) {
        out.pass = false;
        double worst = 0.0;
        for (const auto& e : out.per_radius)
            if (e.constant == out.sobolev) worst = e.radius;
        out.note = "Sobolev constant " + std::to_string(out.sobolev) + " exceeds target at R = " +
                   std::to_string(worst);
    }
    if (targets.doubling && out.doubling > *targets.doubling) {
        out.pass = false;
        if (!out.note.empty()) out.note += "; ";
        out.note += "doubling constant " + std::to_string(out.doubling) + " exceeds target";
    }
    return out;
}

GeometryProfile build_profile(const WeightedGraph& g, const IntrinsicMetric& rho, int x,
                              const GeometryParams& params, const std::vector<double>& radii) {
    params.validate();
    GeometryProfile profile;
    profile.center = x;
    profile.params = params;
    profile.jump_size = rho.jump_size();
    for (double r : radii) {
        if (!(r > 0.0)) continue;
        GeometryProfile::Row row;
        row.radius = r;
        row.volume = ball_volume(g, rho, x, r);
        row.degree_mean = degree_mean(g, rho, x, r, params.p);
        row.inverse_measure_mean = inverse_measure_mean(g, rho, x, r, params.p);
        row.mu = mu_term(g, rho, x, r, params.d, params.q());
        auto exponent = kappa_theta(r, rho.jump_size(), params.beta());
        row.theta = exponent.theta;
        row.kappa = exponent.kappa;
        row.gamma = gamma_error(g, rho, x, r, params);
        profile.rows.push_back(row);
    }
    return profile;
}

}  // namespace hklab
