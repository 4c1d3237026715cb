// Acceptance checks 1-13. Prints one PASS/FAIL line per criterion and exits
// nonzero when any of them fails. Optional arguments select criteria by number.

#include "alm/affine.hpp"
#include "alm/errors.hpp"
#include "alm/interpolation.hpp"
#include "alm/multicurve.hpp"
#include "alm/pipeline.hpp"
#include "alm/scenario.hpp"
#include "alm/simulation.hpp"
#include "alm/term_structure.hpp"
#include "alm/xva.hpp"

#include "../fixture.hpp"
#include "../oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

namespace {

using alm::InterpolatorKind;
using alm::Vector;

struct Outcome {
    bool pass = true;
    std::string detail;
};

// Collects sub-checks of one criterion.
class Report {
public:
    void check(bool ok, const std::string& what) {
        if (!ok) pass_ = false;
        if (!ok || verbose_) lines_.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    }
    void note(const std::string& what) { lines_.push_back("     " + what); }
    Outcome outcome(const std::string& summary) const {
        std::string d = summary;
        for (const auto& l : lines_) d += "\n      " + l;
        return {pass_, d};
    }
    void set_verbose(bool v) { verbose_ = v; }

private:
    bool pass_ = true;
    bool verbose_ = false;
    std::vector<std::string> lines_;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

double uniform(std::mt19937_64& rng, double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(rng);
}

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double a : v) out[i++] = a;
    return out;
}

const InterpolatorKind kKinds[] = {InterpolatorKind::IF1, InterpolatorKind::IF2, InterpolatorKind::IF3};

// 1. Riccati flow against the closed form of a single square-root factor.
Outcome riccati_oracle() {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(101);
    double worst = 0.0;
    for (int p = 0; p < 20; ++p) {
        const oracle::Cir c{uniform(rng, 0.1, 2.0), uniform(rng, 0.2, 2.0), uniform(rng, 0.1, 1.0)};
        const auto spec = alm::AffineModelSpec::independent_cir({{c.speed, c.level, c.vol}}, 10.0);
        for (int j = 0; j < 20; ++j) {
            const double t = uniform(rng, 0.1, 10.0);
            const double u = uniform(rng, -3.0, 0.8 * oracle::cir_explosion(c, t));
            const alm::FlowSolution s = alm::solve_riccati(spec, t, vec({u}));
            worst = std::max({worst, std::abs(s.phi - oracle::cir_phi(c, t, u)),
                              std::abs(s.psi[0] - oracle::cir_psi(c, t, u))});
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {worst < 1e-8 && secs < 10.0, fmt("max abs error %.3e (< 1e-8), %.2f s (< 10 s)", worst, secs)};
}

// 2. phi_{t+s}(u) = phi_t(u) + phi_s(psi_t(u)), psi_{t+s}(u) = psi_s(psi_t(u)).
Outcome semi_flow() {
    const auto& f = fixture::synthetic();
    std::mt19937_64 rng(202);
    double worst = 0.0;
    for (int n = 0; n < 100; ++n) {
        const double t = uniform(rng, 0.0, 5.0), s = uniform(rng, 0.0, 5.0);
        const Vector u = vec({uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)});
        const auto a = alm::solve_riccati(f.model, t + s, u);
        const auto b = alm::solve_riccati(f.model, t, u);
        const auto c = alm::solve_riccati(f.model, s, b.psi);
        worst = std::max({worst, std::abs(a.phi - b.phi - c.phi), (a.psi - c.psi).cwiseAbs().maxCoeff()});
    }
    return {worst < 1e-7, fmt("max residual %.3e over 100 triples (< 1e-7)", worst)};
}

// 3. M^u, M^v and the spot density keep their time-0 mean.
Outcome martingales() {
    const auto& f = fixture::synthetic();
    const auto cont = f.continuous(InterpolatorKind::IF2);
    const std::size_t n = 100000;
    const std::vector<double> grid = alm::uniform_grid(f.model.horizon(), 200);
    alm::AffineRate rate{[&](double t, double& p, Vector& q) {
        const auto c = cont.short_rate_coefficients(t);
        p = c.p;
        q = c.q;
    }};
    rate.left_coefficients = [&](double t, double& p, Vector& q) {
        const auto c = cont.left_short_rate_coefficients(t);
        p = c.p;
        q = c.q;
    };
    alm::SimulationOptions opt;
    opt.scheme = alm::Scheme::Exact;
    const alm::PathGrid paths = alm::simulate_paths(f.model, grid, n, 303, opt, nullptr, &rate);

    struct Item {
        std::string name;
        Vector u;
    };
    const std::size_t x3 = f.tenors.find("3M"), x6 = f.tenors.find("6M");
    const std::vector<Item> items = {
        {"M^{u_0}", f.seq.u[0]},          {"M^{u_10}", f.seq.u[10]},        {"M^{u_20}", f.seq.u[20]},
        {"M^{u_30}", f.seq.u[30]},        {"M^{v3M_0}", f.seq.v[x3][0]},    {"M^{v3M_20}", f.seq.v[x3][20]},
        {"M^{v6M_5}", f.seq.v[x6][5]},
    };
    const std::size_t checks[] = {50, 100, 150, 200};
    Report rep;
    double worst = 0.0;
    for (const Item& it : items) {
        const double m0 = alm::martingale_value(f.model, it.u, 0.0, f.model.initial_state());
        for (std::size_t step : checks) {
            const double t = grid[step];
            const auto fl = alm::solve_riccati(f.model, f.model.horizon() - t, it.u, {.gradients = false});
            std::vector<double> v(n);
            for (std::size_t p = 0; p < n; ++p)
                v[p] = std::exp(fl.phi + fl.psi.dot(paths.state_vector(step, p)));
            const auto [m, se] = oracle::mean_se(v);
            const double z = std::abs(m - m0) / se;
            worst = std::max(worst, z);
            rep.check(z < 3.0, fmt("%s t=%.1f mean %.6f vs %.6f (z=%.2f)", it.name.c_str(), t, m, m0, z));
        }
    }
    for (std::size_t step : checks) {
        const double t = grid[step];
        std::vector<double> v(n);
        for (std::size_t p = 0; p < n; ++p)
            v[p] = cont.spot_density(t, paths.state_vector(step, p), paths.integrated_rate(step, p));
        const auto [m, se] = oracle::mean_se(v);
        const double z = std::abs(m - 1.0) / se;
        worst = std::max(worst, z);
        rep.check(z < 3.0, fmt("spot density t=%.1f mean %.6f vs 1 (z=%.2f)", t, m, z));
    }
    return rep.outcome(fmt("%zu martingales x 4 dates + spot density, max |z| %.2f (< 3)", items.size(), worst));
}

// 4. Refit of the synthetic curves.
Outcome fit_reproduction() {
    const auto& f = fixture::synthetic();
    const auto& init = f.scenario.initial;
    const Vector& x0 = f.model.initial_state();
    const int N = f.tenors.intervals();
    Report rep;
    double worst = 0.0;
    for (int l = 0; l <= N; ++l) {
        const double model = alm::martingale_value(f.model, f.seq.u[l], 0.0, x0);
        const double target = init.discount[l] / init.discount[N];
        worst = std::max(worst, std::abs(model / target - 1.0));
    }
    for (std::size_t x = 0; x < f.tenors.tenor_count(); ++x) {
        const alm::MultiCurveModel mc(f.model, f.tenors, f.seq);
        for (int k = 1; k <= f.tenors.periods(x); ++k) {
            const double model = mc.libor_rate(x, k, 0.0, x0);
            worst = std::max(worst, std::abs(model / init.libor[x][k] - 1.0));
        }
    }
    rep.check(worst < 1e-9, fmt("max relative error %.3e", worst));
    bool strict = true;
    for (int l = 0; l < N; ++l) {
        const Vector d = f.seq.u[l] - f.seq.u[l + 1];
        strict = strict && d.minCoeff() >= 0.0 && d.maxCoeff() > 0.0 && f.seq.u_param[l] < f.seq.u_param[l + 1];
    }
    rep.check(strict, "u strictly decreasing along the manifold");
    bool above = true;
    for (std::size_t x = 0; x < f.tenors.tenor_count(); ++x)
        for (int k = 0; k <= f.tenors.periods(x); ++k) {
            const int l = f.tenors.master_index(x, k);
            const Vector d = f.seq.v[x][k] - f.seq.u[l];
            above = above && d.minCoeff() >= 0.0 && d.maxCoeff() > 0.0 && f.seq.v_param[x][k] < f.seq.u_param[l];
        }
    rep.check(above, "v above u componentwise and outward on the manifold");
    return rep.outcome(fmt("relative error %.3e (< 1e-9)", worst));
}

// 5. Bond prices at tenor dates and monotonicity in maturity.
Outcome continuous_consistency() {
    const auto& f = fixture::synthetic();
    std::mt19937_64 rng(505);
    const int N = f.tenors.intervals();
    Report rep;
    double worst_log = 0.0;
    int violations = 0;
    for (InterpolatorKind kind : kKinds) {
        const auto cont = f.continuous(kind);
        double worst = 0.0;
        for (int s = 0; s < 4; ++s) {
            const Vector x = vec({uniform(rng, 0.2, 3.0), uniform(rng, 0.2, 3.0), uniform(rng, 0.2, 3.0)});
            for (int l = 0; l <= N; ++l) {
                const double t = f.tenors.master_time(l);
                const double lr = alm::log_martingale_value(f.model, f.seq.u[l], t, x);
                for (int k = l; k <= N; ++k) {
                    const double ratio = alm::log_martingale_value(f.model, f.seq.u[k], t, x) - lr;
                    worst = std::max(worst, std::abs(std::log(cont.bond_price(t, f.tenors.master_time(k), x)) - ratio));
                }
            }
        }
        int bad = 0;
        for (int i = 0; i < 1000; ++i) {
            const double t = uniform(rng, 0.0, f.model.horizon());
            double S = uniform(rng, t, f.model.horizon()), U = uniform(rng, t, f.model.horizon());
            if (S > U) std::swap(S, U);
            const Vector x = vec({uniform(rng, 0.0, 3.0), uniform(rng, 0.0, 3.0), uniform(rng, 0.0, 3.0)});
            if (cont.bond_price(t, S, x) < cont.bond_price(t, U, x)) ++bad;
        }
        rep.check(worst < 1e-12, fmt("%s: max log gap %.3e at tenor dates", alm::to_string(kind).c_str(), worst));
        rep.check(bad == 0, fmt("%s: %d of 1000 pairs with B(t,S) < B(t,U)", alm::to_string(kind).c_str(), bad));
        worst_log = std::max(worst_log, worst);
        violations += bad;
    }
    return rep.outcome(fmt("max log gap %.3e (< 1e-12), %d monotonicity violations", worst_log, violations));
}

// 6. f(t, T) = -d/dT log B(t, T) by central differences.
Outcome forward_rate_fd() {
    const auto& f = fixture::synthetic();
    std::mt19937_64 rng(606);
    const double h = 1e-5, T_N = f.model.horizon();
    Report rep;
    double worst_all = 0.0;
    for (InterpolatorKind kind : kKinds) {
        const auto cont = f.continuous(kind);
        double worst = 0.0;
        int n = 0;
        while (n < 1000) {
            const double t = uniform(rng, 0.0, T_N - 0.1);
            const double T = uniform(rng, t + 2 * h, T_N - 2 * h);
            // Central differences need U to be smooth across [T - h, T + h].
            const double grid_pos = T / f.tenors.spacing();
            if (std::abs(grid_pos - std::round(grid_pos)) * f.tenors.spacing() < 2 * h) continue;
            const Vector x = vec({uniform(rng, 0.2, 3.0), uniform(rng, 0.2, 3.0), uniform(rng, 0.2, 3.0)});
            const double fd = (std::log(cont.bond_price(t, T + h, x)) - std::log(cont.bond_price(t, T - h, x))) / (2 * h);
            worst = std::max(worst, std::abs(cont.forward_rate(t, T, x) + fd));
            ++n;
        }
        rep.check(worst < 1e-4, fmt("%s: max |f + d log B| %.3e", alm::to_string(kind).c_str(), worst));
        worst_all = std::max(worst_all, worst);
    }
    return rep.outcome(fmt("max |f(t,T) + d_T log B(t,T)| %.3e over 3 x 1000 points (< 1e-4)", worst_all));
}

// 7. IF1 reproduces the initial forward curve.
Outcome curve_fit() {
    const auto& f = fixture::synthetic();
    const auto U = f.interpolator(InterpolatorKind::IF1);
    const auto* fit = dynamic_cast<const alm::CurveFitInterpolator*>(U.get());
    if (!fit) return {false, "IF1 is not a curve-fit interpolator"};
    const double resid = fit->max_grid_residual();
    const alm::ContinuousTenorModel cont(f.model, U);
    std::mt19937_64 rng(707);
    double worst = 0.0;
    for (int i = 0; i < 400; ++i) {
        const double T = i < 41 ? f.tenors.master_time(i) : uniform(rng, 0.0, f.model.horizon());
        worst = std::max(worst, std::abs(cont.forward_rate(0.0, T, f.model.initial_state()) - f.scenario.forward_curve->rate(T)));
    }
    Report rep;
    rep.check(resid < 1e-9, fmt("grid residual %.3e over %zu points", resid, fit->grid_times().size()));
    rep.check(worst < 1e-7, fmt("max |f(0,T) - f~(0,T)| %.3e over 400 maturities", worst));
    return rep.outcome(fmt("grid residual %.3e (< 1e-9), forward-curve error %.3e (< 1e-7)", resid, worst));
}

// 8. q_t of the linear interpolator, and q at tenor dates of a C^1 interpolator
// over a diagonal u-structure.
Outcome pathology() {
    const auto& f = fixture::synthetic();
    Report rep;
    rep.set_verbose(true);

    // (a) Linear interpolation on the fitted synthetic sequence.
    const auto cont = f.continuous(InterpolatorKind::IF2);
    const int N = f.tenors.intervals();
    const double dt = f.tenors.spacing();
    double inner_var = 0.0, inner_step = 0.0, min_jump = INFINITY;
    const int per = 32;
    for (int l = 0; l < N; ++l) {
        std::vector<Vector> q;
        for (int j = 0; j <= per; ++j) {
            const double t = f.tenors.master_time(l) + dt * (j == per ? per - 1e-9 : j) / per;
            q.push_back(cont.short_rate_coefficients(t).q);
        }
        const double scale = std::max(q.front().norm(), 1e-300);
        for (int j = 1; j <= per; ++j) {
            inner_var = std::max(inner_var, (q[j] - q[0]).norm() / scale);
            inner_step = std::max(inner_step, (q[j] - q[j - 1]).norm());
        }
        if (l + 1 < N) {
            const double T = f.tenors.master_time(l + 1);
            const Vector left = cont.short_rate_coefficients(T - 1e-9).q;
            const Vector right = cont.short_rate_coefficients(T).q;
            min_jump = std::min(min_jump, (right - left).norm());
        }
    }
    rep.check(inner_var < 1e-8, fmt("IF2 q_t constant within master intervals: max relative variation %.3e", inner_var));
    rep.note(fmt("IF2 largest change between neighbouring points inside an interval %.3e, smallest jump at a tenor date %.3e",
                 inner_step, min_jump));

    // (b) Diagonal u-structure with componentwise monotone cubic interpolation.
    const int d = 4;
    std::vector<alm::CirComponent> comps;
    for (int i = 0; i < d; ++i) comps.push_back({0.5 + 0.1 * i, 1.0, 0.3});
    const auto spec = alm::AffineModelSpec::independent_cir(comps, 2.0);
    const alm::TenorStructure tenors(2.0, d, {{"6M", 1, 0.5}});
    std::vector<Vector> nodes;
    for (int k = 0; k <= d; ++k) {
        Vector u = Vector::Zero(d);
        for (int i = k; i < d; ++i) u[i] = 0.02 * (i + 1);
        nodes.push_back(u);
    }
    const alm::ContinuousTenorModel diag(spec, alm::make_monotone_cubic_interpolator(tenors, nodes));
    double worst = 0.0, interior = 0.0, inside = 0.0;
    for (int k = 0; k <= d; ++k) {
        const double T = tenors.master_time(k);
        const double q = diag.short_rate_coefficients(T).q.cwiseAbs().maxCoeff();
        worst = std::max(worst, q);
        if (k > 0 && k < d) interior = std::max(interior, q);
        if (k < d) inside = std::max(inside, diag.short_rate_coefficients(T + 0.5 * tenors.spacing()).q.cwiseAbs().maxCoeff());
    }
    rep.check(worst == 0.0, fmt("C^1 diagonal structure: max |q_{T_k}| %.3e over tenor dates", worst));
    rep.note(fmt("C^1 diagonal structure: max |q_{T_k}| over interior tenor dates %.3e", interior));
    rep.note(fmt("C^1 diagonal structure: |q| at interval midpoints up to %.3e", inside));
    return rep.outcome("literal piecewise-constant q_t for IF2; q_{T_k} = 0 for a C^1 diagonal structure");
}

// 9. E*[exp(-int r)] against B(0, T) under each interpolator.
Outcome spot_bonds() {
    const auto& f = fixture::synthetic();
    const std::vector<double> grid = alm::uniform_grid(f.model.horizon(), 200);
    const std::size_t n = 100000;
    Report rep;
    double worst_z = 0.0, worst_secs = 0.0;
    for (InterpolatorKind kind : kKinds) {
        const auto cont = f.continuous(kind);
        const auto start = std::chrono::steady_clock::now();
        const alm::PathGrid paths = alm::generate_spot_paths(cont, grid, n, 909);
        for (double T : {2.5, 5.0, 7.5, 10.0}) {
            const std::size_t step = static_cast<std::size_t>(std::lround(T / f.model.horizon() * 200));
            std::vector<double> v(n);
            for (std::size_t p = 0; p < n; ++p) v[p] = std::exp(-paths.integrated_rate(step, p));
            const auto [m, se] = oracle::mean_se(v);
            int l = 0;
            f.tenors.on_master_date(T, &l);
            const double B = f.scenario.initial.discount[l];
            const double z = std::abs(m - B) / se;
            worst_z = std::max(worst_z, z);
            rep.check(z < 3.0, fmt("%s T=%.1f: %.7f vs B(0,T) %.7f (z=%.2f)", alm::to_string(kind).c_str(), T, m, B, z));
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        worst_secs = std::max(worst_secs, secs);
        rep.check(secs < 120.0, fmt("%s: %.1f s", alm::to_string(kind).c_str(), secs));
    }
    return rep.outcome(fmt("max |z| %.2f (< 3), slowest interpolator %.1f s (< 120 s)", worst_z, worst_secs));
}

// 10. Joint mgf of (X_T, int theta o X) from the extended flow against Monte Carlo.
Outcome extended_mgf() {
    const auto& f = fixture::synthetic();
    const double T = 5.0;
    const std::size_t steps = 500, n = 50000;
    const auto spec = f.model.with_horizon(T);
    const std::vector<double> grid = alm::uniform_grid(T, steps);
    alm::SimulationOptions opt;
    opt.scheme = alm::Scheme::Exact;
    const alm::PathGrid paths = alm::simulate_paths(spec, grid, n, 1010, opt);
    const std::size_t d = spec.dimension();

    std::mt19937_64 rng(1011);
    Report rep;
    double worst = 0.0;
    for (int c = 0; c < 5; ++c) {
        const std::vector<double> knots = {0.0, 2.0, T};
        std::vector<Vector> values;
        for (int j = 0; j < 2; ++j) values.push_back(vec({uniform(rng, 0.0, 1.0), uniform(rng, 0.0, 1.0), uniform(rng, 0.0, 1.0)}));
        const alm::PiecewiseConstantWeight theta(knots, values);
        const Vector uX = vec({uniform(rng, -1.0, 0.5), uniform(rng, -1.0, 0.5), uniform(rng, -1.0, 0.5)});
        const Vector uY = vec({uniform(rng, -1.0, 0.2), uniform(rng, -1.0, 0.2), uniform(rng, -1.0, 0.2)});

        const auto ext = alm::extended_characteristics(spec, theta);
        Vector u(2 * d);
        u << uX, uY;
        const auto flow = alm::solve_riccati_inhomogeneous(ext, 0.0, T, u);
        const double exact = std::exp(flow.phi + flow.psi.head(d).dot(spec.initial_state()));

        std::vector<double> v(n);
        for (std::size_t p = 0; p < n; ++p) {
            double Y = 0.0;
            for (std::size_t s = 0; s < steps; ++s) {
                const double h = grid[s + 1] - grid[s];
                const Vector w = theta(0.5 * (grid[s] + grid[s + 1]));
                for (std::size_t i = 0; i < d; ++i)
                    Y += 0.5 * h * w[i] * uY[i] * (paths.state(s, p)[i] + paths.state(s + 1, p)[i]);
            }
            v[p] = std::exp(uX.dot(paths.state_vector(steps, p)) + Y);
        }
        const auto [m, se] = oracle::mean_se(v);
        const double z = std::abs(m - exact) / se;
        worst = std::max(worst, z);
        rep.check(z < 3.0, fmt("config %d: MC %.6f vs %.6f (z=%.2f)", c, m, exact, z));
    }
    return rep.outcome(fmt("max |z| %.2f over 5 configurations (< 3)", worst));
}

// 11. Basis swap with v = u and zero spread; fair spread at inception.
Outcome single_curve() {
    const auto& f = fixture::synthetic();
    const auto cont = f.continuous(InterpolatorKind::IF2);
    const std::size_t x3 = f.tenors.find("3M"), x6 = f.tenors.find("6M");
    Report rep;
    rep.set_verbose(true);

    alm::CalibratedSequences same = f.seq;
    for (std::size_t x = 0; x < f.tenors.tenor_count(); ++x)
        for (int k = 0; k <= f.tenors.periods(x); ++k) {
            same.v[x][k] = same.u_tenor(f.tenors, x, k);
            same.v_param[x][k] = same.u_param[static_cast<std::size_t>(f.tenors.master_index(x, k))];
        }
    alm::BasisSwapSpec spec{x3, x6, 0.0, 10.0, 0.0, 0.0};
    const alm::BasisSwap swap(f.tenors, spec);
    const std::vector<double> grid = alm::uniform_grid(f.model.horizon(), 200);
    const alm::PathGrid paths = alm::generate_spot_paths(cont, grid, 10000, 1111);
    const alm::SwapPricer pricer(swap, cont, same, grid);
    const std::vector<double> prices = pricer.price_paths(paths);
    double worst = 0.0, worst_aligned = 0.0;
    std::size_t misaligned = 0;
    for (std::size_t s = 0; s < grid.size(); ++s) {
        const bool aligned = swap.ceil_index(1, grid[s]) == 2 * swap.ceil_index(2, grid[s]) - 1 ||
                             grid[s] >= f.model.horizon() - 1e-12;
        double m = 0.0;
        for (std::size_t p = 0; p < paths.paths(); ++p) m = std::max(m, std::abs(prices[s * paths.paths() + p]));
        worst = std::max(worst, m);
        if (aligned) worst_aligned = std::max(worst_aligned, m);
        else ++misaligned;
    }
    rep.check(worst < 1e-12, fmt("v = u, S = 0: max |P_t| %.3e over %zu paths x %zu dates", worst, paths.paths(), grid.size()));
    rep.note(fmt("dates where both legs last reset together: max |P_t| %.3e; other dates: %zu", worst_aligned, misaligned));

    double worst_fair = 0.0;
    std::mt19937_64 rng(1112);
    for (double r : {0.0, 1.0, 2.5}) {
        alm::BasisSwapSpec fs{x3, x6, 2.5, 10.0, r, 0.0};
        const alm::BasisSwap fwd(f.tenors, fs);
        for (int s = 0; s < 5; ++s) {
            const Vector x = r == 0.0 ? f.model.initial_state()
                                      : vec({uniform(rng, 0.2, 3.0), uniform(rng, 0.2, 3.0), uniform(rng, 0.2, 3.0)});
            const double S = fwd.fair_spread(f.model, f.seq, r, x);
            const double P = fwd.with_spread(S).price(f.model, f.seq, cont.interpolator(), r, x);
            worst_fair = std::max(worst_fair, std::abs(P));
        }
    }
    rep.check(worst_fair < 1e-12, fmt("fair spread: max |P_r| %.3e at inception", worst_fair));
    return rep.outcome(fmt("max |P_t| %.3e with v = u, max |P_r| %.3e at the fair spread (both < 1e-12)", worst, worst_fair));
}

// 12. CSA1: backward regression against forward Monte Carlo.
Outcome tva_cross_check() {
    const auto& f = fixture::synthetic();
    const auto start = std::chrono::steady_clock::now();
    const auto cont = f.continuous(InterpolatorKind::IF2);
    const std::size_t x3 = f.tenors.find("3M"), x6 = f.tenors.find("6M");
    alm::BasisSwap swap(f.tenors, {x3, x6, 0.0, 10.0, 0.0, 0.0});
    swap = swap.with_spread(swap.fair_spread(f.model, f.seq, 0.0, f.model.initial_state()));
    const std::vector<double> grid = alm::uniform_grid(f.model.horizon(), 200);
    const alm::PathGrid paths = alm::generate_spot_paths(cont, grid, 100000, 1212);
    const std::vector<double> prices = alm::SwapPricer(swap, cont, f.seq, grid).price_paths(paths);
    const alm::CsaSpec csa = alm::csa_preset(1);
    alm::TvaOptions opt;
    opt.neighbors = 3;
    const auto back = alm::solve_tva_backward(std::span(&csa, 1), paths, prices, opt).front();
    const auto fwd = alm::tva_forward_mc(csa, paths, prices);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double gap = std::abs(back.theta0 - fwd.value);
    const double bound = std::max(0.05 * std::abs(fwd.value), 3.0 * std::hypot(back.theta0_se, fwd.se));
    Report rep;
    rep.check(gap <= bound, fmt("backward %.6e (se %.1e), forward %.6e (se %.1e), gap %.2e, bound %.2e",
                                back.theta0, back.theta0_se, fwd.value, fwd.se, gap, bound));
    rep.check(secs < 600.0, fmt("%.1f s", secs));
    return rep.outcome(fmt("Theta_0 backward %.4e vs forward %.4e, gap %.2e <= %.2e; %.0f s (< 600 s)", back.theta0,
                           fwd.value, gap, bound, secs));
}

// 13. Interpolator comparison on the synthetic scenario.
Outcome model_risk() {
    alm::Scenario sc = alm::builtin_scenario();
    sc.simulation.paths = 20000;
    sc.simulation.compare_paths = 10000;
    const auto dir = std::filesystem::temp_directory_path() / ("alm_acceptance_" + std::to_string(::getpid()));
    sc.output_dir = dir.string();
    alm::run_scenario(sc, alm::Stage::Run);
    const alm::ComparisonSummary summary = alm::compare_interpolators(sc.output_dir);
    std::filesystem::remove_all(dir);

    Report rep;
    for (const auto& pair : summary.pairs) {
        const std::string name = pair.a + "_" + pair.b;
        const bool linear_pair = (pair.a == "if2" && pair.b == "if3") || (pair.a == "if3" && pair.b == "if2");
        if (linear_pair) {
            double price = 0.0, tva_min = INFINITY;
            int curved = 0;
            for (const auto& iv : pair.intervals) {
                if (!iv.curved) continue;
                ++curved;
                price = std::max(price, iv.price_diff);
                for (double t : iv.tva_diff) tva_min = std::min(tva_min, t);
            }
            rep.check(curved > 0 && price <= 1e-12,
                      fmt("(a) %s: max price difference on %d curved intervals %.3e", name.c_str(), curved, price));
            rep.check(curved > 0 && tva_min > 1e-10,
                      fmt("(a) %s: min TVA difference on curved intervals %.3e", name.c_str(), tva_min));
        } else {
            const auto it = std::max_element(pair.intervals.begin(), pair.intervals.end(),
                                             [](const auto& a, const auto& b) { return a.price_diff < b.price_diff; });
            rep.check(it != pair.intervals.end() && it->curved,
                      fmt("(b) %s: largest price difference %.3e on interval %d (%s)", name.c_str(),
                          it == pair.intervals.end() ? 0.0 : it->price_diff, it == pair.intervals.end() ? -1 : it->interval,
                          it != pair.intervals.end() && it->curved ? "curved" : "straight"));
        }
    }
    rep.check(summary.pairs.size() == 3, fmt("%zu interpolator pairs compared", summary.pairs.size()));
    return rep.outcome("IF2/IF3 price equality with TVA gaps on curved intervals; IF1 price gaps peak on curved intervals");
}

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all = {
        {1, "Riccati oracle", riccati_oracle},
        {2, "semi-flow identity", semi_flow},
        {3, "martingale checks", martingales},
        {4, "fit reproduction", fit_reproduction},
        {5, "continuous-tenor consistency", continuous_consistency},
        {6, "forward rate vs finite differences", forward_rate_fd},
        {7, "IF1 curve fit", curve_fit},
        {8, "interpolation pathology", pathology},
        {9, "bond reproduction under the spot measure", spot_bonds},
        {10, "extended mgf vs Monte Carlo", extended_mgf},
        {11, "single-curve degeneracy", single_curve},
        {12, "TVA backward vs forward", tva_cross_check},
        {13, "interpolator model risk", model_risk},
    };
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

    int failed = 0;
    for (const Criterion& c : all) {
        if (!wanted.empty() && !wanted.count(c.id)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("AC%-2d %s  %s (%.1f s): %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, secs, o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    std::printf("%d criterion(s) failed\n", failed);
    return failed == 0 ? 0 : 1;
}
