#include "alm/simulation.hpp"

#include "alm/errors.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace alm {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// One exact transition of dX = speed (level - X) dt + vol sqrt(X) dW over h.
double sample_cir(double x, const CirComponent& c, double h, std::mt19937_64& rng) {
    const double decay = std::exp(-c.speed * h);
    if (c.vol == 0.0) return c.level + (x - c.level) * decay;
    const double scale = c.vol * c.vol * (1.0 - decay) / (4.0 * c.speed);
    const double dof = 4.0 * c.speed * c.level / (c.vol * c.vol);
    const double noncentrality = x * decay / scale;
    double n = 0.0;
    if (noncentrality > 0.0) {
        std::poisson_distribution<long long> poisson(0.5 * noncentrality);
        n = static_cast<double>(poisson(rng));
    }
    const double shape = 0.5 * dof + n;
    if (shape <= 0.0) return 0.0;
    std::gamma_distribution<double> gamma(shape, 2.0);
    return scale * gamma(rng);
}

struct Tables {
    std::vector<double> times;  // substep grid
    std::vector<Vector> shift;
    std::vector<double> p;
    std::vector<Vector> q;
    std::vector<double> p_left;
    std::vector<Vector> q_left;
};

}  // namespace

std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

std::vector<double> uniform_grid(double horizon, std::size_t n_steps) {
    if (n_steps == 0 || !(horizon > 0.0)) throw ArgumentError("grid needs n_steps >= 1 and horizon > 0");
    std::vector<double> grid(n_steps + 1);
    for (std::size_t i = 0; i <= n_steps; ++i)
        grid[i] = horizon * static_cast<double>(i) / static_cast<double>(n_steps);
    grid.back() = horizon;
    return grid;
}

PathGrid::PathGrid(std::vector<double> times, std::size_t n_paths, std::size_t dim)
    : times_(std::move(times)), n_paths_(n_paths), dim_(dim),
      states_(times_.size() * n_paths * dim, 0.0) {}

void PathGrid::enable_rate() {
    rate_.assign(times_.size() * n_paths_, 0.0);
    integrated_.assign(times_.size() * n_paths_, 0.0);
}

PathGrid simulate_paths(const AffineModelSpec& spec, std::span<const double> grid,
                        std::size_t n_paths, std::uint64_t seed,
                        const SimulationOptions& options, const DriftModifier* modifier,
                        const AffineRate* rate) {
    if (grid.empty() || grid.front() != 0.0) throw ArgumentError("grid must start at 0");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw ArgumentError("grid must be strictly increasing");
    if (n_paths == 0) throw ArgumentError("need at least one path");
    if (options.substeps < 1) throw ArgumentError("need at least one substep");
    const bool exact = options.scheme == Scheme::Exact;
    if (exact && modifier) throw UnsupportedError("exact scheme cannot take a drift modifier");
    if (exact && !spec.independent_components())
        throw UnsupportedError("exact scheme needs independent components");

    const std::size_t d = spec.dimension();
    const auto di = static_cast<Eigen::Index>(d);
    const std::size_t steps = grid.size();
    const std::size_t sub = (exact && !rate) ? 1 : static_cast<std::size_t>(options.substeps);

    Tables tab;
    tab.times.reserve((steps - 1) * sub + 1);
    for (std::size_t j = 0; j + 1 < steps; ++j)
        for (std::size_t s = 0; s < sub; ++s)
            tab.times.push_back(grid[j] + (grid[j + 1] - grid[j]) * static_cast<double>(s) /
                                              static_cast<double>(sub));
    tab.times.push_back(grid.back());
    if (modifier) {
        tab.shift.reserve(tab.times.size());
        for (double t : tab.times) {
            Vector c = modifier->shift(t);
            if (c.size() != di) throw ArgumentError("drift modifier has wrong dimension");
            tab.shift.push_back(std::move(c));
        }
    }
    if (rate) {
        tab.p.resize(tab.times.size());
        tab.q.resize(tab.times.size());
        for (std::size_t k = 0; k < tab.times.size(); ++k) {
            tab.q[k] = Vector::Zero(di);
            rate->coefficients(tab.times[k], tab.p[k], tab.q[k]);
        }
        if (rate->left_coefficients) {
            tab.p_left.resize(tab.times.size());
            tab.q_left.resize(tab.times.size());
            for (std::size_t k = 0; k < tab.times.size(); ++k) {
                tab.q_left[k] = Vector::Zero(di);
                rate->left_coefficients(tab.times[k], tab.p_left[k], tab.q_left[k]);
            }
        } else {
            tab.p_left = tab.p;
            tab.q_left = tab.q;
        }
    }

    PathGrid out(std::vector<double>(grid.begin(), grid.end()), n_paths, d);
    if (rate) out.enable_rate();

    const Vector b = spec.drift_constant();
    const Matrix beta = spec.drift_linear();
    Vector vol(di);
    for (Eigen::Index i = 0; i < di; ++i)
        vol(i) = std::sqrt(spec.diffusion()[static_cast<std::size_t>(i)](i, i));
    std::vector<CirComponent> cir;
    if (spec.independent_components()) cir = spec.cir_components();

    auto work = [&](std::size_t lo, std::size_t hi) {
        Vector x(di), xp(di), drift(di);
        for (std::size_t path = lo; path < hi; ++path) {
            std::mt19937_64 rng(path_seed(seed, path));
            std::normal_distribution<double> normal(0.0, 1.0);
            x = spec.initial_state();
            auto store = [&](std::size_t step) {
                double* dst = out.state(step, path);
                for (std::size_t i = 0; i < d; ++i) dst[i] = std::max(x(static_cast<Eigen::Index>(i)), 0.0);
            };
            auto rate_at = [&](std::size_t k) {
                return tab.p[k] + tab.q[k].dot(x.cwiseMax(0.0));
            };
            auto left_rate_at = [&](std::size_t k) {
                return tab.p_left[k] + tab.q_left[k].dot(x.cwiseMax(0.0));
            };
            store(0);
            double r_prev = 0.0;
            double integral = 0.0;
            if (rate) {
                r_prev = rate_at(0);
                out.rate_ref(0, path) = r_prev;
                out.integrated_rate_ref(0, path) = 0.0;
            }
            std::size_t k = 0;
            for (std::size_t j = 0; j + 1 < steps; ++j) {
                for (std::size_t s = 0; s < sub; ++s, ++k) {
                    const double h = tab.times[k + 1] - tab.times[k];
                    if (rate) r_prev = rate_at(k);
                    if (exact) {
                        for (Eigen::Index i = 0; i < di; ++i)
                            x(i) = sample_cir(x(i), cir[static_cast<std::size_t>(i)], h, rng);
                    } else {
                        xp = x.cwiseMax(0.0);
                        drift.noalias() = b + beta * xp;
                        if (modifier) drift += tab.shift[k].cwiseProduct(xp);
                        const double sq = std::sqrt(h);
                        for (Eigen::Index i = 0; i < di; ++i)
                            x(i) += drift(i) * h + vol(i) * std::sqrt(xp(i)) * sq * normal(rng);
                    }
                    if (rate) integral += 0.5 * h * (r_prev + left_rate_at(k + 1));
                }
                store(j + 1);
                if (rate) {
                    out.rate_ref(j + 1, path) = rate_at(k);
                    out.integrated_rate_ref(j + 1, path) = integral;
                }
            }
        }
    };
    detail::run_workers(n_paths, options.threads, work);
    return out;
}

}  // namespace alm
