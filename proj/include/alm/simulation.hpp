#pragma once

#include "alm/affine.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace alm {

enum class Scheme { Exact, EulerFullTruncation };

/// Time-dependent shift of the diagonal linear drift: component k gets
/// shift(t)_k * X_k added to its drift. This is how a measure change with
/// a deterministic density exponent enters the dynamics.
struct DriftModifier {
    std::function<Vector(double)> shift;
};

/// Short rate r_t = p(t) + <q(t), X_t>, integrated pathwise while simulating.
struct AffineRate {
    std::function<void(double t, double& p, Vector& q)> coefficients;
    /// Left limits of the coefficients, used at the right end of each
    /// trapezoid so that jumps at fixed dates are integrated exactly.
    /// Defaults to `coefficients`.
    std::function<void(double t, double& p, Vector& q)> left_coefficients;
};

struct SimulationOptions {
    Scheme scheme = Scheme::Exact;
    /// Euler substeps per reporting step.
    int substeps = 4;
    /// Worker threads; 0 picks the hardware concurrency.
    unsigned threads = 0;
};

/// Simulated states on a reporting grid, stored step-major.
class PathGrid {
public:
    PathGrid(std::vector<double> times, std::size_t n_paths, std::size_t dim);

    const std::vector<double>& times() const { return times_; }
    std::size_t steps() const { return times_.size(); }
    std::size_t paths() const { return n_paths_; }
    std::size_t dimension() const { return dim_; }

    double* state(std::size_t step, std::size_t path) {
        return states_.data() + (step * n_paths_ + path) * dim_;
    }
    const double* state(std::size_t step, std::size_t path) const {
        return states_.data() + (step * n_paths_ + path) * dim_;
    }
    Vector state_vector(std::size_t step, std::size_t path) const {
        return Eigen::Map<const Vector>(state(step, path), static_cast<Eigen::Index>(dim_));
    }
    /// All states at one step, n_paths * dim values.
    std::span<const double> slice(std::size_t step) const {
        return {states_.data() + step * n_paths_ * dim_, n_paths_ * dim_};
    }

    bool has_rate() const { return !rate_.empty(); }
    double rate(std::size_t step, std::size_t path) const { return rate_[step * n_paths_ + path]; }
    double integrated_rate(std::size_t step, std::size_t path) const {
        return integrated_[step * n_paths_ + path];
    }
    void enable_rate();
    double& rate_ref(std::size_t step, std::size_t path) { return rate_[step * n_paths_ + path]; }
    double& integrated_rate_ref(std::size_t step, std::size_t path) {
        return integrated_[step * n_paths_ + path];
    }

private:
    std::vector<double> times_;
    std::size_t n_paths_;
    std::size_t dim_;
    std::vector<double> states_;
    std::vector<double> rate_;
    std::vector<double> integrated_;
};

/// Simulates X from x0 on `grid` (strictly increasing, starting at 0).
///
/// Each path draws from its own generator seeded from (seed, path index),
/// so results do not depend on the number of worker threads. The exact
/// scheme samples the square-root transition law and needs independent
/// components and no drift modifier. When `rate` is given, r_t and the
/// trapezoidal integral of r are accumulated on the substep grid.
PathGrid simulate_paths(const AffineModelSpec& spec, std::span<const double> grid,
                        std::size_t n_paths, std::uint64_t seed,
                        const SimulationOptions& options = {},
                        const DriftModifier* modifier = nullptr,
                        const AffineRate* rate = nullptr);

/// Deterministic 64-bit seed for path `index` derived from a run seed.
std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index);

/// Equally spaced grid 0, T/n, ..., T.
std::vector<double> uniform_grid(double horizon, std::size_t n_steps);

}  // namespace alm
