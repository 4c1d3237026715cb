#pragma once

#include "alm/affine.hpp"
#include "alm/forward_curve.hpp"
#include "alm/multicurve.hpp"
#include "alm/tenor.hpp"

#include <memory>
#include <string>
#include <vector>

namespace alm {

/// IF1: fit of the whole initial forward curve along the manifold.
/// IF2: linear between tenor dates. IF3: natural cubic spline on stretches
/// where a single component moves, linear elsewhere. MonotoneCubic:
/// componentwise monotone piecewise-cubic Hermite, C^1 everywhere.
enum class InterpolatorKind { IF1, IF2, IF3, MonotoneCubic };

std::string to_string(InterpolatorKind kind);
/// Accepts if1/if2/if3/monotone (case-insensitive); throws ArgumentError.
InterpolatorKind parse_interpolator_kind(const std::string& text);

struct InterpolatedPoint {
    Vector value;
    /// Right-hand derivative dU/dt+ (left derivative at T_N).
    Vector derivative;
};

/// Continuous, componentwise non-increasing U: [0, T_N] -> R^d_{>=0}
/// with U(T_l) = u_l.
class InterpolatingFunction {
public:
    virtual ~InterpolatingFunction() = default;

    InterpolatorKind kind() const { return kind_; }
    const TenorStructure& tenors() const { return tenors_; }
    const std::vector<Vector>& nodes() const { return nodes_; }
    std::size_t dimension() const { return static_cast<std::size_t>(nodes_.front().size()); }

    InterpolatedPoint evaluate(double t) const;
    Vector value(double t) const { return evaluate(t).value; }
    Vector derivative(double t) const { return evaluate(t).derivative; }
    /// Left derivative dU/dt- (right derivative at 0).
    Vector left_derivative(double t) const;

    /// True when the master interval [T_l, T_{l+1}] is interpolated linearly.
    virtual bool linear_on_interval(int l) const = 0;
    /// Set when a spline had to be replaced by a monotone fallback.
    bool monotone_fallback() const { return fallback_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    /// Componentwise non-increasing check on a fine grid; optionally strict.
    bool is_monotone(std::size_t samples_per_interval = 16, bool strict = false) const;

protected:
    InterpolatingFunction(InterpolatorKind kind, TenorStructure tenors, std::vector<Vector> nodes);

    /// Interval index l with T_l <= t < T_{l+1} (N - 1 at T_N).
    int interval_of(double t) const;
    virtual InterpolatedPoint evaluate_inside(double t, int interval) const = 0;

    InterpolatorKind kind_;
    TenorStructure tenors_;
    std::vector<Vector> nodes_;
    bool fallback_ = false;
    std::vector<std::string> warnings_;
};

/// Options for the forward-curve fit of IF1.
struct CurveFitOptions {
    int points_per_interval = 4;
    /// Refine the grid until the Hermite prediction of the manifold
    /// parameter at interval midpoints is within this tolerance.
    double refine_tol = 1e-9;
    int max_refine_depth = 12;
    /// Allowed relative mismatch between the curve and B(0, T_l).
    double consistency_tol = 1e-8;
};

class CurveFitInterpolator final : public InterpolatingFunction {
public:
    CurveFitInterpolator(const AffineModelSpec& spec, const TenorStructure& tenors,
                         const CalibratedSequences& seq, const ForwardCurve& curve,
                         const std::vector<double>& discount, const CurveFitOptions& options = {});

    bool linear_on_interval(int) const override { return false; }

    /// Manifold parameter solving the curve equation at time t.
    double parameter(double t) const;
    /// phi_{T_N}(U) + <psi_{T_N}(U), x0> - int_t^{T_N} f(0, s) ds.
    double residual(double t) const;

    const std::vector<double>& grid_times() const { return grid_t_; }
    const std::vector<double>& grid_parameters() const { return grid_s_; }
    double max_grid_residual() const;

protected:
    InterpolatedPoint evaluate_inside(double t, int interval) const override;

private:
    struct Level {
        double value;
        double slope;  // d level / d s
    };
    Level level(double s, bool with_slope) const;
    double target(double t) const { return curve_.integral(t, spec_.horizon()); }
    double solve_bisect(double t, double lo, double hi) const;
    double solve_newton(double t, std::size_t j) const;
    double parameter_rate(double t, double s) const;

    AffineModelSpec spec_;
    ForwardCurve curve_;
    std::shared_ptr<const Manifold> manifold_;
    std::vector<double> grid_t_;
    std::vector<double> grid_s_;
    std::vector<double> grid_ds_;
};

std::unique_ptr<InterpolatingFunction> build_interpolator(InterpolatorKind kind,
                                                          const AffineModelSpec& spec,
                                                          const TenorStructure& tenors,
                                                          const CalibratedSequences& seq,
                                                          const ForwardCurve* curve = nullptr,
                                                          const std::vector<double>* discount = nullptr);

/// Linear interpolation of the node sequence.
std::unique_ptr<InterpolatingFunction> make_linear_interpolator(const TenorStructure& tenors,
                                                                std::vector<Vector> nodes);
/// Spline on single-component stretches, linear on the rest.
std::unique_ptr<InterpolatingFunction> make_sector_spline_interpolator(const TenorStructure& tenors,
                                                                       std::vector<Vector> nodes);
std::unique_ptr<InterpolatingFunction> make_monotone_cubic_interpolator(const TenorStructure& tenors,
                                                                        std::vector<Vector> nodes);

}  // namespace alm
