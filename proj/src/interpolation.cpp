#include "alm/interpolation.hpp"

#include "alm/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace alm {

std::string to_string(InterpolatorKind kind) {
    switch (kind) {
        case InterpolatorKind::IF1: return "if1";
        case InterpolatorKind::IF2: return "if2";
        case InterpolatorKind::IF3: return "if3";
        case InterpolatorKind::MonotoneCubic: return "monotone";
    }
    return "unknown";
}

InterpolatorKind parse_interpolator_kind(const std::string& text) {
    std::string t = text;
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "if1") return InterpolatorKind::IF1;
    if (t == "if2") return InterpolatorKind::IF2;
    if (t == "if3") return InterpolatorKind::IF3;
    if (t == "monotone") return InterpolatorKind::MonotoneCubic;
    throw ArgumentError("unknown interpolator kind '" + text + "'");
}

InterpolatingFunction::InterpolatingFunction(InterpolatorKind kind, TenorStructure tenors,
                                             std::vector<Vector> nodes)
    : kind_(kind), tenors_(std::move(tenors)), nodes_(std::move(nodes)) {
    if (nodes_.size() != static_cast<std::size_t>(tenors_.intervals()) + 1)
        throw ArgumentError("interpolator needs one node per master date");
    const auto d = nodes_.front().size();
    for (std::size_t l = 0; l < nodes_.size(); ++l) {
        if (nodes_[l].size() != d) throw ArgumentError("interpolation nodes differ in dimension");
        if ((nodes_[l].array() < 0.0).any()) throw ArgumentError("interpolation nodes must be >= 0");
        if (l && (nodes_[l].array() > nodes_[l - 1].array()).any())
            throw ArgumentError("interpolation nodes must be componentwise non-increasing");
    }
    if (nodes_.back().cwiseAbs().maxCoeff() != 0.0) throw ArgumentError("last node must be zero");
}

int InterpolatingFunction::interval_of(double t) const {
    return std::clamp(tenors_.next_master_index(t) - 1, 0, tenors_.intervals() - 1);
}

InterpolatedPoint InterpolatingFunction::evaluate(double t) const {
    const double horizon = tenors_.horizon();
    if (!(t >= -1e-12) || !(t <= horizon + 1e-12))
        throw ArgumentError("interpolator evaluated outside [0, T_N]");
    t = std::clamp(t, 0.0, horizon);
    int l = 0;
    if (tenors_.on_master_date(t, &l)) {
        const int interval = std::min(l, tenors_.intervals() - 1);
        InterpolatedPoint p = evaluate_inside(tenors_.master_time(l), interval);
        p.value = nodes_[static_cast<std::size_t>(l)];
        return p;
    }
    return evaluate_inside(t, interval_of(t));
}

Vector InterpolatingFunction::left_derivative(double t) const {
    int l = 0;
    if (tenors_.on_master_date(t, &l) && l > 0)
        return evaluate_inside(tenors_.master_time(l), l - 1).derivative;
    return evaluate(t).derivative;
}

bool InterpolatingFunction::is_monotone(std::size_t samples_per_interval, bool strict) const {
    Vector prev = value(0.0);
    const int n = tenors_.intervals();
    for (int l = 0; l < n; ++l) {
        const double a = tenors_.master_time(l);
        const double b = tenors_.master_time(l + 1);
        for (std::size_t j = 1; j <= samples_per_interval; ++j) {
            const double t = a + (b - a) * static_cast<double>(j) / static_cast<double>(samples_per_interval);
            const Vector cur = value(t);
            const double slack = 1e-13 * std::max(1.0, prev.cwiseAbs().maxCoeff());
            if ((cur.array() > prev.array() + slack).any()) return false;
            if (strict && !(cur.array() < prev.array()).any()) return false;
            prev = cur;
        }
    }
    return true;
}

namespace {

// Cubic Hermite piece on [x0, x0 + h].
struct Hermite {
    static double value(double y0, double y1, double m0, double m1, double h, double tau) {
        const double t2 = tau * tau;
        const double t3 = t2 * tau;
        return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + tau) * h * m0 + (-2 * t3 + 3 * t2) * y1 +
               (t3 - t2) * h * m1;
    }
    static double slope(double y0, double y1, double m0, double m1, double h, double tau) {
        const double t2 = tau * tau;
        return ((6 * t2 - 6 * tau) * y0 + (3 * t2 - 4 * tau + 1) * h * m0 + (-6 * t2 + 6 * tau) * y1 +
                (3 * t2 - 2 * tau) * h * m1) /
               h;
    }
    // Largest slope over the piece.
    static double max_slope(double y0, double y1, double m0, double m1, double h) {
        const double a = 6 * y0 + 3 * h * m0 - 6 * y1 + 3 * h * m1;
        const double b = -6 * y0 - 4 * h * m0 + 6 * y1 - 2 * h * m1;
        double best = std::max(slope(y0, y1, m0, m1, h, 0.0), slope(y0, y1, m0, m1, h, 1.0));
        if (a < 0.0) {
            const double tau = -b / (2 * a);
            if (tau > 0.0 && tau < 1.0) best = std::max(best, slope(y0, y1, m0, m1, h, tau));
        }
        return best;
    }
};

int sign(double v) { return (v > 0.0) - (v < 0.0); }

// Shape-preserving node slopes (Fritsch-Carlson with three-point ends).
std::vector<double> pchip_slopes(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> d(n, 0.0);
    std::vector<double> h(n - 1), del(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        h[k] = x[k + 1] - x[k];
        del[k] = (y[k + 1] - y[k]) / h[k];
    }
    if (n == 2) {
        d[0] = d[1] = del[0];
        return d;
    }
    for (std::size_t k = 1; k + 1 < n; ++k) {
        if (sign(del[k - 1]) * sign(del[k]) <= 0) continue;
        const double w1 = 2 * h[k] + h[k - 1];
        const double w2 = h[k] + 2 * h[k - 1];
        d[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
    }
    auto edge = [](double h0, double h1, double m0, double m1) {
        double e = ((2 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
        if (sign(e) != sign(m0))
            e = 0.0;
        else if (sign(m0) != sign(m1) && std::abs(e) > 3 * std::abs(m0))
            e = 3 * m0;
        return e;
    };
    d[0] = edge(h[0], h[1], del[0], del[1]);
    d[n - 1] = edge(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
    return d;
}

// Slopes of the natural cubic spline through (x, y) at the nodes.
std::vector<double> natural_spline_slopes(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> h(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) h[k] = x[k + 1] - x[k];
    std::vector<double> m(n, 0.0);  // second derivatives
    if (n > 2) {
        // Thomas algorithm for the interior second derivatives.
        const std::size_t k_in = n - 2;
        std::vector<double> diag(k_in), upper(k_in), rhs(k_in);
        for (std::size_t i = 0; i < k_in; ++i) {
            diag[i] = 2.0 * (h[i] + h[i + 1]);
            upper[i] = h[i + 1];
            rhs[i] = 6.0 * ((y[i + 2] - y[i + 1]) / h[i + 1] - (y[i + 1] - y[i]) / h[i]);
        }
        for (std::size_t i = 1; i < k_in; ++i) {
            const double w = h[i] / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        m[k_in] = rhs[k_in - 1] / diag[k_in - 1];
        for (std::size_t i = k_in - 1; i-- > 0;) m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
    }
    std::vector<double> slope(n);
    for (std::size_t k = 0; k + 1 < n; ++k)
        slope[k] = (y[k + 1] - y[k]) / h[k] - h[k] * (2.0 * m[k] + m[k + 1]) / 6.0;
    slope[n - 1] = (y[n - 1] - y[n - 2]) / h[n - 2] + h[n - 2] * (m[n - 2] + 2.0 * m[n - 1]) / 6.0;
    return slope;
}

class LinearInterpolator final : public InterpolatingFunction {
public:
    LinearInterpolator(InterpolatorKind kind, const TenorStructure& tenors, std::vector<Vector> nodes)
        : InterpolatingFunction(kind, tenors, std::move(nodes)) {}
    bool linear_on_interval(int) const override { return true; }

protected:
    InterpolatedPoint evaluate_inside(double t, int l) const override {
        const double a = tenors_.master_time(l);
        const double b = tenors_.master_time(l + 1);
        const Vector& u0 = nodes_[static_cast<std::size_t>(l)];
        const Vector& u1 = nodes_[static_cast<std::size_t>(l) + 1];
        const double w = (t - a) / (b - a);
        return {u0 + w * (u1 - u0), (u1 - u0) / (b - a)};
    }
};

// Piecewise cubic Hermite in time: per interval, either linear or cubic with
// node slopes in each component.
class HermiteInterpolator final : public InterpolatingFunction {
public:
    HermiteInterpolator(InterpolatorKind kind, const TenorStructure& tenors, std::vector<Vector> nodes)
        : InterpolatingFunction(kind, tenors, std::move(nodes)) {
        const auto n = static_cast<std::size_t>(tenors_.intervals());
        const auto d = static_cast<Eigen::Index>(dimension());
        linear_.assign(n, true);
        left_.assign(n, Vector::Zero(d));
        right_.assign(n, Vector::Zero(d));
        times_.resize(n + 1);
        for (std::size_t l = 0; l <= n; ++l) times_[l] = tenors_.master_time(static_cast<int>(l));
        if (kind == InterpolatorKind::MonotoneCubic)
            build_monotone();
        else
            build_sectors();
    }

    bool linear_on_interval(int l) const override { return linear_.at(static_cast<std::size_t>(l)); }

protected:
    InterpolatedPoint evaluate_inside(double t, int l) const override {
        const auto li = static_cast<std::size_t>(l);
        const double a = times_[li];
        const double h = times_[li + 1] - a;
        const Vector& u0 = nodes_[li];
        const Vector& u1 = nodes_[li + 1];
        if (linear_[li]) {
            const double w = (t - a) / h;
            return {u0 + w * (u1 - u0), (u1 - u0) / h};
        }
        const double tau = (t - a) / h;
        InterpolatedPoint p{Vector(u0.size()), Vector(u0.size())};
        for (Eigen::Index i = 0; i < u0.size(); ++i) {
            p.value(i) = Hermite::value(u0(i), u1(i), left_[li](i), right_[li](i), h, tau);
            p.derivative(i) = Hermite::slope(u0(i), u1(i), left_[li](i), right_[li](i), h, tau);
        }
        return p;
    }

private:
    void build_monotone() {
        const auto n = static_cast<std::size_t>(tenors_.intervals());
        const auto d = static_cast<Eigen::Index>(dimension());
        std::vector<double> y(n + 1);
        for (Eigen::Index i = 0; i < d; ++i) {
            for (std::size_t l = 0; l <= n; ++l) y[l] = nodes_[l](i);
            const auto m = pchip_slopes(times_, y);
            for (std::size_t l = 0; l < n; ++l) {
                left_[l](i) = m[l];
                right_[l](i) = m[l + 1];
            }
        }
        std::fill(linear_.begin(), linear_.end(), false);
    }

    // Component moving across [T_l, T_{l+1}], -1 when none or several move.
    int active_component(std::size_t l) const {
        const Vector diff = nodes_[l + 1] - nodes_[l];
        int active = -1;
        for (Eigen::Index i = 0; i < diff.size(); ++i) {
            const double scale = std::max(std::abs(nodes_[l](i)), 1.0);
            if (std::abs(diff(i)) > 1e-14 * scale) {
                if (active >= 0) return -1;
                active = static_cast<int>(i);
            }
        }
        return active;
    }

    void build_sectors() {
        const auto n = static_cast<std::size_t>(tenors_.intervals());
        std::size_t l = 0;
        while (l < n) {
            const int comp = active_component(l);
            std::size_t end = l + 1;
            if (comp >= 0)
                while (end < n && active_component(end) == comp) ++end;
            // Intervals [l, end) form one sector; splines need at least two intervals.
            if (comp >= 0 && end - l >= 2) fit_sector(l, end, static_cast<Eigen::Index>(comp));
            l = end;
        }
    }

    void fit_sector(std::size_t first, std::size_t end, Eigen::Index comp) {
        std::vector<double> x(times_.begin() + static_cast<std::ptrdiff_t>(first),
                              times_.begin() + static_cast<std::ptrdiff_t>(end) + 1);
        std::vector<double> y(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) y[k] = nodes_[first + k](comp);
        std::vector<double> m = natural_spline_slopes(x, y);
        bool monotone = true;
        for (std::size_t k = 0; k + 1 < x.size(); ++k) {
            const double h = x[k + 1] - x[k];
            const double scale = std::max({std::abs(y[k]), std::abs(y[k + 1]), 1e-300}) / h;
            if (Hermite::max_slope(y[k], y[k + 1], m[k], m[k + 1], h) > 1e-12 * scale) monotone = false;
        }
        if (!monotone) {
            m = pchip_slopes(x, y);
            fallback_ = true;
            std::ostringstream os;
            os << "spline on [" << x.front() << ", " << x.back()
               << "] is not monotone; using monotone cubic interpolation there";
            warnings_.push_back(os.str());
        }
        for (std::size_t k = 0; k + 1 < x.size(); ++k) {
            const std::size_t li = first + k;
            linear_[li] = false;
            left_[li].setZero();
            right_[li].setZero();
            left_[li](comp) = m[k];
            right_[li](comp) = m[k + 1];
        }
    }

    std::vector<double> times_;
    std::vector<bool> linear_;
    std::vector<Vector> left_;
    std::vector<Vector> right_;
};

}  // namespace

std::unique_ptr<InterpolatingFunction> make_linear_interpolator(const TenorStructure& tenors,
                                                                std::vector<Vector> nodes) {
    return std::make_unique<LinearInterpolator>(InterpolatorKind::IF2, tenors, std::move(nodes));
}

std::unique_ptr<InterpolatingFunction> make_sector_spline_interpolator(const TenorStructure& tenors,
                                                                       std::vector<Vector> nodes) {
    return std::make_unique<HermiteInterpolator>(InterpolatorKind::IF3, tenors, std::move(nodes));
}

std::unique_ptr<InterpolatingFunction> make_monotone_cubic_interpolator(const TenorStructure& tenors,
                                                                        std::vector<Vector> nodes) {
    return std::make_unique<HermiteInterpolator>(InterpolatorKind::MonotoneCubic, tenors,
                                                 std::move(nodes));
}

CurveFitInterpolator::CurveFitInterpolator(const AffineModelSpec& spec, const TenorStructure& tenors,
                                           const CalibratedSequences& seq, const ForwardCurve& curve,
                                           const std::vector<double>& discount,
                                           const CurveFitOptions& options)
    : InterpolatingFunction(InterpolatorKind::IF1, tenors, seq.u),
      spec_(spec),
      curve_(curve),
      manifold_(seq.manifold) {
    if (!manifold_) throw ArgumentError("curve fit needs the manifold of the calibrated sequences");
    if (std::abs(spec_.horizon() - tenors_.horizon()) > 1e-12)
        throw ArgumentError("model horizon differs from the tenor structure");
    if (options.points_per_interval < 1) throw ArgumentError("need at least one fit point per interval");
    const double gap = curve_.consistency_error(tenors_, discount);
    if (gap > options.consistency_tol) {
        std::ostringstream os;
        os << "forward curve is inconsistent with the discount factors (relative gap " << gap << ")";
        throw FitError(os.str());
    }
    for (int l = 0; l <= tenors_.intervals(); ++l)
        if (curve_.rate(tenors_.master_time(l)) < 0.0) throw FitError("forward curve must be nonnegative");

    const int n = tenors_.intervals();
    const int per = options.points_per_interval;
    const double s_max = manifold_->length();
    for (int l = 0; l < n; ++l) {
        const double a = tenors_.master_time(l);
        const double b = tenors_.master_time(l + 1);
        for (int j = 0; j < per; ++j) {
            const double t = a + (b - a) * j / per;
            double s = seq.u_param[static_cast<std::size_t>(l)];
            if (j > 0) {
                const double lo = std::max(grid_s_.back(), 0.0);
                s = solve_bisect(t, lo, seq.u_param[static_cast<std::size_t>(l) + 1]);
            }
            grid_t_.push_back(t);
            grid_s_.push_back(s);
        }
    }
    grid_t_.push_back(tenors_.horizon());
    grid_s_.push_back(s_max);
    grid_ds_.resize(grid_t_.size());
    for (std::size_t j = 0; j < grid_t_.size(); ++j) grid_ds_[j] = parameter_rate(grid_t_[j], grid_s_[j]);

    // Adaptive refinement: split intervals whose Hermite midpoint prediction misses.
    for (int depth = 0; depth < options.max_refine_depth; ++depth) {
        std::vector<double> t2{grid_t_.front()}, s2{grid_s_.front()}, d2{grid_ds_.front()};
        bool refined = false;
        for (std::size_t j = 0; j + 1 < grid_t_.size(); ++j) {
            const double h = grid_t_[j + 1] - grid_t_[j];
            const double tm = grid_t_[j] + 0.5 * h;
            const double guess =
                Hermite::value(grid_s_[j], grid_s_[j + 1], grid_ds_[j], grid_ds_[j + 1], h, 0.5);
            const double sm = solve_bisect(tm, grid_s_[j], grid_s_[j + 1]);
            if (std::abs(guess - sm) > options.refine_tol) {
                t2.push_back(tm);
                s2.push_back(sm);
                d2.push_back(parameter_rate(tm, sm));
                refined = true;
            }
            t2.push_back(grid_t_[j + 1]);
            s2.push_back(grid_s_[j + 1]);
            d2.push_back(grid_ds_[j + 1]);
        }
        grid_t_ = std::move(t2);
        grid_s_ = std::move(s2);
        grid_ds_ = std::move(d2);
        if (!refined) break;
    }
}

CurveFitInterpolator::Level CurveFitInterpolator::level(double s, bool with_slope) const {
    RiccatiOptions opt;
    opt.gradients = with_slope;
    const Vector u = manifold_->point(s);
    const FlowSolution f = solve_riccati(spec_, spec_.horizon(), u, opt);
    const Vector& x0 = spec_.initial_state();
    Level out{f.phi + f.psi.dot(x0), 0.0};
    if (with_slope) out.slope = (f.grad_phi + f.jac_psi.transpose() * x0).dot(manifold_->tangent(s));
    return out;
}

double CurveFitInterpolator::solve_bisect(double t, double lo, double hi) const {
    const double goal = target(t);
    if (lo > hi) std::swap(lo, hi);
    if (level(lo, false).value < goal) lo = 0.0;
    if (level(hi, false).value > goal) hi = manifold_->length();
    if (level(lo, false).value < goal) {
        std::ostringstream os;
        os << "forward curve target at maturity " << t << " lies beyond the manifold";
        throw FitError(os.str(), -1, t);
    }
    for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (level(mid, false).value > goal)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double CurveFitInterpolator::parameter_rate(double t, double s) const {
    const Level lv = level(s, true);
    if (!(lv.slope < 0.0)) throw FitError("curve fit lost monotonicity along the manifold", -1, t);
    return -curve_.rate(t) / lv.slope;
}

double CurveFitInterpolator::solve_newton(double t, std::size_t j) const {
    const double goal = target(t);
    double lo = grid_s_[j];
    double hi = grid_s_[j + 1];
    const double h = grid_t_[j + 1] - grid_t_[j];
    double s = Hermite::value(lo, hi, grid_ds_[j], grid_ds_[j + 1], h, (t - grid_t_[j]) / h);
    s = std::clamp(s, lo, hi);
    for (int it = 0; it < 60; ++it) {
        const Level lv = level(s, true);
        const double r = lv.value - goal;
        if (std::abs(r) <= 1e-14 * std::max(1.0, std::abs(goal))) break;
        if (r > 0.0)
            lo = s;
        else
            hi = s;
        if (hi - lo <= 1e-15 * std::max(1.0, hi)) break;
        double next = lv.slope < 0.0 ? s - r / lv.slope : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        s = next;
    }
    return s;
}

double CurveFitInterpolator::parameter(double t) const {
    t = std::clamp(t, 0.0, tenors_.horizon());
    auto it = std::upper_bound(grid_t_.begin(), grid_t_.end(), t);
    if (it == grid_t_.end()) return grid_s_.back();
    const auto j = static_cast<std::size_t>(it - grid_t_.begin()) - 1;
    if (grid_t_[j] == t) return grid_s_[j];
    return solve_newton(t, j);
}

double CurveFitInterpolator::residual(double t) const {
    return level(parameter(t), false).value - target(t);
}

double CurveFitInterpolator::max_grid_residual() const {
    double worst = 0.0;
    for (std::size_t j = 0; j < grid_t_.size(); ++j)
        worst = std::max(worst, std::abs(level(grid_s_[j], false).value - target(grid_t_[j])));
    return worst;
}

InterpolatedPoint CurveFitInterpolator::evaluate_inside(double t, int) const {
    const double s = parameter(t);
    InterpolatedPoint p;
    p.value = manifold_->point(s);
    p.derivative = manifold_->tangent(s) * parameter_rate(t, s);
    return p;
}

std::unique_ptr<InterpolatingFunction> build_interpolator(InterpolatorKind kind,
                                                          const AffineModelSpec& spec,
                                                          const TenorStructure& tenors,
                                                          const CalibratedSequences& seq,
                                                          const ForwardCurve* curve,
                                                          const std::vector<double>* discount) {
    switch (kind) {
        case InterpolatorKind::IF1:
            if (!curve || !discount)
                throw ArgumentError("curve-fit interpolation needs a forward curve and discount factors");
            return std::make_unique<CurveFitInterpolator>(spec, tenors, seq, *curve, *discount);
        case InterpolatorKind::IF2: return make_linear_interpolator(tenors, seq.u);
        case InterpolatorKind::IF3: return make_sector_spline_interpolator(tenors, seq.u);
        case InterpolatorKind::MonotoneCubic: return make_monotone_cubic_interpolator(tenors, seq.u);
    }
    throw ArgumentError("unknown interpolator kind");
}

}  // namespace alm
