#include "alm/affine.hpp"
#include "alm/errors.hpp"

#include "ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace alm {

namespace {

using detail::OdeSettings;
using detail::OdeState;

// Right-hand side of the homogeneous Riccati system, optionally with the
// variational equations. Layout: [phi, psi(d), grad_phi(d), jac_psi(d*d, col-major)].
struct RiccatiSystem {
    Vector b;
    Matrix beta_t;  // beta transposed: R_lin(u) = beta_t * u
    Vector a;       // alpha_i(i, i)
    bool gradients = false;

    void operator()(const OdeState& y, OdeState& dy, double) const {
        const auto d = b.size();
        Eigen::Map<const Vector> psi(y.data() + 1, d);
        Eigen::Map<Vector> dpsi(dy.data() + 1, d);
        dy[0] = b.dot(psi);
        dpsi.noalias() = beta_t * psi;
        dpsi.array() += 0.5 * a.array() * psi.array().square();
        if (!gradients) return;
        Eigen::Map<const Matrix> jac(y.data() + 1 + 2 * d, d, d);
        Eigen::Map<Vector> dgrad(dy.data() + 1 + d, d);
        Eigen::Map<Matrix> djac(dy.data() + 1 + 2 * d, d, d);
        dgrad.noalias() = jac.transpose() * b;
        djac.noalias() = beta_t * jac;
        djac += (a.array() * psi.array()).matrix().asDiagonal() * jac;
    }
};

RiccatiSystem make_system(const AffineModelSpec& spec, bool gradients) {
    RiccatiSystem sys;
    sys.b = spec.drift_constant();
    sys.beta_t = spec.drift_linear().transpose();
    const auto d = static_cast<Eigen::Index>(spec.dimension());
    sys.a.resize(d);
    for (Eigen::Index i = 0; i < d; ++i) sys.a(i) = spec.diffusion()[static_cast<std::size_t>(i)](i, i);
    sys.gradients = gradients;
    return sys;
}

OdeSettings make_settings(const RiccatiOptions& options, std::size_t d) {
    OdeSettings s;
    s.abs_tol = options.abs_tol;
    s.rel_tol = options.rel_tol;
    s.blowup_bound = options.blowup_bound;
    s.max_steps = options.max_steps;
    s.watch_begin = 1;
    s.watch_end = 1 + d;
    return s;
}

FlowSolution unpack(const OdeState& y, double t, const Vector& u, bool gradients) {
    const auto d = u.size();
    FlowSolution out;
    out.time = t;
    out.u = u;
    out.phi = y[0];
    out.psi = Eigen::Map<const Vector>(y.data() + 1, d);
    if (gradients) {
        out.grad_phi = Eigen::Map<const Vector>(y.data() + 1 + d, d);
        out.jac_psi = Eigen::Map<const Matrix>(y.data() + 1 + 2 * d, d, d);
    }
    return out;
}

void check_argument(const AffineModelSpec& spec, const Vector& u) {
    if (static_cast<std::size_t>(u.size()) != spec.dimension())
        throw ArgumentError("flow argument has dimension " + std::to_string(u.size()) +
                            ", model has " + std::to_string(spec.dimension()));
    for (Eigen::Index i = 0; i < u.size(); ++i)
        if (!std::isfinite(u(i))) throw ArgumentError("flow argument not finite");
}

}  // namespace

std::vector<FlowSolution> solve_riccati_path(const AffineModelSpec& spec,
                                             std::span<const double> lags, const Vector& u,
                                             const RiccatiOptions& options) {
    check_argument(spec, u);
    const auto d = static_cast<std::size_t>(u.size());
    const RiccatiSystem sys = make_system(spec, options.gradients);
    const OdeSettings settings = make_settings(options, d);

    OdeState y(options.gradients ? 1 + 2 * d + d * d : 1 + d, 0.0);
    for (std::size_t i = 0; i < d; ++i) y[1 + i] = u(static_cast<Eigen::Index>(i));
    if (options.gradients)
        for (std::size_t i = 0; i < d; ++i) y[1 + 2 * d + i * d + i] = 1.0;

    std::vector<FlowSolution> out;
    out.reserve(lags.size());
    double t = 0.0;
    double dt = 0.0;
    for (double lag : lags) {
        if (!(lag >= 0.0) || !std::isfinite(lag)) throw ArgumentError("flow lag must be >= 0");
        if (lag < t) throw ArgumentError("flow lags must be nondecreasing");
        detail::advance(sys, y, t, lag, dt, settings);
        t = lag;
        out.push_back(unpack(y, lag, u, options.gradients));
    }
    return out;
}

FlowSolution solve_riccati(const AffineModelSpec& spec, double t, const Vector& u,
                           const RiccatiOptions& options) {
    const double lag[1] = {t};
    return solve_riccati_path(spec, lag, u, options).front();
}

double mgf(const AffineModelSpec& spec, double t, const Vector& u, const Vector& x) {
    if (x.size() != u.size()) throw ArgumentError("state and argument differ in dimension");
    RiccatiOptions options;
    options.gradients = false;
    const FlowSolution flow = solve_riccati(spec, t, u, options);
    return std::exp(flow.phi + flow.psi.dot(x));
}

bool MomentDomain::contains(const Vector& u) const {
    if (u.size() != upper.size()) return false;
    for (Eigen::Index i = 0; i < u.size(); ++i)
        if (!(u(i) < upper(i))) return false;
    return true;
}

MomentDomain moment_domain(const AffineModelSpec& spec, double horizon, double resolution) {
    if (!(horizon > 0.0)) throw ArgumentError("moment domain horizon must be positive");
    const auto d = static_cast<Eigen::Index>(spec.dimension());
    RiccatiOptions options;
    options.gradients = false;
    auto finite_at = [&](Eigen::Index i, double value) {
        Vector u = Vector::Zero(d);
        u(i) = value;
        try {
            solve_riccati(spec, horizon, u, options);
            return true;
        } catch (const DomainError&) {
            return false;
        }
    };

    constexpr double cap = 1e6;
    MomentDomain out;
    out.horizon = horizon;
    out.upper = Vector::Constant(d, std::numeric_limits<double>::infinity());
    for (Eigen::Index i = 0; i < d; ++i) {
        double lo = 0.0;
        double hi = 1.0;
        while (hi <= cap && finite_at(i, hi)) {
            lo = hi;
            hi *= 2.0;
        }
        if (hi > cap) continue;
        while (hi - lo > resolution) {
            const double mid = 0.5 * (lo + hi);
            (finite_at(i, mid) ? lo : hi) = mid;
        }
        out.upper(i) = lo;
    }
    return out;
}

InhomogeneousFlow solve_riccati_inhomogeneous(const TimeDependentCharacteristics& chars,
                                              double s, double t, const Vector& u,
                                              const RiccatiOptions& options) {
    const auto d = chars.dimension();
    if (static_cast<std::size_t>(u.size()) != d)
        throw ArgumentError("flow argument differs from characteristics dimension");
    if (!(s <= t)) throw ArgumentError("need s <= t");

    OdeSettings settings = make_settings(options, d);
    OdeState y(1 + d, 0.0);
    for (std::size_t i = 0; i < d; ++i) y[1 + i] = u(static_cast<Eigen::Index>(i));

    // Integrate in the lag tau = t - s'. Within one segment of calendar time
    // [lo, hi] the evaluation time is clamped into [lo, hi) so that
    // right-continuous characteristics are sampled on the correct piece.
    std::vector<double> cuts{s};
    for (double b : chars.breakpoints())
        if (b > s && b < t) cuts.push_back(b);
    cuts.push_back(t);
    std::sort(cuts.begin(), cuts.end());

    double dt = 0.0;
    for (std::size_t seg = cuts.size() - 1; seg-- > 0;) {
        const double lo = cuts[seg];
        const double hi = cuts[seg + 1];
        if (!(hi > lo)) continue;
        const double hi_inside = std::nextafter(hi, lo);
        auto sys = [&](const OdeState& state, OdeState& dstate, double tau) {
            const double time = std::clamp(t - tau, lo, hi_inside);
            Eigen::Map<const Vector> psi(state.data() + 1, static_cast<Eigen::Index>(d));
            const Vector psi_v = psi;
            dstate[0] = chars.F(time, psi_v);
            const Vector r = chars.R(time, psi_v);
            for (std::size_t i = 0; i < d; ++i) dstate[1 + i] = r(static_cast<Eigen::Index>(i));
        };
        detail::advance(sys, y, t - hi, t - lo, dt, settings);
    }
    InhomogeneousFlow out;
    out.phi = y[0];
    out.psi = Eigen::Map<const Vector>(y.data() + 1, static_cast<Eigen::Index>(d));
    return out;
}

}  // namespace alm
