#include "alm/multicurve.hpp"

#include "alm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace alm {

namespace {

constexpr double kParamTol = 1e-12;

RiccatiOptions no_gradients() {
    RiccatiOptions o;
    o.gradients = false;
    return o;
}

double level_at(const AffineModelSpec& spec, const Manifold& m, double s) {
    try {
        return log_initial_martingale(spec, m.point(s));
    } catch (const DomainError&) {
        return std::numeric_limits<double>::infinity();
    }
}

// Parameter s in [lo, hi] with level(s) = target; level is non-increasing in s.
double bisect_level(const AffineModelSpec& spec, const Manifold& m, double target, double lo,
                    double hi) {
    while (hi - lo > kParamTol) {
        const double mid = 0.5 * (lo + hi);
        if (level_at(spec, m, mid) > target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::string maturity_text(double T) {
    std::ostringstream os;
    os << T;
    return os.str();
}

}  // namespace

double log_martingale_value(const AffineModelSpec& spec, const Vector& u, double t,
                            const Vector& x) {
    const double lag = spec.horizon() - t;
    if (lag < -1e-12) throw ArgumentError("martingale evaluated past the horizon");
    if (x.size() != u.size()) throw ArgumentError("state and vector differ in dimension");
    const FlowSolution f = solve_riccati(spec, std::max(lag, 0.0), u, no_gradients());
    return f.phi + f.psi.dot(x);
}

double martingale_value(const AffineModelSpec& spec, const Vector& u, double t, const Vector& x) {
    return std::exp(log_martingale_value(spec, u, t, x));
}

std::vector<double> log_bond_ratios(const InitialTermStructure& init) {
    std::vector<double> out(init.discount.size());
    const double last = init.discount.back();
    for (std::size_t l = 0; l < out.size(); ++l) out[l] = std::log(init.discount[l] / last);
    return out;
}

CalibratedSequences fit_u_sequence(const AffineModelSpec& spec, const TenorStructure& tenors,
                                   const InitialTermStructure& init,
                                   std::shared_ptr<const Manifold> manifold) {
    if (!manifold) throw ArgumentError("fitting needs a manifold");
    if (manifold->dimension() != spec.dimension())
        throw ArgumentError("manifold dimension differs from model dimension");
    init.validate(tenors);
    const auto n = static_cast<std::size_t>(tenors.intervals());
    const std::vector<double> target = log_bond_ratios(init);
    const Manifold& m = *manifold;

    CalibratedSequences seq;
    seq.manifold = manifold;
    seq.u.assign(n + 1, Vector::Zero(static_cast<Eigen::Index>(spec.dimension())));
    seq.u_param.assign(n + 1, m.length());

    // The far end bounds every reachable level.
    const double top = level_at(spec, m, 0.0);
    for (std::size_t l = n; l-- > 0;) {
        if (target[l] <= 0.0) {
            seq.u_param[l] = m.length();
        } else if (target[l] == target[l + 1]) {
            seq.u_param[l] = seq.u_param[l + 1];
        } else {
            if (!(top >= target[l]))
                throw FitError("OIS target at maturity " + maturity_text(tenors.master_time(static_cast<int>(l))) +
                                   " lies beyond the manifold",
                               static_cast<int>(l), tenors.master_time(static_cast<int>(l)));
            seq.u_param[l] = bisect_level(spec, m, target[l], 0.0, seq.u_param[l + 1]);
        }
        seq.u[l] = seq.u_param[l] == m.length() ? seq.u[n] : m.point(seq.u_param[l]);
    }
    return seq;
}

void fit_v_sequences(const AffineModelSpec& spec, const TenorStructure& tenors,
                     const InitialTermStructure& init, CalibratedSequences& seq) {
    if (!seq.manifold) throw ArgumentError("fitting needs a manifold");
    init.validate(tenors);
    const Manifold& m = *seq.manifold;
    const double top = level_at(spec, m, 0.0);
    seq.v.assign(tenors.tenor_count(), {});
    seq.v_param.assign(tenors.tenor_count(), {});
    for (std::size_t x = 0; x < tenors.tenor_count(); ++x) {
        const int nx = tenors.periods(x);
        const double delta = tenors.tenor(x).delta;
        auto& v = seq.v[x];
        auto& vp = seq.v_param[x];
        v.resize(static_cast<std::size_t>(nx) + 1);
        vp.resize(static_cast<std::size_t>(nx) + 1);
        for (int k = 0; k <= nx; ++k) {
            const auto lk = static_cast<std::size_t>(tenors.master_index(x, k));
            const double s_floor = seq.u_param[lk];
            const double level_u = level_at(spec, m, s_floor);
            double target = 0.0;
            if (k < nx) {
                const auto lnext = static_cast<std::size_t>(tenors.master_index(x, k + 1));
                const double libor = init.libor[x][static_cast<std::size_t>(k) + 1];
                target = std::log1p(delta * libor) + level_at(spec, m, seq.u_param[lnext]);
            } else {
                const double libor = init.libor[x][static_cast<std::size_t>(nx)];
                const double fwd = init.ois_forward(tenors, x, nx);
                target = std::log1p(delta * libor) - std::log1p(delta * fwd);
            }
            double s = s_floor;
            if (target > level_u + 1e-14 * std::max(1.0, std::abs(level_u))) {
                if (!(top >= target)) {
                    const double T = tenors.time(x, std::min(k + 1, nx));
                    throw FitError("LIBOR target for tenor " + tenors.tenor(x).name + " at maturity " +
                                       maturity_text(T) + " lies beyond the manifold",
                                   k + 1, T);
                }
                s = bisect_level(spec, m, target, 0.0, s_floor);
            }
            vp[static_cast<std::size_t>(k)] = s;
            v[static_cast<std::size_t>(k)] = s == s_floor ? seq.u[lk] : m.point(s);
        }
    }
}

CalibratedSequences fit_sequences(const AffineModelSpec& spec, const TenorStructure& tenors,
                                  const InitialTermStructure& init,
                                  std::shared_ptr<const Manifold> manifold) {
    CalibratedSequences seq = fit_u_sequence(spec, tenors, init, std::move(manifold));
    fit_v_sequences(spec, tenors, init, seq);
    return seq;
}

double max_fit_level(const TenorStructure& tenors, const InitialTermStructure& init) {
    init.validate(tenors);
    const std::vector<double> levels = log_bond_ratios(init);
    double top = levels.front();
    for (std::size_t x = 0; x < tenors.tenor_count(); ++x) {
        const int nx = tenors.periods(x);
        const double delta = tenors.tenor(x).delta;
        for (int k = 0; k < nx; ++k) {
            const auto lnext = static_cast<std::size_t>(tenors.master_index(x, k + 1));
            top = std::max(top, std::log1p(delta * init.libor[x][static_cast<std::size_t>(k) + 1]) + levels[lnext]);
        }
        const double last = std::log1p(delta * init.libor[x][static_cast<std::size_t>(nx)]) -
                            std::log1p(delta * init.ois_forward(tenors, x, nx));
        top = std::max(top, last);
    }
    return top;
}

std::vector<double> anchor_levels(const TenorStructure& tenors, const InitialTermStructure& init,
                                  std::span<const int> knots, double margin) {
    if (!(margin > 0.0)) throw ArgumentError("manifold margin must be positive");
    for (std::size_t i = 0; i < knots.size(); ++i) {
        if (knots[i] < 0 || knots[i] > tenors.intervals())
            throw ArgumentError("manifold knot index outside [0, N]");
        if (i > 0 && knots[i] <= knots[i - 1]) throw ArgumentError("manifold knot indices must increase");
    }
    const std::vector<double> levels = log_bond_ratios(init);
    std::vector<double> out;
    for (std::size_t i = knots.size(); i-- > 0;) out.push_back(levels[static_cast<std::size_t>(knots[i])]);
    out.push_back(max_fit_level(tenors, init) + margin);
    return out;
}

MultiCurveModel::MultiCurveModel(AffineModelSpec spec, TenorStructure tenors, CalibratedSequences seq)
    : spec_(std::move(spec)), tenors_(std::move(tenors)), seq_(std::move(seq)) {
    if (seq_.u.size() != static_cast<std::size_t>(tenors_.intervals()) + 1)
        throw ArgumentError("u sequence length differs from the master grid");
    if (seq_.v.size() != tenors_.tenor_count()) throw ArgumentError("need one v sequence per tenor");
}

void MultiCurveModel::check(std::size_t x, int k, double t) const {
    if (x >= tenors_.tenor_count()) throw ArgumentError("tenor index out of range");
    if (k < 1 || k > tenors_.periods(x)) throw ArgumentError("rate index out of range");
    if (t > tenors_.time(x, k) + 1e-12) throw ArgumentError("rate evaluated after its maturity");
}

double MultiCurveModel::ois_forward_rate(std::size_t x, int k, double t, const Vector& xt) const {
    check(x, k, t);
    const double a = log_martingale_value(spec_, seq_.u_tenor(tenors_, x, k - 1), t, xt);
    const double b = log_martingale_value(spec_, seq_.u_tenor(tenors_, x, k), t, xt);
    return std::expm1(a - b) / tenors_.tenor(x).delta;
}

double MultiCurveModel::libor_rate(std::size_t x, int k, double t, const Vector& xt) const {
    check(x, k, t);
    const double a = log_martingale_value(spec_, seq_.v[x][static_cast<std::size_t>(k) - 1], t, xt);
    const double b = log_martingale_value(spec_, seq_.u_tenor(tenors_, x, k), t, xt);
    return std::expm1(a - b) / tenors_.tenor(x).delta;
}

double MultiCurveModel::spread(std::size_t x, int k, double t, const Vector& xt) const {
    return libor_rate(x, k, t, xt) - ois_forward_rate(x, k, t, xt);
}

ForwardMeasureFlow forward_measure_flow(const AffineModelSpec& spec, const Vector& u_k, double t,
                                        const Vector& w) {
    if (t < 0.0 || t > spec.horizon() + 1e-12) throw ArgumentError("time outside [0, T_N]");
    const RiccatiOptions opt = no_gradients();
    const Vector shift = solve_riccati(spec, std::max(spec.horizon() - t, 0.0), u_k, opt).psi;
    const FlowSolution base = solve_riccati(spec, t, shift, opt);
    const FlowSolution moved = solve_riccati(spec, t, shift + w, opt);
    return {moved.phi - base.phi, moved.psi - base.psi};
}

FlowTable::FlowTable(const AffineModelSpec& spec, std::span<const Vector> vectors,
                     std::span<const double> times)
    : times_(times.begin(), times.end()) {
    const double horizon = spec.horizon();
    std::vector<std::size_t> order(times_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return times_[a] > times_[b]; });
    std::vector<double> lags(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        const double t = times_[order[i]];
        if (t > horizon + 1e-12) throw ArgumentError("flow table time past the horizon");
        lags[i] = std::max(horizon - t, 0.0);
    }
    for (std::size_t i = 1; i < lags.size(); ++i) lags[i] = std::max(lags[i], lags[i - 1]);

    const RiccatiOptions opt = no_gradients();
    phi_.resize(vectors.size());
    psi_.resize(vectors.size());
    for (std::size_t v = 0; v < vectors.size(); ++v) {
        const auto path = solve_riccati_path(spec, lags, vectors[v], opt);
        phi_[v].resize(times_.size());
        psi_[v].resize(times_.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            phi_[v][order[i]] = path[i].phi;
            psi_[v][order[i]] = path[i].psi;
        }
    }
}

double FlowTable::log_martingale(std::size_t v, std::size_t i, const double* x) const {
    const Vector& p = psi_[v][i];
    double s = phi_[v][i];
    for (Eigen::Index j = 0; j < p.size(); ++j) s += p(j) * x[j];
    return s;
}

}  // namespace alm
