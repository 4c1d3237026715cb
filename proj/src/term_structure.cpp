#include "alm/term_structure.hpp"

#include "alm/errors.hpp"

#include <algorithm>
#include <cmath>

namespace alm {

namespace {

RiccatiOptions flows_only() {
    RiccatiOptions o;
    o.gradients = false;
    return o;
}

}  // namespace

ContinuousTenorModel::ContinuousTenorModel(AffineModelSpec spec,
                                           std::shared_ptr<const InterpolatingFunction> U)
    : spec_(std::move(spec)), U_(std::move(U)) {
    if (!U_) throw ArgumentError("continuous-tenor model needs an interpolating function");
    if (U_->dimension() != spec_.dimension())
        throw ArgumentError("interpolator dimension differs from the model");
    if (std::abs(U_->tenors().horizon() - spec_.horizon()) > 1e-12)
        throw ArgumentError("interpolator horizon differs from the model");
    log_m0_ = log_initial_martingale(spec_, U_->value(0.0));
}

BondCoefficients ContinuousTenorModel::bond_coefficients(double t, double T) const {
    if (t > T) throw ArgumentError("bond needs t <= T");
    if (t < 0.0 || T > horizon() + 1e-12) throw ArgumentError("bond times outside [0, T_N]");
    const double lag = std::max(horizon() - t, 0.0);
    const auto a = solve_riccati(spec_, lag, U_->value(T), flows_only());
    const auto b = solve_riccati(spec_, lag, U_->value(t), flows_only());
    return {a.phi - b.phi, a.psi - b.psi};
}

double ContinuousTenorModel::bond_price(double t, double T, const Vector& x) const {
    const BondCoefficients c = bond_coefficients(t, T);
    return std::exp(c.alpha + c.beta.dot(x));
}

ShortRateCoefficients ContinuousTenorModel::forward_rate_coefficients(double t, double T) const {
    if (t > T + 1e-12) throw ArgumentError("forward rate needs t <= T");
    const InterpolatedPoint u = U_->evaluate(T);
    const auto f = solve_riccati(spec_, std::max(horizon() - t, 0.0), u.value);
    return {-f.grad_phi.dot(u.derivative), -(f.jac_psi * u.derivative)};
}

ShortRateCoefficients ContinuousTenorModel::left_short_rate_coefficients(double t) const {
    const Vector du = U_->left_derivative(t);
    const auto f = solve_riccati(spec_, std::max(horizon() - t, 0.0), U_->value(t));
    return {-f.grad_phi.dot(du), -(f.jac_psi * du)};
}

double ContinuousTenorModel::forward_rate(double t, double T, const Vector& x) const {
    const ShortRateCoefficients c = forward_rate_coefficients(t, T);
    return c.p + c.q.dot(x);
}

double ContinuousTenorModel::short_rate(double t, const Vector& x) const { return forward_rate(t, t, x); }

DensityExponent ContinuousTenorModel::density_exponent(double t) const {
    const auto f = solve_riccati(spec_, std::max(horizon() - t, 0.0), U_->value(t), flows_only());
    return {f.phi, f.psi};
}

double ContinuousTenorModel::spot_density(double t, const Vector& x, double integrated_rate) const {
    const DensityExponent e = density_exponent(t);
    return std::exp(e.P + e.Q.dot(x) + integrated_rate - log_m0_);
}

Characteristics ContinuousTenorModel::spot_characteristics(double t, const Vector& w) const {
    const Vector Q = density_exponent(t).Q;
    const Characteristics shifted = functional_characteristics(spec_, w + Q);
    const Characteristics base = functional_characteristics(spec_, Q);
    return {shifted.F - base.F, shifted.R - base.R};
}

Vector ContinuousTenorModel::spot_drift_shift(double t) const {
    const Vector Q = density_exponent(t).Q;
    Vector shift(Q.size());
    for (Eigen::Index i = 0; i < Q.size(); ++i)
        shift(i) = spec_.diffusion()[static_cast<std::size_t>(i)](i, i) * Q(i);
    return shift;
}

double ContinuousTenorModel::short_rate_mgf(double s, double t, double w, const Vector& x) const {
    if (!(s <= t)) throw ArgumentError("need s <= t");
    const ShortRateCoefficients c = short_rate_coefficients(t);
    const SpotCharacteristics chars(*this);
    const InhomogeneousFlow f = solve_riccati_inhomogeneous(chars, s, t, w * c.q);
    return std::exp(w * c.p + f.phi + f.psi.dot(x));
}

double SpotCharacteristics::F(double time, const Vector& u) const {
    return model_.spot_characteristics(time, u).F;
}

Vector SpotCharacteristics::R(double time, const Vector& u) const {
    return model_.spot_characteristics(time, u).R;
}

std::vector<double> SpotCharacteristics::breakpoints() const {
    const auto& tenors = model_.interpolator().tenors();
    std::vector<double> out;
    for (int l = 1; l < tenors.intervals(); ++l) out.push_back(tenors.master_time(l));
    return out;
}

PathGrid generate_spot_paths(const ContinuousTenorModel& model, std::span<const double> grid,
                             std::size_t n_paths, std::uint64_t seed, int substeps, unsigned threads) {
    if (grid.empty() || grid.back() > model.horizon() + 1e-12)
        throw ArgumentError("spot grid must lie within [0, T_N]");
    DriftModifier modifier{[&](double t) {
        const Vector shift = model.spot_drift_shift(t);
        return shift;
    }};
    AffineRate rate{[&](double t, double& p, Vector& q) {
        const ShortRateCoefficients c = model.short_rate_coefficients(t);
        p = c.p;
        q = c.q;
    }};
    rate.left_coefficients = [&](double t, double& p, Vector& q) {
        const ShortRateCoefficients c = model.left_short_rate_coefficients(t);
        p = c.p;
        q = c.q;
    };
    SimulationOptions options;
    options.scheme = Scheme::EulerFullTruncation;
    options.substeps = substeps;
    options.threads = threads;
    return simulate_paths(model.spec(), grid, n_paths, seed, options, &modifier, &rate);
}

}  // namespace alm
