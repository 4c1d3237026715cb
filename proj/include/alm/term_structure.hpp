#pragma once

#include "alm/affine.hpp"
#include "alm/interpolation.hpp"
#include "alm/simulation.hpp"

#include <memory>

namespace alm {

/// f(t, T) = p(t, T) + <q(t, T), X_t>.
struct ShortRateCoefficients {
    double p = 0.0;
    Vector q;
};

/// Exponents of the spot-measure density: P_t = phi_{T_N-t}(U(t)), Q_t = psi_{T_N-t}(U(t)).
struct DensityExponent {
    double P = 0.0;
    Vector Q;
};

/// B(t, T) = exp(alpha + <beta, X_t>).
struct BondCoefficients {
    double alpha = 0.0;
    Vector beta;
};

/// Continuous-tenor extension of the discrete model through an interpolating function.
class ContinuousTenorModel {
public:
    ContinuousTenorModel(AffineModelSpec spec, std::shared_ptr<const InterpolatingFunction> U);

    const AffineModelSpec& spec() const { return spec_; }
    const InterpolatingFunction& interpolator() const { return *U_; }
    std::shared_ptr<const InterpolatingFunction> interpolator_ptr() const { return U_; }
    double horizon() const { return spec_.horizon(); }

    BondCoefficients bond_coefficients(double t, double T) const;
    double bond_price(double t, double T, const Vector& x) const;

    ShortRateCoefficients forward_rate_coefficients(double t, double T) const;
    ShortRateCoefficients short_rate_coefficients(double t) const { return forward_rate_coefficients(t, t); }
    /// Limit of the short-rate coefficients from the left at t.
    ShortRateCoefficients left_short_rate_coefficients(double t) const;
    double forward_rate(double t, double T, const Vector& x) const;
    double short_rate(double t, const Vector& x) const;

    DensityExponent density_exponent(double t) const;
    /// log M_0^{U(0)}.
    double log_initial_numeraire() const { return log_m0_; }
    double spot_density(double t, const Vector& x, double integrated_rate) const;

    /// F*(t, w) and R*(t, w) under the spot measure.
    Characteristics spot_characteristics(double t, const Vector& w) const;
    /// Shift of the diagonal linear drift under the spot measure.
    Vector spot_drift_shift(double t) const;

    /// E*[exp(w r_t) | X_s = x].
    double short_rate_mgf(double s, double t, double w, const Vector& x) const;

private:
    AffineModelSpec spec_;
    std::shared_ptr<const InterpolatingFunction> U_;
    double log_m0_ = 0.0;
};

/// Time-dependent characteristics of X under the spot measure.
class SpotCharacteristics final : public TimeDependentCharacteristics {
public:
    explicit SpotCharacteristics(const ContinuousTenorModel& model) : model_(model) {}
    std::size_t dimension() const override { return model_.spec().dimension(); }
    double F(double time, const Vector& u) const override;
    Vector R(double time, const Vector& u) const override;
    std::vector<double> breakpoints() const override;

private:
    const ContinuousTenorModel& model_;
};

/// Paths of X under the spot measure (Euler full truncation with the
/// time-dependent drift shift), with r_t and its trapezoidal integral.
PathGrid generate_spot_paths(const ContinuousTenorModel& model, std::span<const double> grid,
                             std::size_t n_paths, std::uint64_t seed, int substeps = 4,
                             unsigned threads = 0);

}  // namespace alm
