#include "alm/forward_curve.hpp"

#include "alm/errors.hpp"

#include <algorithm>
#include <cmath>

namespace alm {

ForwardCurve ForwardCurve::nelson_siegel(const NelsonSiegel& params) {
    if (!(params.tau > 0.0)) throw ArgumentError("Nelson-Siegel tau must be positive");
    ForwardCurve c;
    c.ns_ = params;
    return c;
}

ForwardCurve ForwardCurve::table(std::vector<double> maturities, std::vector<double> rates) {
    if (maturities.empty() || maturities.size() != rates.size())
        throw ArgumentError("forward table needs matching, nonempty columns");
    for (std::size_t i = 0; i < maturities.size(); ++i) {
        if (i && !(maturities[i] > maturities[i - 1]))
            throw ArgumentError("forward table maturities must increase");
        if (!(rates[i] >= 0.0) || !std::isfinite(rates[i]))
            throw ArgumentError("forward rates must be nonnegative");
    }
    if (maturities.front() < 0.0) throw ArgumentError("forward table maturities must be >= 0");
    ForwardCurve c;
    c.maturities_ = std::move(maturities);
    c.rates_ = std::move(rates);
    c.cumulative_.resize(c.maturities_.size());
    c.cumulative_[0] = c.rates_[0] * c.maturities_[0];
    for (std::size_t i = 1; i < c.maturities_.size(); ++i)
        c.cumulative_[i] = c.cumulative_[i - 1] + 0.5 * (c.rates_[i] + c.rates_[i - 1]) *
                                                      (c.maturities_[i] - c.maturities_[i - 1]);
    return c;
}

double ForwardCurve::rate(double T) const {
    if (!is_table()) {
        const double x = T / ns_.tau;
        const double e = std::exp(-x);
        return ns_.beta0 + ns_.beta1 * e + ns_.beta2 * x * e;
    }
    if (T <= maturities_.front()) return rates_.front();
    if (T >= maturities_.back()) return rates_.back();
    const auto it = std::upper_bound(maturities_.begin(), maturities_.end(), T);
    const auto i = static_cast<std::size_t>(it - maturities_.begin());
    const double w = (T - maturities_[i - 1]) / (maturities_[i] - maturities_[i - 1]);
    return rates_[i - 1] + w * (rates_[i] - rates_[i - 1]);
}

double ForwardCurve::integral(double T) const {
    if (!is_table()) {
        const double tau = ns_.tau;
        const double e = std::exp(-T / tau);
        return ns_.beta0 * T + ns_.beta1 * tau * (1.0 - e) + ns_.beta2 * (tau * (1.0 - e) - T * e);
    }
    if (T <= maturities_.front()) return rates_.front() * T;
    if (T >= maturities_.back())
        return cumulative_.back() + rates_.back() * (T - maturities_.back());
    const auto it = std::upper_bound(maturities_.begin(), maturities_.end(), T);
    const auto i = static_cast<std::size_t>(it - maturities_.begin());
    const double r = rate(T);
    return cumulative_[i - 1] + 0.5 * (rates_[i - 1] + r) * (T - maturities_[i - 1]);
}

double ForwardCurve::discount(double T) const { return std::exp(-integral(T)); }

double ForwardCurve::consistency_error(const TenorStructure& tenors,
                                       const std::vector<double>& discount) const {
    double worst = 0.0;
    for (int l = 0; l <= tenors.intervals(); ++l) {
        const double model = std::exp(-integral(tenors.master_time(l)));
        worst = std::max(worst, std::abs(model / discount.at(static_cast<std::size_t>(l)) - 1.0));
    }
    return worst;
}

}  // namespace alm
