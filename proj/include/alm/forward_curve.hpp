#pragma once

#include "alm/tenor.hpp"

#include <vector>

namespace alm {

struct NelsonSiegel {
    double beta0 = 0.0;
    double beta1 = 0.0;
    double beta2 = 0.0;
    double tau = 1.0;
};

/// Initial instantaneous forward curve f(0, T), either Nelson-Siegel or a
/// piecewise-linear table (flat beyond its ends).
class ForwardCurve {
public:
    static ForwardCurve nelson_siegel(const NelsonSiegel& params);
    static ForwardCurve table(std::vector<double> maturities, std::vector<double> rates);

    double rate(double T) const;
    /// Integral of f(0, s) over [0, T].
    double integral(double T) const;
    double integral(double a, double b) const { return integral(b) - integral(a); }
    double discount(double T) const;

    bool is_table() const { return !maturities_.empty(); }
    const NelsonSiegel& parameters() const { return ns_; }
    const std::vector<double>& maturities() const { return maturities_; }
    const std::vector<double>& rates() const { return rates_; }

    /// Largest relative gap |exp(-int f) / B(0, T_l) - 1| over master dates.
    double consistency_error(const TenorStructure& tenors, const std::vector<double>& discount) const;

private:
    ForwardCurve() = default;
    NelsonSiegel ns_;
    std::vector<double> maturities_;
    std::vector<double> rates_;
    std::vector<double> cumulative_;  // integral at each table knot
};

}  // namespace alm
