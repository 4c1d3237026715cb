#pragma once

#include "alm/multicurve.hpp"
#include "alm/simulation.hpp"
#include "alm/term_structure.hpp"

#include <span>
#include <string>
#include <vector>

namespace alm {

/// Basis swap seen from the bank: receives LIBOR of tenor leg2 and pays
/// LIBOR of tenor leg1 plus the spread, both over [start, end].
struct BasisSwapSpec {
    std::size_t leg1_tenor = 0;  // shorter tenor, carries the spread
    std::size_t leg2_tenor = 1;
    double start = 0.0;
    double end = 0.0;
    double inception = 0.0;
    double spread = 0.0;
};

class BasisSwap {
public:
    BasisSwap(const TenorStructure& tenors, BasisSwapSpec spec);

    const BasisSwapSpec& spec() const { return spec_; }
    const TenorStructure& tenors() const { return tenors_; }
    int first(int leg) const { return leg == 1 ? p1_ : p2_; }
    int last(int leg) const { return leg == 1 ? q1_ : q2_; }

    /// First summation index of a leg at time t: max(p + 1, min{k : t < T_k}).
    int ceil_index(int leg, double t) const;

    /// Clean value at time t in state x.
    double price(const AffineModelSpec& model, const CalibratedSequences& seq,
                 const InterpolatingFunction& U, double t, const Vector& x) const;

    /// Spread making the value zero at time r <= start. Throws
    /// DegenerateContractError on a vanishing annuity.
    double fair_spread(const AffineModelSpec& model, const CalibratedSequences& seq, double r,
                       const Vector& x) const;

    BasisSwap with_spread(double spread) const;

private:
    std::size_t tenor_of(int leg) const { return leg == 1 ? spec_.leg1_tenor : spec_.leg2_tenor; }

    TenorStructure tenors_;
    BasisSwapSpec spec_;
    int p1_ = 0, q1_ = 0, p2_ = 0, q2_ = 0;
};

/// Swap values on a fixed time grid with all flows precomputed.
class SwapPricer {
public:
    SwapPricer(const BasisSwap& swap, const ContinuousTenorModel& model,
               const CalibratedSequences& seq, std::span<const double> times);

    const std::vector<double>& times() const { return times_; }
    double price(std::size_t step, const double* x) const;
    /// Step-major values for every path of the grid (times must match).
    std::vector<double> price_paths(const PathGrid& paths, unsigned threads = 0) const;

private:
    BasisSwap swap_;
    std::vector<double> times_;
    std::size_t dim_;
    // Flow vectors: per leg and index i, position of v_{i-1} and u_i in the table.
    std::vector<int> v_slot_[2];
    std::vector<int> u_slot_[2];
    FlowTable table_;
    std::vector<DensityExponent> numeraire_;
};

enum class ValuationRule { Clean, PreDefault };
enum class CollateralRule { None, Full };

struct CsaSpec {
    std::string name;
    double recovery_funder = 0.0;    // r (unsecured funder)
    double recovery_bank = 0.0;      // rho^b
    double recovery_investor = 0.0;  // rho^i
    ValuationRule valuation = ValuationRule::Clean;
    CollateralRule collateral = CollateralRule::None;
    double gamma_bank = 0.0;
    double gamma_investor = 0.0;
    double gamma = 0.0;
    double b = 0.0;
    double b_bar = 0.0;
    double lambda = 0.0;
    double lambda_bar = 0.0;

    double lambda_tilde() const { return lambda_bar - gamma_bank * (1.0 - recovery_funder); }
    /// True when g is affine in Theta.
    bool linear() const;
    /// gamma >= max(gamma_bank, gamma_investor).
    bool intensities_consistent() const;
};

/// Presets 1..5 with the reference intensities and spreads.
CsaSpec csa_preset(int index);

/// Valuation Q and collateral Gamma resolved from the CSA rules.
void resolve_csa(const CsaSpec& csa, double P, double theta, double& Q, double& Gamma);

/// TVA coefficient g(r, P, Theta).
double tva_coefficient(const CsaSpec& csa, double r, double P, double theta);

struct TvaSummary {
    std::vector<double> times;
    std::vector<double> mean;
    std::vector<double> p025;
    std::vector<double> p975;
    std::vector<double> se;
    double theta0 = 0.0;
    double theta0_se = 0.0;
    /// Estimates at reference states, step-major (empty without references).
    std::vector<double> reference;
    /// Full surface, step-major (only when requested).
    std::vector<double> surface;
};

struct TvaOptions {
    std::size_t neighbors = 3;
    unsigned threads = 0;
    bool keep_surface = false;
    /// Optional states on the same grid where each slice estimate is also evaluated.
    const PathGrid* reference = nullptr;
};

/// Backward regression Theta_l = E[Theta_{l+1} + h g(t_{l+1}) | X_{t_l}] with an
/// m-nearest-neighbor estimator, Theta_n = 0. Several CSAs share one
/// neighbor search per slice. `prices` is step-major like the path grid and
/// `paths` must carry the short rate.
std::vector<TvaSummary> solve_tva_backward(std::span<const CsaSpec> csas, const PathGrid& paths,
                                           std::span<const double> prices,
                                           const TvaOptions& options = {});

struct ForwardEstimate {
    double value = 0.0;
    double se = 0.0;
};

/// Theta_0 = E[sum_l h D_{t_l} g(t_l, Theta = 0)] with D the trapezoidal
/// discount at rate k = g(Theta = 0) - g(Theta = 1). Linear CSAs only.
ForwardEstimate tva_forward_mc(const CsaSpec& csa, const PathGrid& paths, std::span<const double> prices);

/// Percentile of a sample with linear interpolation between order statistics.
double percentile(std::vector<double> values, double q);

}  // namespace alm
