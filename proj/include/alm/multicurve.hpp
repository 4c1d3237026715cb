#pragma once

#include "alm/affine.hpp"
#include "alm/manifold.hpp"
#include "alm/tenor.hpp"

#include <memory>
#include <span>
#include <vector>

namespace alm {

/// M_t^u = exp(phi_{T_N - t}(u) + <psi_{T_N - t}(u), x_t>).
double martingale_value(const AffineModelSpec& spec, const Vector& u, double t, const Vector& x);
double log_martingale_value(const AffineModelSpec& spec, const Vector& u, double t, const Vector& x);

/// Parameter sequences of the discrete-tenor model, all on one manifold.
struct CalibratedSequences {
    /// u_0, ..., u_N on the master grid; u_N = 0.
    std::vector<Vector> u;
    /// Manifold parameter of each u_l.
    std::vector<double> u_param;
    /// v[x][k] = v^x_k for k = 0..N^x.
    std::vector<std::vector<Vector>> v;
    std::vector<std::vector<double>> v_param;
    std::shared_ptr<const Manifold> manifold;

    /// u^x_k = u at the master index of T^x_k.
    const Vector& u_tenor(const TenorStructure& tenors, std::size_t x, int k) const {
        return u.at(static_cast<std::size_t>(tenors.master_index(x, k)));
    }
};

/// Fits u_l so that M_0^{u_l} = B(0, T_l) / B(0, T_N), walking the manifold
/// from the origin outward with a bisection in the manifold parameter.
/// Throws FitError naming the first maturity whose target is out of reach.
CalibratedSequences fit_u_sequence(const AffineModelSpec& spec, const TenorStructure& tenors,
                                   const InitialTermStructure& init,
                                   std::shared_ptr<const Manifold> manifold);

/// Adds v^x_k with M_0^{v^x_k} = (1 + delta_x L^x_{k+1}(0)) M_0^{u^x_{k+1}}, placed
/// on the manifold at or beyond u^x_k. The last entry v^x_{N^x} repeats the
/// final ratio: M_0^{v_N} = (1 + delta L_N(0)) / (1 + delta F_N(0)).
void fit_v_sequences(const AffineModelSpec& spec, const TenorStructure& tenors,
                     const InitialTermStructure& init, CalibratedSequences& seq);

CalibratedSequences fit_sequences(const AffineModelSpec& spec, const TenorStructure& tenors,
                                  const InitialTermStructure& init,
                                  std::shared_ptr<const Manifold> manifold);

/// Levels log(B(0, T_l) / B(0, T_N)) for l = 0..N.
std::vector<double> log_bond_ratios(const InitialTermStructure& init);

/// Largest level log M_0 any u or v fit has to reach.
double max_fit_level(const TenorStructure& tenors, const InitialTermStructure& init);

/// Levels for anchored_manifold from knot indices k_1 < ... < k_{2(d-1)}:
/// the level at k_{2(d-1)}, ..., k_1, then max_fit_level + margin.
std::vector<double> anchor_levels(const TenorStructure& tenors, const InitialTermStructure& init,
                                  std::span<const int> knots, double margin);

/// Discrete-tenor model: rates implied by the martingales M^u, M^v.
class MultiCurveModel {
public:
    MultiCurveModel(AffineModelSpec spec, TenorStructure tenors, CalibratedSequences seq);

    const AffineModelSpec& spec() const { return spec_; }
    const TenorStructure& tenors() const { return tenors_; }
    const CalibratedSequences& sequences() const { return seq_; }

    double ois_forward_rate(std::size_t x, int k, double t, const Vector& xt) const;
    double libor_rate(std::size_t x, int k, double t, const Vector& xt) const;
    double spread(std::size_t x, int k, double t, const Vector& xt) const;

private:
    void check(std::size_t x, int k, double t) const;

    AffineModelSpec spec_;
    TenorStructure tenors_;
    CalibratedSequences seq_;
};

/// Flow of X under the forward measure P^x_k, started at time 0:
/// E^k[exp <w, X_t>] = exp(phi + <psi, x0>).
struct ForwardMeasureFlow {
    double phi = 0.0;
    Vector psi;
};

ForwardMeasureFlow forward_measure_flow(const AffineModelSpec& spec, const Vector& u_k, double t,
                                        const Vector& w);

/// phi_{T_N - t}(u) and psi_{T_N - t}(u) for several vectors u on a set of
/// calendar times, each vector integrated once.
class FlowTable {
public:
    FlowTable(const AffineModelSpec& spec, std::span<const Vector> vectors,
              std::span<const double> times);

    std::size_t vector_count() const { return phi_.size(); }
    std::size_t time_count() const { return times_.size(); }
    double phi(std::size_t v, std::size_t i) const { return phi_[v][i]; }
    const Vector& psi(std::size_t v, std::size_t i) const { return psi_[v][i]; }
    double log_martingale(std::size_t v, std::size_t i, const double* x) const;

private:
    std::vector<double> times_;
    std::vector<std::vector<double>> phi_;
    std::vector<std::vector<Vector>> psi_;
};

}  // namespace alm
