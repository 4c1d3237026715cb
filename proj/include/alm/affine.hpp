#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <vector>

namespace alm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// One square-root diffusion dX = speed (level - X) dt + vol sqrt(X) dW.
struct CirComponent {
    double speed = 0.0;
    double level = 0.0;
    double vol = 0.0;
};

/// Admissible parameters of an affine process on the nonnegative orthant.
///
/// Drift is b + sum_i beta_i x_i (beta_i is column i of drift_linear()),
/// diffusion is sum_i alpha_i x_i. The jump measures m and mu_i are
/// identically zero for every model this library builds, so no truncation
/// function is needed. The process starts at the canonical state (1, ..., 1).
class AffineModelSpec {
public:
    /// Independent square-root diffusions, the shipped catalog.
    static AffineModelSpec independent_cir(std::vector<CirComponent> components, double horizon);

    /// General admissible diffusion parameters. Throws ArgumentError when
    /// b has a negative entry, beta_i has a negative off-diagonal entry, or
    /// alpha_i is not a nonnegative multiple of e_i e_i^T.
    static AffineModelSpec from_admissible(Vector b, Matrix beta, std::vector<Matrix> alpha,
                                           double horizon);

    std::size_t dimension() const { return static_cast<std::size_t>(b_.size()); }
    double horizon() const { return horizon_; }
    const Vector& initial_state() const { return x0_; }

    const Vector& drift_constant() const { return b_; }
    const Matrix& drift_linear() const { return beta_; }
    const std::vector<Matrix>& diffusion() const { return alpha_; }

    /// Diagonal diffusion and diagonal drift: the components are independent.
    bool independent_components() const { return independent_; }

    /// Speed/level/vol view of the model; only valid for independent components.
    const std::vector<CirComponent>& cir_components() const;

    bool has_jumps() const { return false; }

    /// Copy with a different horizon (same parameters).
    AffineModelSpec with_horizon(double horizon) const;

private:
    AffineModelSpec() = default;
    void validate() const;

    Vector b_;
    Matrix beta_;
    std::vector<Matrix> alpha_;
    Vector x0_;
    double horizon_ = 0.0;
    bool independent_ = false;
    std::vector<CirComponent> cir_;
};

/// F(u) and R(u) of the generalized Riccati equations.
struct Characteristics {
    double F = 0.0;
    Vector R;
};

Characteristics functional_characteristics(const AffineModelSpec& spec, const Vector& u);

/// Jacobian of R at u: entry (i, k) is dR_i/du_k.
Matrix characteristics_jacobian(const AffineModelSpec& spec, const Vector& u);

struct RiccatiOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    /// Declare blow-up when any |psi_i| exceeds this bound.
    double blowup_bound = 1e8;
    /// Integrate the variational equations for grad phi and jac psi.
    bool gradients = true;
    std::size_t max_steps = 1'000'000;
};

/// phi_t(u), psi_t(u) and their u-gradients.
struct FlowSolution {
    double time = 0.0;
    Vector u;
    double phi = 0.0;
    Vector psi;
    Vector grad_phi;  // empty when gradients were not requested
    Matrix jac_psi;   // (i, j) = d psi_i / d u_j
};

/// Solves the generalized Riccati equations up to lag t.
/// Throws DomainError when psi blows up before t.
FlowSolution solve_riccati(const AffineModelSpec& spec, double t, const Vector& u,
                           const RiccatiOptions& options = {});

/// Flow at every lag in `lags` (nondecreasing) from one integration.
std::vector<FlowSolution> solve_riccati_path(const AffineModelSpec& spec,
                                             std::span<const double> lags, const Vector& u,
                                             const RiccatiOptions& options = {});

/// E_x[exp <u, X_t>] = exp(phi_t(u) + <psi_t(u), x>).
double mgf(const AffineModelSpec& spec, double t, const Vector& u, const Vector& x);

/// Axis bounds of the exponential-moment domain at a horizon.
struct MomentDomain {
    double horizon = 0.0;
    /// Largest u_i along e_i without blow-up; +inf when none was found.
    Vector upper;

    bool contains(const Vector& u) const;
};

MomentDomain moment_domain(const AffineModelSpec& spec, double horizon,
                           double resolution = 1e-6);

/// Time-dependent functional characteristics F(s, u), R(s, u).
class TimeDependentCharacteristics {
public:
    virtual ~TimeDependentCharacteristics() = default;
    virtual std::size_t dimension() const = 0;
    virtual double F(double time, const Vector& u) const = 0;
    virtual Vector R(double time, const Vector& u) const = 0;
    /// Times where the characteristics may jump; integration restarts there.
    virtual std::vector<double> breakpoints() const { return {}; }
};

/// Time-constant characteristics of a homogeneous model.
class HomogeneousCharacteristics final : public TimeDependentCharacteristics {
public:
    explicit HomogeneousCharacteristics(AffineModelSpec spec) : spec_(std::move(spec)) {}
    std::size_t dimension() const override { return spec_.dimension(); }
    double F(double, const Vector& u) const override;
    Vector R(double, const Vector& u) const override;

private:
    AffineModelSpec spec_;
};

struct InhomogeneousFlow {
    double phi = 0.0;
    Vector psi;
};

/// phi_{s,t}(u), psi_{s,t}(u) solved backward from phi_{t,t} = 0, psi_{t,t} = u.
InhomogeneousFlow solve_riccati_inhomogeneous(const TimeDependentCharacteristics& chars,
                                              double s, double t, const Vector& u,
                                              const RiccatiOptions& options = {});

/// Piecewise-constant nonnegative weight theta on a time grid:
/// theta(t) = values[j] for knots[j] <= t < knots[j + 1].
class PiecewiseConstantWeight {
public:
    PiecewiseConstantWeight(std::vector<double> knots, std::vector<Vector> values);
    static PiecewiseConstantWeight constant(double horizon, const Vector& value);

    Vector operator()(double t) const;
    const std::vector<double>& knots() const { return knots_; }
    std::size_t dimension() const;

private:
    std::vector<double> knots_;
    std::vector<Vector> values_;
};

/// Characteristics of the doubled state (X, Y), Y_t = int_0^t theta_s o X_s ds:
/// F~(t, uX, uY) = F(uX), R~(t, uX, uY) = (R(uX) + theta_t o uY, 0).
class ExtendedCharacteristics final : public TimeDependentCharacteristics {
public:
    ExtendedCharacteristics(AffineModelSpec spec, PiecewiseConstantWeight weight);

    std::size_t dimension() const override { return 2 * spec_.dimension(); }
    double F(double time, const Vector& u) const override;
    Vector R(double time, const Vector& u) const override;
    std::vector<double> breakpoints() const override { return weight_.knots(); }

    const AffineModelSpec& base() const { return spec_; }
    const PiecewiseConstantWeight& weight() const { return weight_; }

private:
    AffineModelSpec spec_;
    PiecewiseConstantWeight weight_;
};

ExtendedCharacteristics extended_characteristics(const AffineModelSpec& spec,
                                                 const PiecewiseConstantWeight& weight);

}  // namespace alm
