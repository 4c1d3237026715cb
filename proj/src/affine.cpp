#include "alm/affine.hpp"

#include "alm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace alm {

namespace {

void require_dimension(const Vector& u, std::size_t d, const char* what) {
    if (static_cast<std::size_t>(u.size()) != d)
        throw ArgumentError(std::string(what) + ": expected dimension " + std::to_string(d) +
                            ", got " + std::to_string(u.size()));
}

}  // namespace

AffineModelSpec AffineModelSpec::independent_cir(std::vector<CirComponent> components,
                                                 double horizon) {
    if (components.empty()) throw ArgumentError("model needs at least one component");
    const auto d = static_cast<Eigen::Index>(components.size());
    AffineModelSpec spec;
    spec.b_ = Vector::Zero(d);
    spec.beta_ = Matrix::Zero(d, d);
    spec.alpha_.assign(components.size(), Matrix::Zero(d, d));
    for (Eigen::Index i = 0; i < d; ++i) {
        const auto& c = components[static_cast<std::size_t>(i)];
        if (!(c.speed > 0.0) || !(c.level >= 0.0) || !(c.vol >= 0.0) || !std::isfinite(c.speed) ||
            !std::isfinite(c.level) || !std::isfinite(c.vol))
            throw ArgumentError("component " + std::to_string(i) +
                                ": need speed > 0, level >= 0, vol >= 0");
        spec.b_(i) = c.speed * c.level;
        spec.beta_(i, i) = -c.speed;
        spec.alpha_[static_cast<std::size_t>(i)](i, i) = c.vol * c.vol;
    }
    spec.x0_ = Vector::Ones(d);
    spec.horizon_ = horizon;
    spec.independent_ = true;
    spec.cir_ = std::move(components);
    spec.validate();
    return spec;
}

AffineModelSpec AffineModelSpec::from_admissible(Vector b, Matrix beta, std::vector<Matrix> alpha,
                                                 double horizon) {
    AffineModelSpec spec;
    spec.b_ = std::move(b);
    spec.beta_ = std::move(beta);
    spec.alpha_ = std::move(alpha);
    spec.x0_ = Vector::Ones(spec.b_.size());
    spec.horizon_ = horizon;
    spec.validate();

    const auto d = spec.b_.size();
    bool diagonal = true;
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index k = 0; k < d; ++k)
            if (i != k && spec.beta_(k, i) != 0.0) diagonal = false;
    spec.independent_ = diagonal;
    if (diagonal) {
        for (Eigen::Index i = 0; i < d; ++i) {
            const double speed = -spec.beta_(i, i);
            const double vol = std::sqrt(spec.alpha_[static_cast<std::size_t>(i)](i, i));
            const double level = speed > 0.0 ? spec.b_(i) / speed : 0.0;
            spec.cir_.push_back({speed, level, vol});
        }
    }
    return spec;
}

void AffineModelSpec::validate() const {
    const auto d = b_.size();
    if (d == 0) throw ArgumentError("model needs at least one component");
    if (!(horizon_ > 0.0) || !std::isfinite(horizon_))
        throw ArgumentError("horizon must be positive and finite");
    if (beta_.rows() != d || beta_.cols() != d)
        throw ArgumentError("drift matrix must be d x d");
    if (alpha_.size() != static_cast<std::size_t>(d))
        throw ArgumentError("need one diffusion matrix per component");
    for (Eigen::Index i = 0; i < d; ++i) {
        if (!(b_(i) >= 0.0) || !std::isfinite(b_(i)))
            throw ArgumentError("constant drift must be nonnegative");
        for (Eigen::Index k = 0; k < d; ++k) {
            if (!std::isfinite(beta_(k, i))) throw ArgumentError("drift matrix not finite");
            if (k != i && beta_(k, i) < 0.0)
                throw ArgumentError("inadmissible drift: negative off-diagonal entry");
        }
        const Matrix& a = alpha_[static_cast<std::size_t>(i)];
        if (a.rows() != d || a.cols() != d) throw ArgumentError("diffusion matrix must be d x d");
        for (Eigen::Index r = 0; r < d; ++r)
            for (Eigen::Index c = 0; c < d; ++c) {
                if (!std::isfinite(a(r, c))) throw ArgumentError("diffusion matrix not finite");
                if ((r != i || c != i) && a(r, c) != 0.0)
                    throw ArgumentError("inadmissible diffusion: support outside coordinate " +
                                        std::to_string(i));
            }
        if (a(i, i) < 0.0) throw ArgumentError("diffusion must be positive semidefinite");
    }
}

const std::vector<CirComponent>& AffineModelSpec::cir_components() const {
    if (!independent_) throw UnsupportedError("model components are not independent");
    return cir_;
}

AffineModelSpec AffineModelSpec::with_horizon(double horizon) const {
    AffineModelSpec copy = *this;
    copy.horizon_ = horizon;
    copy.validate();
    return copy;
}

Characteristics functional_characteristics(const AffineModelSpec& spec, const Vector& u) {
    const auto d = spec.dimension();
    require_dimension(u, d, "functional_characteristics");
    Characteristics out;
    out.F = spec.drift_constant().dot(u);
    out.R = spec.drift_linear().transpose() * u;
    for (std::size_t i = 0; i < d; ++i)
        out.R(static_cast<Eigen::Index>(i)) += 0.5 * u.dot(spec.diffusion()[i] * u);
    return out;
}

Matrix characteristics_jacobian(const AffineModelSpec& spec, const Vector& u) {
    const auto d = spec.dimension();
    require_dimension(u, d, "characteristics_jacobian");
    Matrix jac = spec.drift_linear().transpose();
    for (std::size_t i = 0; i < d; ++i)
        jac.row(static_cast<Eigen::Index>(i)) += (spec.diffusion()[i] * u).transpose();
    return jac;
}

double HomogeneousCharacteristics::F(double, const Vector& u) const {
    return spec_.drift_constant().dot(u);
}

Vector HomogeneousCharacteristics::R(double, const Vector& u) const {
    return functional_characteristics(spec_, u).R;
}

PiecewiseConstantWeight::PiecewiseConstantWeight(std::vector<double> knots,
                                                 std::vector<Vector> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
    if (values_.empty() || knots_.size() != values_.size() + 1)
        throw ArgumentError("weight table needs n values and n + 1 knots");
    for (std::size_t j = 0; j + 1 < knots_.size(); ++j)
        if (!(knots_[j + 1] > knots_[j])) throw ArgumentError("weight knots must increase");
    const auto d = values_.front().size();
    for (const auto& v : values_) {
        if (v.size() != d) throw ArgumentError("weight values differ in dimension");
        for (Eigen::Index i = 0; i < d; ++i)
            if (!(v(i) >= 0.0) || !std::isfinite(v(i)))
                throw ArgumentError("weight must be nonnegative and finite");
    }
}

PiecewiseConstantWeight PiecewiseConstantWeight::constant(double horizon, const Vector& value) {
    return PiecewiseConstantWeight({0.0, horizon}, {value});
}

Vector PiecewiseConstantWeight::operator()(double t) const {
    auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    std::size_t j = it == knots_.begin() ? 0 : static_cast<std::size_t>(it - knots_.begin()) - 1;
    j = std::min(j, values_.size() - 1);
    return values_[j];
}

std::size_t PiecewiseConstantWeight::dimension() const {
    return static_cast<std::size_t>(values_.front().size());
}

ExtendedCharacteristics::ExtendedCharacteristics(AffineModelSpec spec,
                                                 PiecewiseConstantWeight weight)
    : spec_(std::move(spec)), weight_(std::move(weight)) {
    if (weight_.dimension() != spec_.dimension())
        throw ArgumentError("weight dimension differs from model dimension");
}

double ExtendedCharacteristics::F(double, const Vector& u) const {
    const auto d = static_cast<Eigen::Index>(spec_.dimension());
    require_dimension(u, 2 * spec_.dimension(), "extended F");
    return spec_.drift_constant().dot(u.head(d));
}

Vector ExtendedCharacteristics::R(double time, const Vector& u) const {
    const auto d = static_cast<Eigen::Index>(spec_.dimension());
    require_dimension(u, 2 * spec_.dimension(), "extended R");
    Vector out = Vector::Zero(2 * d);
    out.head(d) = functional_characteristics(spec_, u.head(d)).R +
                  weight_(time).cwiseProduct(u.tail(d));
    return out;
}

ExtendedCharacteristics extended_characteristics(const AffineModelSpec& spec,
                                                 const PiecewiseConstantWeight& weight) {
    return ExtendedCharacteristics(spec, weight);
}

}  // namespace alm
