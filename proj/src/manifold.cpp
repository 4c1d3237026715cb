#include "alm/manifold.hpp"

#include "alm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>

namespace alm {

ManifoldSegment ManifoldSegment::line(Vector direction, double length) {
    ManifoldSegment s;
    s.kind = Kind::Line;
    s.direction = std::move(direction);
    s.length = length;
    return s;
}

ManifoldSegment ManifoldSegment::arc(std::size_t axis_from, std::size_t axis_to,
                                     double radius_from, double radius_to) {
    ManifoldSegment s;
    s.kind = Kind::Arc;
    s.axis_from = axis_from;
    s.axis_to = axis_to;
    s.radius_from = radius_from;
    s.radius_to = radius_to;
    return s;
}

double ManifoldSegment::parameter_length() const {
    if (kind == Kind::Line) return length;
    return 0.5 * std::numbers::pi * 0.5 * (radius_from + radius_to);
}

namespace {

Vector segment_point(const ManifoldSegment& seg, const Vector& start, double local) {
    if (seg.kind == ManifoldSegment::Kind::Line) return start + local * seg.direction;
    const double theta = local / (0.5 * (seg.radius_from + seg.radius_to));
    Vector p = start;
    p(static_cast<Eigen::Index>(seg.axis_to)) += seg.radius_to * (1.0 - std::cos(theta));
    p(static_cast<Eigen::Index>(seg.axis_from)) += seg.radius_from * std::sin(theta);
    return p;
}

// Derivative with respect to the outward parameter.
Vector segment_velocity(const ManifoldSegment& seg, std::size_t dim, double local) {
    if (seg.kind == ManifoldSegment::Kind::Line) return seg.direction;
    const double mean = 0.5 * (seg.radius_from + seg.radius_to);
    const double theta = local / mean;
    Vector v = Vector::Zero(static_cast<Eigen::Index>(dim));
    v(static_cast<Eigen::Index>(seg.axis_to)) += seg.radius_to * std::sin(theta) / mean;
    v(static_cast<Eigen::Index>(seg.axis_from)) += seg.radius_from * std::cos(theta) / mean;
    return v;
}

double angle_between(const Vector& a, const Vector& b) {
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) return std::numbers::pi;
    return std::acos(std::clamp(a.dot(b) / (na * nb), -1.0, 1.0));
}

}  // namespace

Manifold::Manifold(std::size_t dimension, std::vector<ManifoldSegment> segments, bool require_c1)
    : dim_(dimension), segments_(std::move(segments)) {
    if (dim_ == 0) throw ArgumentError("manifold dimension must be positive");
    if (segments_.empty()) throw ArgumentError("manifold needs at least one segment");
    const auto d = static_cast<Eigen::Index>(dim_);
    Vector at = Vector::Zero(d);
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        auto& seg = segments_[i];
        if (seg.kind == ManifoldSegment::Kind::Line) {
            if (seg.direction.size() != d) throw ArgumentError("line direction has wrong dimension");
            if ((seg.direction.array() < 0.0).any())
                throw ArgumentError("line directions must be nonnegative");
            const double n = seg.direction.norm();
            if (!(n > 0.0)) throw ArgumentError("line direction must be nonzero");
            seg.direction /= n;
            if (!(seg.length >= 0.0) || !std::isfinite(seg.length))
                throw ArgumentError("line length must be nonnegative");
        } else {
            if (seg.axis_from >= dim_ || seg.axis_to >= dim_ || seg.axis_from == seg.axis_to)
                throw ArgumentError("arc axes must be distinct coordinates");
            if (!(seg.radius_from > 0.0) || !(seg.radius_to > 0.0))
                throw ArgumentError("arc radii must be positive");
        }
        starts_.push_back(at);
        offsets_.push_back(total_);
        at = segment_point(seg, at, seg.parameter_length());
        total_ += seg.parameter_length();
    }
    if (require_c1 && max_joint_kink() > 1e-9)
        throw ArgumentError("manifold segments do not join with matching tangents");
}

double Manifold::max_joint_kink() const {
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < segments_.size(); ++i) {
        const Vector a = segment_velocity(segments_[i], dim_, segments_[i].parameter_length());
        const Vector b = segment_velocity(segments_[i + 1], dim_, 0.0);
        worst = std::max(worst, angle_between(a, b));
    }
    return worst;
}

void Manifold::locate(double s, std::size_t& seg, double& local) const {
    const double sigma = std::clamp(total_ - s, 0.0, total_);
    auto it = std::lower_bound(offsets_.begin(), offsets_.end(), sigma);
    // First segment whose start is >= sigma; the point belongs to the one before,
    // except at the origin.
    seg = it == offsets_.begin() ? 0 : static_cast<std::size_t>(it - offsets_.begin()) - 1;
    local = std::min(sigma - offsets_[seg], segments_[seg].parameter_length());
}

Vector Manifold::point(double s) const {
    std::size_t seg = 0;
    double local = 0.0;
    locate(s, seg, local);
    return segment_point(segments_[seg], starts_[seg], local);
}

Vector Manifold::tangent(double s) const {
    std::size_t seg = 0;
    double local = 0.0;
    locate(s, seg, local);
    return -segment_velocity(segments_[seg], dim_, local);
}

std::size_t Manifold::segment_at(double s) const {
    std::size_t seg = 0;
    double local = 0.0;
    locate(s, seg, local);
    return seg;
}

double Manifold::segment_lo(std::size_t i) const {
    return total_ - (offsets_.at(i) + segments_.at(i).parameter_length());
}

double Manifold::segment_hi(std::size_t i) const { return total_ - offsets_.at(i); }

double log_initial_martingale(const AffineModelSpec& spec, const Vector& u) {
    RiccatiOptions options;
    options.gradients = false;
    const FlowSolution flow = solve_riccati(spec, spec.horizon(), u, options);
    return flow.phi + flow.psi.dot(spec.initial_state());
}

namespace {

// Largest-size search: level(size) is increasing and may throw DomainError
// once the flow leaves the moment domain.
double solve_size(const std::function<double(double)>& level, double target) {
    auto below = [&](double size) {
        try {
            return level(size) < target;
        } catch (const DomainError&) {
            return false;
        }
    };
    double lo = 0.0;
    double hi = 1e-2;
    while (below(hi)) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e6) throw FitError("manifold level " + std::to_string(target) + " is unreachable");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-14 * (1.0 + hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (below(mid) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

Manifold anchored_manifold(const AffineModelSpec& spec, std::span<const double> levels) {
    const std::size_t d = spec.dimension();
    if (levels.size() != 2 * (d - 1) + 1)
        throw ArgumentError("anchored manifold needs " + std::to_string(2 * (d - 1) + 1) + " levels");
    for (std::size_t i = 0; i < levels.size(); ++i)
        if (!(levels[i] > (i ? levels[i - 1] : 0.0)))
            throw ArgumentError("anchored manifold levels must increase from 0");

    const auto di = static_cast<Eigen::Index>(d);
    std::vector<ManifoldSegment> segments;
    Vector at = Vector::Zero(di);
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const std::size_t axis = d - 1 - i / 2;
        if (i % 2 == 0) {
            const Vector e = Vector::Unit(di, static_cast<Eigen::Index>(axis));
            const double len = solve_size(
                [&](double l) { return log_initial_martingale(spec, at + l * e); }, levels[i]);
            segments.push_back(ManifoldSegment::line(e, len));
            at += len * e;
        } else {
            const auto from = static_cast<Eigen::Index>(axis);
            const auto to = static_cast<Eigen::Index>(axis - 1);
            const double r = solve_size(
                [&](double a) {
                    Vector end = at;
                    end(from) += a;
                    end(to) += a;
                    return log_initial_martingale(spec, end);
                },
                levels[i]);
            segments.push_back(ManifoldSegment::arc(axis, axis - 1, r, r));
            at(from) += r;
            at(to) += r;
        }
    }
    return Manifold(d, std::move(segments));
}

}  // namespace alm
