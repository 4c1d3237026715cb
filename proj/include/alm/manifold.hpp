#pragma once

#include "alm/affine.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace alm {

/// One piece of the manifold, described in the outward direction
/// (away from the origin).
struct ManifoldSegment {
    enum class Kind { Line, Arc };
    Kind kind = Kind::Line;
    /// Line: unit direction with nonnegative entries; length in parameter units.
    Vector direction;
    double length = 0.0;
    /// Arc: quarter ellipse turning from axis_from to axis_to with the given
    /// semi-axes. The parameter advances by theta * (radius_from + radius_to) / 2.
    std::size_t axis_from = 0;
    std::size_t axis_to = 0;
    double radius_from = 0.0;
    double radius_to = 0.0;

    static ManifoldSegment line(Vector direction, double length);
    static ManifoldSegment arc(std::size_t axis_from, std::size_t axis_to, double radius_from,
                               double radius_to);
    double parameter_length() const;
};

/// Piecewise curve g: [0, s_max] -> R^d_{>=0} built from segments laid out
/// from the origin outward. The public parameter runs the other way:
/// g(0) is the far end and g(s_max) = 0, so g is componentwise
/// non-increasing in s.
class Manifold {
public:
    Manifold(std::size_t dimension, std::vector<ManifoldSegment> segments,
             bool require_c1 = true);

    std::size_t dimension() const { return dim_; }
    double length() const { return total_; }
    const std::vector<ManifoldSegment>& segments() const { return segments_; }

    Vector point(double s) const;
    /// dg/ds (points toward the origin).
    Vector tangent(double s) const;

    /// Segment containing s; ties at joints go to the segment nearer the origin.
    std::size_t segment_at(double s) const;
    /// Public-parameter interval [lo, hi] covered by segment i.
    double segment_lo(std::size_t i) const;
    double segment_hi(std::size_t i) const;
    bool curved_at(double s) const { return segments_[segment_at(s)].kind == ManifoldSegment::Kind::Arc; }

    /// Maximum angle between adjacent tangents (radians).
    double max_joint_kink() const;

private:
    void locate(double s, std::size_t& seg, double& local) const;

    std::size_t dim_;
    std::vector<ManifoldSegment> segments_;
    std::vector<Vector> starts_;     // outward start point of each segment
    std::vector<double> offsets_;    // internal parameter at each segment start
    double total_ = 0.0;
};

/// Manifold built through prescribed levels of log M_0 = phi_{T}(u) + <psi_T(u), x0>:
/// a line along e_{d-1} from the origin, then alternating circular arcs and
/// axis lines e_{d-2}, ..., e_0. `levels` has 2(d-1) + 1 increasing entries:
/// the level reached at the end of each segment, the last one for the
/// outermost line.
Manifold anchored_manifold(const AffineModelSpec& spec, std::span<const double> levels);

/// log M_0^u = phi_T(u) + <psi_T(u), x0> at the model horizon.
double log_initial_martingale(const AffineModelSpec& spec, const Vector& u);

}  // namespace alm
