#pragma once

#include "alm/errors.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <vector>

namespace alm::detail {

using OdeState = std::vector<double>;

struct OdeSettings {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    double blowup_bound = 1e8;
    std::size_t max_steps = 1'000'000;
    // Entries [watch_begin, watch_end) are checked against blowup_bound.
    std::size_t watch_begin = 0;
    std::size_t watch_end = 0;
};

inline bool blown_up(const OdeState& y, const OdeSettings& s) {
    for (double v : y)
        if (!std::isfinite(v)) return true;
    for (std::size_t i = s.watch_begin; i < s.watch_end; ++i)
        if (std::abs(y[i]) > s.blowup_bound) return true;
    return false;
}

[[noreturn]] inline void throw_blowup(double t) {
    std::ostringstream os;
    os.precision(10);
    os << "Riccati flow left the moment domain at lag " << t;
    throw DomainError(os.str(), t);
}

/// Integrates sys from t_from to exactly t_to with adaptive Dormand-Prince 5(4).
/// `dt` carries the step-size suggestion between calls.
template <class System>
void advance(System&& sys, OdeState& y, double t_from, double t_to, double& dt,
             const OdeSettings& settings) {
    namespace odeint = boost::numeric::odeint;
    if (!(t_to > t_from)) return;
    auto stepper = odeint::make_controlled(settings.abs_tol, settings.rel_tol,
                                           odeint::runge_kutta_dopri5<OdeState>());
    double t = t_from;
    if (!(dt > 0.0)) dt = std::min(1e-2, 0.1 * (t_to - t_from));
    std::size_t steps = 0;
    while (t < t_to) {
        const double remaining = t_to - t;
        if (remaining <= 1e-15 * std::max(1.0, std::abs(t_to))) break;
        double h = std::min(dt, remaining);
        const bool clamped = h < dt;
        if (h < 1e-14 * std::max(1.0, std::abs(t))) throw_blowup(t);
        const auto result = stepper.try_step(sys, y, t, h);
        if (result == odeint::success) {
            if (blown_up(y, settings)) throw_blowup(t);
            if (!clamped || h > dt) dt = h;
        } else {
            dt = h;
        }
        if (++steps > settings.max_steps) throw_blowup(t);
    }
}

}  // namespace alm::detail
