#pragma once

#include "alm/multicurve.hpp"
#include "alm/scenario.hpp"
#include "alm/term_structure.hpp"

#include <map>
#include <memory>

namespace fixture {

/// The shipped synthetic scenario, fitted once per process.
struct Fitted {
    alm::Scenario scenario;
    alm::AffineModelSpec model;
    alm::TenorStructure tenors;
    alm::CalibratedSequences seq;

    std::shared_ptr<const alm::InterpolatingFunction> interpolator(alm::InterpolatorKind kind) const {
        auto& slot = cache_[kind];
        if (!slot)
            slot = alm::build_interpolator(kind, model, tenors, seq, &*scenario.forward_curve,
                                           &scenario.initial.discount);
        return slot;
    }

    alm::ContinuousTenorModel continuous(alm::InterpolatorKind kind) const {
        return alm::ContinuousTenorModel(model, interpolator(kind));
    }

    mutable std::map<alm::InterpolatorKind, std::shared_ptr<const alm::InterpolatingFunction>> cache_;
};

inline Fitted make_fitted() {
    alm::Scenario sc = alm::builtin_scenario();
    alm::AffineModelSpec model = sc.model();
    alm::TenorStructure tenors = sc.tenor_structure();
    const auto levels = alm::anchor_levels(tenors, sc.initial, sc.knots, sc.manifold_margin);
    auto manifold = std::make_shared<const alm::Manifold>(alm::anchored_manifold(model, levels));
    alm::CalibratedSequences seq = alm::fit_sequences(model, tenors, sc.initial, manifold);
    return Fitted{std::move(sc), std::move(model), std::move(tenors), std::move(seq)};
}

inline const Fitted& synthetic() {
    static const Fitted f = make_fitted();
    return f;
}

}  // namespace fixture
