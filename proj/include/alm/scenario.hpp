#pragma once

#include "alm/affine.hpp"
#include "alm/forward_curve.hpp"
#include "alm/interpolation.hpp"
#include "alm/tenor.hpp"
#include "alm/xva.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace alm {

struct SimulationSettings {
    std::size_t paths = 100000;
    std::size_t steps = 200;
    std::uint64_t seed = 20240917;
    int substeps = 4;
    std::size_t neighbors = 3;
    /// Paths written out individually per kind.
    std::size_t sample_paths = 20;
    /// Common reference states for the interpolator comparison.
    std::size_t compare_paths = 10000;
    unsigned threads = 0;
};

struct SwapSettings {
    std::string short_tenor = "3M";
    std::string long_tenor = "6M";
    double start = 0.0;
    double end = 10.0;
    /// Use the fair spread at inception instead of `spread`.
    bool fair = true;
    double spread = 0.0;
};

/// Everything a run needs, fully resolved (external CSVs already read).
struct Scenario {
    std::string name = "scenario";
    std::vector<CirComponent> components;
    double horizon = 10.0;
    int intervals = 40;
    std::vector<Tenor> tenors;
    InitialTermStructure initial;
    std::optional<ForwardCurve> forward_curve;
    /// Manifold knot indices k_1 < ... < k_{2(d-1)}.
    std::vector<int> knots;
    double manifold_margin = 0.25;
    std::vector<InterpolatorKind> interpolators;
    SwapSettings swap;
    std::vector<CsaSpec> csas;
    SimulationSettings simulation;
    std::string output_dir = "alm_out";

    AffineModelSpec model() const;
    TenorStructure tenor_structure() const;
    /// Throws ArgumentError describing the first problem.
    void validate() const;
};

/// Shipped synthetic scenario: three square-root factors, 10y horizon,
/// 40 quarterly master dates, 3M and 6M tenors, a 3M/6M basis swap and
/// five CSAs.
Scenario builtin_scenario();

/// Loads a scenario JSON file. CSV references are resolved relative to
/// the file. A run manifest is accepted too (its embedded scenario is used).
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& json_text, const std::string& base_dir = ".");

/// Self-contained JSON of a resolved scenario (inline data, stable key order).
std::string scenario_to_json(const Scenario& scenario, int indent = 2);

}  // namespace alm
