#pragma once

#include "alm/scenario.hpp"

#include <string>
#include <vector>

namespace alm {

inline constexpr const char* kVersion = "0.1.0";

/// Pipeline stages; each one runs everything before it.
enum class Stage { Fit, Interpolate, Simulate, Price, Tva, Run };

std::string to_string(Stage stage);
Stage parse_stage(const std::string& text);

struct KindResult {
    InterpolatorKind kind = InterpolatorKind::IF2;
    std::vector<std::string> csa_names;
    std::vector<double> theta0;
    std::vector<double> theta0_se;
    std::vector<std::string> warnings;
};

struct RunResult {
    std::string directory;
    /// Files written, relative to the directory, in write order.
    std::vector<std::string> files;
    double fair_spread = 0.0;
    double spread = 0.0;
    std::vector<KindResult> kinds;
};

/// Runs the scenario up to `stage` and writes CSVs and manifest.json into
/// scenario.output_dir. Errors carry the stage name; files written by the
/// failed call are removed before the error propagates.
RunResult run_scenario(const Scenario& scenario, Stage stage = Stage::Run);

/// Mean absolute differences per master interval for one pair of kinds.
struct IntervalComparison {
    int interval = 0;
    double t_lo = 0.0;
    double t_hi = 0.0;
    /// More than one component of u moves over the interval.
    bool curved = false;
    double price_diff = 0.0;
    /// One entry per CSA.
    std::vector<double> tva_diff;
    /// Price difference ~ 0 while the TVA difference is not, per CSA.
    std::vector<bool> flagged;
};

struct PairComparison {
    std::string a;
    std::string b;
    std::vector<std::string> csas;
    std::vector<IntervalComparison> intervals;
};

struct ComparisonSummary {
    std::vector<PairComparison> pairs;
};

/// Reads the difference CSVs of a bundle written by a full run, writes
/// compare.csv and returns the summary. Throws ComparisonError when the
/// bundle has fewer than two kinds or the grids disagree.
ComparisonSummary compare_interpolators(const std::string& bundle_dir);

/// Checks manifest.json and every CSV it lists. Returns the problems found.
std::vector<std::string> validate_bundle(const std::string& bundle_dir);

}  // namespace alm
