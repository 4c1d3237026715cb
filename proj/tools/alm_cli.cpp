#include "alm/alm.h"

#include <CLI11.hpp>

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

namespace {

struct Flags {
    std::string scenario;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<std::size_t> paths;
    std::optional<std::size_t> steps;
    std::vector<std::string> interp;
};

int report(alm_status st, const char* what) {
    if (st == ALM_OK) return 0;
    std::fprintf(stderr, "alm: %s failed (%s): %s\n", what, alm_status_name(st), alm_last_error());
    return static_cast<int>(st);
}

std::string read_string(alm_status (*get)(const alm_session*, char*, size_t, size_t*), const alm_session* s) {
    size_t needed = 0;
    get(s, nullptr, 0, &needed);
    std::string text(needed, '\0');
    if (get(s, text.data(), text.size(), &needed) != ALM_OK) return {};
    text.resize(needed ? needed - 1 : 0);
    return text;
}

// Opens the session and applies the command-line overrides.
int open_session(const Flags& f, alm_session** session) {
    if (int rc = report(alm_session_open(f.scenario.empty() ? nullptr : f.scenario.c_str(), session), "loading scenario"))
        return rc;
    alm_session* s = *session;
    if (f.seed)
        if (int rc = report(alm_session_set_seed(s, *f.seed), "--seed")) return rc;
    if (f.paths)
        if (int rc = report(alm_session_set_paths(s, *f.paths), "--paths")) return rc;
    if (f.steps)
        if (int rc = report(alm_session_set_steps(s, *f.steps), "--steps")) return rc;
    if (!f.out.empty())
        if (int rc = report(alm_session_set_output(s, f.out.c_str()), "--out")) return rc;
    if (!f.interp.empty()) {
        std::string joined;
        for (const auto& k : f.interp) joined += (joined.empty() ? "" : ",") + k;
        if (int rc = report(alm_session_set_interpolators(s, joined.c_str()), "--interp")) return rc;
    }
    return 0;
}

int run_stage(const Flags& f, alm_stage stage) {
    alm_session* s = nullptr;
    int rc = open_session(f, &s);
    if (rc == 0) rc = report(alm_session_run(s, stage), "run");
    if (rc == 0) std::printf("%s\n", read_string(alm_session_report_json, s).c_str());
    alm_session_close(s);
    return rc;
}

int compare(const Flags& f) {
    std::string dir = f.out;
    if (dir.empty()) {
        alm_session* s = nullptr;
        int rc = open_session(f, &s);
        if (rc == 0) dir = read_string(alm_session_output, s);
        alm_session_close(s);
        if (rc) return rc;
    }
    size_t flagged = 0;
    if (int rc = report(alm_compare_bundle(dir.c_str(), &flagged), "compare")) return rc;
    std::printf("wrote %s/compare.csv; %zu interval(s) with equal prices but different TVA\n", dir.c_str(), flagged);
    return 0;
}

int validate(const Flags& f) {
    if (f.out.empty()) {
        std::fprintf(stderr, "alm: validate needs --out <bundle directory>\n");
        return static_cast<int>(ALM_ERR_ARGUMENT);
    }
    size_t problems = 0;
    if (int rc = report(alm_validate_bundle(f.out.c_str(), &problems), "validate")) return rc;
    if (problems) {
        std::fprintf(stderr, "%s\n", alm_last_error());
        return static_cast<int>(ALM_ERR_IO);
    }
    std::printf("bundle %s is valid\n", f.out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Affine LIBOR models: fitting, simulation, basis swaps and TVA"};
    app.set_version_flag("--version", std::string(alm_version()));
    app.require_subcommand(1);

    Flags flags;
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--scenario", flags.scenario, "Scenario JSON (default: built-in synthetic scenario)")
            ->check(CLI::ExistingFile);
        cmd->add_option("--seed", flags.seed, "Random seed");
        cmd->add_option("--out", flags.out, "Output directory");
        cmd->add_option("--paths", flags.paths, "Number of simulated paths")->check(CLI::PositiveNumber);
        cmd->add_option("--steps", flags.steps, "Number of time steps")->check(CLI::PositiveNumber);
        cmd->add_option("--interp", flags.interp, "Interpolator kinds (if1, if2, if3, monotone)")
            ->delimiter(',')
            ->check(CLI::IsMember({"if1", "if2", "if3", "monotone"}, CLI::ignore_case));
    };

    struct Entry {
        const char* name;
        const char* help;
        alm_stage stage;
    };
    const Entry stages[] = {
        {"fit", "Fit the u and v sequences to the initial term structure", ALM_STAGE_FIT},
        {"interpolate", "Fit and tabulate the interpolating functions", ALM_STAGE_INTERPOLATE},
        {"simulate", "Simulate short-rate paths under the spot measure", ALM_STAGE_SIMULATE},
        {"price", "Price the basis swap along the simulated paths", ALM_STAGE_PRICE},
        {"tva", "Solve the TVA equation for every CSA", ALM_STAGE_TVA},
        {"run", "Full pipeline including the interpolator comparison", ALM_STAGE_RUN},
    };
    int rc = 0;
    for (const Entry& e : stages) {
        CLI::App* cmd = app.add_subcommand(e.name, e.help);
        add_common(cmd);
        const alm_stage stage = e.stage;
        cmd->callback([&rc, &flags, stage] { rc = run_stage(flags, stage); });
    }
    CLI::App* cmp = app.add_subcommand("compare", "Summarize interpolator differences of a finished run");
    add_common(cmp);
    cmp->callback([&] { rc = compare(flags); });
    CLI::App* val = app.add_subcommand("validate", "Check a report bundle against its manifest");
    add_common(val);
    val->callback([&] { rc = validate(flags); });

    CLI11_PARSE(app, argc, argv);
    return rc;
}
