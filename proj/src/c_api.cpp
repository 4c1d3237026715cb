#include "alm/alm.h"

#include "alm/errors.hpp"
#include "alm/multicurve.hpp"
#include "alm/pipeline.hpp"
#include "alm/term_structure.hpp"

#include <json.hpp>

#include <cstring>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

using namespace alm;

struct alm_session {
    Scenario scenario;
    std::optional<RunResult> last_run;
    // Lazily fitted model shared by the numerical entry points.
    std::optional<AffineModelSpec> model;
    std::optional<TenorStructure> tenors;
    std::optional<CalibratedSequences> seq;
    std::map<InterpolatorKind, std::unique_ptr<ContinuousTenorModel>> models;
};

namespace {

thread_local std::string g_last_error;

alm_status fail(alm_status status, const std::string& message) {
    g_last_error = message;
    return status;
}

template <class F>
alm_status guarded(F&& f) {
    try {
        g_last_error.clear();
        f();
        return ALM_OK;
    } catch (const ArgumentError& e) {
        return fail(ALM_ERR_ARGUMENT, e.what());
    } catch (const DomainError& e) {
        return fail(ALM_ERR_DOMAIN, e.what());
    } catch (const FitError& e) {
        return fail(ALM_ERR_FIT, e.what());
    } catch (const UnsupportedError& e) {
        return fail(ALM_ERR_UNSUPPORTED, e.what());
    } catch (const DegenerateContractError& e) {
        return fail(ALM_ERR_DEGENERATE, e.what());
    } catch (const IoError& e) {
        return fail(ALM_ERR_IO, e.what());
    } catch (const ComparisonError& e) {
        return fail(ALM_ERR_COMPARISON, e.what());
    } catch (const std::exception& e) {
        return fail(ALM_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(ALM_ERR_INTERNAL, "unknown error");
    }
}

void require(const void* p, const char* what) {
    if (!p) throw ArgumentError(std::string(what) + " must not be NULL");
}

void copy_out(const std::string& text, char* buffer, std::size_t capacity, std::size_t* needed) {
    if (needed) *needed = text.size() + 1;
    if (!buffer || capacity < text.size() + 1) throw ArgumentError("buffer too small");
    std::memcpy(buffer, text.data(), text.size());
    buffer[text.size()] = '\0';
}

void ensure_fit(alm_session& s) {
    if (s.seq) return;
    s.scenario.validate();
    s.model = s.scenario.model();
    s.tenors = s.scenario.tenor_structure();
    const auto levels = anchor_levels(*s.tenors, s.scenario.initial, s.scenario.knots, s.scenario.manifold_margin);
    auto manifold = std::make_shared<const Manifold>(anchored_manifold(*s.model, levels));
    s.seq = fit_sequences(*s.model, *s.tenors, s.scenario.initial, manifold);
}

const ContinuousTenorModel& model_for(alm_session& s, const char* kind) {
    require(kind, "kind");
    const InterpolatorKind k = parse_interpolator_kind(kind);
    ensure_fit(s);
    auto& slot = s.models[k];
    if (!slot) {
        const auto& fc = s.scenario.forward_curve;
        std::shared_ptr<const InterpolatingFunction> U =
            build_interpolator(k, *s.model, *s.tenors, *s.seq, fc ? &*fc : nullptr, &s.scenario.initial.discount);
        slot = std::make_unique<ContinuousTenorModel>(*s.model, U);
    }
    return *slot;
}

Vector state(const double* x, std::size_t dimension, std::size_t expected) {
    require(x, "state");
    if (dimension != expected) throw ArgumentError("state dimension differs from the model");
    return Eigen::Map<const Vector>(x, static_cast<Eigen::Index>(dimension));
}

CsaSpec to_spec(const alm_csa& c) {
    CsaSpec s;
    s.recovery_funder = c.recovery_funder;
    s.recovery_bank = c.recovery_bank;
    s.recovery_investor = c.recovery_investor;
    s.valuation = c.valuation == ALM_VALUATION_CLEAN ? ValuationRule::Clean : ValuationRule::PreDefault;
    s.collateral = c.collateral == ALM_COLLATERAL_NONE ? CollateralRule::None : CollateralRule::Full;
    s.gamma_bank = c.gamma_bank;
    s.gamma_investor = c.gamma_investor;
    s.gamma = c.gamma;
    s.b = c.b;
    s.b_bar = c.b_bar;
    s.lambda = c.lambda;
    s.lambda_bar = c.lambda_bar;
    return s;
}

}  // namespace

extern "C" {

const char* alm_version(void) { return kVersion; }

const char* alm_last_error(void) { return g_last_error.c_str(); }

const char* alm_status_name(alm_status status) {
    switch (status) {
    case ALM_OK: return "ok";
    case ALM_ERR_ARGUMENT: return "argument error";
    case ALM_ERR_DOMAIN: return "domain error";
    case ALM_ERR_FIT: return "fit error";
    case ALM_ERR_UNSUPPORTED: return "unsupported";
    case ALM_ERR_DEGENERATE: return "degenerate contract";
    case ALM_ERR_IO: return "i/o error";
    case ALM_ERR_COMPARISON: return "comparison error";
    case ALM_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

alm_status alm_session_open(const char* scenario_path, alm_session** out) {
    return guarded([&] {
        require(out, "out");
        *out = nullptr;
        auto s = std::make_unique<alm_session>();
        s->scenario = scenario_path ? load_scenario(scenario_path) : builtin_scenario();
        *out = s.release();
    });
}

void alm_session_close(alm_session* session) { delete session; }

alm_status alm_session_set_seed(alm_session* session, uint64_t seed) {
    return guarded([&] {
        require(session, "session");
        session->scenario.simulation.seed = seed;
        session->last_run.reset();
    });
}

alm_status alm_session_set_paths(alm_session* session, size_t paths) {
    return guarded([&] {
        require(session, "session");
        if (paths < session->scenario.simulation.neighbors) throw ArgumentError("need at least as many paths as neighbors");
        session->scenario.simulation.paths = paths;
        session->last_run.reset();
    });
}

alm_status alm_session_set_steps(alm_session* session, size_t steps) {
    return guarded([&] {
        require(session, "session");
        if (steps == 0) throw ArgumentError("need at least one time step");
        session->scenario.simulation.steps = steps;
        session->last_run.reset();
    });
}

alm_status alm_session_set_output(alm_session* session, const char* directory) {
    return guarded([&] {
        require(session, "session");
        require(directory, "directory");
        if (!*directory) throw ArgumentError("output directory must not be empty");
        session->scenario.output_dir = directory;
        session->last_run.reset();
    });
}

alm_status alm_session_set_interpolators(alm_session* session, const char* kinds) {
    return guarded([&] {
        require(session, "session");
        require(kinds, "kinds");
        std::vector<InterpolatorKind> parsed;
        std::stringstream ss(kinds);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto first = item.find_first_not_of(" \t");
            if (first == std::string::npos) continue;
            item = item.substr(first, item.find_last_not_of(" \t") - first + 1);
            parsed.push_back(parse_interpolator_kind(item));
        }
        if (parsed.empty()) throw ArgumentError("need at least one interpolator kind");
        for (InterpolatorKind k : parsed)
            if (k == InterpolatorKind::IF1 && !session->scenario.forward_curve)
                throw ArgumentError("IF1 needs a forward_curve in the scenario");
        session->scenario.interpolators = parsed;
        session->last_run.reset();
    });
}

alm_status alm_session_clear_csas(alm_session* session) {
    return guarded([&] {
        require(session, "session");
        session->scenario.csas.clear();
        session->last_run.reset();
    });
}

alm_status alm_session_output(const alm_session* session, char* buffer, size_t capacity, size_t* needed) {
    return guarded([&] {
        require(session, "session");
        copy_out(session->scenario.output_dir, buffer, capacity, needed);
    });
}

alm_status alm_session_scenario_json(const alm_session* session, char* buffer, size_t capacity, size_t* needed) {
    return guarded([&] {
        require(session, "session");
        copy_out(scenario_to_json(session->scenario), buffer, capacity, needed);
    });
}

alm_status alm_session_run(alm_session* session, alm_stage stage) {
    return guarded([&] {
        require(session, "session");
        if (stage < ALM_STAGE_FIT || stage > ALM_STAGE_RUN) throw ArgumentError("unknown stage");
        session->last_run.reset();
        session->last_run = run_scenario(session->scenario, static_cast<Stage>(stage));
    });
}

alm_status alm_session_report_json(const alm_session* session, char* buffer, size_t capacity, size_t* needed) {
    return guarded([&] {
        require(session, "session");
        if (!session->last_run) throw ArgumentError("no completed run in this session");
        const RunResult& r = *session->last_run;
        nlohmann::json j;
        j["directory"] = r.directory;
        j["files"] = r.files;
        j["fair_spread"] = r.fair_spread;
        j["spread"] = r.spread;
        nlohmann::json kinds = nlohmann::json::object();
        for (const KindResult& k : r.kinds) {
            nlohmann::json theta = nlohmann::json::object();
            for (std::size_t c = 0; c < k.csa_names.size(); ++c)
                theta[k.csa_names[c]] = {{"value", k.theta0[c]}, {"se", k.theta0_se[c]}};
            kinds[to_string(k.kind)] = {{"theta0", theta}, {"warnings", k.warnings}};
        }
        j["kinds"] = kinds;
        copy_out(j.dump(2), buffer, capacity, needed);
    });
}

alm_status alm_session_fair_spread(alm_session* session, double* out) {
    return guarded([&] {
        require(session, "session");
        require(out, "out");
        ensure_fit(*session);
        const Scenario& sc = session->scenario;
        const TenorStructure& ts = *session->tenors;
        const BasisSwap swap(ts, {ts.find(sc.swap.short_tenor), ts.find(sc.swap.long_tenor), sc.swap.start,
                                  sc.swap.end, sc.swap.start, 0.0});
        *out = swap.fair_spread(*session->model, *session->seq, sc.swap.start, session->model->initial_state());
    });
}

alm_status alm_session_bond_price(alm_session* session, const char* kind, double t, double T, const double* x,
                                  size_t dimension, double* out) {
    return guarded([&] {
        require(session, "session");
        require(out, "out");
        const ContinuousTenorModel& m = model_for(*session, kind);
        *out = m.bond_price(t, T, state(x, dimension, m.spec().dimension()));
    });
}

alm_status alm_session_short_rate(alm_session* session, const char* kind, double t, const double* x,
                                  size_t dimension, double* out) {
    return guarded([&] {
        require(session, "session");
        require(out, "out");
        const ContinuousTenorModel& m = model_for(*session, kind);
        *out = m.short_rate(t, state(x, dimension, m.spec().dimension()));
    });
}

alm_status alm_compare_bundle(const char* directory, size_t* flagged) {
    return guarded([&] {
        require(directory, "directory");
        const ComparisonSummary s = compare_interpolators(directory);
        std::size_t count = 0;
        for (const auto& p : s.pairs)
            for (const auto& i : p.intervals)
                for (bool f : i.flagged) count += f ? 1 : 0;
        if (flagged) *flagged = count;
    });
}

alm_status alm_validate_bundle(const char* directory, size_t* problems) {
    if (!problems) return fail(ALM_ERR_ARGUMENT, "problems must not be NULL");
    std::vector<std::string> found;
    const alm_status st = guarded([&] {
        require(directory, "directory");
        found = validate_bundle(directory);
    });
    if (st != ALM_OK) return st;
    *problems = found.size();
    std::string text;
    for (const auto& p : found) text += (text.empty() ? "" : "\n") + p;
    g_last_error = text;
    return ALM_OK;
}

alm_status alm_cir_flow(const alm_cir* components, size_t dimension, double t, const double* u, double* phi,
                        double* psi) {
    return guarded([&] {
        require(components, "components");
        require(u, "u");
        require(phi, "phi");
        require(psi, "psi");
        if (dimension == 0) throw ArgumentError("dimension must be positive");
        if (!(t >= 0.0)) throw ArgumentError("flow time must be nonnegative");
        std::vector<CirComponent> comps;
        for (std::size_t i = 0; i < dimension; ++i)
            comps.push_back({components[i].speed, components[i].level, components[i].vol});
        const AffineModelSpec spec = AffineModelSpec::independent_cir(comps, std::max(t, 1.0));
        const Vector uu = Eigen::Map<const Vector>(u, static_cast<Eigen::Index>(dimension));
        RiccatiOptions o;
        o.gradients = false;
        const FlowSolution f = solve_riccati(spec, t, uu, o);
        *phi = f.phi;
        for (std::size_t i = 0; i < dimension; ++i) psi[i] = f.psi(static_cast<Eigen::Index>(i));
    });
}

alm_status alm_csa_preset(int index, alm_csa* out) {
    return guarded([&] {
        require(out, "out");
        const CsaSpec s = csa_preset(index);
        out->recovery_funder = s.recovery_funder;
        out->recovery_bank = s.recovery_bank;
        out->recovery_investor = s.recovery_investor;
        out->valuation = s.valuation == ValuationRule::Clean ? ALM_VALUATION_CLEAN : ALM_VALUATION_PREDEFAULT;
        out->collateral = s.collateral == CollateralRule::None ? ALM_COLLATERAL_NONE : ALM_COLLATERAL_FULL;
        out->gamma_bank = s.gamma_bank;
        out->gamma_investor = s.gamma_investor;
        out->gamma = s.gamma;
        out->b = s.b;
        out->b_bar = s.b_bar;
        out->lambda = s.lambda;
        out->lambda_bar = s.lambda_bar;
    });
}

alm_status alm_tva_coefficient(const alm_csa* csa, double r, double price, double theta, double* out) {
    return guarded([&] {
        require(csa, "csa");
        require(out, "out");
        *out = tva_coefficient(to_spec(*csa), r, price, theta);
    });
}

}  // extern "C"
