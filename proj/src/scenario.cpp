#include "alm/scenario.hpp"

#include "alm/csv.hpp"
#include "alm/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace alm {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct SpreadShape {
    double base = 0.0;
    double slope = 0.0;
    double scale = 1.0;
};

double spread_at(const SpreadShape& s, double T) { return s.base + s.slope * (1.0 - std::exp(-T / s.scale)); }

// Discount factors on the master grid and LIBOR = OIS forward + spread.
InitialTermStructure curve_term_structure(const ForwardCurve& curve, const TenorStructure& tenors,
                                          const std::vector<SpreadShape>& spreads) {
    InitialTermStructure init;
    init.discount.resize(static_cast<std::size_t>(tenors.intervals()) + 1);
    for (int l = 0; l <= tenors.intervals(); ++l)
        init.discount[static_cast<std::size_t>(l)] = l == 0 ? 1.0 : curve.discount(tenors.master_time(l));
    init.libor.resize(tenors.tenor_count());
    for (std::size_t x = 0; x < tenors.tenor_count(); ++x) {
        const int nx = tenors.periods(x);
        init.libor[x].assign(static_cast<std::size_t>(nx) + 1, 0.0);
        for (int k = 1; k <= nx; ++k)
            init.libor[x][static_cast<std::size_t>(k)] =
                init.ois_forward(tenors, x, k) + spread_at(spreads[x], tenors.time(x, k));
    }
    return init;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string resolve(const std::string& base, const std::string& ref) {
    const fs::path p(ref);
    const fs::path full = p.is_absolute() ? p : fs::path(base) / p;
    if (!fs::exists(full)) throw IoError("referenced file " + full.string() + " does not exist");
    return full.string();
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<T>();
}

int match_index(const std::vector<double>& times, double t, const std::string& what) {
    for (std::size_t i = 0; i < times.size(); ++i)
        if (std::abs(times[i] - t) <= 1e-9) return static_cast<int>(i);
    throw ArgumentError(what + " has no entry at maturity " + format_number(t));
}

InitialTermStructure term_structure_from_csv(const std::string& discount_path,
                                             const std::string& libor_path,
                                             const TenorStructure& tenors) {
    const CsvTable dt = read_csv(discount_path);
    const auto mat = dt.numbers("maturity_years");
    const auto df = dt.numbers("discount_factor");
    InitialTermStructure init;
    init.discount.resize(static_cast<std::size_t>(tenors.intervals()) + 1);
    init.discount[0] = 1.0;
    for (int l = 1; l <= tenors.intervals(); ++l)
        init.discount[static_cast<std::size_t>(l)] =
            df[static_cast<std::size_t>(match_index(mat, tenors.master_time(l), discount_path))];

    const CsvTable lt = read_csv(libor_path);
    const std::size_t ct = lt.column("tenor");
    const auto lmat = lt.numbers("maturity_years");
    const auto rate = lt.numbers("libor_rate");
    init.libor.resize(tenors.tenor_count());
    for (std::size_t x = 0; x < tenors.tenor_count(); ++x) {
        const int nx = tenors.periods(x);
        init.libor[x].assign(static_cast<std::size_t>(nx) + 1, 0.0);
        std::vector<bool> seen(static_cast<std::size_t>(nx) + 1, false);
        for (std::size_t r = 0; r < lt.rows.size(); ++r) {
            if (lt.rows[r][ct] != tenors.tenor(x).name) continue;
            bool placed = false;
            for (int k = 1; k <= nx; ++k) {
                if (std::abs(tenors.time(x, k) - lmat[r]) <= 1e-9) {
                    init.libor[x][static_cast<std::size_t>(k)] = rate[r];
                    seen[static_cast<std::size_t>(k)] = true;
                    placed = true;
                }
            }
            if (!placed)
                throw ArgumentError(libor_path + ": maturity " + format_number(lmat[r]) +
                                    " is not a date of tenor " + tenors.tenor(x).name);
        }
        for (int k = 1; k <= nx; ++k)
            if (!seen[static_cast<std::size_t>(k)])
                throw ArgumentError(libor_path + ": missing tenor " + tenors.tenor(x).name + " maturity " +
                                    format_number(tenors.time(x, k)));
    }
    return init;
}

ForwardCurve parse_forward_curve(const json& j, const std::string& base) {
    if (j.contains("nelson_siegel")) {
        const json& ns = j.at("nelson_siegel");
        return ForwardCurve::nelson_siegel({ns.at("beta0").get<double>(), ns.at("beta1").get<double>(),
                                            ns.at("beta2").get<double>(), ns.at("tau").get<double>()});
    }
    if (j.contains("csv")) {
        const CsvTable t = read_csv(resolve(base, j.at("csv").get<std::string>()));
        return ForwardCurve::table(t.numbers("maturity_years"), t.numbers("forward_rate"));
    }
    if (j.contains("maturity_years"))
        return ForwardCurve::table(j.at("maturity_years").get<std::vector<double>>(),
                                   j.at("forward_rate").get<std::vector<double>>());
    throw ArgumentError("forward_curve needs nelson_siegel, csv or an inline table");
}

json forward_curve_json(const ForwardCurve& c) {
    if (c.is_table()) return {{"maturity_years", c.maturities()}, {"forward_rate", c.rates()}};
    const NelsonSiegel& p = c.parameters();
    return {{"nelson_siegel", {{"beta0", p.beta0}, {"beta1", p.beta1}, {"beta2", p.beta2}, {"tau", p.tau}}}};
}

const char* valuation_name(ValuationRule v) { return v == ValuationRule::Clean ? "clean" : "predefault"; }
const char* collateral_name(CollateralRule c) { return c == CollateralRule::None ? "none" : "full"; }

// Accepts "CSA3" or 3.
CsaSpec preset_from(const json& j) {
    if (j.is_number_integer()) return csa_preset(j.get<int>());
    const std::string s = j.get<std::string>();
    if (s.size() == 4 && s.rfind("CSA", 0) == 0 && s[3] >= '1' && s[3] <= '5') return csa_preset(s[3] - '0');
    throw ArgumentError("unknown CSA preset '" + s + "'");
}

CsaSpec parse_csa(const json& j) {
    if (j.is_string()) return preset_from(j);
    CsaSpec c = j.contains("preset") ? preset_from(j.at("preset")) : CsaSpec{};
    c.name = get_or<std::string>(j, "name", c.name);
    c.recovery_funder = get_or(j, "recovery_funder", c.recovery_funder);
    c.recovery_bank = get_or(j, "recovery_bank", c.recovery_bank);
    c.recovery_investor = get_or(j, "recovery_investor", c.recovery_investor);
    c.gamma_bank = get_or(j, "gamma_bank", c.gamma_bank);
    c.gamma_investor = get_or(j, "gamma_investor", c.gamma_investor);
    c.gamma = get_or(j, "gamma", c.gamma);
    c.b = get_or(j, "b", c.b);
    c.b_bar = get_or(j, "b_bar", c.b_bar);
    c.lambda = get_or(j, "lambda", c.lambda);
    c.lambda_bar = get_or(j, "lambda_bar", c.lambda_bar);
    if (j.contains("valuation")) {
        const std::string v = j.at("valuation").get<std::string>();
        if (v == "clean") c.valuation = ValuationRule::Clean;
        else if (v == "predefault") c.valuation = ValuationRule::PreDefault;
        else throw ArgumentError("CSA valuation must be clean or predefault");
    }
    if (j.contains("collateral")) {
        const std::string v = j.at("collateral").get<std::string>();
        if (v == "none") c.collateral = CollateralRule::None;
        else if (v == "full") c.collateral = CollateralRule::Full;
        else throw ArgumentError("CSA collateral must be none or full");
    }
    if (c.name.empty()) throw ArgumentError("CSA needs a name");
    return c;
}

json csa_json(const CsaSpec& c) {
    return {{"name", c.name},
            {"recovery_funder", c.recovery_funder},
            {"recovery_bank", c.recovery_bank},
            {"recovery_investor", c.recovery_investor},
            {"gamma_bank", c.gamma_bank},
            {"gamma_investor", c.gamma_investor},
            {"gamma", c.gamma},
            {"b", c.b},
            {"b_bar", c.b_bar},
            {"lambda", c.lambda},
            {"lambda_bar", c.lambda_bar},
            {"valuation", valuation_name(c.valuation)},
            {"collateral", collateral_name(c.collateral)}};
}

Scenario from_json(const json& root, const std::string& base) {
    const json& j = root.contains("format") && root.at("format") == "alm-report" ? root.at("scenario") : root;
    Scenario s;
    s.name = get_or<std::string>(j, "name", s.name);

    const json& model = j.at("model");
    s.horizon = model.at("horizon").get<double>();
    for (const json& c : model.at("components"))
        s.components.push_back({c.at("speed").get<double>(), c.at("level").get<double>(), c.at("vol").get<double>()});

    const json& ts = j.at("tenor_structure");
    s.intervals = ts.at("intervals").get<int>();
    for (const json& t : ts.at("tenors"))
        s.tenors.push_back({t.at("name").get<std::string>(), t.at("step").get<int>(), get_or(t, "delta", 0.0)});
    const TenorStructure tenors = s.tenor_structure();

    if (j.contains("forward_curve")) s.forward_curve = parse_forward_curve(j.at("forward_curve"), base);

    const json& it = j.at("initial_term_structure");
    if (it.contains("discount_csv")) {
        s.initial = term_structure_from_csv(resolve(base, it.at("discount_csv").get<std::string>()),
                                            resolve(base, it.at("libor_csv").get<std::string>()), tenors);
    } else if (it.contains("discount")) {
        s.initial.discount = it.at("discount").get<std::vector<double>>();
        s.initial.libor.resize(tenors.tenor_count());
        for (std::size_t x = 0; x < tenors.tenor_count(); ++x) {
            auto rates = it.at("libor").at(tenors.tenor(x).name).get<std::vector<double>>();
            rates.insert(rates.begin(), 0.0);
            s.initial.libor[x] = std::move(rates);
        }
    } else if (it.contains("spreads")) {
        if (!s.forward_curve) throw ArgumentError("spread-based initial term structure needs a forward_curve");
        std::vector<SpreadShape> shapes;
        for (std::size_t x = 0; x < tenors.tenor_count(); ++x) {
            const json& sp = it.at("spreads").at(tenors.tenor(x).name);
            shapes.push_back({sp.at("base").get<double>(), get_or(sp, "slope", 0.0), get_or(sp, "scale", 1.0)});
        }
        s.initial = curve_term_structure(*s.forward_curve, tenors, shapes);
    } else {
        throw ArgumentError("initial_term_structure needs discount_csv/libor_csv, inline data or spreads");
    }

    if (j.contains("manifold")) {
        const json& m = j.at("manifold");
        s.knots = m.at("knots").get<std::vector<int>>();
        s.manifold_margin = get_or(m, "margin", s.manifold_margin);
    }

    for (const json& k : j.at("interpolators")) s.interpolators.push_back(parse_interpolator_kind(k.get<std::string>()));

    if (j.contains("swap")) {
        const json& sw = j.at("swap");
        s.swap.short_tenor = sw.at("short_tenor").get<std::string>();
        s.swap.long_tenor = sw.at("long_tenor").get<std::string>();
        s.swap.start = sw.at("start").get<double>();
        s.swap.end = sw.at("end").get<double>();
        const json spread = sw.value("spread", json("fair"));
        if (spread.is_string()) {
            if (spread.get<std::string>() != "fair") throw ArgumentError("swap spread must be a number or \"fair\"");
            s.swap.fair = true;
        } else {
            s.swap.fair = false;
            s.swap.spread = spread.get<double>();
        }
    }

    if (j.contains("csas"))
        for (const json& c : j.at("csas")) s.csas.push_back(parse_csa(c));

    if (j.contains("simulation")) {
        const json& sim = j.at("simulation");
        SimulationSettings& o = s.simulation;
        o.paths = get_or(sim, "paths", o.paths);
        o.steps = get_or(sim, "steps", o.steps);
        o.seed = get_or(sim, "seed", o.seed);
        o.substeps = get_or(sim, "substeps", o.substeps);
        o.neighbors = get_or(sim, "neighbors", o.neighbors);
        o.sample_paths = get_or(sim, "sample_paths", o.sample_paths);
        o.compare_paths = get_or(sim, "compare_paths", o.compare_paths);
    }
    s.output_dir = get_or<std::string>(j, "output", s.output_dir);
    s.validate();
    return s;
}

}  // namespace

AffineModelSpec Scenario::model() const { return AffineModelSpec::independent_cir(components, horizon); }

TenorStructure Scenario::tenor_structure() const { return TenorStructure(horizon, intervals, tenors); }

void Scenario::validate() const {
    if (components.empty()) throw ArgumentError("scenario needs at least one model component");
    const AffineModelSpec m = model();
    const TenorStructure ts = tenor_structure();
    if (initial.discount.size() != static_cast<std::size_t>(intervals) + 1)
        throw ArgumentError("initial discount curve needs N + 1 entries");
    if (initial.libor.size() != ts.tenor_count()) throw ArgumentError("need LIBOR rates for every tenor");
    for (std::size_t x = 0; x < ts.tenor_count(); ++x)
        if (initial.libor[x].size() != static_cast<std::size_t>(ts.periods(x)) + 1)
            throw ArgumentError("tenor " + ts.tenor(x).name + " needs one LIBOR rate per period");
    initial.validate(ts);
    const std::size_t want = 2 * (components.size() - 1);
    if (knots.size() != want)
        throw ArgumentError("manifold needs " + std::to_string(want) + " knot indices for this dimension");
    for (std::size_t i = 0; i < knots.size(); ++i) {
        if (knots[i] < 0 || knots[i] > intervals) throw ArgumentError("manifold knot index outside [0, N]");
        if (i && knots[i] <= knots[i - 1]) throw ArgumentError("manifold knot indices must increase");
    }
    if (!(manifold_margin > 0.0)) throw ArgumentError("manifold margin must be positive");
    if (interpolators.empty()) throw ArgumentError("scenario needs at least one interpolator kind");
    for (InterpolatorKind k : interpolators)
        if (k == InterpolatorKind::IF1 && !forward_curve)
            throw ArgumentError("IF1 needs a forward_curve in the scenario");
    const std::size_t a = ts.find(swap.short_tenor);
    const std::size_t b = ts.find(swap.long_tenor);
    BasisSwap(ts, {a, b, swap.start, swap.end, swap.start, swap.spread});
    for (const CsaSpec& c : csas) {
        if (c.gamma_bank < 0 || c.gamma_investor < 0 || c.gamma < 0 || c.lambda < 0 || c.lambda_bar < 0)
            throw ArgumentError("CSA " + c.name + " has a negative intensity or spread");
        if (!c.intensities_consistent())
            throw ArgumentError("CSA " + c.name + ": first-to-default intensity below a single intensity");
    }
    if (simulation.paths < simulation.neighbors || simulation.neighbors == 0)
        throw ArgumentError("need at least as many paths as neighbors");
    if (simulation.steps == 0) throw ArgumentError("simulation needs at least one step");
    if (interpolators.size() > 1 && simulation.steps <= static_cast<std::size_t>(intervals))
        throw ArgumentError("comparing interpolators needs more time steps than master intervals");
    if (simulation.substeps < 1) throw ArgumentError("simulation needs at least one substep");
    (void)m;
}

Scenario builtin_scenario() {
    Scenario s;
    s.name = "synthetic";
    s.components = {{0.8, 1.0, 0.6}, {0.4, 1.0, 0.4}, {0.2, 1.0, 0.25}};
    s.horizon = 10.0;
    s.intervals = 40;
    s.tenors = {{"3M", 1, 0.0}, {"6M", 2, 0.0}};
    s.forward_curve = ForwardCurve::nelson_siegel({0.03, -0.02, 0.01, 2.0});
    const TenorStructure ts = s.tenor_structure();
    s.initial = curve_term_structure(*s.forward_curve, ts, {{0.0010, 0.0005, 3.0}, {0.0025, 0.0010, 3.0}});
    s.knots = {9, 16, 21, 28};
    s.interpolators = {InterpolatorKind::IF1, InterpolatorKind::IF2, InterpolatorKind::IF3};
    for (int i = 1; i <= 5; ++i) s.csas.push_back(csa_preset(i));
    s.validate();
    return s;
}

Scenario parse_scenario(const std::string& json_text, const std::string& base_dir) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ArgumentError(std::string("scenario is not valid JSON: ") + e.what());
    }
    try {
        return from_json(root, base_dir);
    } catch (const json::exception& e) {
        throw ArgumentError(std::string("scenario field error: ") + e.what());
    }
}

Scenario load_scenario(const std::string& path) {
    const std::string text = read_file(path);
    const std::string base = fs::path(path).parent_path().string();
    return parse_scenario(text, base.empty() ? "." : base);
}

std::string scenario_to_json(const Scenario& s, int indent) {
    json j;
    j["name"] = s.name;
    json comps = json::array();
    for (const CirComponent& c : s.components) comps.push_back({{"speed", c.speed}, {"level", c.level}, {"vol", c.vol}});
    j["model"] = {{"horizon", s.horizon}, {"components", comps}};
    json tenors = json::array();
    for (const Tenor& t : s.tenors) tenors.push_back({{"name", t.name}, {"step", t.step}, {"delta", t.delta}});
    j["tenor_structure"] = {{"intervals", s.intervals}, {"tenors", tenors}};
    json libor = json::object();
    for (std::size_t x = 0; x < s.tenors.size() && x < s.initial.libor.size(); ++x)
        libor[s.tenors[x].name] = std::vector<double>(s.initial.libor[x].begin() + 1, s.initial.libor[x].end());
    j["initial_term_structure"] = {{"discount", s.initial.discount}, {"libor", libor}};
    if (s.forward_curve) j["forward_curve"] = forward_curve_json(*s.forward_curve);
    j["manifold"] = {{"knots", s.knots}, {"margin", s.manifold_margin}};
    json kinds = json::array();
    for (InterpolatorKind k : s.interpolators) kinds.push_back(to_string(k));
    j["interpolators"] = kinds;
    j["swap"] = {{"short_tenor", s.swap.short_tenor},
                 {"long_tenor", s.swap.long_tenor},
                 {"start", s.swap.start},
                 {"end", s.swap.end},
                 {"spread", s.swap.fair ? json("fair") : json(s.swap.spread)}};
    json csas = json::array();
    for (const CsaSpec& c : s.csas) csas.push_back(csa_json(c));
    j["csas"] = csas;
    const SimulationSettings& o = s.simulation;
    j["simulation"] = {{"paths", o.paths},         {"steps", o.steps},
                       {"seed", o.seed},           {"substeps", o.substeps},
                       {"neighbors", o.neighbors}, {"sample_paths", o.sample_paths},
                       {"compare_paths", o.compare_paths}};
    j["output"] = s.output_dir;
    return j.dump(indent);
}

}  // namespace alm
