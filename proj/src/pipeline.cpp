#include "alm/pipeline.hpp"

#include "alm/csv.hpp"
#include "alm/errors.hpp"
#include "alm/multicurve.hpp"
#include "alm/term_structure.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

namespace alm {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kManifest = "manifest.json";
constexpr double kMoveTol = 1e-13;
constexpr double kZeroPrice = 1e-12;
constexpr double kNonzeroTva = 1e-10;

const std::vector<std::string> kSummaryColumns = {"time", "mean", "p2.5", "p97.5", "se"};

struct Summary {
    std::vector<double> mean, lo, hi, se;
};

// Per-step statistics of a step-major array with n values per step.
Summary summarize(std::span<const double> values, std::size_t steps, std::size_t n) {
    Summary s;
    std::vector<double> buf(n);
    for (std::size_t l = 0; l < steps; ++l) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            buf[i] = values[l * n + i];
            sum += buf[i];
        }
        const double mean = sum / static_cast<double>(n);
        double ss = 0.0;
        for (double v : buf) ss += (v - mean) * (v - mean);
        const double var = n > 1 ? ss / static_cast<double>(n - 1) : 0.0;
        s.mean.push_back(mean);
        s.se.push_back(std::sqrt(var / static_cast<double>(n)));
        s.lo.push_back(percentile(buf, 0.025));
        s.hi.push_back(percentile(buf, 0.975));
    }
    return s;
}

// Files written by one call, removed again when the call fails.
class Bundle {
public:
    explicit Bundle(std::string dir) : dir_(std::move(dir)) {
        std::error_code ec;
        if (!fs::exists(dir_)) {
            fs::create_directories(dir_, ec);
            if (ec) throw IoError("cannot create output directory " + dir_);
            created_dir_ = true;
        }
    }

    std::string path(const std::string& name) const { return (fs::path(dir_) / name).string(); }

    CsvWriter open(const std::string& name, std::vector<std::string> header) {
        record(name, header);
        return CsvWriter(path(name), std::move(header));
    }

    void record(const std::string& name, const std::vector<std::string>& header) {
        files_.push_back(name);
        columns_[name] = header;
    }

    void count_row(const std::string& name, std::size_t rows) { rows_[name] = rows; }

    void rollback() noexcept {
        std::error_code ec;
        for (const auto& f : files_) fs::remove(path(f), ec);
        fs::remove(path(kManifest), ec);
        if (created_dir_ && fs::is_empty(dir_, ec)) fs::remove(dir_, ec);
    }

    const std::string& dir() const { return dir_; }
    const std::vector<std::string>& files() const { return files_; }
    const std::vector<std::string>& columns(const std::string& name) const { return columns_.at(name); }
    std::size_t rows(const std::string& name) const { return rows_.at(name); }

private:
    std::string dir_;
    bool created_dir_ = false;
    std::vector<std::string> files_;
    std::map<std::string, std::vector<std::string>> columns_;
    std::map<std::string, std::size_t> rows_;
};

void write_summary(Bundle& bundle, const std::string& name, const std::vector<double>& times,
                   const std::vector<double>& mean, const std::vector<double>& lo,
                   const std::vector<double>& hi, const std::vector<double>& se) {
    CsvWriter w = bundle.open(name, kSummaryColumns);
    for (std::size_t l = 0; l < times.size(); ++l) w.row(std::vector<double>{times[l], mean[l], lo[l], hi[l], se[l]});
    w.close();
    bundle.count_row(name, times.size());
}

void write_paths(Bundle& bundle, const std::string& name, const std::vector<double>& times,
                 std::span<const double> values, std::size_t n, std::size_t samples) {
    std::vector<std::string> header{"time"};
    for (std::size_t i = 0; i < samples; ++i) header.push_back("path_" + std::to_string(i));
    CsvWriter w = bundle.open(name, header);
    std::vector<double> row(samples + 1);
    for (std::size_t l = 0; l < times.size(); ++l) {
        row[0] = times[l];
        for (std::size_t i = 0; i < samples; ++i) row[i + 1] = values[l * n + i];
        w.row(row);
    }
    w.close();
    bundle.count_row(name, times.size());
}

std::vector<std::string> indexed(const std::string& prefix, std::size_t d) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < d; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

void append(std::vector<std::string>& a, const std::vector<std::string>& b) { a.insert(a.end(), b.begin(), b.end()); }

int moving_components(const Vector& a, const Vector& b) {
    int count = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        if (std::abs(a(i) - b(i)) > kMoveTol * std::max(1.0, std::abs(a(i)))) ++count;
    return count;
}

void write_fit(Bundle& bundle, const Scenario& sc, const AffineModelSpec& model, const TenorStructure& tenors,
               const CalibratedSequences& seq) {
    const std::size_t d = model.dimension();
    const auto targets = log_bond_ratios(sc.initial);
    {
        std::vector<std::string> header{"index", "time", "param"};
        append(header, indexed("u_", d));
        append(header, {"level", "target"});
        CsvWriter w = bundle.open("fit_u.csv", header);
        for (std::size_t l = 0; l < seq.u.size(); ++l) {
            std::vector<double> row{static_cast<double>(l), tenors.master_time(static_cast<int>(l)), seq.u_param[l]};
            for (std::size_t i = 0; i < d; ++i) row.push_back(seq.u[l](static_cast<Eigen::Index>(i)));
            row.push_back(log_initial_martingale(model, seq.u[l]));
            row.push_back(targets[l]);
            w.row(row);
        }
        w.close();
        bundle.count_row("fit_u.csv", seq.u.size());
    }
    const MultiCurveModel mc(model, tenors, seq);
    const Vector x0 = model.initial_state();
    for (std::size_t x = 0; x < tenors.tenor_count(); ++x) {
        const std::string name = "fit_v_" + tenors.tenor(x).name + ".csv";
        std::vector<std::string> header{"k", "time", "param"};
        append(header, indexed("v_", d));
        append(header, {"libor_target", "libor_model"});
        CsvWriter w = bundle.open(name, header);
        const int nx = tenors.periods(x);
        for (int k = 0; k <= nx; ++k) {
            const auto kk = static_cast<std::size_t>(k);
            std::vector<double> row{static_cast<double>(k), tenors.time(x, k), seq.v_param[x][kk]};
            for (std::size_t i = 0; i < d; ++i) row.push_back(seq.v[x][kk](static_cast<Eigen::Index>(i)));
            // Period k + 1 is the one v_k prices; the last entry has none.
            if (k < nx) {
                row.push_back(sc.initial.libor[x][kk + 1]);
                row.push_back(mc.libor_rate(x, k + 1, 0.0, x0));
            } else {
                row.push_back(sc.initial.libor[x][kk]);
                row.push_back(sc.initial.libor[x][kk]);
            }
            w.row(row);
        }
        w.close();
        bundle.count_row(name, static_cast<std::size_t>(nx) + 1);
    }
    {
        const Manifold& m = *seq.manifold;
        CsvWriter w = bundle.open("segments.csv", {"segment", "arc", "param_lo", "param_hi"});
        for (std::size_t i = 0; i < m.segments().size(); ++i)
            w.row(std::vector<double>{static_cast<double>(i),
                                      m.segments()[i].kind == ManifoldSegment::Kind::Arc ? 1.0 : 0.0,
                                      m.segment_lo(i), m.segment_hi(i)});
        w.close();
        bundle.count_row("segments.csv", m.segments().size());
    }
    {
        CsvWriter w = bundle.open("intervals.csv", {"interval", "t_lo", "t_hi", "moving", "curved"});
        for (int l = 0; l < tenors.intervals(); ++l) {
            const int mv = moving_components(seq.u[static_cast<std::size_t>(l)], seq.u[static_cast<std::size_t>(l) + 1]);
            w.row(std::vector<double>{static_cast<double>(l), tenors.master_time(l), tenors.master_time(l + 1),
                                      static_cast<double>(mv), mv > 1 ? 1.0 : 0.0});
        }
        w.close();
        bundle.count_row("intervals.csv", static_cast<std::size_t>(tenors.intervals()));
    }
}

void write_interpolator(Bundle& bundle, const ContinuousTenorModel& ctm) {
    const InterpolatingFunction& U = ctm.interpolator();
    const TenorStructure& tenors = U.tenors();
    const std::size_t d = U.dimension();
    const std::string name = to_string(U.kind()) + "_interpolator.csv";
    std::vector<std::string> header{"time"};
    append(header, indexed("U_", d));
    append(header, indexed("dU_", d));
    header.push_back("p");
    append(header, indexed("q_", d));
    CsvWriter w = bundle.open(name, header);
    constexpr int per = 8;
    std::size_t rows = 0;
    for (int l = 0; l < tenors.intervals(); ++l) {
        for (int j = 0; j < per; ++j) {
            const double t = tenors.master_time(l) + (tenors.master_time(l + 1) - tenors.master_time(l)) * j / per;
            const InterpolatedPoint p = U.evaluate(t);
            const ShortRateCoefficients c = ctm.short_rate_coefficients(t);
            std::vector<double> row{t};
            for (std::size_t i = 0; i < d; ++i) row.push_back(p.value(static_cast<Eigen::Index>(i)));
            for (std::size_t i = 0; i < d; ++i) row.push_back(p.derivative(static_cast<Eigen::Index>(i)));
            row.push_back(c.p);
            for (std::size_t i = 0; i < d; ++i) row.push_back(c.q(static_cast<Eigen::Index>(i)));
            w.row(row);
            ++rows;
        }
    }
    w.close();
    bundle.count_row(name, rows);
}

// Values at the common reference states, kept per kind for the differences.
struct ReferenceValues {
    std::string kind;
    std::vector<double> price;
    std::vector<std::vector<double>> tva;  // per CSA, step-major
};

void write_differences(Bundle& bundle, const std::vector<double>& times, std::size_t n_ref,
                       const std::vector<ReferenceValues>& refs, const std::vector<CsaSpec>& csas) {
    const std::size_t steps = times.size();
    std::vector<double> diff(steps * n_ref);
    auto emit = [&](const std::string& name, const std::vector<double>& a, const std::vector<double>& b) {
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = std::abs(a[i] - b[i]);
        const Summary s = summarize(diff, steps, n_ref);
        write_summary(bundle, name, times, s.mean, s.lo, s.hi, s.se);
    };
    for (std::size_t a = 0; a < refs.size(); ++a) {
        for (std::size_t b = a + 1; b < refs.size(); ++b) {
            const std::string pair = refs[a].kind + "_" + refs[b].kind;
            if (!refs[a].price.empty()) emit("diff_price_" + pair + ".csv", refs[a].price, refs[b].price);
            for (std::size_t c = 0; c < csas.size() && c < refs[a].tva.size(); ++c)
                emit("diff_tva_" + csas[c].name + "_" + pair + ".csv", refs[a].tva[c], refs[b].tva[c]);
        }
    }
}

json build_manifest(const Scenario& sc, Stage stage, const Bundle& bundle, const RunResult& result) {
    json files = json::array();
    for (const auto& f : bundle.files())
        files.push_back({{"name", f}, {"rows", bundle.rows(f)}, {"columns", bundle.columns(f)}});
    json kinds = json::object();
    for (const KindResult& k : result.kinds) {
        json theta = json::object();
        for (std::size_t c = 0; c < k.csa_names.size(); ++c)
            theta[k.csa_names[c]] = {{"value", k.theta0[c]}, {"se", k.theta0_se[c]}};
        kinds[to_string(k.kind)] = {{"theta0", theta}, {"warnings", k.warnings}};
    }
    const RiccatiOptions ro;
    const CurveFitOptions co;
    json m;
    m["format"] = "alm-report";
    m["format_version"] = 1;
    m["library_version"] = kVersion;
    m["stage"] = to_string(stage);
    m["seed"] = sc.simulation.seed;
    m["scenario"] = json::parse(scenario_to_json(sc));
    m["tolerances"] = {{"riccati_abs", ro.abs_tol},
                       {"riccati_rel", ro.rel_tol},
                       {"fit_parameter", 1e-12},
                       {"curve_fit_refine", co.refine_tol},
                       {"curve_consistency", co.consistency_tol},
                       {"neighbors", sc.simulation.neighbors}};
    m["build"] = {{"compiler", __VERSION__},
                  {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                std::to_string(EIGEN_MINOR_VERSION)},
                  {"boost", BOOST_LIB_VERSION}};
    m["results"] = {{"fair_spread", result.fair_spread}, {"spread", result.spread}, {"kinds", kinds}};
    m["files"] = files;
    return m;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    out << text;
    out.flush();
    if (!out) throw IoError("failed writing " + path);
}

json read_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw IoError(path + " is not valid JSON: " + e.what());
    }
}

[[noreturn]] void rethrow_with_stage(const std::string& stage) {
    const std::string prefix = "stage " + stage + ": ";
    try {
        throw;
    } catch (const DomainError& e) {
        throw DomainError(prefix + e.what(), e.blowup_time());
    } catch (const FitError& e) {
        throw FitError(prefix + e.what(), e.index(), e.maturity());
    } catch (const ArgumentError& e) {
        throw ArgumentError(prefix + e.what());
    } catch (const UnsupportedError& e) {
        throw UnsupportedError(prefix + e.what());
    } catch (const DegenerateContractError& e) {
        throw DegenerateContractError(prefix + e.what());
    } catch (const IoError& e) {
        throw IoError(prefix + e.what());
    } catch (const ComparisonError& e) {
        throw ComparisonError(prefix + e.what());
    } catch (const std::bad_alloc&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(prefix + e.what());
    }
}

RunResult run_pipeline(const Scenario& sc, Stage stage, Bundle& bundle) {
    std::string current = "fit";
    try {
        RunResult result;
        result.directory = bundle.dir();
        sc.validate();
        const AffineModelSpec model = sc.model();
        const TenorStructure tenors = sc.tenor_structure();
        const auto levels = anchor_levels(tenors, sc.initial, sc.knots, sc.manifold_margin);
        auto manifold = std::make_shared<const Manifold>(anchored_manifold(model, levels));
        const CalibratedSequences seq = fit_sequences(model, tenors, sc.initial, manifold);
        write_fit(bundle, sc, model, tenors, seq);

        const BasisSwapSpec base_swap{tenors.find(sc.swap.short_tenor), tenors.find(sc.swap.long_tenor),
                                      sc.swap.start, sc.swap.end, sc.swap.start, sc.swap.spread};
        BasisSwap swap(tenors, base_swap);
        if (stage >= Stage::Price) {
            current = "price";
            const Vector x0 = model.initial_state();
            result.fair_spread = swap.fair_spread(model, seq, sc.swap.start, x0);
            if (sc.swap.fair) swap = swap.with_spread(result.fair_spread);
            result.spread = swap.spec().spread;
        }

        const SimulationSettings& sim = sc.simulation;
        const std::vector<double> grid = uniform_grid(sc.horizon, sim.steps);
        const bool compare = stage == Stage::Run && sc.interpolators.size() >= 2;
        std::unique_ptr<PathGrid> reference;
        if (compare) {
            current = "simulate";
            SimulationOptions o;
            o.threads = sim.threads;
            const std::size_t n_ref = std::min(sim.paths, sim.compare_paths);
            reference = std::make_unique<PathGrid>(
                simulate_paths(model, grid, n_ref, path_seed(sim.seed, 0x5eedf00dULL), o));
        }
        std::vector<ReferenceValues> refs;

        for (InterpolatorKind kind : sc.interpolators) {
            if (stage < Stage::Interpolate) break;
            current = "interpolate";
            const std::string name = to_string(kind);
            std::shared_ptr<const InterpolatingFunction> U = build_interpolator(
                kind, model, tenors, seq, sc.forward_curve ? &*sc.forward_curve : nullptr, &sc.initial.discount);
            const ContinuousTenorModel ctm(model, U);
            write_interpolator(bundle, ctm);
            KindResult kr;
            kr.kind = kind;
            kr.warnings = U->warnings();
            if (stage < Stage::Simulate) {
                result.kinds.push_back(kr);
                continue;
            }

            current = "simulate";
            const PathGrid paths = generate_spot_paths(ctm, grid, sim.paths, sim.seed, sim.substeps, sim.threads);
            const std::size_t n = paths.paths();
            const std::size_t samples = std::min(sim.sample_paths, n);
            {
                std::vector<double> r(grid.size() * n);
                for (std::size_t l = 0; l < grid.size(); ++l)
                    for (std::size_t i = 0; i < n; ++i) r[l * n + i] = paths.rate(l, i);
                const Summary s = summarize(r, grid.size(), n);
                write_summary(bundle, name + "_short_rate_summary.csv", grid, s.mean, s.lo, s.hi, s.se);
                write_paths(bundle, name + "_short_rate_paths.csv", grid, r, n, samples);
            }
            if (stage < Stage::Price) {
                result.kinds.push_back(kr);
                continue;
            }

            current = "price";
            const SwapPricer pricer(swap, ctm, seq, grid);
            const std::vector<double> prices = pricer.price_paths(paths, sim.threads);
            {
                const Summary s = summarize(prices, grid.size(), n);
                write_summary(bundle, name + "_price_summary.csv", grid, s.mean, s.lo, s.hi, s.se);
                write_paths(bundle, name + "_price_paths.csv", grid, prices, n, samples);
            }
            ReferenceValues rv;
            rv.kind = name;
            if (reference) rv.price = pricer.price_paths(*reference, sim.threads);

            if (stage >= Stage::Tva && !sc.csas.empty()) {
                current = "tva";
                TvaOptions opt;
                opt.neighbors = sim.neighbors;
                opt.threads = sim.threads;
                opt.reference = reference.get();
                const auto tva = solve_tva_backward(sc.csas, paths, prices, opt);
                for (std::size_t c = 0; c < sc.csas.size(); ++c) {
                    const TvaSummary& t = tva[c];
                    write_summary(bundle, name + "_tva_" + sc.csas[c].name + ".csv", t.times, t.mean, t.p025,
                                  t.p975, t.se);
                    kr.csa_names.push_back(sc.csas[c].name);
                    kr.theta0.push_back(t.theta0);
                    kr.theta0_se.push_back(t.theta0_se);
                    if (reference) rv.tva.push_back(t.reference);
                }
            }
            if (reference) refs.push_back(std::move(rv));
            result.kinds.push_back(kr);
        }

        if (compare) {
            current = "compare";
            write_differences(bundle, grid, reference->paths(), refs, sc.csas);
        }
        current = "manifest";
        write_text(bundle.path(kManifest), build_manifest(sc, stage, bundle, result).dump(2) + "\n");
        if (compare) {
            current = "compare";
            compare_interpolators(bundle.dir());
        }
        result.files = bundle.files();
        if (compare) result.files.push_back("compare.csv");
        return result;
    } catch (...) {
        rethrow_with_stage(current);
    }
}

std::vector<double> interior_mean_by_interval(const std::vector<double>& times, const std::vector<double>& mean,
                                              double lo, double hi) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] > lo + 1e-12 && times[i] < hi - 1e-12) {
            sum += mean[i];
            ++count;
        }
    }
    if (count == 0) return {};
    return {sum / static_cast<double>(count)};
}

}  // namespace

std::string to_string(Stage stage) {
    switch (stage) {
    case Stage::Fit: return "fit";
    case Stage::Interpolate: return "interpolate";
    case Stage::Simulate: return "simulate";
    case Stage::Price: return "price";
    case Stage::Tva: return "tva";
    case Stage::Run: return "run";
    }
    return "run";
}

Stage parse_stage(const std::string& text) {
    for (Stage s : {Stage::Fit, Stage::Interpolate, Stage::Simulate, Stage::Price, Stage::Tva, Stage::Run})
        if (to_string(s) == text) return s;
    throw ArgumentError("unknown stage '" + text + "'");
}

RunResult run_scenario(const Scenario& scenario, Stage stage) {
    Bundle bundle(scenario.output_dir);
    try {
        return run_pipeline(scenario, stage, bundle);
    } catch (...) {
        bundle.rollback();
        std::error_code ec;
        fs::remove(bundle.path("compare.csv"), ec);
        throw;
    }
}

ComparisonSummary compare_interpolators(const std::string& dir) {
    const std::string manifest_path = (fs::path(dir) / kManifest).string();
    json manifest = read_json(manifest_path);
    std::vector<std::string> kinds;
    for (const auto& [k, v] : manifest.at("results").at("kinds").items()) kinds.push_back(k);
    // Keep the run order rather than the JSON key order.
    std::vector<std::string> ordered;
    for (const auto& k : manifest.at("scenario").at("interpolators")) {
        const std::string s = k.get<std::string>();
        if (std::find(kinds.begin(), kinds.end(), s) != kinds.end()) ordered.push_back(s);
    }
    if (ordered.size() < 2) throw ComparisonError("comparison needs at least two interpolator kinds");
    std::vector<std::string> csas;
    for (const auto& c : manifest.at("scenario").at("csas")) csas.push_back(c.at("name").get<std::string>());

    const CsvTable iv = read_csv((fs::path(dir) / "intervals.csv").string());
    const auto t_lo = iv.numbers("t_lo");
    const auto t_hi = iv.numbers("t_hi");
    const auto curved = iv.numbers("curved");

    std::vector<double> grid;
    auto load = [&](const std::string& name) {
        const std::string p = (fs::path(dir) / name).string();
        if (!fs::exists(p)) throw ComparisonError("bundle lacks " + name);
        const CsvTable t = read_csv(p);
        const auto times = t.numbers("time");
        if (grid.empty()) {
            grid = times;
        } else if (times.size() != grid.size() ||
                   !std::equal(times.begin(), times.end(), grid.begin(),
                               [](double a, double b) { return std::abs(a - b) <= 1e-12; })) {
            throw ComparisonError(name + " uses a different time grid");
        }
        return t.numbers("mean");
    };

    ComparisonSummary summary;
    std::vector<std::string> header{"interval", "t_lo", "t_hi", "curved"};
    std::vector<std::vector<double>> columns;
    for (std::size_t a = 0; a < ordered.size(); ++a) {
        for (std::size_t b = a + 1; b < ordered.size(); ++b) {
            PairComparison pc;
            pc.a = ordered[a];
            pc.b = ordered[b];
            pc.csas = csas;
            const std::string pair = pc.a + "_" + pc.b;
            const auto price = load("diff_price_" + pair + ".csv");
            std::vector<std::vector<double>> tva;
            for (const auto& c : csas) tva.push_back(load("diff_tva_" + c + "_" + pair + ".csv"));
            for (std::size_t l = 0; l < t_lo.size(); ++l) {
                IntervalComparison ic;
                ic.interval = static_cast<int>(l);
                ic.t_lo = t_lo[l];
                ic.t_hi = t_hi[l];
                ic.curved = curved[l] > 0.5;
                const auto p = interior_mean_by_interval(grid, price, t_lo[l], t_hi[l]);
                if (p.empty()) throw ComparisonError("time grid has no points inside a master interval");
                ic.price_diff = p.front();
                for (const auto& tv : tva) {
                    const double v = interior_mean_by_interval(grid, tv, t_lo[l], t_hi[l]).front();
                    ic.tva_diff.push_back(v);
                    ic.flagged.push_back(ic.price_diff <= kZeroPrice && v > kNonzeroTva);
                }
                pc.intervals.push_back(ic);
            }
            header.push_back("price_" + pair);
            for (const auto& c : csas) {
                header.push_back("tva_" + c + "_" + pair);
                header.push_back("flag_" + c + "_" + pair);
            }
            summary.pairs.push_back(std::move(pc));
        }
    }

    const std::string out = (fs::path(dir) / "compare.csv").string();
    CsvWriter w(out, header);
    for (std::size_t l = 0; l < t_lo.size(); ++l) {
        std::vector<double> row{static_cast<double>(l), t_lo[l], t_hi[l], curved[l]};
        for (const auto& pc : summary.pairs) {
            const IntervalComparison& ic = pc.intervals[l];
            row.push_back(ic.price_diff);
            for (std::size_t c = 0; c < csas.size(); ++c) {
                row.push_back(ic.tva_diff[c]);
                row.push_back(ic.flagged[c] ? 1.0 : 0.0);
            }
        }
        w.row(row);
    }
    w.close();

    json& files = manifest.at("files");
    json entry = {{"name", "compare.csv"}, {"rows", t_lo.size()}, {"columns", header}};
    bool replaced = false;
    for (auto& f : files)
        if (f.at("name") == "compare.csv") {
            f = entry;
            replaced = true;
        }
    if (!replaced) files.push_back(entry);
    write_text(manifest_path, manifest.dump(2) + "\n");
    return summary;
}

std::vector<std::string> validate_bundle(const std::string& dir) {
    std::vector<std::string> problems;
    json manifest;
    try {
        manifest = read_json((fs::path(dir) / kManifest).string());
    } catch (const Error& e) {
        return {e.what()};
    }
    if (manifest.value("format", "") != "alm-report") problems.push_back("manifest format is not alm-report");
    for (const char* key : {"seed", "scenario", "tolerances", "build", "files", "library_version"})
        if (!manifest.contains(key)) problems.push_back(std::string("manifest lacks ") + key);
    if (!manifest.contains("files")) return problems;
    try {
        parse_scenario(manifest.at("scenario").dump());
    } catch (const Error& e) {
        problems.push_back(std::string("embedded scenario does not load: ") + e.what());
    }
    for (const auto& f : manifest.at("files")) {
        const std::string name = f.at("name").get<std::string>();
        const std::string path = (fs::path(dir) / name).string();
        if (!fs::exists(path)) {
            problems.push_back(name + " is missing");
            continue;
        }
        CsvTable t;
        try {
            t = read_csv(path);
        } catch (const Error& e) {
            problems.push_back(e.what());
            continue;
        }
        if (t.header != f.at("columns").get<std::vector<std::string>>())
            problems.push_back(name + ": header differs from the manifest");
        if (t.rows.size() != f.at("rows").get<std::size_t>())
            problems.push_back(name + ": row count differs from the manifest");
        bool numeric = true;
        for (std::size_t r = 0; r < t.rows.size() && numeric; ++r) {
            for (std::size_t c = 0; c < t.header.size(); ++c) {
                double v = 0.0;
                try {
                    v = t.number(r, c);
                } catch (const Error&) {
                    numeric = false;
                    break;
                }
                if (!std::isfinite(v)) {
                    numeric = false;
                    break;
                }
            }
        }
        if (!numeric) {
            problems.push_back(name + ": non-numeric or non-finite cell");
            continue;
        }
        const bool summary = t.header == kSummaryColumns;
        const bool expects_summary = name.find("_summary.csv") != std::string::npos ||
                                     name.find("_tva_") != std::string::npos || name.rfind("diff_", 0) == 0;
        if (expects_summary && !summary) problems.push_back(name + ": expected time, mean, p2.5, p97.5, se");
        if (summary) {
            for (std::size_t r = 0; r < t.rows.size(); ++r) {
                if (t.number(r, 2) > t.number(r, 3) + 1e-15) problems.push_back(name + ": p2.5 above p97.5");
                if (t.number(r, 4) < 0.0) problems.push_back(name + ": negative standard error");
                if (r && !(t.number(r, 0) > t.number(r - 1, 0))) problems.push_back(name + ": time not increasing");
            }
        }
    }
    return problems;
}

}  // namespace alm
