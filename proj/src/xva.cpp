#include "alm/xva.hpp"

#include "alm/errors.hpp"
#include "alm/knn.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>

namespace alm {

namespace {

double pos(double x) { return x > 0.0 ? x : 0.0; }
double neg(double x) { return x < 0.0 ? -x : 0.0; }

int tenor_index_at(const TenorStructure& tenors, std::size_t x, double t, const char* what) {
    const double spacing = tenors.time(x, 1) - tenors.time(x, 0);
    const double k = std::round(t / spacing);
    if (std::abs(k * spacing - t) > 1e-9 || k < 0 || k > tenors.periods(x))
        throw ArgumentError(std::string("swap ") + what + " is not a date of tenor " + tenors.tenor(x).name);
    return static_cast<int>(k);
}

struct SampleStats {
    double mean = 0.0;
    double se = 0.0;
};

SampleStats stats(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    double s = 0.0;
    for (double a : v) s += a;
    const double mean = s / n;
    double ss = 0.0;
    for (double a : v) ss += (a - mean) * (a - mean);
    const double var = v.size() > 1 ? ss / (n - 1.0) : 0.0;
    return {mean, std::sqrt(var / n)};
}

bool slice_degenerate(std::span<const double> slice, std::size_t dim) {
    const std::size_t n = slice.size() / dim;
    for (std::size_t i = 1; i < n; ++i)
        for (std::size_t a = 0; a < dim; ++a)
            if (slice[i * dim + a] != slice[a]) return false;
    return true;
}

}  // namespace

BasisSwap::BasisSwap(const TenorStructure& tenors, BasisSwapSpec spec) : tenors_(tenors), spec_(spec) {
    if (spec_.leg1_tenor >= tenors_.tenor_count() || spec_.leg2_tenor >= tenors_.tenor_count())
        throw ArgumentError("swap leg references an unknown tenor");
    if (spec_.leg1_tenor == spec_.leg2_tenor) throw ArgumentError("swap legs need distinct tenors");
    if (!(spec_.start < spec_.end)) throw ArgumentError("swap needs start < end");
    if (spec_.inception > spec_.start + 1e-12 || spec_.inception < 0.0)
        throw ArgumentError("swap inception must lie in [0, start]");
    if (!std::isfinite(spec_.spread)) throw ArgumentError("swap spread must be finite");
    p1_ = tenor_index_at(tenors_, spec_.leg1_tenor, spec_.start, "start");
    q1_ = tenor_index_at(tenors_, spec_.leg1_tenor, spec_.end, "end");
    p2_ = tenor_index_at(tenors_, spec_.leg2_tenor, spec_.start, "start");
    q2_ = tenor_index_at(tenors_, spec_.leg2_tenor, spec_.end, "end");
}

BasisSwap BasisSwap::with_spread(double spread) const {
    BasisSwapSpec s = spec_;
    s.spread = spread;
    return BasisSwap(tenors_, s);
}

int BasisSwap::ceil_index(int leg, double t) const {
    const std::size_t x = tenor_of(leg);
    const int n = tenors_.periods(x);
    int k = 0;
    while (k <= n && !(t < tenors_.time(x, k) - 1e-12)) ++k;
    return std::max(first(leg) + 1, k);
}

double BasisSwap::price(const AffineModelSpec& model, const CalibratedSequences& seq,
                        const InterpolatingFunction& U, double t, const Vector& x) const {
    if (t < 0.0 || t > model.horizon() + 1e-12) throw ArgumentError("swap valued outside [0, T_N]");
    const double log_num = log_martingale_value(model, U.value(t), t, x);
    auto ratio = [&](const Vector& w) { return std::exp(log_martingale_value(model, w, t, x) - log_num); };
    double value = 0.0;
    for (int leg = 1; leg <= 2; ++leg) {
        const std::size_t tx = tenor_of(leg);
        const double factor = leg == 1 ? 1.0 - tenors_.tenor(tx).delta * spec_.spread : 1.0;
        double sum = 0.0;
        for (int i = ceil_index(leg, t); i <= last(leg); ++i)
            sum += ratio(seq.v[tx][static_cast<std::size_t>(i) - 1]) - ratio(seq.u_tenor(tenors_, tx, i)) * factor;
        value += leg == 2 ? sum : -sum;
    }
    return value;
}

double BasisSwap::fair_spread(const AffineModelSpec& model, const CalibratedSequences& seq, double r,
                              const Vector& x) const {
    if (r > spec_.start + 1e-12) throw ArgumentError("fair spread needs r <= start");
    double legs = 0.0;
    double annuity = 0.0;
    for (int leg = 1; leg <= 2; ++leg) {
        const std::size_t tx = tenor_of(leg);
        double sum = 0.0;
        for (int i = first(leg) + 1; i <= last(leg); ++i) {
            const double mu = martingale_value(model, seq.u_tenor(tenors_, tx, i), r, x);
            sum += martingale_value(model, seq.v[tx][static_cast<std::size_t>(i) - 1], r, x) - mu;
            if (leg == 1) annuity += mu;
        }
        legs += leg == 2 ? sum : -sum;
    }
    annuity *= tenors_.tenor(spec_.leg1_tenor).delta;
    if (!(annuity > 1e-300) || !std::isfinite(annuity))
        throw DegenerateContractError("basis swap annuity vanishes");
    return legs / annuity;
}

SwapPricer::SwapPricer(const BasisSwap& swap, const ContinuousTenorModel& model,
                       const CalibratedSequences& seq, std::span<const double> times)
    : swap_(swap), times_(times.begin(), times.end()), dim_(model.spec().dimension()),
      table_([&] {
          std::vector<Vector> vecs;
          for (int leg = 1; leg <= 2; ++leg) {
              const std::size_t tx = leg == 1 ? swap.spec().leg1_tenor : swap.spec().leg2_tenor;
              for (int i = swap.first(leg) + 1; i <= swap.last(leg); ++i) {
                  vecs.push_back(seq.v[tx][static_cast<std::size_t>(i) - 1]);
                  vecs.push_back(seq.u_tenor(swap.tenors(), tx, i));
              }
          }
          return FlowTable(model.spec(), vecs, times);
      }()) {
    int slot = 0;
    for (int leg = 1; leg <= 2; ++leg) {
        for (int i = swap.first(leg) + 1; i <= swap.last(leg); ++i) {
            v_slot_[leg - 1].push_back(slot++);
            u_slot_[leg - 1].push_back(slot++);
        }
    }
    numeraire_.reserve(times_.size());
    for (double t : times_) numeraire_.push_back(model.density_exponent(t));
}

double SwapPricer::price(std::size_t step, const double* x) const {
    const double t = times_.at(step);
    const DensityExponent& e = numeraire_[step];
    double log_num = e.P;
    for (std::size_t a = 0; a < dim_; ++a) log_num += e.Q(static_cast<Eigen::Index>(a)) * x[a];
    const auto& tenors = swap_.tenors();
    double value = 0.0;
    for (int leg = 1; leg <= 2; ++leg) {
        const std::size_t tx = leg == 1 ? swap_.spec().leg1_tenor : swap_.spec().leg2_tenor;
        const double factor = leg == 1 ? 1.0 - tenors.tenor(tx).delta * swap_.spec().spread : 1.0;
        const int p = swap_.first(leg);
        double sum = 0.0;
        for (int i = swap_.ceil_index(leg, t); i <= swap_.last(leg); ++i) {
            const auto j = static_cast<std::size_t>(i - p - 1);
            const auto vs = static_cast<std::size_t>(v_slot_[leg - 1][j]);
            const auto us = static_cast<std::size_t>(u_slot_[leg - 1][j]);
            sum += std::exp(table_.log_martingale(vs, step, x) - log_num) -
                   std::exp(table_.log_martingale(us, step, x) - log_num) * factor;
        }
        value += leg == 2 ? sum : -sum;
    }
    return value;
}

std::vector<double> SwapPricer::price_paths(const PathGrid& paths, unsigned threads) const {
    if (paths.steps() != times_.size()) throw ArgumentError("path grid does not match the pricing grid");
    for (std::size_t s = 0; s < times_.size(); ++s)
        if (std::abs(paths.times()[s] - times_[s]) > 1e-12)
            throw ArgumentError("path grid does not match the pricing grid");
    if (paths.dimension() != dim_) throw ArgumentError("path dimension differs from the model");
    const std::size_t n = paths.paths();
    std::vector<double> out(times_.size() * n);
    detail::run_workers(n, threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t s = 0; s < times_.size(); ++s)
            for (std::size_t i = lo; i < hi; ++i) out[s * n + i] = price(s, paths.state(s, i));
    }, 1024);
    return out;
}

bool CsaSpec::linear() const {
    return valuation == ValuationRule::Clean && std::abs(lambda - lambda_tilde()) <= 1e-14;
}

bool CsaSpec::intensities_consistent() const { return gamma >= std::max(gamma_bank, gamma_investor); }

CsaSpec csa_preset(int index) {
    CsaSpec c;
    c.gamma_bank = 0.05;
    c.gamma_investor = 0.07;
    c.gamma = 0.10;
    c.b = 0.015;
    c.b_bar = 0.015;
    c.lambda = 0.015;
    c.lambda_bar = 0.045;
    c.recovery_bank = 0.4;
    c.recovery_investor = 0.4;
    c.recovery_funder = 1.0;
    switch (index) {
    case 1:
        c.recovery_funder = 0.4;
        break;
    case 2:
        break;
    case 3:
        c.recovery_bank = 1.0;
        break;
    case 4:
        c.recovery_bank = 1.0;
        c.valuation = ValuationRule::PreDefault;
        break;
    case 5:
        c.collateral = CollateralRule::Full;
        break;
    default:
        throw ArgumentError("CSA preset index must be 1..5");
    }
    c.name = "CSA" + std::to_string(index);
    return c;
}

void resolve_csa(const CsaSpec& csa, double P, double theta, double& Q, double& Gamma) {
    Q = csa.valuation == ValuationRule::Clean ? P : P - theta;
    Gamma = csa.collateral == CollateralRule::None ? 0.0 : Q;
}

double tva_coefficient(const CsaSpec& csa, double r, double P, double theta) {
    double Q = 0.0;
    double G = 0.0;
    resolve_csa(csa, P, theta, Q, G);
    const double funded = P - theta - G;
    return -r * theta - csa.gamma_investor * (1.0 - csa.recovery_investor) * neg(Q - G) +
           csa.gamma_bank * (1.0 - csa.recovery_bank) * pos(Q - G) + csa.b * pos(G) - csa.b_bar * neg(G) +
           csa.lambda * pos(funded) - csa.lambda_tilde() * neg(funded) + csa.gamma * (P - theta - Q);
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw ArgumentError("percentile of an empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw ArgumentError("percentile level must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double h = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<TvaSummary> solve_tva_backward(std::span<const CsaSpec> csas, const PathGrid& paths,
                                           std::span<const double> prices, const TvaOptions& options) {
    const std::size_t steps = paths.steps();
    const std::size_t n = paths.paths();
    const std::size_t dim = paths.dimension();
    const std::size_t m = options.neighbors;
    if (csas.empty()) throw ArgumentError("no CSA given");
    if (!paths.has_rate()) throw ArgumentError("TVA needs paths with the short rate");
    if (prices.size() != steps * n) throw ArgumentError("need one price per path and step");
    if (steps < 2) throw ArgumentError("TVA needs at least one time step");
    if (m == 0 || m > n) throw ArgumentError("neighbor count out of range");
    const PathGrid* ref = options.reference;
    if (ref) {
        if (ref->steps() != steps || ref->dimension() != dim)
            throw ArgumentError("reference states do not match the path grid");
        for (std::size_t s = 0; s < steps; ++s)
            if (std::abs(ref->times()[s] - paths.times()[s]) > 1e-12)
                throw ArgumentError("reference states do not match the path grid");
    }
    const std::size_t n_ref = ref ? ref->paths() : 0;

    std::vector<TvaSummary> out(csas.size());
    for (auto& s : out) {
        s.times = paths.times();
        s.mean.assign(steps, 0.0);
        s.p025.assign(steps, 0.0);
        s.p975.assign(steps, 0.0);
        s.se.assign(steps, 0.0);
        if (ref) s.reference.assign(steps * n_ref, 0.0);
        if (options.keep_surface) s.surface.assign(steps * n, 0.0);
    }
    std::vector<std::vector<double>> theta(csas.size(), std::vector<double>(n, 0.0));
    std::vector<double> response(n);

    for (std::size_t l = steps - 1; l-- > 0;) {
        const double h = paths.times()[l + 1] - paths.times()[l];
        const std::span<const double> slice = paths.slice(l);
        const bool degenerate = slice_degenerate(slice, dim);
        std::vector<std::size_t> nb;
        std::vector<std::size_t> nb_ref;
        if (!degenerate) {
            const KdTree tree(slice, dim);
            nb = knn_neighbors(tree, slice, m, options.threads);
            if (ref) nb_ref = knn_neighbors(tree, ref->slice(l), m, options.threads);
        }
        for (std::size_t c = 0; c < csas.size(); ++c) {
            auto& th = theta[c];
            for (std::size_t i = 0; i < n; ++i)
                response[i] = th[i] + h * tva_coefficient(csas[c], paths.rate(l + 1, i),
                                                          prices[(l + 1) * n + i], th[i]);
            TvaSummary& s = out[c];
            if (degenerate) {
                const SampleStats st = stats(response);
                std::fill(th.begin(), th.end(), st.mean);
                if (ref) std::fill(s.reference.begin() + static_cast<std::ptrdiff_t>(l * n_ref),
                                   s.reference.begin() + static_cast<std::ptrdiff_t>((l + 1) * n_ref), st.mean);
                if (l == 0) {
                    s.theta0 = st.mean;
                    s.theta0_se = st.se;
                }
            } else {
                for (std::size_t i = 0; i < n; ++i) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < m; ++j) acc += response[nb[i * m + j]];
                    th[i] = acc / static_cast<double>(m);
                }
                for (std::size_t i = 0; i < n_ref; ++i) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < m; ++j) acc += response[nb_ref[i * m + j]];
                    s.reference[l * n_ref + i] = acc / static_cast<double>(m);
                }
                if (l == 0) {
                    const SampleStats st = stats(th);
                    s.theta0 = st.mean;
                    s.theta0_se = stats(response).se;
                }
            }
            const SampleStats st = stats(th);
            s.mean[l] = st.mean;
            s.se[l] = l == 0 ? s.theta0_se : st.se;
            s.p025[l] = percentile(th, 0.025);
            s.p975[l] = percentile(th, 0.975);
            if (options.keep_surface) std::copy(th.begin(), th.end(), s.surface.begin() + static_cast<std::ptrdiff_t>(l * n));
        }
    }
    return out;
}

ForwardEstimate tva_forward_mc(const CsaSpec& csa, const PathGrid& paths, std::span<const double> prices) {
    if (!csa.linear()) throw UnsupportedError("forward Monte Carlo needs a CSA with a linear driver");
    if (!paths.has_rate()) throw ArgumentError("TVA needs paths with the short rate");
    const std::size_t steps = paths.steps();
    const std::size_t n = paths.paths();
    if (prices.size() != steps * n) throw ArgumentError("need one price per path and step");
    const auto& t = paths.times();
    std::vector<double> sample(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto coefficients = [&](std::size_t l, double& k, double& g0) {
            const double r = paths.rate(l, i);
            const double P = prices[l * n + i];
            g0 = tva_coefficient(csa, r, P, 0.0);
            k = g0 - tva_coefficient(csa, r, P, 1.0);
        };
        double k_prev = 0.0;
        double g_start = 0.0;
        coefficients(0, k_prev, g_start);
        double log_discount = 0.0;
        double sum = 0.0;
        for (std::size_t l = 1; l < steps; ++l) {
            double k = 0.0;
            double g0 = 0.0;
            coefficients(l, k, g0);
            const double h = t[l] - t[l - 1];
            log_discount -= 0.5 * h * (k_prev + k);
            sum += h * std::exp(log_discount) * g0;
            k_prev = k;
        }
        sample[i] = sum;
    }
    const SampleStats st = stats(sample);
    return {st.mean, st.se};
}

}  // namespace alm
