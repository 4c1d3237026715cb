#include "alm/tenor.hpp"

#include "alm/errors.hpp"

#include <cmath>

namespace alm {

namespace {
constexpr double kDateTol = 1e-12;
}

TenorStructure::TenorStructure(double horizon, int n_intervals, std::vector<Tenor> tenors)
    : horizon_(horizon), n_(n_intervals), tenors_(std::move(tenors)) {
    if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) throw ArgumentError("horizon must be positive");
    if (n_ < 1) throw ArgumentError("need at least one master interval");
    for (auto& t : tenors_) {
        if (t.step < 1 || n_ % t.step != 0)
            throw ArgumentError("tenor " + t.name + " does not divide the master grid");
        if (t.delta == 0.0) t.delta = t.step * spacing();
        if (!(t.delta > 0.0)) throw ArgumentError("tenor " + t.name + " needs a positive accrual");
    }
    for (std::size_t i = 0; i < tenors_.size(); ++i)
        for (std::size_t j = i + 1; j < tenors_.size(); ++j)
            if (tenors_[i].name == tenors_[j].name)
                throw ArgumentError("duplicate tenor " + tenors_[i].name);
}

double TenorStructure::master_time(int l) const {
    if (l < 0 || l > n_) throw ArgumentError("master index out of range");
    return l == n_ ? horizon_ : horizon_ * static_cast<double>(l) / static_cast<double>(n_);
}

std::size_t TenorStructure::find(const std::string& name) const {
    for (std::size_t i = 0; i < tenors_.size(); ++i)
        if (tenors_[i].name == name) return i;
    throw ArgumentError("unknown tenor " + name);
}

int TenorStructure::periods(std::size_t x) const { return n_ / tenor(x).step; }

double TenorStructure::time(std::size_t x, int k) const { return master_time(master_index(x, k)); }

int TenorStructure::master_index(std::size_t x, int k) const {
    if (k < 0 || k > periods(x)) throw ArgumentError("tenor index out of range");
    return k * tenor(x).step;
}

int TenorStructure::next_master_index(double t) const {
    int l = static_cast<int>(std::floor(t / spacing()));
    if (l < 0) l = 0;
    while (l <= n_ && !(t < master_time(l) - kDateTol)) ++l;
    while (l > 0 && t < master_time(l - 1) - kDateTol) --l;
    return l;
}

bool TenorStructure::on_master_date(double t, int* index) const {
    const long l = std::lround(t / spacing());
    if (l < 0 || l > n_) return false;
    if (std::abs(master_time(static_cast<int>(l)) - t) > kDateTol) return false;
    if (index) *index = static_cast<int>(l);
    return true;
}

double InitialTermStructure::ois_forward(const TenorStructure& tenors, std::size_t x, int k) const {
    const int hi = tenors.master_index(x, k);
    const int lo = tenors.master_index(x, k - 1);
    return (discount.at(static_cast<std::size_t>(lo)) / discount.at(static_cast<std::size_t>(hi)) - 1.0) /
           tenors.tenor(x).delta;
}

void InitialTermStructure::validate(const TenorStructure& tenors) const {
    const auto n = static_cast<std::size_t>(tenors.intervals());
    if (discount.size() != n + 1) throw ArgumentError("need discount factors for T_0..T_N");
    if (std::abs(discount[0] - 1.0) > 1e-14) throw ArgumentError("B(0, T_0) must equal 1");
    for (std::size_t l = 0; l <= n; ++l) {
        if (!(discount[l] > 0.0) || !std::isfinite(discount[l]))
            throw ArgumentError("discount factors must be positive");
        if (l > 0 && discount[l] > discount[l - 1])
            throw ArgumentError("discount factors must be non-increasing in maturity");
    }
    if (libor.size() != tenors.tenor_count())
        throw ArgumentError("need one LIBOR curve per tenor");
    for (std::size_t x = 0; x < tenors.tenor_count(); ++x) {
        const auto nx = static_cast<std::size_t>(tenors.periods(x));
        if (libor[x].size() != nx + 1)
            throw ArgumentError("LIBOR curve " + tenors.tenor(x).name + " has wrong length");
        for (std::size_t k = 1; k <= nx; ++k) {
            const double f = ois_forward(tenors, x, static_cast<int>(k));
            if (!std::isfinite(libor[x][k]) || libor[x][k] < f - 1e-15)
                throw ArgumentError("LIBOR rate below OIS forward for tenor " + tenors.tenor(x).name +
                                    " period " + std::to_string(k));
        }
    }
}

}  // namespace alm
