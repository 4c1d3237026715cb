#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace alm {

/// One tenor x: payments every `step` master intervals, accrual delta_x.
struct Tenor {
    std::string name;
    int step = 1;
    double delta = 0.0;
};

/// Equidistant master grid T_0 = 0 < ... < T_N plus tenor subgrids T^x.
class TenorStructure {
public:
    TenorStructure(double horizon, int n_intervals, std::vector<Tenor> tenors);

    double horizon() const { return horizon_; }
    int intervals() const { return n_; }
    double spacing() const { return horizon_ / n_; }
    double master_time(int l) const;

    std::size_t tenor_count() const { return tenors_.size(); }
    const Tenor& tenor(std::size_t x) const { return tenors_.at(x); }
    const std::vector<Tenor>& tenors() const { return tenors_; }
    /// Index of the tenor with this name; throws ArgumentError when absent.
    std::size_t find(const std::string& name) const;

    /// N^x, the number of accrual periods of tenor x.
    int periods(std::size_t x) const;
    /// T^x_k.
    double time(std::size_t x, int k) const;
    /// Master index l with T_l = T^x_k.
    int master_index(std::size_t x, int k) const;

    /// Smallest master index l with t < T_l (N + 1 past the horizon).
    int next_master_index(double t) const;
    /// True when t is within 1e-12 of a master date; sets the index.
    bool on_master_date(double t, int* index = nullptr) const;

private:
    double horizon_;
    int n_;
    std::vector<Tenor> tenors_;
};

/// OIS discount factors on the master grid and initial forward LIBOR rates.
struct InitialTermStructure {
    /// B(0, T_l), l = 0..N, with B(0, T_0) = 1.
    std::vector<double> discount;
    /// libor[x][k] = L^x_k(0) for k = 1..N^x; entry 0 is unused.
    std::vector<std::vector<double>> libor;

    /// F^x_k(0) implied by the discount factors.
    double ois_forward(const TenorStructure& tenors, std::size_t x, int k) const;

    /// Checks the ordering of the discount factors and L >= F; throws ArgumentError.
    void validate(const TenorStructure& tenors) const;
};

}  // namespace alm
