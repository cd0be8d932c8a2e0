#pragma once

#include <string>
#include <vector>

#include "ndsf/evolution.hpp"

namespace ndsf {

/// Samples on a uniform time grid.
struct TimeSeries {
    std::vector<double> t_grid;
    std::vector<cplx> values;

    std::size_t size() const { return values.size(); }
    double dt() const { return t_grid.size() > 1 ? t_grid[1] - t_grid[0] : 0.0; }
    /// Throws DataError on mismatched lengths or a non-uniform grid.
    void validate() const;
};

enum class WindowFamily { Parzen };

struct WindowSpec {
    WindowFamily family = WindowFamily::Parzen;
    double half_width = 0.0;  // a; 0 means "the longest available time"

    void validate() const;
};

/// Burg linear prediction. The coefficients start from Burg's recursion and
/// are then refined by a minimum-norm least-squares fit of the forward
/// prediction equations (`refine`), which makes the continuation exact for
/// noiseless line spectra.
struct LpSpec {
    bool enabled = true;
    int order = 0;         // 0: min(32, known / 4)
    double horizon = 18.0; // extend up to this time
    bool stabilize = true; // reflect prediction roots with |z| > 1
    bool refine = true;

    int resolved_order(std::size_t known) const;
    void validate(std::size_t known) const;
};

struct LpResult {
    TimeSeries series;              // known samples followed by the prediction
    std::vector<cplx> coefficients; // x_n = sum_i a_i x_{n-i}, i = 1..order
    int order = 0;
    int clamped_reflections = 0;    // Burg reflection coefficients with |kappa| >= 1
    int reflected_roots = 0;
};

struct OmegaGrid {
    double min = -8.0;
    double max = 8.0;
    double step = 0.02;

    void validate() const;
    std::vector<double> values() const;
};

/// Momenta 2 pi m / L, m = 0..L-1.
std::vector<double> momentum_grid(int length);

/// Source sites entering the spatial transform. With the full chain the
/// transform is (1/L) sum_{i,j}; with a central window [first, last] only
/// sources i in the window are kept and the prefactor becomes 1/(last-first+1).
struct SpatialWindow {
    int first = 0;  // 0: whole chain
    int last = 0;

    bool full() const { return first == 0; }
    void validate(int length) const;
};

/// S(k, t) = (1/L) sum_{i,j} e^{-ik(i-j)} S(i, j, t) for every grid momentum,
/// on the non-negative time grid of `cs`.
std::vector<TimeSeries> spatial_ft(const CorrelationSet& cs, const SpatialWindow& window = {});

LpResult burg_extend(const TimeSeries& series, const LpSpec& spec);

/// W(t; a) of the Parzen family.
double parzen_weight(double t, double a);

/// (1/2pi) times the Fourier transform of W(t; a): 96 sin^4(a w / 4) / (pi a^3 w^4).
/// Unit area; standard deviation 2 sqrt(3) / a.
double parzen_kernel(double omega, double a);

/// Standard error of the kernel, 2 sqrt(3) / a.
double parzen_resolution(double a);

/// Trapezoidal integral of e^{i w t} f(t) W(t; a) over the sampled grid,
/// which has to cover [-a, a].
std::vector<cplx> temporal_ft(const TimeSeries& series, const WindowSpec& window, const std::vector<double>& omega);

/// Extend every per-k series to negative times using
/// S(k, -t) = sign * conj(S(-k, t)).
std::vector<TimeSeries> complete_negative_times(const std::vector<TimeSeries>& per_k, int time_reversal_sign);

struct SpectralManifest {
    int length = 0;
    double gamma = 0.0;
    double hz = 0.0;
    std::string state;
    std::string op_pair;
    double dt = 0.0;
    std::size_t max_bond_cap = 0;
    double rel_cutoff = 0.0;
    std::size_t max_bond_reached = 0;
    double accumulated_discard = 0.0;
    bool overflow = false;
    double t_max_known = 0.0;
    double t_max_extended = 0.0;
    bool lp_enabled = false;
    int lp_order = 0;
    bool lp_stabilize = false;
    bool lp_refine = false;
    int lp_clamped_reflections = 0;
    int lp_reflected_roots = 0;
    std::string window_family = "PARZEN";
    double window_half_width = 0.0;
    double resolution_sigma = 0.0;
    std::string spatial_mode = "full";
    int spatial_first = 0;
    int spatial_last = 0;
    int time_reversal_sign = 1;
    double spatial_sum_rule = 0.0;  // sum_k S(k, 0)
};

/// S(k, w) on a (k, w) lattice; values are stored [k_index * W + w_index].
struct SpectralGrid {
    std::vector<double> k_grid;
    std::vector<double> omega_grid;
    std::vector<cplx> values;
    double resolution_sigma = 0.0;
    SpectralManifest manifest;

    std::size_t num_k() const { return k_grid.size(); }
    std::size_t num_omega() const { return omega_grid.size(); }
    const cplx& at(std::size_t k, std::size_t w) const { return values[k * omega_grid.size() + w]; }
    cplx& at(std::size_t k, std::size_t w) { return values[k * omega_grid.size() + w]; }
    std::vector<double> real_row(std::size_t k) const;
};

/// spatial transform, per-k linear prediction, conjugate completion, Parzen
/// window with a = extended t_M (unless the window fixes a), temporal transform.
SpectralGrid ndsf_pipeline(const CorrelationSet& cs, const LpSpec& lp, const WindowSpec& window,
                           const OmegaGrid& omega, const SpatialWindow& spatial = {});

struct Peak {
    double omega = 0.0;
    double height = 0.0;
    double width = 0.0;  // full width at half maximum
};

/// Local maxima of `row` above threshold * max(row), centers refined by a
/// three-point parabola, sorted by omega.
std::vector<Peak> extract_peaks(const std::vector<double>& row, const std::vector<double>& omega, double threshold);
std::vector<Peak> extract_peaks(const SpectralGrid& grid, std::size_t k_index, double threshold);

}  // namespace ndsf
