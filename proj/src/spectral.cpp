#include "ndsf/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "ndsf/errors.hpp"

namespace ndsf {

namespace {

using CMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CVec = Eigen::VectorXcd;

constexpr double kPi = std::numbers::pi;
// relative tolerance used when comparing sample times
constexpr double kGridTol = 1e-9;
// Burg reflections are pulled back to this modulus
constexpr double kReflectionClamp = 0.999999;
// roots this far outside the unit circle get reflected
constexpr double kRootSlack = 1e-9;

bool finite(const cplx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// E[w, n] = trapezoid weight * W(t_n) * exp(i w t_n)
CMat transform_matrix(const std::vector<double>& t, double a, const std::vector<double>& omega) {
    const std::size_t n = t.size();
    const double dt = n > 1 ? t[1] - t[0] : 0.0;
    std::vector<double> weight(n);
    for (std::size_t i = 0; i < n; ++i) {
        double w = parzen_weight(t[i], a) * dt;
        if (i == 0 || i + 1 == n) w *= 0.5;
        weight[i] = w;
    }
    CMat e(omega.size(), n);
    for (std::size_t r = 0; r < omega.size(); ++r)
        for (std::size_t i = 0; i < n; ++i)
            e(r, i) = weight[i] == 0.0 ? cplx{} : std::polar(weight[i], omega[r] * t[i]);
    return e;
}

void check_window_coverage(const TimeSeries& s, double a) {
    const double slack = kGridTol * std::max(1.0, a);
    if (s.t_grid.empty() || s.t_grid.front() > -a + slack || s.t_grid.back() < a - slack)
        throw DataError("time series does not cover the window [-" + std::to_string(a) + ", " + std::to_string(a) + "]");
}

// roots of z^p - c1 z^{p-1} - ... - cp
std::vector<cplx> prediction_roots(const std::vector<cplx>& c) {
    const int p = static_cast<int>(c.size());
    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(p, p);
    for (int i = 0; i < p; ++i) comp(0, i) = c[i];
    for (int i = 1; i < p; ++i) comp(i, i - 1) = 1.0;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
    if (es.info() != Eigen::Success) throw NumericError("companion eigensolver failed");
    const auto& ev = es.eigenvalues();
    return {ev.data(), ev.data() + p};
}

std::vector<cplx> coefficients_from_roots(const std::vector<cplx>& roots) {
    // poly = prod (z - r), highest power first
    std::vector<cplx> poly{1.0};
    for (const cplx& r : roots) {
        std::vector<cplx> next(poly.size() + 1, 0.0);
        for (std::size_t i = 0; i < poly.size(); ++i) {
            next[i] += poly[i];
            next[i + 1] -= r * poly[i];
        }
        poly = std::move(next);
    }
    std::vector<cplx> c(roots.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = -poly[i + 1];
    return c;
}

}  // namespace

void TimeSeries::validate() const {
    if (t_grid.size() != values.size())
        throw DataError("time series has " + std::to_string(t_grid.size()) + " times but " +
                        std::to_string(values.size()) + " values");
    if (t_grid.size() < 2) return;
    const double h = t_grid[1] - t_grid[0];
    if (!(h > 0.0)) throw DataError("time grid is not increasing");
    for (std::size_t i = 1; i < t_grid.size(); ++i) {
        const double expect = t_grid[0] + h * static_cast<double>(i);
        if (std::abs(t_grid[i] - expect) > kGridTol * std::max(1.0, std::abs(expect)) + 1e-3 * h)
            throw DataError("time grid is not uniform");
    }
    for (const cplx& v : values)
        if (!finite(v)) throw DataError("time series contains NaN or Inf");
}

void WindowSpec::validate() const {
    if (!(half_width >= 0.0) || !std::isfinite(half_width)) throw ArgumentError("window half width must be >= 0");
}

int LpSpec::resolved_order(std::size_t known) const {
    if (order > 0) return order;
    return std::max(1, std::min(32, static_cast<int>(known / 4)));
}

void LpSpec::validate(std::size_t known) const {
    if (order < 0) throw ArgumentError("prediction order must be >= 0");
    if (!std::isfinite(horizon)) throw ArgumentError("prediction horizon must be finite");
    const int p = resolved_order(known);
    if (known < static_cast<std::size_t>(2 * p + 1))
        throw ArgumentError("prediction order " + std::to_string(p) + " needs at least " +
                            std::to_string(2 * p + 1) + " samples, got " + std::to_string(known));
}

void OmegaGrid::validate() const {
    if (!(step > 0.0) || !std::isfinite(step)) throw ArgumentError("omega step must be positive");
    if (!(max >= min) || !std::isfinite(min) || !std::isfinite(max)) throw ArgumentError("omega range is empty");
}

std::vector<double> OmegaGrid::values() const {
    validate();
    const auto n = static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = min + step * static_cast<double>(i);
    return w;
}

std::vector<double> momentum_grid(int length) {
    if (length < 1) throw ArgumentError("length must be positive");
    std::vector<double> k(length);
    for (int m = 0; m < length; ++m) k[m] = 2.0 * kPi * m / length;
    return k;
}

void SpatialWindow::validate(int length) const {
    if (full()) return;
    if (first < 1 || last < first || last > length)
        throw ArgumentError("spatial window [" + std::to_string(first) + ", " + std::to_string(last) +
                            "] outside the chain");
}

std::vector<TimeSeries> spatial_ft(const CorrelationSet& cs, const SpatialWindow& window) {
    const int L = cs.length();
    const int T = cs.num_times();
    window.validate(L);
    if (cs.values.size() != static_cast<std::size_t>(L) * L * T)
        throw DimensionError("correlation set has inconsistent size");
    const int first = window.full() ? 1 : window.first;
    const int last = window.full() ? L : window.last;
    const int nsrc = last - first + 1;

    const std::size_t offset = static_cast<std::size_t>(first - 1) * L * T;
    const std::size_t count = static_cast<std::size_t>(nsrc) * L * T;
    for (std::size_t i = offset; i < offset + count; ++i)
        if (!finite(cs.values[i])) throw DataError("correlation data contains NaN or Inf");

    const auto k = momentum_grid(L);
    CMat phase(L, static_cast<std::size_t>(nsrc) * L);
    for (int m = 0; m < L; ++m)
        for (int i = first; i <= last; ++i)
            for (int j = 1; j <= L; ++j)
                phase(m, static_cast<std::size_t>(i - first) * L + (j - 1)) = std::polar(1.0 / nsrc, -k[m] * (i - j));
    Eigen::Map<const CMat> vals(cs.values.data() + offset, static_cast<Eigen::Index>(nsrc) * L, T);
    CMat out = phase * vals;

    std::vector<TimeSeries> series(L);
    for (int m = 0; m < L; ++m) {
        series[m].t_grid = cs.t_grid;
        series[m].values.assign(out.row(m).data(), out.row(m).data() + T);
    }
    return series;
}

LpResult burg_extend(const TimeSeries& series, const LpSpec& spec) {
    series.validate();
    const std::size_t n = series.size();
    spec.validate(n);
    const int p = spec.resolved_order(n);
    const auto& x = series.values;

    LpResult res;
    res.order = p;

    // Burg recursion on forward / backward errors
    std::vector<cplx> f(x.begin(), x.end()), b(x.begin(), x.end());
    std::vector<cplx> a{1.0};
    for (int m = 1; m <= p; ++m) {
        cplx num = 0.0;
        double den = 0.0;
        for (std::size_t i = m; i < n; ++i) {
            num += f[i] * std::conj(b[i - 1]);
            den += std::norm(f[i]) + std::norm(b[i - 1]);
        }
        cplx kappa = den > 0.0 ? -2.0 * num / den : cplx{};
        if (std::abs(kappa) >= 1.0) {
            kappa *= kReflectionClamp / std::abs(kappa);
            ++res.clamped_reflections;
        }
        std::vector<cplx> next(m + 1, 0.0);
        for (int i = 0; i <= m; ++i) {
            const cplx ai = i < m ? a[i] : cplx{};
            const cplx am = m - i < m ? a[m - i] : cplx{};
            next[i] = ai + kappa * std::conj(am);
        }
        a = std::move(next);
        for (std::size_t i = n - 1; i >= static_cast<std::size_t>(m); --i) {
            const cplx fi = f[i];
            f[i] = fi + kappa * b[i - 1];
            b[i] = b[i - 1] + std::conj(kappa) * fi;
        }
    }
    std::vector<cplx> c(p);
    for (int i = 0; i < p; ++i) c[i] = -a[i + 1];

    if (spec.refine) {
        // forward prediction equations x_n = sum_i c_i x_{n-i}, n = p..N-1
        const Eigen::Index rows = static_cast<Eigen::Index>(n) - p;
        Eigen::MatrixXcd m(rows, p);
        CVec rhs(rows);
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (int i = 0; i < p; ++i) m(r, i) = x[r + p - 1 - i];
            rhs(r) = x[r + p];
        }
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(m);
        const CVec sol = cod.solve(rhs);
        bool ok = true;
        for (int i = 0; i < p; ++i) ok = ok && finite(sol(i));
        if (ok)
            for (int i = 0; i < p; ++i) c[i] = sol(i);
    }

    if (spec.stabilize) {
        auto roots = prediction_roots(c);
        bool changed = false;
        for (cplx& z : roots) {
            if (std::abs(z) > 1.0 + kRootSlack) {
                z = 1.0 / std::conj(z);
                ++res.reflected_roots;
                changed = true;
            }
        }
        if (changed) c = coefficients_from_roots(roots);
    }
    res.coefficients = c;

    res.series = series;
    const double h = series.dt();
    const double t_last = series.t_grid.back();
    if (h > 0.0 && spec.horizon > t_last + 0.5 * h) {
        const auto extra = static_cast<std::size_t>(std::llround((spec.horizon - t_last) / h));
        auto& v = res.series.values;
        auto& t = res.series.t_grid;
        v.reserve(n + extra);
        t.reserve(n + extra);
        for (std::size_t s = 0; s < extra; ++s) {
            cplx next = 0.0;
            const std::size_t cur = v.size();
            for (int i = 0; i < p; ++i) next += c[i] * v[cur - 1 - i];
            v.push_back(next);
            t.push_back(series.t_grid.front() + h * static_cast<double>(cur));
        }
    }
    return res;
}

double parzen_weight(double t, double a) {
    if (!(a > 0.0)) throw ArgumentError("window half width must be positive");
    const double u = std::abs(t) / a;
    if (u <= 0.5) return 1.0 - 6.0 * u * u + 6.0 * u * u * u;
    if (u <= 1.0) return 2.0 * (1.0 - u) * (1.0 - u) * (1.0 - u);
    return 0.0;
}

double parzen_kernel(double omega, double a) {
    if (!(a > 0.0)) throw ArgumentError("window half width must be positive");
    const double x = a * omega / 4.0;
    const double s = std::abs(x) < 1e-6 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
    return 3.0 * a / (8.0 * kPi) * s * s * s * s;
}

double parzen_resolution(double a) {
    if (!(a > 0.0)) throw ArgumentError("window half width must be positive");
    return 2.0 * std::sqrt(3.0) / a;
}

std::vector<cplx> temporal_ft(const TimeSeries& series, const WindowSpec& window, const std::vector<double>& omega) {
    series.validate();
    window.validate();
    if (series.size() < 2) throw DataError("time series is too short");
    const double a = window.half_width > 0.0
                         ? window.half_width
                         : std::min(-series.t_grid.front(), series.t_grid.back());
    if (!(a > 0.0)) throw DataError("time series does not extend to negative times");
    check_window_coverage(series, a);
    const CMat e = transform_matrix(series.t_grid, a, omega);
    Eigen::Map<const CVec> f(series.values.data(), static_cast<Eigen::Index>(series.size()));
    const CVec out = e * f;
    return {out.data(), out.data() + out.size()};
}

std::vector<TimeSeries> complete_negative_times(const std::vector<TimeSeries>& per_k, int time_reversal_sign) {
    const std::size_t nk = per_k.size();
    if (nk == 0) return {};
    const std::size_t n = per_k[0].size();
    for (const auto& s : per_k) {
        s.validate();
        if (s.size() != n) throw DimensionError("momentum series differ in length");
    }
    if (n == 0 || std::abs(per_k[0].t_grid[0]) > kGridTol)
        throw DataError("series must start at t = 0");
    const double sign = time_reversal_sign < 0 ? -1.0 : 1.0;

    std::vector<TimeSeries> out(nk);
    for (std::size_t m = 0; m < nk; ++m) {
        const auto& partner = per_k[(nk - m) % nk];
        auto& o = out[m];
        o.t_grid.resize(2 * n - 1);
        o.values.resize(2 * n - 1);
        for (std::size_t i = 1; i < n; ++i) {
            o.t_grid[n - 1 - i] = -per_k[m].t_grid[i];
            o.values[n - 1 - i] = sign * std::conj(partner.values[i]);
        }
        for (std::size_t i = 0; i < n; ++i) {
            o.t_grid[n - 1 + i] = per_k[m].t_grid[i];
            o.values[n - 1 + i] = per_k[m].values[i];
        }
    }
    return out;
}

std::vector<double> SpectralGrid::real_row(std::size_t k) const {
    std::vector<double> r(num_omega());
    for (std::size_t w = 0; w < r.size(); ++w) r[w] = at(k, w).real();
    return r;
}

SpectralGrid ndsf_pipeline(const CorrelationSet& cs, const LpSpec& lp, const WindowSpec& window,
                           const OmegaGrid& omega, const SpatialWindow& spatial) {
    window.validate();
    const auto w = omega.values();
    if (cs.num_times() < 2) throw DataError("correlation set has fewer than two time samples");

    SpectralGrid grid;
    auto& man = grid.manifest;
    man.length = cs.length();
    man.gamma = cs.params.gamma;
    man.hz = cs.params.hz;
    man.state = to_string(cs.state_kind);
    man.op_pair = std::string{to_char(cs.alpha)} + to_char(cs.beta);
    man.dt = cs.dt();
    man.max_bond_reached = cs.max_bond_reached;
    man.accumulated_discard = cs.max_accumulated_discard;
    man.overflow = cs.overflow;
    man.t_max_known = cs.t_grid.back();
    man.time_reversal_sign = cs.time_reversal_sign;
    if (!spatial.full()) {
        man.spatial_mode = "bulk";
        man.spatial_first = spatial.first;
        man.spatial_last = spatial.last;
    }

    auto per_k = spatial_ft(cs, spatial);
    for (const auto& s : per_k) man.spatial_sum_rule += s.values[0].real();

    man.lp_enabled = lp.enabled;
    if (lp.enabled) {
        man.lp_stabilize = lp.stabilize;
        man.lp_refine = lp.refine;
        for (auto& s : per_k) {
            auto r = burg_extend(s, lp);
            man.lp_order = r.order;
            man.lp_clamped_reflections += r.clamped_reflections;
            man.lp_reflected_roots += r.reflected_roots;
            s = std::move(r.series);
        }
    }
    const double t_ext = per_k[0].t_grid.back();
    man.t_max_extended = t_ext;

    const double a = window.half_width > 0.0 ? window.half_width : t_ext;
    if (a > t_ext * (1.0 + kGridTol))
        throw DataError("window half width " + std::to_string(a) + " exceeds available time " + std::to_string(t_ext));
    man.window_half_width = a;
    man.resolution_sigma = parzen_resolution(a);

    const auto full = complete_negative_times(per_k, cs.time_reversal_sign);
    check_window_coverage(full[0], a);

    const CMat e = transform_matrix(full[0].t_grid, a, w);
    const std::size_t nt = full[0].size();
    CMat f(nt, full.size());
    for (std::size_t m = 0; m < full.size(); ++m)
        for (std::size_t i = 0; i < nt; ++i) f(i, m) = full[m].values[i];
    const CMat s = (e * f).transpose();

    grid.k_grid = momentum_grid(cs.length());
    grid.omega_grid = w;
    grid.values.assign(s.data(), s.data() + s.size());
    grid.resolution_sigma = man.resolution_sigma;
    return grid;
}

std::vector<Peak> extract_peaks(const std::vector<double>& row, const std::vector<double>& omega, double threshold) {
    if (row.size() != omega.size()) throw DimensionError("row and omega grid differ in length");
    std::vector<Peak> peaks;
    const std::size_t n = row.size();
    if (n < 3) return peaks;
    const double top = *std::max_element(row.begin(), row.end());
    if (!(top > 0.0)) return peaks;
    const double floor = threshold * top;
    const double h = omega[1] - omega[0];

    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double y0 = row[i], ym = row[i - 1], yp = row[i + 1];
        if (!(y0 > ym && y0 >= yp && y0 > floor)) continue;
        Peak pk;
        const double curv = ym - 2.0 * y0 + yp;
        double delta = curv < 0.0 ? 0.5 * (ym - yp) / curv : 0.0;
        delta = std::clamp(delta, -0.5, 0.5);
        pk.omega = omega[i] + delta * h;
        pk.height = y0 - 0.25 * (ym - yp) * delta;

        const double half = 0.5 * pk.height;
        double left = omega.front(), right = omega.back();
        for (std::size_t j = i; j > 0; --j) {
            if (row[j - 1] < half) {
                left = omega[j - 1] + (half - row[j - 1]) / (row[j] - row[j - 1]) * h;
                break;
            }
        }
        for (std::size_t j = i; j + 1 < n; ++j) {
            if (row[j + 1] < half) {
                right = omega[j] + (row[j] - half) / (row[j] - row[j + 1]) * h;
                break;
            }
        }
        pk.width = right - left;
        peaks.push_back(pk);
    }
    return peaks;
}

std::vector<Peak> extract_peaks(const SpectralGrid& grid, std::size_t k_index, double threshold) {
    if (k_index >= grid.num_k()) throw ArgumentError("momentum index out of range");
    return extract_peaks(grid.real_row(k_index), grid.omega_grid, threshold);
}

}  // namespace ndsf
