#include "ndsf/evolution.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <type_traits>

#include <Eigen/QR>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "ndsf/errors.hpp"

namespace ndsf {

void EvolutionConfig::validate() const {
    truncation.validate();
    if (!(dt > 0.0)) throw ArgumentError("dt must be positive");
    if (!(t_max > 0.0)) throw ArgumentError("t_max must be positive");
    const double ratio = t_max / dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio))
        throw ArgumentError("t_max must be an integer multiple of dt");
    if (sample_stride < 1) throw ArgumentError("sample_stride must be positive");
    if (steps() % sample_stride != 0) throw ArgumentError("number of steps must be a multiple of sample_stride");
    if (!(abort_threshold > 0.0)) throw ArgumentError("abort_threshold must be positive");
}

int EvolutionConfig::steps() const { return static_cast<int>(std::lround(t_max / dt)); }

int EvolutionConfig::samples() const { return steps() / sample_stride + 1; }

std::vector<double> EvolutionConfig::sample_times() const {
    std::vector<double> t(static_cast<std::size_t>(samples()));
    for (std::size_t n = 0; n < t.size(); ++n) t[n] = static_cast<double>(n) * sample_stride * dt;
    return t;
}

void write_bond_dump(std::ostream& os, const StepReport& r) {
    char buf[160];
    for (std::size_t b = 0; b < r.bond_extents.size(); ++b) {
        std::snprintf(buf, sizeof buf, "%d %.17g %zu %zu %.17g\n", r.step, r.time, b + 1, r.bond_extents[b],
                      r.bond_discard[b]);
        os << buf;
    }
}

namespace {

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Relative eigenvalue floor of a Gram matrix below which directions are
// rounding noise.
constexpr double kGramFloor = 1e-14;

void hermitian_eig(Mat<double>& g, Eigen::VectorXd& w) {
    const auto n = static_cast<lapack_int>(g.rows());
    w.resize(n);
    if (n == 0) return;
    const lapack_int info = LAPACKE_dsyevd(LAPACK_ROW_MAJOR, 'V', 'U', n, g.data(), n, w.data());
    if (info != 0) throw NumericError("symmetric eigensolver failed (info = " + std::to_string(info) + ")");
}

void hermitian_eig(Mat<cplx>& g, Eigen::VectorXd& w) {
    const auto n = static_cast<lapack_int>(g.rows());
    w.resize(n);
    if (n == 0) return;
    const lapack_int info = LAPACKE_zheevd(LAPACK_ROW_MAJOR, 'V', 'U', n, g.data(), n, w.data());
    if (info != 0) throw NumericError("Hermitian eigensolver failed (info = " + std::to_string(info) + ")");
}

template <class T>
void thin_qr(const Mat<T>& a, Mat<T>& q, Mat<T>& r) {
    const Eigen::Index k = std::min(a.rows(), a.cols());
    Eigen::HouseholderQR<Mat<T>> qr(a);
    q = qr.householderQ() * Mat<T>::Identity(a.rows(), k);
    r = qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
}

// Operator chain with cores stored as (left * 4) x right matrices; the same
// buffer read as left x (4 * right) gives the right-leaning view.
template <class T>
struct Chain {
    std::vector<Mat<T>> cores;
    int center = 0;
    double discard = 0.0;

    int length() const { return static_cast<int>(cores.size()); }
    static Eigen::Index left(const Mat<T>& c) { return c.rows() / 4; }
    static Eigen::Map<const Mat<T>> right_view(const Mat<T>& c) { return {c.data(), c.rows() / 4, 4 * c.cols()}; }

    std::vector<std::size_t> bond_extents() const {
        std::vector<std::size_t> b;
        for (std::size_t s = 0; s + 1 < cores.size(); ++s) b.push_back(static_cast<std::size_t>(cores[s].cols()));
        return b;
    }
};

// Store an (r x 4 * right) product as an (r * 4) x right core.
template <class T>
Mat<T> as_core(const Mat<T>& m, Eigen::Index right) {
    Mat<T> c(m.size() / right, right);
    std::copy(m.data(), m.data() + m.size(), c.data());
    return c;
}

template <class T>
void move_center_right(Chain<T>& ch, int s) {
    auto& a = ch.cores[static_cast<std::size_t>(s)];
    auto& b = ch.cores[static_cast<std::size_t>(s + 1)];
    Mat<T> q, r;
    thin_qr(a, q, r);
    const Mat<T> nb = r * Chain<T>::right_view(b);
    const Eigen::Index dr = b.cols();
    a = std::move(q);
    b = as_core<T>(nb, dr);
    ch.center = s + 1;
}

template <class T>
void move_center_left(Chain<T>& ch, int s) {
    auto& a = ch.cores[static_cast<std::size_t>(s - 1)];
    auto& b = ch.cores[static_cast<std::size_t>(s)];
    Mat<T> q, r;
    thin_qr<T>(Chain<T>::right_view(b).adjoint(), q, r);
    const Eigen::Index dr = b.cols();
    b = as_core<T>(q.adjoint(), dr);
    a = a * r.adjoint();
    ch.center = s - 1;
}

template <class T>
void move_center(Chain<T>& ch, int target) {
    while (ch.center < target) move_center_right(ch, ch.center);
    while (ch.center > target) move_center_left(ch, ch.center);
}

template <class T>
struct Split {
    Mat<T> left, right;
    double discarded_weight = 0.0;
};

// Truncated factorization theta ~ left * right through the eigenvectors of
// the smaller Gram matrix. The kept subspace is the dominant singular
// subspace, so the dropped weight equals the tail of the spectrum. Either
// factor can be made the isometry.
template <class T>
Split<T> gram_split(const Mat<T>& theta, const TruncationSpec& spec, bool left_isometric) {
    const bool by_rows = theta.rows() <= theta.cols();
    Mat<T> g = by_rows ? Mat<T>(theta * theta.adjoint()) : Mat<T>(theta.adjoint() * theta);
    Eigen::VectorXd w;
    hermitian_eig(g, w);
    const Eigen::Index d = w.size();
    std::vector<double> sq(static_cast<std::size_t>(d));
    for (Eigen::Index i = 0; i < d; ++i) sq[static_cast<std::size_t>(i)] = std::max(w[d - 1 - i], 0.0);
    const TruncationPlan plan = plan_truncation(sq, spec, kGramFloor);
    const auto k = static_cast<Eigen::Index>(plan.keep);
    Mat<T> vecs(g.rows(), k);
    for (Eigen::Index j = 0; j < k; ++j) vecs.col(j) = g.col(d - 1 - j);

    Split<T> out;
    out.discarded_weight = plan.discarded_weight;
    Mat<T> q, r;
    if (by_rows) {
        Mat<T> right = vecs.adjoint() * theta;
        if (left_isometric) {
            out.left = std::move(vecs);
            out.right = std::move(right);
        } else {
            thin_qr<T>(right.adjoint(), q, r);
            out.left = vecs * r.adjoint();
            out.right = q.adjoint();
        }
    } else {
        Mat<T> left = theta * vecs;
        if (left_isometric) {
            thin_qr(left, q, r);
            out.left = std::move(q);
            out.right = r * vecs.adjoint();
        } else {
            out.left = std::move(left);
            out.right = vecs.adjoint();
        }
    }
    return out;
}

// Apply a 16x16 superoperator on sites (s, s+1) and truncate the bond; the
// center ends on s+1 (move_right) or s. Returns the discarded weight.
template <class T>
double apply_two_site(Chain<T>& ch, int s, const Mat<T>& superop, const TruncationSpec& spec, bool move_right) {
    auto& a = ch.cores[static_cast<std::size_t>(s)];
    auto& b = ch.cores[static_cast<std::size_t>(s + 1)];
    const Eigen::Index dl = Chain<T>::left(a), dr = b.cols();
    Mat<T> theta = a * Chain<T>::right_view(b);  // (dl * 4) x (4 * dr)
    Mat<T> block(16, dr);
    for (Eigen::Index l = 0; l < dl; ++l) {
        Eigen::Map<Mat<T>> view(theta.data() + l * 16 * dr, 16, dr);
        block.noalias() = superop * view;
        view = block;
    }
    Split<T> sp = gram_split(theta, spec, move_right);
    a = std::move(sp.left);
    b = as_core<T>(sp.right, dr);
    ch.center = move_right ? s + 1 : s;
    return sp.discarded_weight;
}

// Superoperator X -> Lm X Rm on two folded sites, indexed
// [(p1, p2), (p1', p2')] with p = 2 * out + in.
Mat<cplx> two_site_superop(const DenseTensor& lm, const DenseTensor& rm) {
    Mat<cplx> s(16, 16);
    for (std::size_t o1 = 0; o1 < 2; ++o1)
        for (std::size_t i1 = 0; i1 < 2; ++i1)
            for (std::size_t o2 = 0; o2 < 2; ++o2)
                for (std::size_t i2 = 0; i2 < 2; ++i2)
                    for (std::size_t a1 = 0; a1 < 2; ++a1)
                        for (std::size_t b1 = 0; b1 < 2; ++b1)
                            for (std::size_t a2 = 0; a2 < 2; ++a2)
                                for (std::size_t b2 = 0; b2 < 2; ++b2)
                                    s(static_cast<Eigen::Index>((2 * o1 + i1) * 4 + (2 * o2 + i2)),
                                      static_cast<Eigen::Index>((2 * a1 + b1) * 4 + (2 * a2 + b2))) =
                                        lm({2 * o1 + o2, 2 * a1 + a2}) * rm({2 * b1 + b2, 2 * i1 + i2});
    return s;
}

// Folded index p = 2 * out + in against the Pauli basis sigma_mu / sqrt(2),
// mu = (1, x, y, z). Unitary, so bond spectra are unchanged by the switch.
Mat<cplx> pauli_basis() {
    Mat<cplx> m(4, 4);
    const double h = 1.0 / std::sqrt(2.0);
    const cplx i{0.0, 1.0};
    // columns: identity, x, y, z; rows: p = (00, 01, 10, 11)
    m << h, 0.0, 0.0, h,
         0.0, h, -i * h, 0.0,
         0.0, h, i * h, 0.0,
         h, 0.0, 0.0, -h;
    return m;
}

Mat<double> to_pauli_superop(const Mat<cplx>& folded) {
    const Mat<cplx> m = pauli_basis();
    Mat<cplx> mm(16, 16);
    for (Eigen::Index a = 0; a < 4; ++a)
        for (Eigen::Index b = 0; b < 4; ++b) mm.block(a * 4, b * 4, 4, 4) = m(a, b) * m;
    const Mat<cplx> p = mm.adjoint() * folded * mm;
    if (p.imag().cwiseAbs().maxCoeff() > 1e-12)
        throw NumericError("gate superoperator does not preserve Hermiticity");
    return p.real();
}

// Pauli coefficients of a folded core when they are all real, i.e. the core
// is a Hermitian-valued tensor.
bool real_pauli_core(const DenseTensor& core, Mat<double>& out) {
    const Mat<cplx> m = pauli_basis();
    const auto dl = static_cast<Eigen::Index>(core.extent(0)), dr = static_cast<Eigen::Index>(core.extent(3));
    out.resize(dl * 4, dr);
    const cplx* d = core.data().data();
    double scale = 0.0, imag = 0.0;
    for (Eigen::Index l = 0; l < dl; ++l) {
        Eigen::Map<const Mat<cplx>> in(d + l * 4 * dr, 4, dr);
        const Mat<cplx> c = m.adjoint() * in;
        scale = std::max(scale, c.cwiseAbs().maxCoeff());
        imag = std::max(imag, c.imag().cwiseAbs().maxCoeff());
        out.block(l * 4, 0, 4, dr) = c.real();
    }
    return imag <= 1e-14 * std::max(scale, 1.0);
}

Chain<double> to_real_chain(const OperatorMps& op, bool& ok) {
    Chain<double> ch;
    ok = true;
    for (const auto& c : op.cores) {
        ch.cores.emplace_back();
        if (!real_pauli_core(c, ch.cores.back())) ok = false;
    }
    ch.center = std::max(op.center, 0);
    ch.discard = op.accumulated_discard;
    return ch;
}

Chain<cplx> to_complex_chain(const OperatorMps& op) {
    Chain<cplx> ch;
    for (const auto& c : op.cores) {
        const auto rows = static_cast<Eigen::Index>(c.extent(0) * 4), cols = static_cast<Eigen::Index>(c.extent(3));
        ch.cores.push_back(Eigen::Map<const Mat<cplx>>(c.data().data(), rows, cols));
    }
    ch.center = std::max(op.center, 0);
    ch.discard = op.accumulated_discard;
    return ch;
}

DenseTensor folded_core(const Mat<cplx>& c) {
    const auto dl = static_cast<std::size_t>(c.rows() / 4), dr = static_cast<std::size_t>(c.cols());
    return DenseTensor({dl, 2, 2, dr}, std::vector<cplx>(c.data(), c.data() + c.size()));
}

DenseTensor folded_core(const Mat<double>& c) {
    const Mat<cplx> m = pauli_basis();
    const Eigen::Index dl = c.rows() / 4, dr = c.cols();
    Mat<cplx> out(dl * 4, dr);
    for (Eigen::Index l = 0; l < dl; ++l) out.block(l * 4, 0, 4, dr) = m * c.block(l * 4, 0, 4, dr).cast<cplx>();
    return folded_core(out);
}

template <class T>
void write_back(const Chain<T>& ch, OperatorMps& op) {
    op.cores.clear();
    for (const auto& c : ch.cores) op.cores.push_back(folded_core(c));
    op.center = ch.center;
    op.accumulated_discard = ch.discard;
}

template <class T>
void canonicalize_chain(Chain<T>& ch, int center) {
    ch.center = 0;
    for (int s = 0; s + 1 < ch.length(); ++s) move_center_right(ch, s);
    for (int s = ch.length() - 1; s > center; --s) move_center_left(ch, s);
}

template <class T>
struct PreparedLayer {
    std::vector<int> sites;  // 0-based left site of each gate, ascending
    std::vector<Mat<T>> superops;
};

template <class T>
std::vector<PreparedLayer<T>> prepare_layers(const GateSchedule& forward, const GateSchedule& backward,
                                             Picture picture) {
    if (forward.layers.size() != backward.layers.size())
        throw ArgumentError("forward and backward schedules have different layer counts");
    // swapped schedules are legitimate: they evolve to negative times
    std::vector<PreparedLayer<T>> layers;
    for (std::size_t l = 0; l < forward.layers.size(); ++l) {
        const auto& fl = forward.layers[l].gates;
        const auto& bl = backward.layers[l].gates;
        if (fl.size() != bl.size()) throw ArgumentError("forward and backward layers do not match");
        PreparedLayer<T> pl;
        for (std::size_t g = 0; g < fl.size(); ++g) {
            if (fl[g].site != bl[g].site) throw ArgumentError("forward and backward gates act on different bonds");
            pl.sites.push_back(fl[g].site - 1);
            // Heisenberg: A -> B A F; Schrodinger: rho -> F rho B
            const Mat<cplx> s = picture == Picture::Heisenberg ? two_site_superop(bl[g].unitary, fl[g].unitary)
                                                               : two_site_superop(fl[g].unitary, bl[g].unitary);
            if constexpr (std::is_same_v<T, double>)
                pl.superops.push_back(to_pauli_superop(s));
            else
                pl.superops.push_back(s);
        }
        layers.push_back(std::move(pl));
    }
    // Heisenberg conjugation applies the last forward layer innermost.
    if (picture == Picture::Heisenberg) std::reverse(layers.begin(), layers.end());
    return layers;
}

template <class T>
void apply_layer(Chain<T>& ch, const PreparedLayer<T>& layer, const TruncationSpec& spec,
                 std::vector<double>& bond_discard) {
    if (layer.sites.empty()) return;
    // sweep away from whichever end of the layer is closer to the center
    const bool rightwards =
        std::abs(ch.center - layer.sites.front()) <= std::abs(ch.center - (layer.sites.back() + 1));
    const std::size_t n = layer.sites.size();
    for (std::size_t g = 0; g < n; ++g) {
        const std::size_t idx = rightwards ? g : n - 1 - g;
        const int s = layer.sites[idx];
        move_center(ch, rightwards ? s : s + 1);
        const double w = apply_two_site(ch, s, layer.superops[idx], spec, rightwards);
        bond_discard[static_cast<std::size_t>(s)] += w;
        ch.discard += w;
    }
}

template <class T>
OperatorMps run_evolution(Chain<T> ch, OperatorMps op, const GateSchedule& forward, const GateSchedule& backward,
                          const EvolutionConfig& cfg, const SampleCallback& on_sample, const StepCallback& on_step) {
    const auto layers = prepare_layers<T>(forward, backward, cfg.picture);
    const int L = ch.length();
    if (op.center < 0) canonicalize_chain(ch, 0);

    StepReport report;
    report.bond_discard.assign(static_cast<std::size_t>(L - 1), 0.0);
    const int steps = cfg.steps();
    const double t0 = op.time_stamp;
    for (int step = 1; step <= steps; ++step) {
        std::fill(report.bond_discard.begin(), report.bond_discard.end(), 0.0);
        for (const auto& layer : layers) apply_layer(ch, layer, cfg.truncation, report.bond_discard);
        op.time_stamp = t0 + step * cfg.dt;
        if (on_step) {
            report.step = step;
            report.time = op.time_stamp;
            report.bond_extents = ch.bond_extents();
            report.accumulated_discard = ch.discard;
            on_step(report);
        }
        if (ch.discard > cfg.abort_threshold) {
            const int last_sample = (step - 1) / cfg.sample_stride;
            throw TruncationOverflow(t0 + last_sample * cfg.sample_stride * cfg.dt, ch.discard);
        }
        if (on_sample && step % cfg.sample_stride == 0) {
            write_back(ch, op);
            on_sample(op, step / cfg.sample_stride);
        }
    }
    write_back(ch, op);
    return op;
}

}  // namespace

void canonicalize(OperatorMps& op, int center) {
    const int L = op.length();
    if (center < 0 || center >= L) throw ArgumentError("canonical center out of range");
    Chain<cplx> ch = to_complex_chain(op);
    canonicalize_chain(ch, center);
    write_back(ch, op);
}

OperatorMps evolve_operator(OperatorMps op, const GateSchedule& forward, const GateSchedule& backward,
                            const EvolutionConfig& cfg, const SampleCallback& on_sample, const StepCallback& on_step) {
    cfg.validate();
    if (op.length() < 2) throw ArgumentError("operator chain needs at least two sites");
    if (std::abs(forward.trotter_step - cfg.dt) > 1e-14 || std::abs(backward.trotter_step - cfg.dt) > 1e-14)
        throw ArgumentError("schedule Trotter step differs from the evolution dt");

    if (on_sample) on_sample(op, 0);
    // Heisenberg evolution of a Hermitian operator stays Hermitian, so its
    // Pauli-basis coefficients are real throughout.
    if (cfg.picture == Picture::Heisenberg) {
        bool real = false;
        Chain<double> ch = to_real_chain(op, real);
        if (real) return run_evolution(std::move(ch), std::move(op), forward, backward, cfg, on_sample, on_step);
    }
    Chain<cplx> ch = to_complex_chain(op);
    return run_evolution(std::move(ch), std::move(op), forward, backward, cfg, on_sample, on_step);
}

namespace {

using Weights = std::array<cplx, 4>;  // indexed by folded p = 2 * out + in

// Transfer matrix sum_p w[p] core[:, p, :].
RowMatrix transfer(const DenseTensor& core, const Weights& w) {
    const auto dl = static_cast<Eigen::Index>(core.extent(0)), dr = static_cast<Eigen::Index>(core.extent(3));
    // rows of the (dl x 4 * dr) view are [p = 0 | 1 | 2 | 3] blocks of width dr
    Eigen::Map<const RowMatrix> view(core.data().data(), dl, 4 * dr);
    RowMatrix t = RowMatrix::Zero(dl, dr);
    for (Eigen::Index p = 0; p < 4; ++p)
        if (w[static_cast<std::size_t>(p)] != 0.0) t += w[static_cast<std::size_t>(p)] * view.middleCols(p * dr, dr);
    return t;
}

// For every j: contract base weights on all sites except probe weights on j.
std::vector<cplx> sweep_row(const OperatorMps& op, const std::vector<Weights>& base, const std::vector<Weights>& probe) {
    const int L = op.length();
    std::vector<RowMatrix> left(static_cast<std::size_t>(L + 1)), right(static_cast<std::size_t>(L + 1));
    std::vector<RowMatrix> base_t(static_cast<std::size_t>(L));
    for (int s = 0; s < L; ++s) base_t[static_cast<std::size_t>(s)] = transfer(op.cores[static_cast<std::size_t>(s)], base[static_cast<std::size_t>(s)]);
    left[0] = RowMatrix::Ones(1, 1);
    for (int s = 0; s < L; ++s) left[static_cast<std::size_t>(s + 1)] = left[static_cast<std::size_t>(s)] * base_t[static_cast<std::size_t>(s)];
    right[static_cast<std::size_t>(L)] = RowMatrix::Ones(1, 1);
    for (int s = L - 1; s >= 0; --s)
        right[static_cast<std::size_t>(s)] = base_t[static_cast<std::size_t>(s)] * right[static_cast<std::size_t>(s + 1)];
    std::vector<cplx> out(static_cast<std::size_t>(L));
    for (int j = 0; j < L; ++j) {
        const RowMatrix t = transfer(op.cores[static_cast<std::size_t>(j)], probe[static_cast<std::size_t>(j)]);
        out[static_cast<std::size_t>(j)] = (left[static_cast<std::size_t>(j)] * t * right[static_cast<std::size_t>(j + 1)])(0, 0);
    }
    return out;
}

}  // namespace

std::vector<cplx> heisenberg_row(const OperatorMps& a, const ProductState& state, Pauli beta) {
    if (a.length() != state.length) throw DimensionError("operator and state lengths differ");
    const DenseTensor b = pauli(beta);
    std::vector<Weights> base(static_cast<std::size_t>(state.length)), probe(base.size());
    for (std::size_t s = 0; s < base.size(); ++s) {
        const auto& v = state.sites[s];
        const std::array<cplx, 2> bv{b({0, 0}) * v[0] + b({0, 1}) * v[1], b({1, 0}) * v[0] + b({1, 1}) * v[1]};
        for (std::size_t o = 0; o < 2; ++o)
            for (std::size_t i = 0; i < 2; ++i) {
                base[s][2 * o + i] = std::conj(v[o]) * v[i];
                probe[s][2 * o + i] = std::conj(v[o]) * bv[i];
            }
    }
    return sweep_row(a, base, probe);
}

std::vector<cplx> trace_row(const OperatorMps& rho, Pauli alpha) {
    const DenseTensor a = pauli(alpha);
    std::vector<Weights> base(static_cast<std::size_t>(rho.length())), probe(base.size());
    for (std::size_t s = 0; s < base.size(); ++s)
        for (std::size_t o = 0; o < 2; ++o)
            for (std::size_t i = 0; i < 2; ++i) {
                base[s][2 * o + i] = o == i ? 1.0 : 0.0;
                probe[s][2 * o + i] = a({i, o});
            }
    return sweep_row(rho, base, probe);
}

cplx& CorrelationSet::at(int i, int j, int t) {
    const auto L = static_cast<std::size_t>(length());
    return values[((static_cast<std::size_t>(i - 1)) * L + static_cast<std::size_t>(j - 1)) * t_grid.size() +
                  static_cast<std::size_t>(t)];
}

const cplx& CorrelationSet::at(int i, int j, int t) const { return const_cast<CorrelationSet*>(this)->at(i, j, t); }

bool CorrelationSet::is_mirrored(int i, int j) const {
    return mirrored[static_cast<std::size_t>((i - 1) * length() + (j - 1))] != 0;
}

CorrelationSet CorrelationSet::empty(const ModelParams& params, StateKind state, Pauli alpha, Pauli beta,
                                     std::vector<double> t_grid) {
    CorrelationSet cs;
    cs.params = params;
    cs.state_kind = state;
    cs.alpha = alpha;
    cs.beta = beta;
    cs.t_grid = std::move(t_grid);
    const auto L = static_cast<std::size_t>(params.length);
    cs.values.assign(L * L * cs.t_grid.size(), 0.0);
    cs.mirrored.assign(L * L, 0);
    // The product states are real and x, z are real matrices; y flips sign
    // under complex conjugation.
    cs.time_reversal_sign = (alpha == Pauli::Y ? -1 : 1) * (beta == Pauli::Y ? -1 : 1);
    cs.last_valid_time = cs.t_grid.empty() ? 0.0 : cs.t_grid.back();
    return cs;
}

CorrelationSet CorrelationSet::truncated(int n) const {
    n = std::clamp(n, 0, num_times());
    CorrelationSet out = empty(params, state_kind, alpha, beta, std::vector<double>(t_grid.begin(), t_grid.begin() + n));
    out.mirrored = mirrored;
    out.time_reversal_sign = time_reversal_sign;
    out.max_accumulated_discard = max_accumulated_discard;
    out.max_bond_reached = max_bond_reached;
    out.overflow = overflow;
    out.last_valid_time = n > 0 ? t_grid[static_cast<std::size_t>(n - 1)] : 0.0;
    const int L = length();
    for (int i = 1; i <= L; ++i)
        for (int j = 1; j <= L; ++j)
            for (int t = 0; t < n; ++t) out.at(i, j, t) = at(i, j, t);
    return out;
}

int mirror_sign(StateKind state, double hz, Pauli alpha, Pauli beta) {
    switch (state) {
        case StateKind::FMZ:
        case StateKind::FMX: return 1;  // bond inversion, any hz
        case StateKind::NEEL: {
            // invariant under (pi rotation about x) x bond inversion, which
            // flips hz; sigma^y and sigma^z change sign under the rotation
            if (hz != 0.0) return 0;
            const int sa = alpha == Pauli::X ? 1 : -1;
            const int sb = beta == Pauli::X ? 1 : -1;
            return sa * sb;
        }
    }
    return 0;
}

std::vector<CorrelationSet> correlation_series(const ModelParams& params, const std::vector<StateKind>& states,
                                               Pauli alpha, Pauli beta, const EvolutionConfig& cfg,
                                               const CorrelationOptions& opts) {
    params.validate();
    cfg.validate();
    if (cfg.picture != Picture::Heisenberg)
        throw ConfigError("evolution.picture", "correlation_series evolves operators in the Heisenberg picture");
    if (states.empty()) throw ArgumentError("no product state requested");
    const int L = params.length;
    const GateSchedule fwd = trotter_gates(params, cfg.dt, Direction::Forward, cfg.order);
    const GateSchedule bwd = trotter_gates(params, cfg.dt, Direction::Backward, cfg.order);

    std::vector<ProductState> prods;
    std::vector<CorrelationSet> sets;
    std::vector<int> signs;
    bool mirror = opts.use_symmetry;
    for (StateKind k : states) {
        prods.push_back(product_state(k, L));
        sets.push_back(CorrelationSet::empty(params, k, alpha, beta, cfg.sample_times()));
        signs.push_back(mirror_sign(k, params.hz, alpha, beta));
        if (signs.back() == 0) mirror = false;
    }
    int first = 1, last = L;
    if (opts.source_first != 0) {
        if (opts.source_first < 1 || opts.source_last < opts.source_first || opts.source_last > L)
            throw ArgumentError("source range must satisfy 1 <= first <= last <= L");
        first = opts.source_first;
        last = opts.source_last;
    }
    // evolve i unless its mirror partner is in range and smaller
    std::vector<int> src;
    for (int i = first; i <= last; ++i) {
        const int mi = L - i + 1;
        if (mirror && mi < i && mi >= first) continue;
        src.push_back(i);
    }
    const int sources = static_cast<int>(src.size());
    const int T = sets.front().num_times();

    std::vector<int> valid_samples(static_cast<std::size_t>(sources), T);
    std::vector<double> discards(static_cast<std::size_t>(sources), 0.0);
    std::vector<std::size_t> bonds(static_cast<std::size_t>(sources), 1);
    std::atomic<int> next{0};
    std::mutex mu;
    std::exception_ptr failure;

    auto worker = [&] {
        for (int idx = next++; idx < sources; idx = next++) {
            const int i = src[static_cast<std::size_t>(idx)];
            const auto slot = static_cast<std::size_t>(idx);
            try {
                auto record = [&](const OperatorMps& a, int sample) {
                    for (std::size_t n = 0; n < prods.size(); ++n) {
                        const auto row = heisenberg_row(a, prods[n], beta);
                        for (int j = 1; j <= L; ++j) sets[n].at(i, j, sample) = row[static_cast<std::size_t>(j - 1)];
                    }
                    bonds[slot] = std::max(bonds[slot], a.max_bond());
                    discards[slot] = a.accumulated_discard;
                };
                StepCallback step_cb;
                if (opts.on_step)
                    step_cb = [&](const StepReport& r) {
                        std::lock_guard lock(mu);
                        opts.on_step(i, r);
                    };
                try {
                    OperatorMps final_op =
                        evolve_operator(local_operator_mps(alpha, i, L), fwd, bwd, cfg, record, step_cb);
                    bonds[slot] = std::max(bonds[slot], final_op.max_bond());
                    if (opts.on_source_done) {
                        std::lock_guard lock(mu);
                        opts.on_source_done(i, final_op);
                    }
                } catch (const TruncationOverflow& e) {
                    valid_samples[slot] =
                        static_cast<int>(std::lround(e.last_valid_time / (cfg.dt * cfg.sample_stride))) + 1;
                    discards[slot] = e.accumulated_discard;
                }
            } catch (...) {
                std::lock_guard lock(mu);
                if (!failure) failure = std::current_exception();
            }
        }
    };

    int jobs = opts.jobs > 0 ? opts.jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    jobs = std::clamp(jobs, 1, sources);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < jobs; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    const int valid = *std::min_element(valid_samples.begin(), valid_samples.end());
    for (std::size_t n = 0; n < sets.size(); ++n) {
        auto& cs = sets[n];
        cs.max_accumulated_discard = *std::max_element(discards.begin(), discards.end());
        cs.max_bond_reached = *std::max_element(bonds.begin(), bonds.end());
        if (mirror) {
            for (int i : src) {
                const int mi = L - i + 1;
                if (mi <= i || mi > last) continue;
                for (int j = 1; j <= L; ++j) {
                    const int mj = L - j + 1;
                    for (int t = 0; t < T; ++t) cs.at(mi, mj, t) = static_cast<double>(signs[n]) * cs.at(i, j, t);
                    cs.mirrored[static_cast<std::size_t>((mi - 1) * L + (mj - 1))] = 1;
                }
            }
        }
        if (valid < T) {
            cs = cs.truncated(valid);
            cs.overflow = true;
        }
    }
    return sets;
}

CorrelationSet correlation_series(const ModelParams& params, StateKind state, Pauli alpha, Pauli beta,
                                  const EvolutionConfig& cfg, const CorrelationOptions& opts) {
    return std::move(correlation_series(params, std::vector<StateKind>{state}, alpha, beta, cfg, opts).front());
}

double entanglement_entropy(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (total <= 0.0) return 0.0;
    double s = 0.0;
    for (double w : weights) {
        const double p = w / total;
        if (p > 0.0) s -= p * std::log(p);
    }
    return s;
}

EntanglementSnapshot entanglement_profile(const OperatorMps& op) {
    const int L = op.length();
    EntanglementSnapshot snap;
    snap.time = op.time_stamp;
    if (L < 2) return snap;
    Chain<cplx> ch = to_complex_chain(op);
    if (op.center != 0) canonicalize_chain(ch, 0);
    const TruncationSpec keep_all{static_cast<std::size_t>(1) << 30, 0.0};
    for (int s = 0; s + 1 < L; ++s) {
        auto& a = ch.cores[static_cast<std::size_t>(s)];
        auto& b = ch.cores[static_cast<std::size_t>(s + 1)];
        MatrixSvd svd = truncated_svd(a, keep_all);
        const double total = svd.s.squaredNorm();
        std::vector<double> spectrum(static_cast<std::size_t>(svd.s.size()));
        for (Eigen::Index k = 0; k < svd.s.size(); ++k)
            spectrum[static_cast<std::size_t>(k)] = total > 0.0 ? svd.s[k] * svd.s[k] / total : 0.0;
        snap.entropies.push_back(entanglement_entropy(spectrum));
        snap.spectra.push_back(std::move(spectrum));
        const RowMatrix nb = svd.s.cast<cplx>().asDiagonal() * svd.vh * Chain<cplx>::right_view(b);
        const Eigen::Index dr = b.cols();
        a = std::move(svd.u);
        b = as_core<cplx>(nb, dr);
    }
    return snap;
}

CorrelationRow evolve_density_schrodinger(const ModelParams& params, StateKind state_kind, Pauli alpha, Pauli beta,
                                          int site, const EvolutionConfig& cfg_in, EntanglementProfile* profile) {
    params.validate();
    EvolutionConfig cfg = cfg_in;
    cfg.picture = Picture::Schrodinger;
    cfg.validate();
    const int L = params.length;
    const ProductState state = product_state(state_kind, L);
    const GateSchedule fwd = trotter_gates(params, cfg.dt, Direction::Forward, cfg.order);
    const GateSchedule bwd = trotter_gates(params, cfg.dt, Direction::Backward, cfg.order);

    CorrelationRow row;
    row.source_site = site;
    row.t_grid = cfg.sample_times();
    const std::size_t T = row.t_grid.size();
    row.values.assign(static_cast<std::size_t>(L) * T, 0.0);

    auto record = [&](const OperatorMps& rho, int sample) {
        const auto vals = trace_row(rho, alpha);
        for (std::size_t i = 0; i < vals.size(); ++i) row.values[i * T + static_cast<std::size_t>(sample)] = vals[i];
        row.max_bond_reached = std::max(row.max_bond_reached, rho.max_bond());
        row.accumulated_discard = rho.accumulated_discard;
        if (profile) profile->snapshots.push_back(entanglement_profile(rho));
    };
    evolve_operator(density_operator_mps(state, beta, site), fwd, bwd, cfg, record);
    return row;
}

}  // namespace ndsf
