#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "ndsf/model.hpp"
#include "ndsf/tensor.hpp"

namespace ndsf {

enum class Picture { Heisenberg, Schrodinger };

struct EvolutionConfig {
    TruncationSpec truncation{256, 1e-10};
    double dt = kDefaultTrotterStep;
    double t_max = 12.0;
    int sample_stride = 1;
    Picture picture = Picture::Heisenberg;
    TrotterOrder order = TrotterOrder::Fourth;
    double abort_threshold = 1e-3;  // accumulated discarded weight

    void validate() const;
    int steps() const;    // t_max / dt
    int samples() const;  // steps / stride + 1, including t = 0
    std::vector<double> sample_times() const;
};

/// Called with every recorded snapshot, starting with t = 0.
using SampleCallback = std::function<void(const OperatorMps& op, int sample_index)>;

/// Per-step diagnostics: bond extents and the weight discarded at each bond
/// during the step just completed.
struct StepReport {
    int step = 0;
    double time = 0.0;
    std::vector<std::size_t> bond_extents;
    std::vector<double> bond_discard;
    double accumulated_discard = 0.0;
};
using StepCallback = std::function<void(const StepReport&)>;

/// One line per (step, bond): "step time bond extent discarded".
void write_bond_dump(std::ostream& os, const StepReport& report);

/// Evolve `op` with the folded-network TEBD. In the Heisenberg picture each
/// step maps A -> U^dagger A U; in the Schrodinger picture rho -> U rho
/// U^dagger, where U is the forward schedule. Throws TruncationOverflow once
/// the accumulated discarded weight passes cfg.abort_threshold; snapshots up
/// to the last valid time have been delivered by then.
OperatorMps evolve_operator(OperatorMps op, const GateSchedule& forward, const GateSchedule& backward,
                            const EvolutionConfig& cfg, const SampleCallback& on_sample,
                            const StepCallback& on_step = {});

/// Bring `op` to mixed-canonical form with the given orthogonality center.
void canonicalize(OperatorMps& op, int center = 0);

/// <phi| A sigma^beta_j |phi> for every site j (returned 0-based), contracted
/// in one left/right environment sweep.
std::vector<cplx> heisenberg_row(const OperatorMps& a, const ProductState& state, Pauli beta);

/// Tr[rho sigma^alpha_i] for every site i.
std::vector<cplx> trace_row(const OperatorMps& rho, Pauli alpha);

/// Time-dependent correlations S(i, j, t) = <phi| sigma^alpha_i(t) sigma^beta_j |phi>
/// on a uniform non-negative time grid. Sites are 1-based in the accessors.
struct CorrelationSet {
    ModelParams params;
    StateKind state_kind = StateKind::FMZ;
    Pauli alpha = Pauli::Z;
    Pauli beta = Pauli::Z;
    std::vector<double> t_grid;
    std::vector<cplx> values;            // [((i-1) * L + (j-1)) * T + t]
    std::vector<std::uint8_t> mirrored;  // per (i, j): filled by a symmetry relation
    // S(i, j, -t) = time_reversal_sign * conj(S(i, j, t))
    int time_reversal_sign = 1;

    // diagnostics
    double max_accumulated_discard = 0.0;
    std::size_t max_bond_reached = 1;
    bool overflow = false;
    double last_valid_time = 0.0;

    int length() const { return params.length; }
    int num_times() const { return static_cast<int>(t_grid.size()); }
    double dt() const { return t_grid.size() > 1 ? t_grid[1] - t_grid[0] : 0.0; }

    cplx& at(int i, int j, int t);
    const cplx& at(int i, int j, int t) const;
    bool is_mirrored(int i, int j) const;

    /// Allocate a zero-filled set of the given geometry.
    static CorrelationSet empty(const ModelParams& params, StateKind state, Pauli alpha, Pauli beta,
                                std::vector<double> t_grid);
    /// Keep only the first `n` time samples.
    CorrelationSet truncated(int n) const;
};

/// Sign picked up by S^{alpha beta} under the spatial symmetry used to mirror
/// rows, or 0 when the state/field combination has none.
int mirror_sign(StateKind state, double hz, Pauli alpha, Pauli beta);

struct CorrelationOptions {
    int jobs = 1;  // 0: one worker per hardware thread
    bool use_symmetry = true;
    // Only evolve sources i in [source_first, source_last]; 0 means the whole
    // chain. Rows outside the range stay zero (pair with a SpatialWindow).
    int source_first = 0;
    int source_last = 0;
    // Called after each source site finishes (serialized).
    std::function<void(int source_site, const OperatorMps& final_op)> on_source_done;
    // Per-step diagnostics of every source evolution (serialized).
    std::function<void(int source_site, const StepReport&)> on_step;
};

/// Evolve sigma^alpha_i for the needed source sites i and assemble S(i, j, t)
/// for all i, j. With a mirror symmetry only i <= L/2 is evolved and the rest
/// is filled from S(L-i+1, L-j+1, t) = sign * S(i, j, t). If any source
/// overflows its truncation budget the returned set is cut back to the last
/// time valid for every source and `overflow` is set.
CorrelationSet correlation_series(const ModelParams& params, StateKind state, Pauli alpha, Pauli beta,
                                  const EvolutionConfig& cfg, const CorrelationOptions& opts = {});

/// The evolved operators do not depend on the state, so one set of
/// evolutions can serve several product states. Mirroring is used only when
/// every requested state admits it.
std::vector<CorrelationSet> correlation_series(const ModelParams& params, const std::vector<StateKind>& states,
                                               Pauli alpha, Pauli beta, const EvolutionConfig& cfg,
                                               const CorrelationOptions& opts = {});

struct EntanglementSnapshot {
    double time = 0.0;
    std::vector<double> entropies;             // one per bond
    std::vector<std::vector<double>> spectra;  // normalized squared singular values, descending
};

struct EntanglementProfile {
    std::vector<EntanglementSnapshot> snapshots;
};

/// Operator-entanglement entropy and spectrum at every bond of `op`.
EntanglementSnapshot entanglement_profile(const OperatorMps& op);

/// Entropy -sum p ln p of a (not necessarily normalized) weight list.
double entanglement_entropy(const std::vector<double>& weights);

/// Correlations S(i, j, t) for a fixed source site j and every i, obtained by
/// evolving rho_B = sigma^beta_j |phi><phi| in the Schrodinger picture.
struct CorrelationRow {
    int source_site = 1;
    std::vector<double> t_grid;
    std::vector<cplx> values;  // [(i-1) * T + t]
    double accumulated_discard = 0.0;
    std::size_t max_bond_reached = 1;

    const cplx& at(int i, int t) const { return values[static_cast<std::size_t>(i - 1) * t_grid.size() + t]; }
};

CorrelationRow evolve_density_schrodinger(const ModelParams& params, StateKind state, Pauli alpha, Pauli beta,
                                          int site, const EvolutionConfig& cfg,
                                          EntanglementProfile* profile = nullptr);

}  // namespace ndsf
