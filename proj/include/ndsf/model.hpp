#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "ndsf/tensor.hpp"

namespace ndsf {

enum class Pauli { X, Y, Z };

DenseTensor pauli(Pauli p);
char to_char(Pauli p);
Pauli parse_pauli(std::string_view s);

/// Transverse-field Ising chain with an optional longitudinal field:
///   H = -cos(gamma) sum_i Z_i Z_{i+1} - sin(gamma) sum_i X_i - hz sum_i Z_i
/// on an open chain of `length` sites.
struct ModelParams {
    double gamma = 0.0;
    double hz = 0.0;
    int length = 2;

    void validate() const;
};

/// A Hermitian term supported on consecutive sites starting at `first_site`
/// (1-based). Two-site terms use the basis ordering |s1 s2> -> 2*s1 + s2.
struct LocalTerm {
    int first_site = 1;
    DenseTensor op;
};

/// L-1 bond terms followed by L single-site terms.
std::vector<LocalTerm> hamiltonian_terms(const ModelParams& params);

enum class Direction { Forward, Backward };

enum class TrotterOrder { Second = 2, Fourth = 4 };

/// Two-site unitary acting on (site, site + 1), 1-based.
struct Gate {
    int site = 1;
    DenseTensor unitary;
};

struct GateLayer {
    std::vector<Gate> gates;
};

/// One Trotter step, as an ordered list of layers of commuting gates. The
/// first layer acts first on a state.
///
/// Bonds are split into the set starting at odd sites (1-2, 3-4, ...), which
/// covers every site exactly once and therefore also carries the single-site
/// field terms, and the interior set (2-3, 4-5, ...). A second-order step is
/// half interior, full covering, half interior. The fourth-order step is the
/// Forest-Ruth composition of three second-order steps with adjacent half
/// layers merged.
struct GateSchedule {
    double trotter_step = 0.05;
    TrotterOrder order = TrotterOrder::Second;
    Direction direction = Direction::Forward;
    std::vector<GateLayer> layers;
};

inline constexpr double kDefaultTrotterStep = 0.05;
inline constexpr double kMaxTrotterStep = 0.1;

/// Forward gates are exp(-i h dt); backward gates exp(+i h dt).
GateSchedule trotter_gates(const ModelParams& params, double dt, Direction direction,
                           TrotterOrder order = TrotterOrder::Second, double max_dt = kMaxTrotterStep);

enum class StateKind { FMZ, FMX, NEEL };

std::string to_string(StateKind kind);
StateKind parse_state_kind(std::string_view s);

struct ProductState {
    StateKind kind = StateKind::FMZ;
    int length = 0;
    std::vector<std::array<cplx, 2>> sites;  // (up, down) amplitudes along z
};

ProductState product_state(StateKind kind, int length);

/// Single-site expectation <phi_i| op |phi_i> for a 2x2 operator.
cplx site_expectation(const ProductState& state, int site, const DenseTensor& op);

/// Matrix-product form of an operator on a chain. Core s has shape
/// (left bond, physical out, physical in, right bond); the two physical legs
/// are folded into one index of extent 4 by the evolution kernels.
struct OperatorMps {
    std::vector<DenseTensor> cores;
    double accumulated_discard = 0.0;
    double time_stamp = 0.0;
    // Orthogonality center (0-based); -1 when the gauge is unknown.
    int center = -1;

    int length() const { return static_cast<int>(cores.size()); }
    std::vector<std::size_t> bond_extents() const;  // L-1 internal bonds
    std::size_t max_bond() const;
    /// Dense 2^L x 2^L reconstruction; intended for small chains only.
    RowMatrix to_dense() const;
};

/// sigma^alpha on `site` (1-based), identity elsewhere; all bonds extent 1.
OperatorMps local_operator_mps(Pauli alpha, int site, int length);

/// B |phi><phi| with B = sigma^beta on `site` (1-based); all bonds extent 1.
OperatorMps density_operator_mps(const ProductState& state, Pauli beta, int site);

}  // namespace ndsf
