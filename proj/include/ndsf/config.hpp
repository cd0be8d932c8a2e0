#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ndsf/evolution.hpp"
#include "ndsf/model.hpp"
#include "ndsf/spectral.hpp"

namespace ndsf {

struct OutputSpec {
    std::string directory = "out";
    std::string format = "csv";  // only csv for now
};

struct ScanSpec {
    bool enabled = false;
    double gamma_start = 0.0;
    double gamma_stop = 0.0;
    double gamma_step = 0.0;
    std::vector<double> kcuts;

    std::vector<double> gammas() const;  // ascending, stop included
};

struct ReferenceFlags {
    bool bounds = false;
    bool boundstates = false;
    bool dispersion = false;
    int boundstate_cutoff = 64;

    bool any() const { return bounds || boundstates || dispersion; }
};

struct RunConfig {
    ModelParams model{0.0, 0.0, 16};
    StateKind state = StateKind::FMZ;
    Pauli alpha = Pauli::Z;
    Pauli beta = Pauli::Z;
    EvolutionConfig evolution;
    LpSpec lp;
    WindowSpec window;
    OmegaGrid omega;
    SpatialWindow spatial;
    OutputSpec output;
    ScanSpec scan;
    ReferenceFlags reference;
    int jobs = 0;  // 0: all available cores

    std::string op_pair() const;
    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Accepts plain numbers and multiples of pi: "0.3", "pi/4", "3pi/8", "3*pi/8", "-pi".
double parse_angle(std::string_view text);

/// "xx", "zz", "xz" or "zx".
void parse_op_pair(std::string_view text, Pauli& alpha, Pauli& beta);

RunConfig config_from_json(const std::string& text);
std::string config_to_json(const RunConfig& cfg, int indent = 2);
RunConfig load_config(const std::string& path);

}  // namespace ndsf
