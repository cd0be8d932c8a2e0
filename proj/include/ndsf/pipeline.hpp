#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ndsf/config.hpp"
#include "ndsf/reference.hpp"
#include "ndsf/spectral.hpp"

namespace ndsf {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfig = 2,
    kExitOverflow = 3,
    kExitPartialScan = 4,
};

struct EmittedFile {
    std::string name;
    std::string sha256;
    std::size_t bytes = 0;
};

struct RunResult {
    int exit_code = kExitOk;
    std::filesystem::path directory;
    std::vector<EmittedFile> files;  // data files; manifest.json is not listed
    std::vector<std::string> errors;
};

/// Hex SHA-256 of a byte string / file.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

/// %.17g formatting used by every CSV writer.
std::string format_double(double v);

std::string correlations_csv(const CorrelationSet& cs);
std::string ndsf_csv(const SpectralGrid& grid);
std::string bounds_csv(double gamma, const std::vector<double>& k);
std::string boundstates_csv(double gamma, double hz, const std::vector<double>& k, int cutoff);
std::string dispersion_csv(double gamma, const std::vector<double>& k);

/// Evolution followed by the spectral pipeline for one parameter point.
struct PointResult {
    CorrelationSet correlations;
    SpectralGrid spectrum;
    double evolution_seconds = 0.0;
    double spectral_seconds = 0.0;
};
PointResult compute_point(const RunConfig& cfg, const ModelParams& params);

RunResult run_single(const RunConfig& cfg);
RunResult run_scan(const RunConfig& cfg);
RunResult run_reference(const RunConfig& cfg);

}  // namespace ndsf
