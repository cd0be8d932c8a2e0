#include "ndsf/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include <openssl/evp.h>

#include <json.hpp>

#include "ndsf/errors.hpp"

namespace ndsf {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* const kOutputNames[] = {"correlations.csv", "ndsf.csv",       "scan.csv",     "bounds.csv",
                                    "boundstates.csv",  "dispersion.csv", "manifest.json"};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void append_row(std::string& out, std::initializer_list<std::string> cells) {
    bool first = true;
    for (const auto& c : cells) {
        if (!first) out.push_back(',');
        out += c;
        first = false;
    }
    out.push_back('\n');
}

std::string fmt_int(long long v) { return std::to_string(v); }

fs::path prepare_directory(const RunConfig& cfg) {
    fs::path dir(cfg.output.directory);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw ConfigError("output.directory", "cannot create " + dir.string());
    for (const char* name : kOutputNames) fs::remove(dir / name, ec);
    const fs::path probe = dir / ".ndsf_write_probe";
    {
        std::ofstream p(probe);
        if (!p) throw ConfigError("output.directory", dir.string() + " is not writable");
    }
    fs::remove(probe, ec);
    return dir;
}

EmittedFile write_file(const fs::path& dir, const std::string& name, const std::string& content) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / name).string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("short write on " + (dir / name).string());
    return {name, sha256_hex(content), content.size()};
}

json manifest_json(const SpectralManifest& m) {
    return {{"length", m.length},
            {"gamma", m.gamma},
            {"hz", m.hz},
            {"state", m.state},
            {"op_pair", m.op_pair},
            {"dt", m.dt},
            {"max_bond_reached", m.max_bond_reached},
            {"accumulated_discard", m.accumulated_discard},
            {"overflow", m.overflow},
            {"t_max_known", m.t_max_known},
            {"t_max_extended", m.t_max_extended},
            {"lp_enabled", m.lp_enabled},
            {"lp_order", m.lp_order},
            {"lp_stabilize", m.lp_stabilize},
            {"lp_refine", m.lp_refine},
            {"lp_clamped_reflections", m.lp_clamped_reflections},
            {"lp_reflected_roots", m.lp_reflected_roots},
            {"window_family", m.window_family},
            {"window_half_width", m.window_half_width},
            {"resolution_sigma", m.resolution_sigma},
            {"spatial_mode", m.spatial_mode},
            {"spatial_first", m.spatial_first},
            {"spatial_last", m.spatial_last},
            {"time_reversal_sign", m.time_reversal_sign},
            {"spatial_sum_rule", m.spatial_sum_rule}};
}

void write_manifest(const fs::path& dir, const RunConfig& cfg, const std::string& mode, json diagnostics,
                    json timing, const RunResult& res) {
    json m;
    m["software"] = {{"name", "ndsf"}, {"version", NDSF_VERSION}};
    m["mode"] = mode;
    m["config"] = json::parse(config_to_json(cfg));
    m["diagnostics"] = std::move(diagnostics);
    m["timing_seconds"] = std::move(timing);
    json files = json::array();
    for (const auto& f : res.files) files.push_back({{"name", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    m["files"] = files;
    m["errors"] = res.errors;
    m["exit_code"] = res.exit_code;
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    out << m.dump(2) << '\n';
}

void emit_references(const RunConfig& cfg, const ModelParams& params, const fs::path& dir, RunResult& res) {
    const auto k = momentum_grid(params.length);
    if (cfg.reference.bounds) res.files.push_back(write_file(dir, "bounds.csv", bounds_csv(params.gamma, k)));
    if (cfg.reference.boundstates)
        res.files.push_back(write_file(
            dir, "boundstates.csv", boundstates_csv(params.gamma, params.hz, k, cfg.reference.boundstate_cutoff)));
    if (cfg.reference.dispersion)
        res.files.push_back(write_file(dir, "dispersion.csv", dispersion_csv(params.gamma, k)));
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xF]);
    }
    return out;
}

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return sha256_hex(ss.str());
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string correlations_csv(const CorrelationSet& cs) {
    std::string out = "i,j,t,re,im\n";
    const int L = cs.length();
    for (int i = 1; i <= L; ++i)
        for (int j = 1; j <= L; ++j)
            for (int t = 0; t < cs.num_times(); ++t) {
                const cplx v = cs.at(i, j, t);
                append_row(out, {fmt_int(i), fmt_int(j), format_double(cs.t_grid[t]), format_double(v.real()),
                                 format_double(v.imag())});
            }
    return out;
}

std::string ndsf_csv(const SpectralGrid& grid) {
    std::string out = "k_index,k,omega,re,im\n";
    for (std::size_t m = 0; m < grid.num_k(); ++m)
        for (std::size_t w = 0; w < grid.num_omega(); ++w) {
            const cplx v = grid.at(m, w);
            append_row(out, {fmt_int(static_cast<long long>(m)), format_double(grid.k_grid[m]),
                             format_double(grid.omega_grid[w]), format_double(v.real()), format_double(v.imag())});
        }
    return out;
}

std::string bounds_csv(double gamma, const std::vector<double>& k) {
    const bool critical = std::abs(gamma - std::numbers::pi / 4) < 1e-12;
    std::string out = "k,kind,lower,upper\n";
    for (double q : k)
        for (BandKind kind : {BandKind::BowtieCreate, BandKind::BowtieAnnihilate, BandKind::Shell}) {
            const Bounds b = critical ? qcp_bounds(q, kind) : continuum_bounds(gamma, q, kind);
            append_row(out, {format_double(q), to_string(kind), format_double(b.lower), format_double(b.upper)});
        }
    return out;
}

std::string boundstates_csv(double gamma, double hz, const std::vector<double>& k, int cutoff) {
    std::string out = "k,level_n,omega\n";
    for (double q : k) {
        const auto levels = bound_state_spectrum(gamma, hz, q, cutoff);
        for (std::size_t n = 0; n < levels.size(); ++n)
            append_row(out, {format_double(q), fmt_int(static_cast<long long>(n + 1)), format_double(levels[n])});
    }
    return out;
}

std::string dispersion_csv(double gamma, const std::vector<double>& k) {
    std::string out = "k,exact,cosine\n";
    for (double q : k)
        append_row(out, {format_double(q), format_double(spinon_dispersion(gamma, q, DispersionForm::Exact)),
                         format_double(spinon_dispersion(gamma, q, DispersionForm::Cosine))});
    return out;
}

PointResult compute_point(const RunConfig& cfg, const ModelParams& params) {
    PointResult pr;
    CorrelationOptions opts;
    opts.jobs = cfg.jobs;
    auto t0 = Clock::now();
    pr.correlations = correlation_series(params, cfg.state, cfg.alpha, cfg.beta, cfg.evolution, opts);
    pr.evolution_seconds = seconds_since(t0);

    t0 = Clock::now();
    pr.spectrum = ndsf_pipeline(pr.correlations, cfg.lp, cfg.window, cfg.omega, cfg.spatial);
    pr.spectrum.manifest.max_bond_cap = cfg.evolution.truncation.max_bond;
    pr.spectrum.manifest.rel_cutoff = cfg.evolution.truncation.rel_cutoff;
    pr.spectral_seconds = seconds_since(t0);
    return pr;
}

RunResult run_single(const RunConfig& cfg) {
    cfg.validate();
    if (cfg.scan.enabled) throw ConfigError("scan", "run_single needs a configuration without a scan section");
    RunResult res;
    res.directory = prepare_directory(cfg);

    auto pr = compute_point(cfg, cfg.model);
    if (pr.correlations.overflow) {
        res.exit_code = kExitOverflow;
        res.errors.push_back("truncation budget exhausted; data valid up to t = " +
                             format_double(pr.correlations.last_valid_time));
    }
    const auto t0 = Clock::now();
    res.files.push_back(write_file(res.directory, "correlations.csv", correlations_csv(pr.correlations)));
    res.files.push_back(write_file(res.directory, "ndsf.csv", ndsf_csv(pr.spectrum)));
    emit_references(cfg, cfg.model, res.directory, res);
    const double output_s = seconds_since(t0);

    write_manifest(res.directory, cfg, "single", manifest_json(pr.spectrum.manifest),
                   {{"evolution", pr.evolution_seconds}, {"spectral", pr.spectral_seconds}, {"output", output_s}},
                   res);
    return res;
}

RunResult run_scan(const RunConfig& cfg) {
    cfg.validate();
    if (!cfg.scan.enabled) throw ConfigError("scan", "run_scan needs a scan section");
    RunResult res;
    res.directory = prepare_directory(cfg);

    const int L = cfg.model.length;
    const double dk = 2.0 * std::numbers::pi / L;
    std::vector<std::size_t> cut_index;
    for (double k : cfg.scan.kcuts) cut_index.push_back(static_cast<std::size_t>(std::lround(k / dk)) % L);

    std::string out = "gamma,k,omega,re,im\n";
    json points = json::array();
    double evo_s = 0.0, spec_s = 0.0;
    for (double g : cfg.scan.gammas()) {
        ModelParams p = cfg.model;
        p.gamma = g;
        json point = {{"gamma", g}};
        try {
            auto pr = compute_point(cfg, p);
            evo_s += pr.evolution_seconds;
            spec_s += pr.spectral_seconds;
            point["diagnostics"] = manifest_json(pr.spectrum.manifest);
            if (pr.correlations.overflow) {
                point["status"] = "overflow";
                res.errors.push_back("gamma = " + format_double(g) + ": truncation budget exhausted at t = " +
                                     format_double(pr.correlations.last_valid_time));
            } else {
                point["status"] = "ok";
            }
            for (std::size_t m : cut_index)
                for (std::size_t w = 0; w < pr.spectrum.num_omega(); ++w) {
                    const cplx v = pr.spectrum.at(m, w);
                    append_row(out, {format_double(g), format_double(pr.spectrum.k_grid[m]),
                                     format_double(pr.spectrum.omega_grid[w]), format_double(v.real()),
                                     format_double(v.imag())});
                }
        } catch (const Error& e) {
            point["status"] = "failed";
            point["error"] = e.what();
            res.errors.push_back("gamma = " + format_double(g) + ": " + e.what());
        }
        points.push_back(point);
    }
    if (!res.errors.empty()) res.exit_code = kExitPartialScan;

    const auto t0 = Clock::now();
    res.files.push_back(write_file(res.directory, "scan.csv", out));
    emit_references(cfg, cfg.model, res.directory, res);
    write_manifest(res.directory, cfg, "scan", {{"points", points}},
                   {{"evolution", evo_s}, {"spectral", spec_s}, {"output", seconds_since(t0)}}, res);
    return res;
}

RunResult run_reference(const RunConfig& cfg) {
    cfg.validate();
    if (!cfg.reference.any()) throw ConfigError("reference", "no reference output requested");
    RunResult res;
    res.directory = prepare_directory(cfg);
    const auto t0 = Clock::now();
    emit_references(cfg, cfg.model, res.directory, res);
    write_manifest(res.directory, cfg, "reference", json::object(), {{"output", seconds_since(t0)}}, res);
    return res;
}

}  // namespace ndsf
