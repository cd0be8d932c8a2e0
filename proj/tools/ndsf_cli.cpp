// ndsf command-line driver: run / scan / reference / config
#include <cstdio>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "ndsf/errors.hpp"
#include "ndsf/pipeline.hpp"

using namespace ndsf;

namespace {

struct Overrides {
    std::string config_path;
    std::optional<std::string> gamma, state, op_pair, scan_gamma, out, bulk;
    std::optional<double> hz, dt, tmax, cutoff, lp_horizon, omega_max, omega_step, window;
    std::optional<int> length, lp_order, jobs;
    std::optional<std::size_t> bond_dim;
    std::vector<std::string> kcuts;
    bool no_lp = false;
    bool emit_bounds = false, emit_boundstates = false, emit_dispersion = false;
};

void add_options(CLI::App* app, Overrides& o) {
    app->add_option("-c,--config", o.config_path, "JSON configuration file")->check(CLI::ExistingFile);
    app->add_option("--gamma", o.gamma, "coupling angle (number or multiple of pi, e.g. 3pi/8)");
    app->add_option("--hz", o.hz, "longitudinal field");
    app->add_option("--length", o.length, "chain length (even)");
    app->add_option("--dt", o.dt, "Trotter step");
    app->add_option("--tmax", o.tmax, "largest simulated time");
    app->add_option("--bond-dim", o.bond_dim, "maximal bond dimension D");
    app->add_option("--cutoff", o.cutoff, "relative discarded-weight cutoff");
    app->add_option("--state", o.state, "initial product state: FMZ, FMX or NEEL");
    app->add_option("--op-pair", o.op_pair, "operator pair: xx, zz, xz or zx");
    app->add_option("--lp-order", o.lp_order, "linear prediction order (0 = automatic)");
    app->add_option("--lp-horizon", o.lp_horizon, "time the prediction extends to");
    app->add_flag("--no-lp", o.no_lp, "disable linear prediction");
    app->add_option("--window", o.window, "Parzen half width (0 = extended time)");
    app->add_option("--omega-max", o.omega_max, "frequency grid runs over [-max, max]");
    app->add_option("--omega-step", o.omega_step, "frequency grid spacing");
    app->add_option("--bulk", o.bulk, "restrict source sites to first:last");
    app->add_option("--scan-gamma", o.scan_gamma, "gamma scan start:stop:step");
    app->add_option("--kcut", o.kcuts, "momentum cut for scans (repeatable)");
    app->add_flag("--emit-bounds", o.emit_bounds, "write continuum boundaries");
    app->add_flag("--emit-boundstates", o.emit_boundstates, "write bound-state levels");
    app->add_flag("--emit-dispersion", o.emit_dispersion, "write the spinon dispersion");
    app->add_option("--out", o.out, "output directory");
    app->add_option("-j,--jobs", o.jobs, "worker threads (default: available cores)");
}

std::pair<std::string, std::string> split_once(const std::string& s, char sep, const char* what) {
    const auto p = s.find(sep);
    if (p == std::string::npos) throw ConfigError(what, "expected a '" + std::string(1, sep) + "' separator");
    return {s.substr(0, p), s.substr(p + 1)};
}

RunConfig resolve(const Overrides& o) {
    RunConfig cfg = o.config_path.empty() ? RunConfig{} : load_config(o.config_path);
    auto angle = [](const std::string& s, const char* field) {
        try {
            return parse_angle(s);
        } catch (const Error& e) {
            throw ConfigError(field, e.what());
        }
    };
    if (o.gamma) cfg.model.gamma = angle(*o.gamma, "model.gamma");
    if (o.hz) cfg.model.hz = *o.hz;
    if (o.length) cfg.model.length = *o.length;
    if (o.dt) cfg.evolution.dt = *o.dt;
    if (o.tmax) cfg.evolution.t_max = *o.tmax;
    if (o.bond_dim) cfg.evolution.truncation.max_bond = *o.bond_dim;
    if (o.cutoff) cfg.evolution.truncation.rel_cutoff = *o.cutoff;
    if (o.state) {
        try {
            cfg.state = parse_state_kind(*o.state);
        } catch (const Error& e) {
            throw ConfigError("state", e.what());
        }
    }
    if (o.op_pair) {
        try {
            parse_op_pair(*o.op_pair, cfg.alpha, cfg.beta);
        } catch (const Error& e) {
            throw ConfigError("op_pair", e.what());
        }
    }
    if (o.lp_order) cfg.lp.order = *o.lp_order;
    if (o.lp_horizon) cfg.lp.horizon = *o.lp_horizon;
    if (o.no_lp) cfg.lp.enabled = false;
    if (o.window) cfg.window.half_width = *o.window;
    if (o.omega_max) {
        cfg.omega.min = -*o.omega_max;
        cfg.omega.max = *o.omega_max;
    }
    if (o.omega_step) cfg.omega.step = *o.omega_step;
    if (o.bulk) {
        auto [a, b] = split_once(*o.bulk, ':', "spatial");
        try {
            cfg.spatial.first = std::stoi(a);
            cfg.spatial.last = std::stoi(b);
        } catch (const std::exception&) {
            throw ConfigError("spatial", "cannot parse --bulk " + *o.bulk);
        }
    }
    if (o.scan_gamma) {
        auto [a, rest] = split_once(*o.scan_gamma, ':', "scan");
        auto [b, c] = split_once(rest, ':', "scan");
        cfg.scan.enabled = true;
        cfg.scan.gamma_start = angle(a, "scan.gamma_start");
        cfg.scan.gamma_stop = angle(b, "scan.gamma_stop");
        cfg.scan.gamma_step = angle(c, "scan.gamma_step");
    }
    if (!o.kcuts.empty()) {
        cfg.scan.kcuts.clear();
        for (const auto& k : o.kcuts) cfg.scan.kcuts.push_back(angle(k, "scan.kcuts"));
    }
    if (o.emit_bounds) cfg.reference.bounds = true;
    if (o.emit_boundstates) cfg.reference.boundstates = true;
    if (o.emit_dispersion) cfg.reference.dispersion = true;
    if (o.out) cfg.output.directory = *o.out;
    if (o.jobs) cfg.jobs = *o.jobs;
    if (cfg.jobs == 0) cfg.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    return cfg;
}

int report(const RunResult& res) {
    for (const auto& f : res.files) std::printf("%s  %s\n", f.sha256.c_str(), (res.directory / f.name).c_str());
    for (const auto& e : res.errors) std::fprintf(stderr, "warning: %s\n", e.c_str());
    return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Non-equilibrium dynamical structure factors of the quantum Ising chain"};
    app.set_version_flag("--version", std::string(NDSF_VERSION));
    app.require_subcommand(1);

    Overrides run_o, scan_o, ref_o, cfg_o;
    auto* run = app.add_subcommand("run", "evolve one parameter point and write correlations.csv, ndsf.csv");
    auto* scan = app.add_subcommand("scan", "sweep gamma and write k-cuts to scan.csv");
    auto* ref = app.add_subcommand("reference", "write analytic curves only");
    auto* show = app.add_subcommand("config", "print the resolved configuration as JSON");
    add_options(run, run_o);
    add_options(scan, scan_o);
    add_options(ref, ref_o);
    add_options(show, cfg_o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (run->parsed()) {
            auto cfg = resolve(run_o);
            if (cfg.scan.enabled) throw ConfigError("scan", "use the scan subcommand for gamma scans");
            return report(run_single(cfg));
        }
        if (scan->parsed()) return report(run_scan(resolve(scan_o)));
        if (ref->parsed()) {
            auto cfg = resolve(ref_o);
            cfg.scan = {};
            return report(run_reference(cfg));
        }
        if (show->parsed()) {
            auto cfg = resolve(cfg_o);
            cfg.validate();
            std::cout << config_to_json(cfg) << '\n';
            return 0;
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const ArgumentError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const TruncationOverflow& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitOverflow;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitFailure;
    }
    return 0;
}
