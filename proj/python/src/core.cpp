#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "ndsf/errors.hpp"
#include "ndsf/pipeline.hpp"
#include "ndsf/reference.hpp"

namespace py = pybind11;
using namespace ndsf;

namespace {

Pauli pauli_of(const std::string& s) { return parse_pauli(s); }

BandKind band_of(const std::string& s) {
    for (auto k : {BandKind::BowtieCreate, BandKind::BowtieAnnihilate, BandKind::Shell})
        if (s == to_string(k)) return k;
    throw ArgumentError("unknown band kind '" + s + "'");
}

py::array_t<std::complex<double>> to_array(const std::vector<cplx>& v, std::vector<py::ssize_t> shape) {
    py::array_t<std::complex<double>> out(shape);
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

py::dict correlations_dict(const CorrelationSet& cs) {
    py::dict d;
    const auto L = static_cast<py::ssize_t>(cs.length());
    d["t"] = cs.t_grid;
    d["values"] = to_array(cs.values, {L, L, static_cast<py::ssize_t>(cs.num_times())});
    d["max_bond_reached"] = cs.max_bond_reached;
    d["accumulated_discard"] = cs.max_accumulated_discard;
    d["overflow"] = cs.overflow;
    d["last_valid_time"] = cs.last_valid_time;
    d["time_reversal_sign"] = cs.time_reversal_sign;
    return d;
}

py::dict spectrum_dict(const SpectralGrid& g) {
    py::dict d;
    d["k"] = g.k_grid;
    d["omega"] = g.omega_grid;
    d["values"] = to_array(g.values, {static_cast<py::ssize_t>(g.num_k()), static_cast<py::ssize_t>(g.num_omega())});
    d["resolution_sigma"] = g.resolution_sigma;
    const auto& m = g.manifest;
    d["t_max_known"] = m.t_max_known;
    d["t_max_extended"] = m.t_max_extended;
    d["lp_order"] = m.lp_order;
    d["window_half_width"] = m.window_half_width;
    d["spatial_sum_rule"] = m.spatial_sum_rule;
    return d;
}

RunConfig config_of(const std::string& json_text) {
    auto cfg = config_from_json(json_text);
    cfg.validate();
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "nDSF engine for transverse-field Ising chains";
    m.attr("__version__") = NDSF_VERSION;

    // translators are tried newest first, so the base class goes in first
    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<SizeError>(m, "SizeError", PyExc_ValueError);

    m.def("parse_angle", [](const std::string& s) { return parse_angle(s); });

    m.def(
        "spinon_dispersion",
        [](double gamma, double k, bool cosine) {
            return spinon_dispersion(gamma, k, cosine ? DispersionForm::Cosine : DispersionForm::Exact);
        },
        py::arg("gamma"), py::arg("k"), py::arg("cosine") = false);
    m.def(
        "continuum_bounds",
        [](double gamma, double k, const std::string& kind) {
            const auto b = continuum_bounds(gamma, k, band_of(kind));
            return std::make_pair(b.lower, b.upper);
        },
        py::arg("gamma"), py::arg("k"), py::arg("kind") = "BOWTIE_CREATE");
    m.def(
        "qcp_bounds",
        [](double k, const std::string& kind) {
            const auto b = qcp_bounds(k, band_of(kind));
            return std::make_pair(b.lower, b.upper);
        },
        py::arg("k"), py::arg("kind") = "BOWTIE_CREATE");
    m.def("bound_state_spectrum", &bound_state_spectrum, py::arg("gamma"), py::arg("hz"), py::arg("k"),
          py::arg("cutoff") = 64);
    m.def("momentum_grid", &momentum_grid, py::arg("length"));
    m.def("parzen_kernel", &parzen_kernel, py::arg("omega"), py::arg("half_width"));
    m.def("rydberg_identity_residual", &rydberg_identity_residual, py::arg("V"), py::arg("omega"), py::arg("delta"),
          py::arg("t"), py::arg("length"));

    m.def(
        "ed_correlation",
        [](double gamma, double hz, int length, const std::string& state, const std::string& op_pair, int i, int j,
           const std::vector<double>& t) {
            Pauli a, b;
            parse_op_pair(op_pair, a, b);
            const auto s = ed_correlation(ModelParams{gamma, hz, length}, parse_state_kind(state), a, b, i, j, t);
            return to_array(s.values, {static_cast<py::ssize_t>(s.values.size())});
        },
        py::arg("gamma"), py::arg("hz"), py::arg("length"), py::arg("state"), py::arg("op_pair"), py::arg("i"),
        py::arg("j"), py::arg("t"));

    m.def(
        "correlation_series",
        [](double gamma, double hz, int length, const std::string& state, const std::string& op_pair, double t_max,
           double dt, std::size_t max_bond, double cutoff, int jobs) {
            Pauli a, b;
            parse_op_pair(op_pair, a, b);
            EvolutionConfig cfg;
            cfg.t_max = t_max;
            cfg.dt = dt;
            cfg.truncation = {max_bond, cutoff};
            CorrelationOptions opts;
            opts.jobs = jobs;
            CorrelationSet cs;
            {
                py::gil_scoped_release release;
                cs = correlation_series(ModelParams{gamma, hz, length}, parse_state_kind(state), a, b, cfg, opts);
            }
            return correlations_dict(cs);
        },
        py::arg("gamma"), py::arg("hz"), py::arg("length"), py::arg("state") = "FMZ", py::arg("op_pair") = "zz",
        py::arg("t_max") = 12.0, py::arg("dt") = 0.05, py::arg("max_bond") = 256, py::arg("cutoff") = 1e-10,
        py::arg("jobs") = 1);

    m.def(
        "lehmann_spectrum",
        [](double gamma, double hz, int length, const std::string& state, const std::string& op_pair,
           double half_width, double omega_min, double omega_max, double omega_step) {
            Pauli a, b;
            parse_op_pair(op_pair, a, b);
            LehmannState st;
            if (state == "GROUND")
                st.ground = true;
            else
                st.kind = parse_state_kind(state);
            const auto ed = ed_solve(ModelParams{gamma, hz, length});
            return spectrum_dict(lehmann_spectrum(ed, st, a, b, WindowSpec{WindowFamily::Parzen, half_width},
                                                  OmegaGrid{omega_min, omega_max, omega_step}));
        },
        py::arg("gamma"), py::arg("hz"), py::arg("length"), py::arg("state") = "FMZ", py::arg("op_pair") = "zz",
        py::arg("half_width") = 12.0, py::arg("omega_min") = -8.0, py::arg("omega_max") = 8.0,
        py::arg("omega_step") = 0.02);

    m.def(
        "burg_extend",
        [](const std::vector<cplx>& values, double dt, int order, double horizon, bool stabilize) {
            TimeSeries s;
            for (std::size_t n = 0; n < values.size(); ++n) s.t_grid.push_back(dt * static_cast<double>(n));
            s.values = values;
            LpSpec spec;
            spec.order = order;
            spec.horizon = horizon;
            spec.stabilize = stabilize;
            const auto r = burg_extend(s, spec);
            return to_array(r.series.values, {static_cast<py::ssize_t>(r.series.size())});
        },
        py::arg("values"), py::arg("dt"), py::arg("order") = 0, py::arg("horizon") = 18.0,
        py::arg("stabilize") = true);

    m.def(
        "default_config", [] { return config_to_json(RunConfig{}); },
        "Default run configuration as a JSON string.");
    m.def(
        "compute",
        [](const std::string& json_text) {
            const auto cfg = config_of(json_text);
            PointResult pr;
            {
                py::gil_scoped_release release;
                pr = compute_point(cfg, cfg.model);
            }
            py::dict d;
            d["correlations"] = correlations_dict(pr.correlations);
            d["spectrum"] = spectrum_dict(pr.spectrum);
            return d;
        },
        py::arg("config_json"), "Evolution and spectral pipeline for one point; nothing is written.");

    auto run_dict = [](const RunResult& r) {
        py::dict d;
        d["exit_code"] = r.exit_code;
        d["directory"] = r.directory.string();
        py::list files;
        for (const auto& f : r.files) {
            py::dict e;
            e["name"] = f.name;
            e["sha256"] = f.sha256;
            e["bytes"] = f.bytes;
            files.append(e);
        }
        d["files"] = files;
        d["errors"] = r.errors;
        return d;
    };
    m.def(
        "run",
        [run_dict](const std::string& json_text) {
            const auto cfg = config_of(json_text);
            RunResult r;
            {
                py::gil_scoped_release release;
                r = cfg.scan.enabled ? run_scan(cfg) : run_single(cfg);
            }
            return run_dict(r);
        },
        py::arg("config_json"), "Run a single point or a scan and write the output files.");
    m.def(
        "reference",
        [run_dict](const std::string& json_text) { return run_dict(run_reference(config_of(json_text))); },
        py::arg("config_json"));
}
